import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from tbqpnn.fock import enumerate_basis, lift_unitary
from tbqpnn.nonlinear import (
    FrequencyGrid,
    QDParams,
    TwoPhotonAmplitude,
    bound_term,
    gaussian_wavepacket,
    kerr_phases,
    kerr_sigma,
    norm1,
    product_amplitude,
    s_coeff,
    scatter_one,
    scatter_two,
    separate_scatter,
    t_coeff,
    to_frequency,
    to_frequency_domain,
    to_time,
    to_time_domain,
)

taus = st.floats(min_value=0.1, max_value=10)
detunings = st.floats(min_value=-20, max_value=20)


@pytest.fixture(scope="module")
def grid():
    return FrequencyGrid.default(1.0, 1.0, 256)


def pair_state(grid, sigma=1.0):
    return product_amplitude(grid, gaussian_wavepacket(grid, 0.0, sigma))


class TestKerr:
    def test_no_double_occupancy(self):
        b = enumerate_basis(4, 2)
        assert kerr_phases(b, np.pi)[b.index((1, 1, 0, 0))] == 1

    def test_double_occupancy_flips_sign(self):
        b = enumerate_basis(4, 2)
        assert kerr_phases(b, np.pi)[b.index((2, 0, 0, 0))] == pytest.approx(-1, abs=1e-15)

    def test_zero_phase_identity(self):
        b = enumerate_basis(3, 2)
        np.testing.assert_array_equal(kerr_sigma(b, 0.0), np.eye(len(b)))

    @pytest.mark.parametrize("perm", list(itertools.permutations(range(3))))
    def test_commutes_with_permutations(self, perm):
        b = enumerate_basis(3, 2)
        P = lift_unitary(np.eye(3)[list(perm)], 2)
        K = kerr_sigma(b, 0.7)
        np.testing.assert_allclose(P @ K, K @ P, atol=1e-14)


class TestCoefficients:
    @given(st.floats(min_value=-1e3, max_value=1e3), taus, detunings)
    def test_t_unimodular(self, w, tau, d):
        assert abs(t_coeff(w, QDParams(tau, d))) == pytest.approx(1, abs=1e-12)

    @given(taus, detunings)
    def test_resonance(self, tau, d):
        assert t_coeff(d, QDParams(tau, d)) == -1

    def test_half_width(self):
        p = QDParams(2.0)
        assert t_coeff(1 / 4, p) == pytest.approx(-1j, abs=1e-15)

    @given(taus)
    def test_s_at_resonance(self, tau):
        assert s_coeff(0.0, QDParams(tau)) == pytest.approx(-2j * np.sqrt(tau), rel=1e-12)

    def test_s_lorentzian(self):
        p = QDParams(0.5)
        w = np.linspace(-5, 5, 11)
        np.testing.assert_allclose(np.abs(s_coeff(w, p)) ** 2, (1 / 0.5) / (w**2 + 1), rtol=1e-12)
        assert abs(s_coeff(1e9, p)) < 1e-8

    def test_nonpositive_lifetime(self):
        with pytest.raises(ValueError):
            QDParams(0.0)


class TestGrid:
    def test_symmetric(self, grid):
        np.testing.assert_allclose(grid.omega, -grid.omega[::-1], atol=1e-13)
        assert grid.spacing == pytest.approx(2 * grid.half_span / grid.points)

    @pytest.mark.parametrize("M", [32, 100])
    def test_rejects_bad_size(self, M):
        with pytest.raises(ValueError):
            FrequencyGrid(10.0, M)


class TestWavepacket:
    def test_peak(self, grid):
        psi = gaussian_wavepacket(grid, 0.0, 1.0)
        w = grid.omega
        exact = (1 / (2 * np.pi)) ** 0.25 * np.exp(-w**2 / 4)
        np.testing.assert_allclose(psi, exact, atol=1e-15)

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
    def test_normalized(self, sigma):
        g = FrequencyGrid.default(sigma, 1.0, 512)
        assert norm1(g, gaussian_wavepacket(g, 0.0, sigma)) == pytest.approx(1, abs=1e-6)

    def test_underresolved(self):
        with pytest.raises(ValueError, match="resolve"):
            gaussian_wavepacket(FrequencyGrid(40.0, 64), 0.0, 1.0)

    def test_truncated(self):
        with pytest.raises(ValueError, match="truncates"):
            gaussian_wavepacket(FrequencyGrid(5.0, 512), 0.0, 1.0)

    def test_temporal_envelope(self, grid):
        sigma = 1.0
        psi_t = to_time(grid, gaussian_wavepacket(grid, 0.0, sigma))
        t = grid.times
        exact = (2 / (np.pi * sigma**2)) ** 0.25 * np.exp(-(t**2) / sigma**2)
        np.testing.assert_allclose(psi_t, exact, atol=1e-10)


class TestSingleScattering:
    @given(taus, detunings)
    @settings(max_examples=25)
    def test_norm(self, tau, d):
        g = FrequencyGrid.default(1.0, 1.0, 256)
        psi = gaussian_wavepacket(g) * np.exp(0.3j * g.omega)
        assert norm1(g, scatter_one(g, psi, QDParams(tau, d))) == pytest.approx(norm1(g, psi), abs=1e-10)

    def test_far_detuned(self, grid):
        psi = gaussian_wavepacket(grid)
        np.testing.assert_allclose(scatter_one(grid, psi, QDParams(1.0, 1e9)), psi, atol=1e-8)

    def test_delay(self, grid):
        psi = gaussian_wavepacket(grid)
        t = grid.times
        before = np.sum(t * np.abs(to_time(grid, psi)) ** 2)
        after_t = to_time(grid, scatter_one(grid, psi, QDParams(1.0, 0.0)))
        assert np.sum(t * np.abs(after_t) ** 2) > before + 0.5
        assert t[np.argmax(np.abs(after_t))] > t[np.argmax(np.abs(to_time(grid, psi)))]


class TestTwoPhotonScattering:
    def test_norm_at_512(self):
        g = FrequencyGrid.default(1.0, 1.0, 512)
        out = scatter_two(pair_state(g), QDParams(1.0))
        assert abs(out.norm - 1) < 1e-4

    def test_norm_converges(self):
        errs = []
        for M in (128, 256, 512):
            g = FrequencyGrid(14.0 * M / 128, M)
            errs.append(abs(scatter_two(pair_state(g), QDParams(1.0)).norm - 1))
        assert errs[1] <= errs[0] / 2 and errs[2] <= errs[1] / 2

    @given(st.floats(min_value=0.3, max_value=3), st.floats(min_value=-3, max_value=3))
    @settings(max_examples=10, deadline=None)
    def test_symmetric(self, tau, d):
        g = FrequencyGrid.default(1.0, 1.0, 128)
        out = scatter_two(pair_state(g), QDParams(tau, d))
        assert out.asymmetry() < 1e-10

    def test_rejects_asymmetric(self, grid):
        a = gaussian_wavepacket(grid)
        b = a * np.exp(1j * grid.omega)
        with pytest.raises(ValueError, match="symmetric"):
            scatter_two(TwoPhotonAmplitude(grid, np.outer(a, b)), QDParams(1.0))

    def test_far_detuned_bound_vanishes(self, grid):
        psi = pair_state(grid)
        p = QDParams(1.0, 1e6)
        assert np.max(np.abs(bound_term(grid, psi.values, p))) < 1e-9
        np.testing.assert_allclose(scatter_two(psi, p).values, separate_scatter(psi, p).values, atol=1e-9)

    def test_bound_term_against_direct_sum(self):
        g = FrequencyGrid(14.0, 64)
        rng = np.random.default_rng(0)
        v = rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64))
        v = v + v.T
        p = QDParams(0.7, 0.4)
        s = s_coeff(g.omega, p)
        direct = np.zeros((64, 64), dtype=complex)
        for i, j in itertools.product(range(64), repeat=2):
            acc = 0
            for a in range(64):
                b = i + j - a
                if 0 <= b < 64:
                    acc += v[a, b] * (s[a] + s[b])
            direct[i, j] = 1j / (2 * np.pi * np.sqrt(0.7)) * s[i] * s[j] * acc * g.spacing
        np.testing.assert_allclose(bound_term(g, v, p), direct, atol=1e-12)

    def test_bound_term_against_quadrature(self):
        # continuous integral at one output point, Gaussian input
        g = FrequencyGrid.default(1.0, 1.0, 512)
        p = QDParams(1.0, 0.2)
        psi = pair_state(g)
        i, j = 260, 240
        w1, w2 = g.omega[i], g.omega[j]
        E = w1 + w2
        gauss = lambda w: (1 / (2 * np.pi)) ** 0.25 * np.exp(-(w**2) / 4)  # noqa: E731
        f = lambda q, part: part(gauss(E - q) * gauss(q) * (s_coeff(E - q, p) + s_coeff(q, p)))  # noqa: E731
        re = integrate.quad(f, -60, 60, args=(np.real,), limit=400)[0]
        im = integrate.quad(f, -60, 60, args=(np.imag,), limit=400)[0]
        exact = 1j / (2 * np.pi) * s_coeff(w1, p) * s_coeff(w2, p) * (re + 1j * im)
        assert bound_term(g, psi.values, p)[i, j] == pytest.approx(exact, abs=1e-6)

    def test_real_and_negative_at_centre(self):
        g = FrequencyGrid.default(1.0, 1.0, 512)
        psi = pair_state(g)
        p = QDParams(1.0, 0.0)
        for out in (scatter_two(psi, p), separate_scatter(psi, p)):
            tt = to_time_domain(out)
            assert np.max(np.abs(tt.imag)) < 1e-6 * np.max(np.abs(tt))
        tt = to_time_domain(scatter_two(psi, p)).real
        c = g.points // 2
        assert np.all(tt[c - 1 : c + 1, c - 1 : c + 1] < 0)


class TestTransforms:
    def test_parseval(self, grid, rng):
        v = rng.normal(size=(grid.points, grid.points)) + 1j * rng.normal(size=(grid.points, grid.points))
        psi = TwoPhotonAmplitude(grid, v)
        assert np.sum(np.abs(to_time_domain(psi)) ** 2) * grid.dt**2 == pytest.approx(psi.norm, rel=1e-10)

    def test_round_trip(self, grid, rng):
        v = rng.normal(size=(grid.points, grid.points)) + 1j * rng.normal(size=(grid.points, grid.points))
        back = to_frequency_domain(grid, to_time_domain(TwoPhotonAmplitude(grid, v)))
        np.testing.assert_allclose(back.values, v, atol=1e-10)
        np.testing.assert_allclose(to_frequency(grid, to_time(grid, v[0])), v[0], atol=1e-10)

    def test_product_gaussian(self, grid):
        tt = to_time_domain(pair_state(grid))
        t = grid.times
        g1 = (2 / np.pi) ** 0.25 * np.exp(-(t**2))
        np.testing.assert_allclose(tt, np.outer(g1, g1), atol=1e-10)

    def test_binary_dump_round_trip(self, grid):
        psi = scatter_two(pair_state(grid), QDParams(1.0, 0.3))
        back = TwoPhotonAmplitude.from_bytes(psi.to_bytes())
        assert back.grid.points == grid.points and back.grid.spacing == grid.spacing
        np.testing.assert_array_equal(back.values, psi.values)
