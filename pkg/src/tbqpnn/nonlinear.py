"""Photon-number-dependent nonlinear elements.

Two elements are modelled: an ideal Kerr phase acting on discrete Fock states, and a two-level emitter
chirally coupled to a waveguide, which scatters frequency-resolved one- and two-photon wavefunctions.

Frequencies are angular and measured relative to the pulse carrier, so the emitter detuning ``Delta``
is the only place the carrier enters. With lifetime ``tau`` and ``gamma = 1 / (2 tau)``:

    t(w) = (w - Delta - i gamma) / (w - Delta + i gamma)
    s(w) = (1 / sqrt(tau)) / (w - Delta + i gamma)

Time-domain amplitudes use the convention ``psi(t) = (2 pi)^(-1/2) Int dw psi(w) exp(-i w t)``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .fock import FockBasis


@dataclass(frozen=True)
class KerrElement:
    """Ideal Kerr medium imparting ``phase`` per photon pair sharing a mode."""

    phase: float = np.pi


def kerr_phases(basis: FockBasis, phase: float) -> np.ndarray:
    """Diagonal of the Kerr transfer matrix: ``exp(i phase sum n_i (n_i - 1) / 2)``."""
    occ = basis.occupations
    return np.exp(1j * phase * (occ * (occ - 1) // 2).sum(axis=1))


def kerr_sigma(basis: FockBasis, phase: float = np.pi) -> np.ndarray:
    return np.diag(kerr_phases(basis, phase))


@dataclass(frozen=True)
class QDParams:
    """Two-level emitter with lifetime ``tau_qd`` detuned by ``detuning`` from the pulse carrier."""

    tau_qd: float
    detuning: float = 0.0

    def __post_init__(self):
        if not self.tau_qd > 0:
            raise ValueError(f"tau_qd must be positive, got {self.tau_qd}")

    @property
    def gamma(self) -> float:
        return 0.5 / self.tau_qd


def t_coeff(omega, params: QDParams):
    """Single-photon transmission coefficient."""
    x = np.asarray(omega, dtype=float) - params.detuning
    g = params.gamma
    # written as (x - i g)^2 / (x^2 + g^2) so that resonance gives exactly -1
    d = x * x + g * g
    return (x * x - g * g) / d - 1j * (2 * x * g / d)


def s_coeff(omega, params: QDParams):
    """Emitter excitation amplitude per incident photon."""
    x = np.asarray(omega, dtype=float) - params.detuning
    return (1.0 / np.sqrt(params.tau_qd)) / (x + 1j * params.gamma)


@dataclass(frozen=True)
class FrequencyGrid:
    """Symmetric grid of ``points`` frequencies ``w_k = center + (k - (M-1)/2) * spacing``.

    Attributes:
        half_span: W, so that ``spacing = 2W/M``
        points: M, a power of two no smaller than 64
        center: grid centre (0 in the carrier frame)
    """

    half_span: float
    points: int = 512
    center: float = 0.0

    def __post_init__(self):
        M = int(self.points)
        if M < 64 or M & (M - 1):
            raise ValueError(f"points must be a power of two >= 64, got {self.points}")
        if not self.half_span > 0:
            raise ValueError(f"half_span must be positive, got {self.half_span}")

    @classmethod
    def default(cls, sigma_p: float, tau_qd: float, points: int = 512) -> "FrequencyGrid":
        return cls(14.0 * max(1.0 / sigma_p, 1.0 / tau_qd), points)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_span / self.points

    @property
    def omega(self) -> np.ndarray:
        return self.center + (np.arange(self.points) - (self.points - 1) / 2) * self.spacing

    @property
    def dt(self) -> float:
        return 2 * np.pi / (self.points * self.spacing)

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.points) - (self.points - 1) / 2) * self.dt


@dataclass(frozen=True)
class TwoPhotonAmplitude:
    """Joint spectral amplitude ``psi(w1, w2)`` sampled on ``grid`` x ``grid``."""

    grid: FrequencyGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        M = self.grid.points
        if v.shape != (M, M):
            raise ValueError(f"expected a {M}x{M} array, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing**2)

    def asymmetry(self) -> float:
        scale = max(np.max(np.abs(self.values)), 1e-300)
        return float(np.max(np.abs(self.values - self.values.T)) / scale)

    def to_bytes(self) -> bytes:
        """Little-endian dump: header (M, spacing, center) then row-major (re, im) float64 pairs."""
        head = struct.pack("<qdd", self.grid.points, self.grid.spacing, self.grid.center)
        return head + np.ascontiguousarray(self.values).astype("<c16").tobytes()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "TwoPhotonAmplitude":
        M, spacing, center = struct.unpack_from("<qdd", blob)
        vals = np.frombuffer(blob, dtype="<c16", offset=24).reshape(M, M)
        return cls(FrequencyGrid(spacing * M / 2, M, center), vals.astype(complex))


def gaussian_wavepacket(grid: FrequencyGrid, omega_p: float = 0.0, sigma_p: float = 1.0) -> np.ndarray:
    """Single-photon Gaussian ``(sigma^2/2pi)^(1/4) exp(-sigma^2 (w - w_p)^2 / 4)`` sampled on the grid.

    Raises:
        ValueError: if the grid under-resolves the pulse or truncates its support
    """
    if not sigma_p > 0:
        raise ValueError(f"sigma_p must be positive, got {sigma_p}")
    if grid.spacing >= 1.0 / (4 * sigma_p):
        raise ValueError(f"grid spacing {grid.spacing:.3g} does not resolve a pulse of width {sigma_p}")
    if grid.half_span <= 6.0 / sigma_p:
        raise ValueError(f"grid half-span {grid.half_span:.3g} truncates a pulse of width {sigma_p}")
    w = grid.omega - omega_p
    return (sigma_p**2 / (2 * np.pi)) ** 0.25 * np.exp(-(sigma_p**2) * w**2 / 4)


def product_amplitude(grid: FrequencyGrid, a: np.ndarray, b: np.ndarray | None = None) -> TwoPhotonAmplitude:
    """Symmetrized product ``(a(w1) b(w2) + b(w1) a(w2)) / 2``, or ``a(w1) a(w2)`` when ``b`` is omitted."""
    if b is None:
        return TwoPhotonAmplitude(grid, np.outer(a, a))
    return TwoPhotonAmplitude(grid, 0.5 * (np.outer(a, b) + np.outer(b, a)))


def norm1(grid: FrequencyGrid, psi: np.ndarray) -> float:
    return float(np.sum(np.abs(psi) ** 2) * grid.spacing)


def scatter_one(grid: FrequencyGrid, psi: np.ndarray, params: QDParams) -> np.ndarray:
    """A lone photon passing the emitter picks up ``t(w)``."""
    return t_coeff(grid.omega, params) * psi


def _pair_sum(psi: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # J[n] = sum_{i+j=n} psi[i,j] * weights[i,j]
    M = psi.shape[0]
    idx = (np.arange(M)[:, None] + np.arange(M)[None, :]).ravel()
    z = (psi * weights).ravel()
    return np.bincount(idx, z.real, 2 * M - 1) + 1j * np.bincount(idx, z.imag, 2 * M - 1)


def bound_term(grid: FrequencyGrid, values: np.ndarray, params: QDParams) -> np.ndarray:
    """Correlated part of two-photon scattering, evaluated exactly along grid lines of fixed total energy."""
    M = grid.points
    s = s_coeff(grid.omega, params)
    J = _pair_sum(values, s[:, None] + s[None, :]) * grid.spacing
    E = np.arange(M)[:, None] + np.arange(M)[None, :]
    return (1j / (2 * np.pi * np.sqrt(params.tau_qd))) * np.outer(s, s) * J[E]


def scatter_two(psi2: TwoPhotonAmplitude, params: QDParams, sym_tol: float = 1e-10) -> TwoPhotonAmplitude:
    """Two photons sharing a mode scatter off the emitter.

    The output is ``t(w1) t(w2) psi(w1, w2)`` plus a bound term proportional to ``s(w1) s(w2)`` times an
    integral of the input along the line of constant ``w1 + w2``.

    Raises:
        ValueError: if ``psi2`` is not exchange symmetric
    """
    if psi2.asymmetry() > sym_tol:
        raise ValueError(f"two-photon amplitude is not exchange symmetric (asymmetry {psi2.asymmetry():.2e})")
    t = t_coeff(psi2.grid.omega, params)
    out = np.outer(t, t) * psi2.values + bound_term(psi2.grid, psi2.values, params)
    return TwoPhotonAmplitude(psi2.grid, 0.5 * (out + out.T))


def separate_scatter(psi2: TwoPhotonAmplitude, params: QDParams) -> TwoPhotonAmplitude:
    """Two photons in different modes, each scattering alone: ``t(w1) t(w2) psi``."""
    t = t_coeff(psi2.grid.omega, params)
    return TwoPhotonAmplitude(psi2.grid, np.outer(t, t) * psi2.values)


def _phase_vectors(M: int):
    c = (M - 1) / 2
    k = np.arange(M)
    pre = np.exp(2j * np.pi * c * k / M)
    post = np.exp(-2j * np.pi * c * c / M) * pre
    return pre, post


def to_time(grid: FrequencyGrid, values: np.ndarray, axes=(-1,)) -> np.ndarray:
    """Parseval-preserving transform from the frequency grid to the conjugate time grid along ``axes``."""
    pre, post = _phase_vectors(grid.points)
    out = np.asarray(values, dtype=complex)
    for ax in axes:
        shape = [1] * out.ndim
        shape[ax] = grid.points
        out = post.reshape(shape) * np.fft.fft(out * pre.reshape(shape), axis=ax)
        out = out * (grid.spacing / np.sqrt(2 * np.pi))
    return out


def to_frequency(grid: FrequencyGrid, values: np.ndarray, axes=(-1,)) -> np.ndarray:
    """Inverse of :func:`to_time`."""
    pre, post = _phase_vectors(grid.points)
    out = np.asarray(values, dtype=complex)
    for ax in axes:
        shape = [1] * out.ndim
        shape[ax] = grid.points
        out = pre.conj().reshape(shape) * np.fft.ifft(out * post.conj().reshape(shape), axis=ax)
        out = out * (grid.points * grid.dt / np.sqrt(2 * np.pi))
    return out


def to_time_domain(psi2: TwoPhotonAmplitude) -> np.ndarray:
    """Two-time amplitude ``psi(t1, t2)`` on ``grid.times`` x ``grid.times``."""
    return to_time(psi2.grid, psi2.values, axes=(0, 1))


def to_frequency_domain(grid: FrequencyGrid, psi_t: np.ndarray) -> TwoPhotonAmplitude:
    return TwoPhotonAmplitude(grid, to_frequency(grid, psi_t, axes=(0, 1)))
