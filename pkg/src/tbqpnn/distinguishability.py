"""Timing jitter, Hong-Ou-Mandel visibility and mixed indistinguishable/distinguishable propagation.

Two photons with the Gaussian spectrum of :func:`tbqpnn.nonlinear.gaussian_wavepacket` and a relative
delay ``dt`` overlap with visibility ``V(dt) = |Int dw |psi(w)|^2 exp(i w dt)|^2 = exp(-dt^2 / sigma_p^2)``.
A partially distinguishable pair is treated as the mixture ``V rho_ind + (1 - V) rho_dist``, where the
distinguishable part propagates without two-photon interference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import DensityMatrix, classical_transfer

FWHM_TO_STD = 1.0 / (2.0 * np.sqrt(2.0 * np.log(2.0)))


def hom_visibility(delta_t, sigma_p: float):
    """Squared overlap of two Gaussian wavepackets of temporal width ``sigma_p`` offset by ``delta_t``."""
    if not sigma_p > 0:
        raise ValueError(f"sigma_p must be positive, got {sigma_p}")
    return np.exp(-((np.asarray(delta_t, dtype=float) / sigma_p) ** 2))


@dataclass(frozen=True)
class JitterModel:
    """Gaussian arrival-time jitter between the two photons.

    Attributes:
        sigma_p: photon temporal width
        sigma_j: jitter width, a FWHM unless ``width_is_fwhm`` is false (then a standard deviation)
        n_samples: number of sampled offsets
        seed: key of the counter-based generator
        width_is_fwhm: interpretation of ``sigma_j``
    """

    sigma_p: float
    sigma_j: float
    n_samples: int = 200
    seed: int = 0
    width_is_fwhm: bool = True

    def __post_init__(self):
        if not self.sigma_p > 0:
            raise ValueError(f"sigma_p must be positive, got {self.sigma_p}")
        if self.sigma_j < 0:
            raise ValueError(f"sigma_j must be non-negative, got {self.sigma_j}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be at least 1, got {self.n_samples}")

    @property
    def std(self) -> float:
        return self.sigma_j * FWHM_TO_STD if self.width_is_fwhm else self.sigma_j

    def offsets(self) -> np.ndarray:
        # Philox is counter based: sample i is fixed by (seed, i) alone
        gen = np.random.Generator(np.random.Philox(key=self.seed))
        return self.std * gen.standard_normal(self.n_samples)


def mean_visibility(model: JitterModel) -> float:
    """Visibility averaged over sampled jitter offsets; exactly 1 without jitter."""
    if model.sigma_j == 0:
        return 1.0
    return float(np.mean(hom_visibility(model.offsets(), model.sigma_p)))


def visibility_stderr(model: JitterModel) -> float:
    if model.sigma_j == 0 or model.n_samples < 2:
        return 0.0
    v = hom_visibility(model.offsets(), model.sigma_p)
    return float(np.std(v, ddof=1) / np.sqrt(model.n_samples))


def input_fidelity(V: float) -> float:
    """Overlap of a partially distinguishable input with its ideal counterpart, ``(1 + V) / 2``."""
    if not 0.0 <= V <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {V}")
    return (1.0 + V) / 2.0


@dataclass(frozen=True)
class MixedInput:
    """Visibility-weighted pair of indistinguishable and distinguishable input states on one basis."""

    rho_ind: DensityMatrix
    rho_dist: DensityMatrix
    visibility: float

    def __post_init__(self):
        if self.rho_ind.basis != self.rho_dist.basis:
            raise ValueError("indistinguishable and distinguishable parts live on different bases")
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")

    @classmethod
    def from_amplitudes(cls, basis, amplitudes: np.ndarray, visibility: float) -> "MixedInput":
        """Same occupation amplitudes for both parts; the distinguishable part keeps only populations."""
        rho = np.outer(amplitudes, np.conj(amplitudes))
        return cls(DensityMatrix(basis, rho), DensityMatrix(basis, np.diag(np.diag(rho).real)), visibility)


def distinguishable_populations(U_linear: np.ndarray, populations: np.ndarray, num_photons: int) -> np.ndarray:
    """Output Fock populations when photons traverse ``U_linear`` without interfering."""
    return classical_transfer(U_linear, num_photons) @ np.asarray(populations, dtype=float)


def labeled_pair_populations(U: np.ndarray, pair_amplitudes: np.ndarray, basis) -> np.ndarray:
    """Fock populations for two labelled photons with joint mode amplitude ``C[a, b]`` (photon 1 in a, 2 in b).

    Each photon evolves by ``U`` and detection cannot tell the labels apart, so populations of ordered
    mode pairs are folded onto occupation vectors without any interference between the labellings.
    """
    out = U @ pair_amplitudes @ U.T
    probs = np.abs(out) ** 2
    N = U.shape[0]
    pops = np.zeros(basis.dim)
    for x in range(N):
        for y in range(N):
            occ = [0] * N
            occ[x] += 1
            occ[y] += 1
            pops[basis.index(occ)] += probs[x, y]
    return pops


def propagate_mixed(S_full: np.ndarray, U_linear: np.ndarray, mixed: MixedInput) -> DensityMatrix:
    """Output state ``V S rho_ind S^dag + (1 - V) D(rho_dist)``.

    ``S_full`` is the Fock-space transfer matrix of the full network. The distinguishable photons see only
    the linear part ``U_linear`` (an N x N single-photon matrix, nonlinearities replaced by identity) and
    propagate as a classical mixture, so ``D`` maps input populations to output populations.

    Raises:
        ValueError: on dimension mismatch
    """
    basis = mixed.rho_ind.basis
    D, N = basis.dim, basis.num_modes
    S_full = np.asarray(S_full, dtype=complex)
    U_linear = np.asarray(U_linear, dtype=complex)
    if S_full.shape != (D, D):
        raise ValueError(f"network transfer matrix has shape {S_full.shape}, expected {(D, D)}")
    if U_linear.shape != (N, N):
        raise ValueError(f"linear single-photon matrix has shape {U_linear.shape}, expected {(N, N)}")
    V = mixed.visibility
    rho = V * (S_full @ mixed.rho_ind.matrix @ S_full.conj().T)
    if V < 1:
        pops = distinguishable_populations(U_linear, mixed.rho_dist.populations, basis.num_photons)
        rho = rho + (1 - V) * np.diag(pops)
    return DensityMatrix(basis, 0.5 * (rho + rho.conj().T))
