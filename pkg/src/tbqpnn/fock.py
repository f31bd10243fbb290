"""Fock-basis bookkeeping, multi-photon lifts of single-photon unitaries, and state metrics.

States of ``n`` photons in ``N`` modes are resolved in the second-quantized Fock basis, ordered
lexicographically descending on the occupation vectors, e.g. for two photons in three modes:
``(2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2)``.

The lift of an ``N x N`` single-photon unitary ``U`` onto this basis has elements

    Phi(U)[m, n] = per(U[m, n]) / sqrt(prod(m_i!) prod(n_j!)),

where ``U[m, n]`` repeats row ``i`` of ``U`` ``m_i`` times and column ``j`` ``n_j`` times.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

UNITARY_TOL = 1e-10
PSD_TOL = 1e-10


class NotUnitaryError(ValueError):
    """Raised when a matrix expected to be unitary is not, carrying the residual norm."""

    def __init__(self, residual: float, tol: float = UNITARY_TOL):
        self.residual = residual
        super().__init__(f"matrix is not unitary: ||U^dag U - I||_F = {residual:.3e} > {tol:.1e}")


def unitarity_residual(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])))


def check_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {U.shape}")
    res = unitarity_residual(U)
    if res > tol:
        raise NotUnitaryError(res, tol)
    return U


def _compositions(total: int, parts: int):
    # lexicographically descending
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


@dataclass(frozen=True)
class FockBasis:
    """All occupation vectors of ``num_photons`` photons over ``num_modes`` modes.

    Attributes:
        num_modes: number of optical modes, N
        num_photons: number of photons, n
        states: occupation vectors in lexicographically descending order
    """

    num_modes: int
    num_photons: int
    states: tuple[tuple[int, ...], ...] = field(repr=False)

    def __len__(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return len(self.states)

    def index(self, state) -> int:
        return _state_index(self.num_modes, self.num_photons)[tuple(int(x) for x in state)]

    def indices(self, states) -> np.ndarray:
        return np.array([self.index(s) for s in states], dtype=int)

    @property
    def occupations(self) -> np.ndarray:
        return np.array(self.states, dtype=int).reshape(len(self.states), self.num_modes)

    @property
    def multi_occupied(self) -> np.ndarray:
        """Boolean mask of basis states with at least one mode holding more than one photon."""
        return (self.occupations > 1).any(axis=1)

    def ket(self, state) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(state)] = 1.0
        return v


@lru_cache(maxsize=None)
def _basis_states(num_modes: int, num_photons: int) -> tuple[tuple[int, ...], ...]:
    return tuple(_compositions(num_photons, num_modes))


@lru_cache(maxsize=None)
def _state_index(num_modes: int, num_photons: int) -> dict:
    return {s: i for i, s in enumerate(_basis_states(num_modes, num_photons))}


def enumerate_basis(num_modes: int, num_photons: int) -> FockBasis:
    """Enumerate the Fock basis for ``num_photons`` photons in ``num_modes`` modes."""
    if int(num_modes) < 1:
        raise ValueError(f"num_modes must be positive, got {num_modes}")
    if int(num_photons) < 0:
        raise ValueError(f"num_photons must be non-negative, got {num_photons}")
    return FockBasis(int(num_modes), int(num_photons), _basis_states(int(num_modes), int(num_photons)))


def permanent(A: np.ndarray) -> complex:
    """Permanent of a square matrix using Glynn's formula with Gray-code ordering.

    Runs in O(2^(n-1) n). The empty matrix has permanent 1.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return complex(A[0, 0])

    row_comb = A.sum(axis=0)  # all deltas +1
    total = np.prod(row_comb)
    sign = 1
    delta = np.ones(n)
    gray_prev = 0
    for k in range(1, 2 ** (n - 1)):
        gray = k ^ (k >> 1)
        flipped = (gray ^ gray_prev).bit_length() - 1
        gray_prev = gray
        # rows 1..n-1 are flipped; row 0 stays +1
        row = flipped + 1
        delta[row] = -delta[row]
        row_comb = row_comb + 2 * delta[row] * A[row]
        sign = -sign
        total = total + sign * np.prod(row_comb)
    return complex(total / 2 ** (n - 1))


@lru_cache(maxsize=None)
def _lift_indices(num_modes: int, num_photons: int):
    states = _basis_states(num_modes, num_photons)
    # each state as a sorted list of occupied modes, with repetition
    occ = np.array([[m for m, c in enumerate(s) for _ in range(c)] for s in states], dtype=int)
    occ = occ.reshape(len(states), num_photons)
    norms = np.array([math.prod(math.factorial(c) for c in s) for s in states], dtype=float)
    perms = np.array(list(itertools.permutations(range(num_photons))), dtype=int)
    return occ, norms, perms


def _permanent_table(M: np.ndarray, num_modes: int, num_photons: int) -> np.ndarray:
    """per(M[rows_i, cols_j]) for every pair of basis states, batched over leading axes of M."""
    occ, _, perms = _lift_indices(num_modes, num_photons)
    D = occ.shape[0]
    out = np.zeros(M.shape[:-2] + (D, D), dtype=M.dtype)
    if num_photons == 0:
        out[...] = 1.0
        return out
    for sigma in perms:
        term = np.ones(M.shape[:-2] + (D, D), dtype=M.dtype)
        for k in range(num_photons):
            term = term * M[..., occ[:, k][:, None], occ[:, sigma[k]][None, :]]
        out = out + term
    return out


def lift(U: np.ndarray, num_photons: int) -> np.ndarray:
    """Multi-photon lift without validation; ``U`` may carry leading batch axes."""
    U = np.asarray(U, dtype=complex)
    N = U.shape[-1]
    _, norms, _ = _lift_indices(N, num_photons)
    return _permanent_table(U, N, num_photons) / np.sqrt(np.outer(norms, norms))


def lift_unitary(U: np.ndarray, num_photons: int) -> np.ndarray:
    """Lift a single-photon unitary onto the ``num_photons`` Fock basis.

    Args:
        U: N x N unitary (to 1e-10)
        num_photons: photon number n

    Returns:
        dim x dim transfer matrix over ``enumerate_basis(N, n)``

    Raises:
        NotUnitaryError: if ``U`` is not unitary; the residual norm is reported
    """
    return lift(check_unitary(U), num_photons)


def classical_transfer(U: np.ndarray, num_photons: int) -> np.ndarray:
    """Transition probabilities for fully distinguishable photons.

    ``P[m, n] = per(|U|^2[m, n]) / prod(m_i!)`` is the probability that occupation ``n`` is detected as
    occupation ``m`` when no two photons interfere.
    """
    U = np.asarray(U, dtype=complex)
    N = U.shape[-1]
    _, norms, _ = _lift_indices(N, num_photons)
    return (_permanent_table(np.abs(U) ** 2, N, num_photons) / norms[:, None]).real


@dataclass(frozen=True)
class QuantumState:
    """Pure (possibly sub-normalized) state resolved in a Fock basis."""

    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        if np.vdot(amps, amps).real > 1 + 1e-12:
            raise ValueError("state norm exceeds 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def density_matrix(self) -> "DensityMatrix":
        return DensityMatrix(self.basis, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semi-definite matrix over a Fock basis with trace at most one."""

    basis: FockBasis
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        D = self.basis.dim
        if rho.shape != (D, D):
            raise ValueError(f"expected a {D}x{D} matrix, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        if np.trace(rho).real > 1 + 1e-12:
            raise ValueError(f"density matrix trace {np.trace(rho).real} exceeds 1")
        if np.linalg.eigvalsh(rho).min(initial=0.0) < -PSD_TOL:
            raise ValueError("density matrix has negative eigenvalues")
        rho.setflags(write=False)
        object.__setattr__(self, "matrix", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def populations(self) -> np.ndarray:
        return np.diag(self.matrix).real.copy()


@dataclass(frozen=True)
class ComputationalBasisMap:
    """Logical labels, each owning a set of Fock occupation vectors (a dual-rail state or BSA outcome set)."""

    logical_states: tuple[tuple[str, frozenset], ...]

    def __post_init__(self):
        seen = set()
        for _, states in self.logical_states:
            overlap = seen & set(states)
            if overlap:
                raise ValueError(f"occupation vectors assigned to more than one label: {sorted(overlap)}")
            seen |= set(states)

    @classmethod
    def from_dict(cls, mapping: dict) -> "ComputationalBasisMap":
        return cls(tuple((str(k), frozenset(tuple(s) for s in v)) for k, v in mapping.items()))

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.logical_states]

    def states(self) -> list[tuple[int, ...]]:
        return [s for _, group in self.logical_states for s in sorted(group, reverse=True)]

    def indices(self, basis: FockBasis, label: str | None = None) -> np.ndarray:
        groups = self.logical_states if label is None else [g for g in self.logical_states if g[0] == label]
        states = [s for _, group in groups for s in sorted(group, reverse=True)]
        for s in states:
            if len(s) != basis.num_modes or sum(s) != basis.num_photons:
                raise ValueError(f"occupation {s} does not belong to the basis")
        return basis.indices(states)


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, QuantumState):
        return np.outer(rho.amplitudes, rho.amplitudes.conj())
    return np.asarray(rho, dtype=complex)


def psd_sqrt(rho: np.ndarray) -> np.ndarray:
    """Matrix square root of a Hermitian PSD matrix; eigenvalues in [-1e-10, 0) are clipped to zero."""
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    if w.min(initial=0.0) < -PSD_TOL:
        raise ValueError(f"matrix is not positive semi-definite (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def uhlmann_fidelity(target, actual) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(t) a sqrt(t)))^2`` between two (possibly sub-normalized) states.

    For a pure target this reduces to ``<psi|actual|psi>``.
    """
    t = _as_matrix(target)
    a = _as_matrix(actual)
    if t.shape != a.shape:
        raise ValueError(f"dimension mismatch: {t.shape} vs {a.shape}")
    w, v = np.linalg.eigh((t + t.conj().T) / 2)
    if np.sum(w > 1e-12) <= 1:
        psi = v[:, -1] * np.sqrt(max(w[-1], 0.0))
        return float(np.vdot(psi, a @ psi).real)
    st = psd_sqrt(t)
    inner = st @ a @ st
    return float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0.0, None))) ** 2)


def efficiency(rho_out, cb: ComputationalBasisMap, basis: FockBasis | None = None) -> float:
    """Total population of ``rho_out`` on the computational-basis states of ``cb``."""
    if basis is None:
        if not isinstance(rho_out, DensityMatrix):
            raise TypeError("a basis is required when rho_out is a bare array")
        basis = rho_out.basis
    rho = _as_matrix(rho_out)
    idx = cb.indices(basis)
    return float(np.sum(np.diag(rho)[idx].real))
