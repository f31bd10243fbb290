"""Target operations: dual-rail CNOT gates and Bell-state analyzers.

A task lists K two-photon inputs, each with the set of output occupations counted as the correct
result, plus the computational basis (every output counted as logical). Inputs are stored twice: as
Fock amplitudes for indistinguishable photons, and as a labelled two-photon mode amplitude ``C[a, b]``
(photon 1 in mode a, photon 2 in mode b) for the distinguishable branch.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .fock import ComputationalBasisMap, FockBasis, enumerate_basis


def occupation(num_modes: int, *modes: int) -> tuple[int, ...]:
    occ = [0] * num_modes
    for m in modes:
        occ[m] += 1
    return tuple(occ)


@dataclass(frozen=True)
class OutcomeAssignment:
    """Single-occupancy detection outcomes ``(m_i, m_j)`` assigned to each Bell state."""

    num_modes: int
    seed: int
    outcomes: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        flat = [o for group in self.outcomes for o in group]
        if len(set(flat)) != len(flat):
            raise ValueError("outcome sets overlap")
        if len({len(g) for g in self.outcomes}) > 1:
            raise ValueError("outcome sets differ in size")
        if any(i == j for i, j in flat):
            raise ValueError("outcomes must place the two photons in distinct modes")

    @property
    def unassigned(self) -> list[tuple[int, int]]:
        used = {o for g in self.outcomes for o in g}
        return [o for o in itertools.combinations(range(self.num_modes), 2) if o not in used]

    def to_dict(self) -> dict:
        return {"N": self.num_modes, "seed": self.seed, "outcomes": [[list(o) for o in g] for g in self.outcomes]}

    @classmethod
    def from_dict(cls, d: dict) -> "OutcomeAssignment":
        return cls(int(d["N"]), int(d["seed"]), tuple(tuple(tuple(o) for o in g) for g in d["outcomes"]))


def assign_bsa_outcomes(num_modes: int, seed: int) -> OutcomeAssignment:
    """Randomly give each of the four Bell states ``floor(C(N, 2) / 4)`` distinct two-mode outcomes.

    Raises:
        ValueError: if N < 4
    """
    if num_modes < 4:
        raise ValueError(f"a Bell-state analyzer needs at least 4 modes, got {num_modes}")
    pairs = list(itertools.combinations(range(num_modes), 2))
    per = math.comb(num_modes, 2) // 4
    order = np.random.default_rng(seed).permutation(len(pairs))
    groups = tuple(tuple(sorted(pairs[i] for i in order[k * per : (k + 1) * per])) for k in range(4))
    return OutcomeAssignment(num_modes, int(seed), groups)


@dataclass(frozen=True)
class TaskDefinition:
    """Input states, correct-outcome sets and computational basis of a two-photon task.

    Attributes:
        kind: "CNOT" or "BSA"
        basis: two-photon Fock basis
        labels: name of each input
        inputs: Fock amplitudes, shape (K, D)
        pair_inputs: labelled mode amplitudes, shape (K, N, N)
        targets: per input, basis indices of the correct outcomes
        target_vectors: per input, pure target state (CNOT only)
        cb_map: logical outputs
        assignment: BSA outcome assignment
    """

    kind: str
    basis: FockBasis
    labels: tuple[str, ...]
    inputs: np.ndarray = field(repr=False)
    pair_inputs: np.ndarray = field(repr=False)
    targets: tuple[tuple[int, ...], ...]
    cb_map: ComputationalBasisMap
    target_vectors: np.ndarray | None = field(default=None, repr=False)
    assignment: OutcomeAssignment | None = None

    @property
    def num_inputs(self) -> int:
        return len(self.labels)

    @property
    def num_modes(self) -> int:
        return self.basis.num_modes

    @property
    def cb_indices(self) -> np.ndarray:
        return self.cb_map.indices(self.basis)

    @property
    def target_mask(self) -> np.ndarray:
        """Indicator of correct outcomes, shape (D, K)."""
        mask = np.zeros((self.basis.dim, self.num_inputs))
        for k, idx in enumerate(self.targets):
            mask[list(idx), k] = 1.0
        return mask

    @property
    def cb_mask(self) -> np.ndarray:
        mask = np.zeros(self.basis.dim)
        mask[self.cb_indices] = 1.0
        return mask

    def pair_weights(self, mask: np.ndarray) -> np.ndarray:
        """Map a Fock-basis indicator onto ordered mode pairs (x, y); shape mask.shape[1:] + (N, N)."""
        N = self.num_modes
        idx = np.array([[self.basis.index(occupation(N, x, y)) for y in range(N)] for x in range(N)])
        return np.moveaxis(np.asarray(mask)[idx], (0, 1), (-2, -1))


def _dual_rail(num_modes: int, rails, bits) -> tuple[int, ...]:
    return occupation(num_modes, *(rail[b] for rail, b in zip(rails, bits)))


def _cnot_task(num_modes: int, control: tuple[int, int], target: tuple[int, int]) -> TaskDefinition:
    basis = enumerate_basis(num_modes, 2)
    labels, inputs, pairs, targets, tvecs, cb = [], [], [], [], [], {}
    for c, t in itertools.product((0, 1), repeat=2):
        occ_in = _dual_rail(num_modes, (control, target), (c, t))
        occ_out = _dual_rail(num_modes, (control, target), (c, t ^ c))
        labels.append(f"{c}{t}")
        inputs.append(basis.ket(occ_in))
        C = np.zeros((num_modes, num_modes), dtype=complex)
        C[control[c], target[t]] = 1.0
        pairs.append(C)
        targets.append((basis.index(occ_out),))
        tvecs.append(basis.ket(occ_out))
        cb[f"{c}{t}"] = [occ_in]
    return TaskDefinition(
        "CNOT",
        basis,
        tuple(labels),
        np.array(inputs),
        np.array(pairs),
        tuple(targets),
        ComputationalBasisMap.from_dict(cb),
        np.array(tvecs),
    )


def qpnn_cnot_task() -> TaskDefinition:
    """Four-mode dual-rail CNOT: control on modes (0, 1), target on modes (2, 3)."""
    return _cnot_task(4, (0, 1), (2, 3))


def linear_cnot_task() -> TaskDefinition:
    """Six-mode post-selected CNOT with vacuum ancillas on modes 0 and 5; control (1, 2), target (3, 4)."""
    return _cnot_task(6, (1, 2), (3, 4))


def _embed(N: int, i: int, j: int, block: np.ndarray) -> np.ndarray:
    U = np.eye(N, dtype=complex)
    U[np.ix_([i, j], [i, j])] = block
    return U


def _partial_reflector(r2: float, sign: int) -> np.ndarray:
    r, t = np.sqrt(r2), np.sqrt(1 - r2)
    return np.array([[sign * r, t], [t, -sign * r]])


def linear_cnot_unitary() -> np.ndarray:
    """Six-mode unitary of the 1/3-reflectivity post-selected CNOT.

    Target rails are interfered on balanced beamsplitters before and after three 1/3 reflectors (the
    control-rail and target-rail crossing plus two vacuum-ancilla reflectors), so that coincidences in the
    dual-rail modes occur with probability 1/9 and follow the CNOT truth table.
    """
    N = 6
    H = _embed(N, 3, 4, np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    middle = (
        _embed(N, 0, 1, _partial_reflector(1 / 3, 1))
        @ _embed(N, 2, 3, _partial_reflector(1 / 3, 1))
        @ _embed(N, 4, 5, _partial_reflector(1 / 3, -1))
    )
    return H @ middle @ H


BELL_LABELS = ("Phi+", "Phi-", "Psi+", "Psi-")


def bsa_task(num_modes: int, assignment: OutcomeAssignment) -> TaskDefinition:
    """Bell-state analysis with qubit 1 on rails (0, 1), qubit 2 on rails (2, 3) and ancillas after.

    Raises:
        ValueError: if the assignment was drawn for a different mode count
    """
    if assignment.num_modes != num_modes:
        raise ValueError("outcome assignment does not match the mode count")
    basis = enumerate_basis(num_modes, 2)
    terms = {"Phi": ((0, 2), (1, 3)), "Psi": ((0, 3), (1, 2))}
    inputs, pairs = [], []
    for label in BELL_LABELS:
        (a, b), (c, d) = terms[label[:3]]
        sign = 1 if label[-1] == "+" else -1
        vec = (basis.ket(occupation(num_modes, a, b)) + sign * basis.ket(occupation(num_modes, c, d))) / np.sqrt(2)
        C = np.zeros((num_modes, num_modes), dtype=complex)
        C[a, b], C[c, d] = 1 / np.sqrt(2), sign / np.sqrt(2)
        inputs.append(vec)
        pairs.append(C)
    targets = tuple(tuple(basis.index(occupation(num_modes, *o)) for o in g) for g in assignment.outcomes)
    cb = ComputationalBasisMap.from_dict(
        {lab: [occupation(num_modes, *o) for o in g] for lab, g in zip(BELL_LABELS, assignment.outcomes)}
    )
    return TaskDefinition("BSA", basis, BELL_LABELS, np.array(inputs), np.array(pairs), targets, cb, None, assignment)


def make_task(kind: str, num_modes: int = 4, seed: int = 0) -> TaskDefinition:
    """Build a task by name: "CNOT" (4 modes), "LINEAR_CNOT" (6 modes) or "BSA" (N >= 4 modes)."""
    key = kind.upper()
    if key == "CNOT":
        if num_modes != 4:
            raise ValueError("the QPNN CNOT task uses 4 modes")
        return qpnn_cnot_task()
    if key == "LINEAR_CNOT":
        return linear_cnot_task()
    if key == "BSA":
        return bsa_task(num_modes, assign_bsa_outcomes(num_modes, seed))
    raise ValueError(f"unknown task {kind!r}")
