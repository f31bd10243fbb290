"""Two-time detection distributions of emitter networks and threshold time filters.

Each logical outcome is a pair of distinct output modes. For a given input, the two-photon amplitude
attached to that outcome is transformed to detection times ``(t1, t2)``; its squared modulus integrates to
the outcome's probability. A filter keeps coincidences whose detection times fall where the distribution
produced by the outcome's own Bell input exceeds a fraction ``f`` of its peak.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field

import numpy as np

from .engine import NetworkSpec, WavefunctionFamily, family_coefficients
from .fock import lift
from .nonlinear import FrequencyGrid, to_time
from .tasks import TaskDefinition, occupation


@dataclass(frozen=True)
class TwoTimeDistribution:
    """Detection-time density ``|psi(t1, t2)|^2`` of one outcome for one input.

    Attributes:
        outcome: output mode pair
        times: conjugate time grid (shared by both axes)
        values: non-negative M x M density; ``values.sum() * dt**2`` is the outcome probability
    """

    outcome: tuple[int, int]
    times: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def probability(self) -> float:
        return float(self.values.sum() * self.dt**2)

    def to_bytes(self) -> bytes:
        """Little-endian dump in the amplitude layout: header (M, dt, 0.0), then complex128 values."""
        head = struct.pack("<qdd", len(self.times), self.dt, 0.0)
        return head + np.ascontiguousarray(self.values).astype("<c16").tobytes()


@dataclass(frozen=True)
class FilterMask:
    """Detection-time window of one outcome at threshold fraction ``f``."""

    outcome: tuple[int, int]
    fraction: float
    region: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class GatedOutputs:
    """Two-time densities of every assigned outcome for every task input.

    Attributes:
        task: the Bell-state analysis task (with its outcome assignment)
        times: conjugate time grid
        outcomes: assigned outcomes, grouped by Bell state in assignment order
        owner: index of the Bell input each outcome signals
        density: array (K, n_outcomes, M, M) of detection-time densities
        populations: (K, D) Fock populations, for bookkeeping
    """

    task: TaskDefinition
    times: np.ndarray = field(repr=False)
    outcomes: tuple[tuple[int, int], ...]
    owner: np.ndarray
    density: np.ndarray = field(repr=False)
    populations: np.ndarray = field(repr=False)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def distributions(self, k: int) -> list[TwoTimeDistribution]:
        return [TwoTimeDistribution(o, self.times, self.density[k, i]) for i, o in enumerate(self.outcomes)]


def two_time_distributions(state) -> list[TwoTimeDistribution]:
    """Detection-time densities of every Fock component of an :class:`~tbqpnn.engine.ExtendedState`.

    Doubly occupied components are reported with ``outcome = (m, m)``.
    """
    grid = state.grid
    amp_t = to_time(grid, state.attachments, axes=(1, 2))
    out = []
    for i, occ in enumerate(state.basis.states):
        modes = tuple(m for m, c in enumerate(occ) for _ in range(c))
        out.append(TwoTimeDistribution(modes, grid.times, np.abs(amp_t[i]) ** 2))
    return out


def gated_outputs(spec: NetworkSpec, task: TaskDefinition, grid: FrequencyGrid, sigma_p: float = 1.0) -> GatedOutputs:
    """Time-domain outputs of an emitter BSA network on its four Bell inputs.

    Raises:
        ValueError: if the network has no emitters or the task has no outcome assignment
    """
    if spec.nonlinearity.kind != "QD":
        raise ValueError("time gating needs an emitter (QD) network")
    if task.assignment is None:
        raise ValueError("time gating needs a task with an outcome assignment")
    nl = spec.nonlinearity
    fam = WavefunctionFamily(grid, sigma_p, nl.tau_qd, nl.detunings)
    lifts = [lift(U, 2) for U in spec.unitaries()]
    coef = family_coefficients(lifts, task.basis.multi_occupied, task.inputs)  # (D, K, J)
    members_t = to_time(grid, fam.members, axes=(1, 2))  # (J, M, M)
    outcomes, owner, idx = [], [], []
    for k, group in enumerate(task.assignment.outcomes):
        for o in group:
            outcomes.append(tuple(o))
            owner.append(k)
            idx.append(task.basis.index(occupation(task.num_modes, *o)))
    amp = np.einsum("nkj,jab->knab", coef[idx], members_t)
    density = np.abs(amp) ** 2
    pops = np.einsum("okj,ij,oki->ko", coef, fam.gram, coef.conj()).real
    return GatedOutputs(task, grid.times, tuple(outcomes), np.array(owner), density, pops)


def build_masks(outputs: GatedOutputs, fraction: float) -> list[FilterMask]:
    """Per-outcome masks ``P_owner(t1, t2) >= f * max P_owner``; ``f = 0`` keeps every coincidence.

    Raises:
        ValueError: if ``fraction`` is outside [0, 1)
    """
    if not 0.0 <= fraction < 1.0:
        raise ValueError(f"filter fraction must lie in [0, 1), got {fraction}")
    masks = []
    for i, o in enumerate(outputs.outcomes):
        P = outputs.density[outputs.owner[i], i]
        region = np.ones(P.shape, dtype=bool) if fraction == 0 else P >= fraction * P.max()
        masks.append(FilterMask(o, float(fraction), region))
    return masks


@dataclass(frozen=True)
class FilteredMetrics:
    """Filtered fidelity and efficiency, ensemble-averaged and per input.

    Attributes:
        fraction: threshold fraction of the masks
        F: total correct in-mask probability over total assigned in-mask probability
        eta: mean over inputs of the in-mask assigned probability
        F_per_input, eta_per_input: the same ratios for each input
        correct, logical: per-input in-mask correct and assigned probability
    """

    fraction: float
    F: float
    eta: float
    F_per_input: tuple[float, ...]
    eta_per_input: tuple[float, ...]
    correct: tuple[float, ...]
    logical: tuple[float, ...]


def in_mask_probabilities(outputs: GatedOutputs, masks: list[FilterMask]) -> np.ndarray:
    """Probability of each (input, outcome) with detection times inside that outcome's mask, (K, n)."""
    if [m.outcome for m in masks] != list(outputs.outcomes):
        raise ValueError("masks must cover the assigned outcomes in order")
    region = np.array([m.region for m in masks])
    return np.einsum("knab,nab->kn", outputs.density, region) * outputs.dt**2


def filtered_metrics(outputs: GatedOutputs, masks: list[FilterMask]) -> FilteredMetrics:
    """Fidelity and efficiency after discarding coincidences outside the masks.

    Raises:
        ValueError: if no probability survives the filter
    """
    p = in_mask_probabilities(outputs, masks)
    K = p.shape[0]
    own = outputs.owner[None, :] == np.arange(K)[:, None]
    correct = (p * own).sum(axis=1)
    logical = p.sum(axis=1)
    if logical.sum() <= 0:
        raise ValueError("no probability falls inside the filter masks")
    F_k = np.divide(correct, logical, out=np.zeros(K), where=logical > 0)
    return FilteredMetrics(
        fraction=masks[0].fraction if masks else 0.0,
        F=float(correct.sum() / logical.sum()),
        eta=float(logical.mean()),
        F_per_input=tuple(float(x) for x in F_k),
        eta_per_input=tuple(float(x) for x in logical),
        correct=tuple(float(x) for x in correct),
        logical=tuple(float(x) for x in logical),
    )


def window_extent(mask: FilterMask, times: np.ndarray) -> float:
    """Largest extent of a mask along the diagonal ``(t1 + t2) / sqrt(2)``; zero for an empty mask."""
    i, j = np.nonzero(mask.region)
    if i.size == 0:
        return 0.0
    u = (times[i] + times[j]) / np.sqrt(2)
    return float(u.max() - u.min())


def filter_scan(outputs: GatedOutputs, fractions) -> list[FilteredMetrics]:
    return [filtered_metrics(outputs, build_masks(outputs, float(f))) for f in fractions]


def scan_csv(results: list[FilteredMetrics]) -> str:
    """Scan table with ensemble and per-input columns."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    K = len(results[0].F_per_input) if results else 0
    head = ["f [1]", "F [1]", "eta [1]"]
    head += [f"F_input{k} [1]" for k in range(K)] + [f"eta_input{k} [1]" for k in range(K)]
    w.writerow(head)
    for r in results:
        w.writerow([repr(r.fraction), repr(r.F), repr(r.eta), *map(repr, r.F_per_input), *map(repr, r.eta_per_input)])
    return buf.getvalue()


def mask_csv(mask: FilterMask, times: np.ndarray) -> str:
    """0/1 grid with a header of t2 samples; each row starts with its t1 sample."""
    rows = ["t1 [ns] / t2 [ns]," + ",".join(repr(float(t)) for t in times)]
    for t, row in zip(times, mask.region):
        rows.append(repr(float(t)) + "," + ",".join("1" if v else "0" for v in row))
    return "\n".join(rows) + "\n"
