"""Two-loop time-bin schedules for rectangular meshes.

A single MZI joins a top fibre loop of ``k = ceil(N/2)`` bins and a bottom loop of ``k + 1`` bins. Its
upper input is fed by the bottom loop and its upper output feeds the top loop; the lower ports connect
the other way round. Switch S2 sits on the lower output and couples bins in and out of the processor.

With the MZI at the identity the loops swap bins ("CROSS") and join into one ring of ``P = 2k + 1``
cells. Giving mode ``j`` ring cell ``j``, the MZI meets cells ``(j, j+1)`` at times
``t = (j + 1)(k + 1) mod P``: pairs starting on an odd mode occupy ``t mod P`` in ``[1, k]`` and pairs
starting on an even mode ``[k + 1, 2k]``. Mode ``j`` passes S2 when ``2t = j mod P``. Modes couple in
during the first ring period (``t = j/2`` for even ``j``, ``(j + P)/2`` for odd ``j``) and out exactly
``chi = (N + 1)(N + 2)/2`` steps later, so modes leave in the order they entered. Each mesh column takes
one window of one later period.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np

from .mesh import MeshPlan, MZISetting, mzi_unitary, rectangular_layout

APPLY, BAR, CROSS = "APPLY", "BAR", "CROSS"
BYPASS, TRAVERSE = "BYPASS", "TRAVERSE"


class ScheduleError(ValueError):
    """Invalid or inconsistent schedule; ``timestep`` locates the fault when known."""

    def __init__(self, message: str, timestep: int | None = None):
        self.timestep = timestep
        super().__init__(message if timestep is None else f"t={timestep}: {message}")


@dataclass(frozen=True)
class LoopGeometry:
    num_modes: int

    @property
    def top_capacity(self) -> int:
        return math.ceil(self.num_modes / 2)

    @property
    def bottom_capacity(self) -> int:
        return self.top_capacity + 1

    @property
    def ancilla(self) -> bool:
        return self.num_modes % 2 == 0

    @property
    def period(self) -> int:
        return self.top_capacity + self.bottom_capacity

    @property
    def chi(self) -> int:
        """Steps between a mode coupling in and coupling out of one linear layer."""
        return (self.num_modes + 1) * (self.num_modes + 2) // 2

    def entry_time(self, mode: int) -> int:
        return mode // 2 if mode % 2 == 0 else (mode + self.period) // 2

    def pair_time(self, mode: int) -> int:
        """Offset within a ring period at which the MZI meets modes (mode, mode + 1)."""
        return ((mode + 1) * (self.top_capacity + 1)) % self.period

    def column_time(self, column: int, mode: int) -> int:
        first_is_odd = self.num_modes % 2 == 1
        expected = (column + (1 if first_is_odd else 0)) % 2
        if mode % 2 != expected:
            raise ScheduleError(f"MZI on modes ({mode}, {mode + 1}) does not belong to column {column}")
        period = 1 + (column // 2 if first_is_odd else (column + 1) // 2)
        return period * self.period + self.pair_time(mode)


@dataclass(frozen=True)
class ScheduleStep:
    """Control settings at one time step.

    Attributes:
        t: time step in units of the bin duration
        mzi: APPLY, BAR or CROSS
        mode: upper mode of the pair being transformed (APPLY only)
        theta, phi: MZI setting (APPLY only)
        s2_out: mode coupled out after the MZI, if any
        s2_in: mode coupled in after the MZI, if any
        ps: output phase applied to the out-coupled mode
        route: TRAVERSE if the out-coupled mode is sent through the nonlinear loop, else BYPASS
        layer: linear layer the MZI or switch event belongs to
    """

    t: int
    mzi: str = CROSS
    mode: int | None = None
    theta: float | None = None
    phi: float | None = None
    s2_out: int | None = None
    s2_in: int | None = None
    ps: float = 0.0
    route: str = BYPASS
    layer: int = 0

    @property
    def s2(self) -> str:
        parts = []
        if self.s2_out is not None:
            parts.append(f"OUT({self.s2_out + 1})")
        if self.s2_in is not None:
            parts.append(f"IN({self.s2_in + 1})")
        return "+".join(parts) or "CLOSED"


@dataclass(frozen=True)
class Schedule:
    """Control table of a (possibly multi-layer) two-loop program.

    Attributes:
        geometry: loop sizes
        steps: one entry per time step, starting at t = 0
        buffer: steps spent in the nonlinear loop between layers
        num_layers: number of linear layers
    """

    geometry: LoopGeometry
    steps: tuple[ScheduleStep, ...] = field(repr=False)
    buffer: int = 0
    num_layers: int = 1

    @property
    def num_steps(self) -> int:
        return len(self.steps)

    @property
    def n_t(self) -> int:
        """Steps from the first mode coupling in to it leaving the last layer."""
        ins = [s.t for s in self.steps if s.s2_in is not None]
        first = min(ins)
        label = next(s.s2_in for s in self.steps if s.t == first)
        last_out = max(s.t for s in self.steps if s.s2_out == label)
        return last_out - first

    def first_mode_span(self, layer: int = 0) -> int:
        """In-to-out distance of the first mode in ``layer``, including its nonlinear-loop traversal."""
        first = next(s.s2_in for s in self.steps if s.s2_in is not None)
        ins = [s.t for s in self.steps if s.s2_in == first]
        outs = [s for s in self.steps if s.s2_out == first]
        out = outs[layer]
        return out.t - ins[layer] + (self.buffer if out.route == TRAVERSE or self.num_layers == 1 else 0)

    def applies(self):
        return [s for s in self.steps if s.mzi == APPLY]

    def to_dict(self) -> dict:
        return {
            "N": self.geometry.num_modes,
            "buffer": self.buffer,
            "num_layers": self.num_layers,
            "steps": [asdict(s) for s in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "Schedule":
        steps = tuple(ScheduleStep(**s) for s in d["steps"])
        return cls(LoopGeometry(int(d["N"])), steps, int(d["buffer"]), int(d["num_layers"]))

    @classmethod
    def from_json(cls, s: str) -> "Schedule":
        return cls.from_dict(json.loads(s))

    def control_table(self) -> str:
        """Human-readable table, one row per time step."""
        rows = [f"{'t':>5} {'MZI':<6} {'modes':<8} {'theta':>9} {'phi':>9} {'S2':<14} {'PS':>9} route"]
        for s in self.steps:
            modes = f"m{s.mode + 1},m{s.mode + 2}" if s.mode is not None else "-"
            th = f"{s.theta:9.5f}" if s.theta is not None else f"{'-':>9}"
            ph = f"{s.phi:9.5f}" if s.phi is not None else f"{'-':>9}"
            ps = f"{s.ps:9.5f}" if s.s2_out is not None else f"{'-':>9}"
            rows.append(f"{s.t:>5} {s.mzi:<6} {modes:<8} {th} {ph} {s.s2:<14} {ps} {s.route}")
        return "\n".join(rows)


def compile_schedule(plan: MeshPlan, buffer: int = 0) -> Schedule:
    """Compile a rectangular mesh plan into a two-loop control schedule.

    Args:
        plan: mesh plan with the rectangular layout of :func:`tbqpnn.mesh.rectangular_layout`
        buffer: steps spent in the nonlinear loop after coupling out

    Raises:
        ScheduleError: if a placement does not fit the geometry or two MZIs share a time step
    """
    if buffer < 0:
        raise ScheduleError("buffer must be non-negative")
    N = plan.num_modes
    if N < 2:
        raise ScheduleError("schedules need at least two modes")
    geo = LoopGeometry(N)
    chi = geo.chi
    apply_at: dict[int, tuple[int, MZISetting]] = {}
    for p in plan.placements:
        if not 0 <= p.mode < N - 1:
            raise ScheduleError(f"MZI on modes ({p.mode}, {p.mode + 1}) outside N={N}")
        t = geo.column_time(p.column, p.mode)
        if t in apply_at:
            raise ScheduleError(f"two MZIs scheduled in one step (modes {apply_at[t][0]} and {p.mode})", t)
        apply_at[t] = (p.mode, p.setting)
    entry = {j: geo.entry_time(j) for j in range(N)}
    exit_ = {j: chi + entry[j] for j in range(N)}
    for t, (m, _) in apply_at.items():
        if t <= max(entry[m], entry[m + 1]) or t > min(exit_[m], exit_[m + 1]):
            raise ScheduleError(f"MZI on modes ({m}, {m + 1}) falls outside their residence", t)
    in_at = {t: j for j, t in entry.items()}
    out_at = {t: j for j, t in exit_.items()}
    delta = plan.output_phases
    route = TRAVERSE if buffer > 0 else BYPASS
    steps = []
    for t in range(max(exit_.values()) + buffer + 1):
        kw = {}
        if t in apply_at:
            m, s = apply_at[t]
            kw.update(mzi=APPLY, mode=m, theta=s.theta, phi=s.phi)
        if t in out_at:
            j = out_at[t]
            kw.update(s2_out=j, ps=float(delta[j]), route=route)
        if t in in_at:
            kw.update(s2_in=in_at[t])
        steps.append(ScheduleStep(t, **kw))
    return Schedule(geo, tuple(steps), buffer, 1)


def compose_layers(schedules, buffer: int = 0) -> Schedule:
    """Chain single-layer schedules, passing each mode through the nonlinear loop for ``buffer`` steps.

    Layer ``l`` runs the same program as its single-layer schedule, delayed by ``l (chi + buffer)``; a
    mode re-enters ``buffer`` steps after leaving, so switch events of neighbouring layers may share a step.

    Raises:
        ScheduleError: on geometry mismatch or conflicting events
    """
    schedules = list(schedules)
    if not schedules:
        raise ScheduleError("nothing to compose")
    geo = schedules[0].geometry
    if any(s.geometry != geo for s in schedules):
        raise ScheduleError("layers disagree on loop geometry")
    if any(s.num_layers != 1 for s in schedules):
        raise ScheduleError("compose single-layer schedules")
    L = len(schedules)
    shift = geo.chi + buffer
    merged: dict[int, dict] = {}
    for layer, sched in enumerate(schedules):
        last = layer == L - 1
        for s in sched.steps:
            t = s.t + layer * shift
            slot = merged.setdefault(t, {"t": t, "layer": layer})
            if s.mzi == APPLY:
                if slot.get("mzi") == APPLY:
                    raise ScheduleError("two MZI operations in one step", t)
                slot.update(mzi=APPLY, mode=s.mode, theta=s.theta, phi=s.phi, layer=layer)
            if s.s2_out is not None:
                if "s2_out" in slot:
                    raise ScheduleError("two out-couplings in one step", t)
                slot.update(s2_out=s.s2_out, ps=s.ps, route=BYPASS if last else TRAVERSE)
            if s.s2_in is not None:
                if "s2_in" in slot:
                    raise ScheduleError("two in-couplings in one step", t)
                slot.update(s2_in=s.s2_in)
                if s.mzi != APPLY and "mzi" not in slot:
                    slot["layer"] = layer
    end = max(merged)
    steps = tuple(ScheduleStep(**merged.get(t, {"t": t})) for t in range(end + 1))
    if L == 1 and buffer == schedules[0].buffer == 0:
        return schedules[0]
    return Schedule(geo, steps, buffer, L)


@dataclass
class _Cell:
    label: int | None
    amp: np.ndarray


def simulate_schedule(schedule: Schedule, return_trace: bool = False):
    """Track single-photon amplitudes bin by bin through both loops.

    Returns:
        N x N matrix whose column ``j`` holds the output amplitudes of a photon entering as mode ``j``
        (and, with ``return_trace``, per-step occupancy counts of the two loops)

    Raises:
        ScheduleError: on collisions, label mismatches or operations on empty bins
    """
    geo = schedule.geometry
    N = geo.num_modes
    empty = lambda: _Cell(None, np.zeros(N, dtype=complex))  # noqa: E731
    top = deque(empty() for _ in range(geo.top_capacity))
    bottom = deque(empty() for _ in range(geo.bottom_capacity))
    stored: dict[int, np.ndarray] = {}
    trace = []
    for step in schedule.steps:
        t = step.t
        up, lo = bottom.popleft(), top.popleft()
        if step.mzi == APPLY:
            if up.label is None or lo.label is None:
                raise ScheduleError("MZI applied to an empty bin", t)
            if (up.label, lo.label) != (step.mode, step.mode + 1):
                raise ScheduleError(
                    f"MZI expected modes ({step.mode}, {step.mode + 1}) but met ({up.label}, {lo.label})", t
                )
            T = mzi_unitary((step.theta, step.phi))
            a_up = T[0, 0] * up.amp + T[0, 1] * lo.amp
            a_lo = T[1, 0] * up.amp + T[1, 1] * lo.amp
            out_up, out_lo = _Cell(up.label, a_up), _Cell(lo.label, a_lo)
        elif step.mzi == BAR:
            out_up, out_lo = lo, up
        elif step.mzi == CROSS:
            out_up, out_lo = up, lo
        else:
            raise ScheduleError(f"unknown MZI action {step.mzi!r}", t)
        if step.s2_out is not None:
            if out_lo.label != step.s2_out:
                raise ScheduleError(f"expected mode {step.s2_out} at S2, found {out_lo.label}", t)
            amp = np.exp(1j * step.ps) * out_lo.amp
            stored[step.s2_out] = amp
            out_lo = empty()
        if step.s2_in is not None:
            if out_lo.label is not None or np.any(out_lo.amp):
                raise ScheduleError(f"in-coupling mode {step.s2_in} collides with an occupied bin", t)
            j = step.s2_in
            vec = stored.pop(j) if j in stored else np.eye(N, dtype=complex)[j]
            out_lo = _Cell(j, vec)
        top.append(out_up)
        bottom.append(out_lo)
        if return_trace:
            trace.append((sum(c.label is not None for c in top), sum(c.label is not None for c in bottom)))
    if set(stored) != set(range(N)):
        missing = sorted(set(range(N)) - set(stored))
        raise ScheduleError(f"modes never coupled out: {missing}")
    U = np.array([stored[j] for j in range(N)])
    return (U, trace) if return_trace else U
