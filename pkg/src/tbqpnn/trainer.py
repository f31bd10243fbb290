"""Training networks of MZI meshes and nonlinearities on CNOT and Bell-state-analysis tasks.

Parameters are flattened per layer as ``[theta (N(N-1)/2), phi (N(N-1)/2), delta (N)]``; emitter networks
append ``log(tau_qd)`` and one detuning per nonlinear layer. The objective is the unscaled mean cost
``(1/K) sum_k (1 - fid_k / F_in)``. Many trials run as one batch, each with its own Adam state and a
backtracking step that accepts only non-increasing cost.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .distinguishability import input_fidelity
from .engine import (
    EvaluationReport,
    NetworkSpec,
    Nonlinearity,
    WavefunctionFamily,
    evaluate,
    family_coefficients,
    family_populations,
)
from .fock import lift
from .mesh import MeshPlan, mesh_unitaries, mzi_blocks, rectangular_layout
from .nonlinear import FrequencyGrid
from .tasks import TaskDefinition, assign_bsa_outcomes, bsa_task, make_task

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class ParameterLayout:
    """Index bookkeeping for flat parameter vectors."""

    num_modes: int
    num_layers: int
    qd: bool = False

    @property
    def num_mzis(self) -> int:
        return self.num_modes * (self.num_modes - 1) // 2

    @property
    def per_layer(self) -> int:
        return 2 * self.num_mzis + self.num_modes

    @property
    def size(self) -> int:
        return self.num_layers * self.per_layer + (self.num_layers if self.qd else 0)

    @property
    def mesh_layout(self):
        return rectangular_layout(self.num_modes)

    def layer_slices(self, layer: int):
        o, m, N = layer * self.per_layer, self.num_mzis, self.num_modes
        return slice(o, o + m), slice(o + m, o + 2 * m), slice(o + 2 * m, o + 2 * m + N)

    @property
    def qd_slice(self) -> slice:
        return slice(self.num_layers * self.per_layer, self.size)

    def to_spec(self, x: np.ndarray, nonlinearity: Nonlinearity, buffer: int = 1) -> NetworkSpec:
        x = np.asarray(x, dtype=float)
        plans = []
        for layer in range(self.num_layers):
            th, ph, de = (x[s] for s in self.layer_slices(layer))
            plans.append(MeshPlan.from_arrays(self.num_modes, self.mesh_layout, th, ph, de))
        if self.qd:
            q = x[self.qd_slice]
            nonlinearity = Nonlinearity("QD", tau_qd=float(np.exp(q[0])), detunings=tuple(q[1:]))
        return NetworkSpec(self.num_modes, tuple(plans), nonlinearity, buffer)


def _apply_embedded(U_rows: np.ndarray, block: np.ndarray) -> np.ndarray:
    return block @ U_rows


class NetworkObjective:
    """Batched forward model of a task on a layered network.

    Evaluation points ``X`` have shape ``(B, Q, P)``: ``B`` trials, each with its own task targets, and
    ``Q`` parameter vectors per trial.

    Args:
        tasks: one task per trial (or a single shared task)
        num_layers: number of linear layers L
        kind: "NONE", "KERR" or "QD"
        visibility: HOM visibility V of the input pairs
        kerr_phase: Kerr phase per photon pair
        sigma_p: photon temporal width (QD)
        grid: frequency grid (QD)
    """

    def __init__(
        self,
        tasks,
        num_layers: int,
        kind: str = "KERR",
        visibility: float = 1.0,
        kerr_phase: float = np.pi,
        sigma_p: float = 1.0,
        grid: FrequencyGrid | None = None,
    ):
        tasks = [tasks] if isinstance(tasks, TaskDefinition) else list(tasks)
        self.tasks = tasks
        t0 = tasks[0]
        self.kind = kind.upper()
        self.N = t0.num_modes
        self.L = int(num_layers)
        self.layout = ParameterLayout(self.N, self.L, self.kind == "QD")
        self.V = float(visibility)
        self.f_in = input_fidelity(self.V)
        self.basis = t0.basis
        self.inputs = t0.inputs
        self.pairs = t0.pair_inputs
        self.target_mask = np.stack([t.target_mask for t in tasks])  # (T, D, K)
        self.cb_mask = np.stack([t.cb_mask for t in tasks])  # (T, D)
        self.pair_target = np.stack([t.pair_weights(t.target_mask) for t in tasks])  # (T, K, N, N)
        self.pair_cb = np.stack([t.pair_weights(t.cb_mask) for t in tasks])  # (T, N, N)
        occ = self.basis.occupations
        self.kerr = np.exp(1j * kerr_phase * (occ * (occ - 1) // 2).sum(axis=1)) if self.kind == "KERR" else None
        self.double = self.basis.multi_occupied
        self.sigma_p = float(sigma_p)
        self.grid = grid
        if self.kind == "QD" and grid is None:
            raise ValueError("emitter objectives need a frequency grid")
        self._gram_cache: dict = {}

    # ---- forward model ----

    def unitaries(self, X: np.ndarray) -> list[np.ndarray]:
        lay = self.layout
        return [
            mesh_unitaries(self.N, lay.mesh_layout, *(X[..., s] for s in lay.layer_slices(layer)))
            for layer in range(self.L)
        ]

    def _grams(self, X: np.ndarray) -> np.ndarray:
        q = X[..., self.layout.qd_slice]
        flat = q.reshape(-1, q.shape[-1])
        J = 2 ** (self.L - 1)
        out = np.empty((len(flat), J, J), dtype=complex)
        for i, row in enumerate(flat):
            key = row.tobytes()
            if key not in self._gram_cache:
                if len(self._gram_cache) > 4096:
                    self._gram_cache.clear()
                fam = WavefunctionFamily(self.grid, self.sigma_p, float(np.exp(row[0])), row[1:])
                self._gram_cache[key] = fam.gram
            out[i] = self._gram_cache[key]
        return out.reshape(q.shape[:-1] + (J, J))

    def _batch_masks(self, B: int):
        T = len(self.tasks)
        if T == 1:
            return (np.repeat(a, B, axis=0) for a in (self.target_mask, self.cb_mask, self.pair_target, self.pair_cb))
        if T != B:
            raise ValueError(f"objective holds {T} task variants but received {B} trials")
        return self.target_mask, self.cb_mask, self.pair_target, self.pair_cb

    def populations(self, X: np.ndarray, Us=None) -> np.ndarray:
        """Indistinguishable-photon output populations, shape (B, Q, D, K)."""
        Us = self.unitaries(X) if Us is None else Us
        lifts = [lift(U, 2) for U in Us]
        if self.kind == "QD":
            coef = family_coefficients(lifts, self.double, self.inputs)
            return family_populations(coef, self._grams(X))
        A = np.broadcast_to(self.inputs.T.astype(complex), X.shape[:-1] + self.inputs.T.shape)
        for layer, P in enumerate(lifts):
            A = P @ A
            if self.kerr is not None and layer < self.L - 1:
                A = self.kerr[:, None] * A
        return np.abs(A) ** 2

    def distinguishable(self, Us) -> np.ndarray:
        """Probabilities of ordered output mode pairs for labelled photons, shape (B, Q, K, N, N)."""
        U = Us[0]
        for Ul in Us[1:]:
            U = Ul @ U
        M = np.einsum("...xa,kab,...yb->...kxy", U, self.pairs, U)
        return np.abs(M) ** 2

    def forward(self, X: np.ndarray) -> dict:
        """Per-input success ``fid`` and logical probability ``eta`` plus the mean cost; shapes (B, Q, K)/(B, Q)."""
        X = np.asarray(X, dtype=float)
        B = X.shape[0]
        tmask, cmask, ptarget, pcb = self._batch_masks(B)
        Us = self.unitaries(X)
        fid = np.zeros(X.shape[:-1] + (self.inputs.shape[0],))
        eta = np.zeros_like(fid)
        if self.V > 0:
            pops = self.populations(X, Us)
            fid += self.V * np.einsum("bqok,bok->bqk", pops, tmask)
            eta += self.V * np.einsum("bqok,bo->bqk", pops, cmask)
        if self.V < 1:
            probs = self.distinguishable(Us)
            fid += (1 - self.V) * np.einsum("bqkxy,bkxy->bqk", probs, ptarget)
            eta += (1 - self.V) * np.einsum("bqkxy,bxy->bqk", probs, pcb)
        cost = np.mean(1 - fid / self.f_in, axis=-1)
        return {"fid": fid, "eta": eta, "cost": cost}

    def cost(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)["cost"]

    # ---- gradients ----

    def fd_gradient(self, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
        """Central finite differences for a batch of points ``x`` of shape (B, P)."""
        x = np.asarray(x, dtype=float)
        P = x.shape[-1]
        E = np.eye(P) * step
        X = np.concatenate([x[:, None, :] + E[None], x[:, None, :] - E[None]], axis=1)
        c = self.cost(X)
        return (c[:, :P] - c[:, P:]) / (2 * step)

    def gradient(self, x: np.ndarray) -> np.ndarray:
        """Gradient of the cost at points (B, P); analytic without emitters, finite differences with them."""
        if self.kind == "QD":
            return self.fd_gradient(x)
        return self.analytic_gradient(x)

    def analytic_gradient(self, x: np.ndarray) -> np.ndarray:
        """Forward-mode derivative through the mesh, the two-photon lift and the Kerr phases.

        The two-photon lift is quadratic in U, so ``dPhi = (Phi(U + dU) - Phi(U - dU)) / 2`` is exact.
        """
        if self.kind == "QD":
            raise ValueError("analytic gradients are available only without emitters")
        x = np.asarray(x, dtype=float)
        B, P = x.shape
        lay = self.layout
        N, L, nm = self.N, self.L, lay.num_mzis
        tmask, _, ptarget, _ = self._batch_masks(B)
        X = x[:, None, :]
        Us = [U[:, 0] for U in self.unitaries(X)]
        dUs = [self._layer_tangents(x, layer, Us[layer]) for layer in range(L)]  # (B, P_l, N, N)
        grad = np.zeros((B, P))
        dfid = [np.zeros((B, dU.shape[1], self.inputs.shape[0])) for dU in dUs]
        if self.V > 0:
            lifts = [lift(U, 2) for U in Us]
            kerr = self.kerr if self.kerr is not None else np.ones(self.basis.dim)
            pre = [np.broadcast_to(self.inputs.T.astype(complex), (B,) + self.inputs.T.shape)]
            for layer in range(L - 1):
                pre.append(kerr[:, None] * (lifts[layer] @ pre[layer]))
            post = [None] * L
            post[L - 1] = np.broadcast_to(np.eye(self.basis.dim, dtype=complex), (B, self.basis.dim, self.basis.dim))
            for layer in range(L - 2, -1, -1):
                post[layer] = post[layer + 1] @ lifts[layer + 1] * kerr[None, None, :]
            A = lifts[L - 1] @ pre[L - 1]
            for layer in range(L):
                U = Us[layer][:, None]
                dP = 0.5 * (lift(U + dUs[layer], 2) - lift(U - dUs[layer], 2))
                dA = post[layer][:, None] @ dP @ pre[layer][:, None]
                d = 2 * np.real(np.conj(A)[:, None] * dA)
                dfid[layer] += self.V * np.einsum("bpok,bok->bpk", d, tmask)
        if self.V < 1:
            U_lin = Us[0]
            for Ul in Us[1:]:
                U_lin = Ul @ U_lin
            M = np.einsum("nxa,kab,nyb->nkxy", U_lin, self.pairs, U_lin)
            eye = np.broadcast_to(np.eye(N, dtype=complex), (B, N, N))
            for layer in range(L):
                left, right = eye, eye
                for j in range(layer + 1, L):
                    left = Us[j] @ left
                for j in range(layer):
                    right = Us[j] @ right
                dUlin = left[:, None] @ dUs[layer] @ right[:, None]
                dM = np.einsum("npxa,kab,nyb->npkxy", dUlin, self.pairs, U_lin)
                dM = dM + np.einsum("nxa,kab,npyb->npkxy", U_lin, self.pairs, dUlin)
                d = 2 * np.real(np.conj(M)[:, None] * dM)
                dfid[layer] += (1 - self.V) * np.einsum("bpkxy,bkxy->bpk", d, ptarget)
        for layer in range(L):
            th, ph, de = lay.layer_slices(layer)
            g = -np.mean(dfid[layer], axis=-1) / self.f_in
            grad[:, th.start : de.stop] = g
        return grad

    def _layer_tangents(self, x: np.ndarray, layer: int, U: np.ndarray) -> np.ndarray:
        lay = self.layout
        N, nm = self.N, lay.num_mzis
        th_s, ph_s, de_s = lay.layer_slices(layer)
        th, ph, de = x[:, th_s], x[:, ph_s], x[:, de_s]
        B = x.shape[0]
        T = mzi_blocks(th, ph)  # (B, nm, 2, 2)
        s, c = np.sin(th), np.cos(th)
        g = 1j * np.exp(1j * th)
        ep = np.exp(1j * ph)
        dT_th = 1j * T.copy()
        dT_th[..., 0, 0] += g * ep * c
        dT_th[..., 0, 1] += -g * s
        dT_th[..., 1, 0] += -g * ep * s
        dT_th[..., 1, 1] += -g * c
        dT_ph = np.zeros_like(T)
        dT_ph[..., 0, 0] = 1j * T[..., 0, 0]
        dT_ph[..., 1, 0] = 1j * T[..., 1, 0]
        modes = [m for _, m in lay.mesh_layout]
        prefix = [np.broadcast_to(np.eye(N, dtype=complex), (B, N, N)).copy()]
        for k, m in enumerate(modes):
            F = prefix[-1].copy()
            F[:, m : m + 2, :] = T[:, k] @ F[:, m : m + 2, :]
            prefix.append(F)
        suffix = [None] * nm
        S = np.broadcast_to(np.diag(np.ones(N)), (B, N, N)) * np.exp(1j * de)[:, :, None]
        for k in range(nm - 1, -1, -1):
            suffix[k] = S
            m = modes[k]
            S = S.copy()
            S[:, :, m : m + 2] = S[:, :, m : m + 2] @ T[:, k]
        out = np.zeros((B, 2 * nm + N, N, N), dtype=complex)
        for k, m in enumerate(modes):
            left = suffix[k][:, :, m : m + 2]
            right = prefix[k][:, m : m + 2, :]
            out[:, k] = left @ dT_th[:, k] @ right
            out[:, nm + k] = left @ dT_ph[:, k] @ right
        for n in range(N):
            out[:, 2 * nm + n, n, :] = 1j * U[:, n, :]
        return out


@dataclass(frozen=True)
class TrainConfig:
    """Training hyper-parameters.

    Attributes:
        task: "CNOT" or "BSA"
        num_modes, num_layers: network size
        nonlinearity: "NONE", "KERR" or "QD"
        epochs: cost evaluations recorded per trial (the first is the initialization)
        trials: independent random initializations
        seed: master seed; trial i is seeded by (seed, i)
        visibility: HOM visibility during training
        learning_rate: Adam step size
        kerr_phase: Kerr phase per photon pair
        sigma_p: photon temporal width (QD)
        tau_init: centre of the initial emitter lifetime (defaults to sigma_p)
        grid_points: frequency points during training (QD)
        eval_grid_points: frequency points for the final evaluation (QD)
        buffer: nonlinear-loop buffer, used for step counting
        max_backtracks: step halvings tried before an epoch is skipped for a trial
        tau_bounds: emitter lifetime range in units of sigma_p; the training grid resolves the emitter
            linewidth only within it
    """

    task: str = "CNOT"
    num_modes: int = 4
    num_layers: int = 2
    nonlinearity: str = "KERR"
    epochs: int = 250
    trials: int = 100
    seed: int = 0
    visibility: float = 1.0
    learning_rate: float = 0.05
    kerr_phase: float = math.pi
    sigma_p: float = 1.0
    tau_init: float | None = None
    grid_points: int = 128
    eval_grid_points: int = 512
    buffer: int = 1
    max_backtracks: int = 8
    tau_bounds: tuple[float, float] = (1 / 16, 2.0)

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.nonlinearity.upper() not in ("NONE", "KERR", "QD"):
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        if self.task.upper() not in ("CNOT", "BSA", "LINEAR_CNOT"):
            raise ValueError(f"unknown task {self.task!r}")
        if not 0 <= self.visibility <= 1:
            raise ValueError("visibility must lie in [0, 1]")
        if self.num_layers < 1:
            raise ValueError("num_layers must be at least 1")

    def grid(self, points: int) -> FrequencyGrid:
        return FrequencyGrid.default(self.sigma_p, self.tau_init or self.sigma_p, points)


@dataclass
class TrainRecord:
    """Outcome of one training trial."""

    trial: int
    seed: int
    costs: list[float]
    F: float
    eta: float
    C: float
    params: list[float]
    assignment: dict | None = None
    status: str = "ok"
    grid_gap: float | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, s: str) -> "TrainRecord":
        return cls(**json.loads(s))


def trial_task(config: TrainConfig, trial: int) -> TaskDefinition:
    if config.task.upper() == "BSA":
        return bsa_task(config.num_modes, assign_bsa_outcomes(config.num_modes, _trial_seed(config.seed, trial)))
    return make_task(config.task, config.num_modes)


def _trial_seed(seed: int, trial: int) -> int:
    return int(np.random.SeedSequence([seed, trial]).generate_state(1)[0])


def initial_parameters(config: TrainConfig, trial: int) -> np.ndarray:
    """Random start: phases uniform on [0, 2 pi), log-lifetime near sigma_p, detunings within 2/tau."""
    lay = ParameterLayout(config.num_modes, config.num_layers, config.nonlinearity.upper() == "QD")
    rng = np.random.default_rng([config.seed, trial])
    x = rng.uniform(0, TWO_PI, lay.size)
    if lay.qd:
        tau0 = config.tau_init or config.sigma_p
        lo, hi = (math.log(b * config.sigma_p) for b in config.tau_bounds)
        log_tau = float(np.clip(math.log(tau0) + 0.25 * rng.standard_normal(), lo, hi))
        q = lay.qd_slice
        x[q.start] = log_tau
        x[q.start + 1 : q.stop] = rng.uniform(-2, 2, config.num_layers - 1) / math.exp(log_tau)
    return x


def project(x: np.ndarray, config: TrainConfig) -> np.ndarray:
    """Clip the emitter lifetime into ``config.tau_bounds``; other parameters are unconstrained."""
    if config.nonlinearity.upper() != "QD":
        return x
    lay = ParameterLayout(config.num_modes, config.num_layers, True)
    lo, hi = (math.log(b * config.sigma_p) for b in config.tau_bounds)
    x = x.copy()
    x[..., lay.qd_slice.start] = np.clip(x[..., lay.qd_slice.start], lo, hi)
    return x


def _nonlinearity(config: TrainConfig) -> Nonlinearity:
    return Nonlinearity(config.nonlinearity.upper(), phase=config.kerr_phase)


def make_objective(config: TrainConfig, tasks, points: int | None = None) -> NetworkObjective:
    kind = config.nonlinearity.upper()
    grid = config.grid(points or config.grid_points) if kind == "QD" else None
    return NetworkObjective(
        tasks, config.num_layers, kind, config.visibility, config.kerr_phase, config.sigma_p, grid
    )


def adam_descent(objective: NetworkObjective, x0: np.ndarray, config: TrainConfig):
    """Batched Adam with monotone backtracking.

    Returns:
        (final points (B, P), cost trajectories (B, epochs), status per trial)
    """
    x = np.array(x0, dtype=float)
    B, P = x.shape
    c = objective.cost(x[:, None, :])[:, 0]
    status = ["ok"] * B
    alive = np.isfinite(c)
    for b in np.flatnonzero(~alive):
        status[b] = "aborted: non-finite cost at initialization"
    traj = [c.copy()]
    m = np.zeros_like(x)
    v = np.zeros_like(x)
    b1, b2, eps = 0.9, 0.999, 1e-8
    for epoch in range(1, config.epochs):
        idx = np.flatnonzero(alive)
        if idx.size:
            g = objective.gradient(x) if idx.size == B else _subset_gradient(objective, x, idx)
            bad = ~np.all(np.isfinite(g[idx]), axis=1)
            for b in idx[bad]:
                alive[b] = False
                status[b] = f"aborted: non-finite gradient at epoch {epoch}"
            idx = idx[~bad]
            m[idx] = b1 * m[idx] + (1 - b1) * g[idx]
            v[idx] = b2 * v[idx] + (1 - b2) * g[idx] ** 2
            step = config.learning_rate * (m[idx] / (1 - b1**epoch)) / (np.sqrt(v[idx] / (1 - b2**epoch)) + eps)
            scale = np.ones(idx.size)
            pending = np.ones(idx.size, dtype=bool)
            for _ in range(config.max_backtracks):
                if not pending.any():
                    break
                sel = idx[pending]
                trial_x = project(x[sel] - scale[pending, None] * step[pending], config)
                trial_c = _subset_cost(objective, trial_x, sel)
                ok = np.isfinite(trial_c) & (trial_c <= c[sel])
                x[sel[ok]] = trial_x[ok]
                c[sel[ok]] = trial_c[ok]
                done = np.flatnonzero(pending)[ok]
                pending[done] = False
                scale[pending] *= 0.5
        traj.append(c.copy())
    return x, np.array(traj).T, status


def _subset_cost(objective: NetworkObjective, x: np.ndarray, sel: np.ndarray) -> np.ndarray:
    if len(objective.tasks) == 1:
        return objective.cost(x[:, None, :])[:, 0]
    sub = _SubsetObjective(objective, sel)
    return sub.cost(x[:, None, :])[:, 0]


def _subset_gradient(objective: NetworkObjective, x: np.ndarray, idx: np.ndarray) -> np.ndarray:
    g = np.zeros_like(x)
    if len(objective.tasks) == 1:
        g[idx] = objective.gradient(x[idx])
    else:
        g[idx] = _SubsetObjective(objective, idx).gradient(x[idx])
    return g


class _SubsetObjective(NetworkObjective):
    """View of a per-trial objective restricted to some trials."""

    def __init__(self, parent: NetworkObjective, sel: np.ndarray):
        self.__dict__.update(parent.__dict__)
        self.tasks = [parent.tasks[i] for i in sel]
        self.target_mask = parent.target_mask[sel]
        self.cb_mask = parent.cb_mask[sel]
        self.pair_target = parent.pair_target[sel]
        self.pair_cb = parent.pair_cb[sel]


def optimize(config: TrainConfig) -> list[TrainRecord]:
    """Train ``config.trials`` randomly initialized networks and evaluate each at the end.

    Emitter networks train on ``grid_points`` and are re-evaluated on ``eval_grid_points``; the cost
    difference between the two grids is stored as ``grid_gap``.
    """
    tasks = [trial_task(config, i) for i in range(config.trials)]
    shared = config.task.upper() != "BSA"
    objective = make_objective(config, tasks[0] if shared else tasks)
    x0 = np.array([initial_parameters(config, i) for i in range(config.trials)])
    x, traj, status = adam_descent(objective, x0, config)
    lay = objective.layout
    records = []
    kind = config.nonlinearity.upper()
    eval_grid = config.grid(config.eval_grid_points) if kind == "QD" else None
    for i in range(config.trials):
        spec = lay.to_spec(x[i], _nonlinearity(config), config.buffer)
        gap = None
        if status[i] == "ok":
            rep = evaluate(spec, tasks[i], config.visibility, n_t=1, grid=eval_grid, sigma_p=config.sigma_p)
            F, eta, C = rep.F, rep.eta, rep.C_unscaled
            if kind == "QD":
                gap = float(C - traj[i, -1])
        else:
            F = eta = C = float("nan")
        records.append(
            TrainRecord(
                trial=i,
                seed=config.seed,
                costs=[float(v) for v in traj[i]],
                F=float(F),
                eta=float(eta),
                C=float(C),
                params=[float(v) for v in x[i]],
                assignment=tasks[i].assignment.to_dict() if tasks[i].assignment else None,
                status=status[i],
                grid_gap=gap,
            )
        )
    return records


def record_spec(record: TrainRecord, config: TrainConfig) -> NetworkSpec:
    lay = ParameterLayout(config.num_modes, config.num_layers, config.nonlinearity.upper() == "QD")
    return lay.to_spec(np.array(record.params), _nonlinearity(config), config.buffer)


def record_task(record: TrainRecord, config: TrainConfig) -> TaskDefinition:
    if record.assignment:
        from .tasks import OutcomeAssignment

        return bsa_task(config.num_modes, OutcomeAssignment.from_dict(record.assignment))
    return make_task(config.task, config.num_modes)


def cost(spec: NetworkSpec, task: TaskDefinition, visibility: float = 1.0, alpha: float = 0.0, **kw):
    """Scaled and unscaled mean cost ``((1 - alpha)/K) sum C_k`` and ``(1/K) sum C_k``."""
    rep = evaluate(spec, task, visibility, alpha=alpha, n_t=1, **kw)
    return rep.C_avg, rep.C_unscaled


def summary_csv(records: list[TrainRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial [1]", "final_cost [1]", "F [1]", "eta [1]", "status [text]"])
    for r in records:
        w.writerow([r.trial, repr(r.costs[-1]), repr(r.F), repr(r.eta), r.status])
    return buf.getvalue()


def best_record(records: list[TrainRecord], eta_tol: float | None = None) -> TrainRecord:
    """Highest-fidelity successful record, optionally among those with eta within ``eta_tol`` of 1."""
    pool = [r for r in records if r.status == "ok" and np.isfinite(r.F)]
    if eta_tol is not None:
        pool = [r for r in pool if abs(r.eta - 1) <= eta_tol] or pool
    return max(pool, key=lambda r: r.F)
