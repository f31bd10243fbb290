"""Network assembly, state propagation and figures of merit.

A network alternates linear layers (mesh plans) with single-site nonlinearities:

    S = Phi(U_L) Sigma Phi(U_{L-1}) ... Sigma Phi(U_1)

For emitter nonlinearities each Fock state carries a joint spectral amplitude. Linear layers act only on
the discrete labels. The emitter multiplies singly occupied states by ``t(w1) t(w2)`` and scatters doubly
occupied ones jointly. Because every layer is linear in the attachments, outputs are exact combinations
of a small family of wavefunctions (two children per wavefunction per emitter layer), which is what
:class:`WavefunctionFamily` tracks.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .distinguishability import input_fidelity
from .fock import DensityMatrix, FockBasis, enumerate_basis, lift, uhlmann_fidelity
from .mesh import MeshPlan, reconstruct
from .nonlinear import (
    FrequencyGrid,
    QDParams,
    TwoPhotonAmplitude,
    gaussian_wavepacket,
    kerr_phases,
    scatter_two,
    t_coeff,
)
from .tasks import TaskDefinition

NONLINEARITIES = ("NONE", "KERR", "QD")


@dataclass(frozen=True)
class Nonlinearity:
    """Nonlinear element between linear layers.

    Attributes:
        kind: "NONE", "KERR" or "QD"
        phase: Kerr phase per photon pair
        tau_qd: emitter lifetime (QD)
        detunings: emitter detuning per nonlinear layer (QD)
    """

    kind: str = "NONE"
    phase: float = np.pi
    tau_qd: float = 1.0
    detunings: tuple[float, ...] = ()

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "detunings", tuple(float(d) for d in self.detunings))
        if kind == "QD" and not self.tau_qd > 0:
            raise ValueError(f"tau_qd must be positive, got {self.tau_qd}")

    def qd_params(self, layer: int) -> QDParams:
        return QDParams(self.tau_qd, self.detunings[layer])


@dataclass(frozen=True)
class NetworkSpec:
    """Layered network of ``num_modes`` modes: ``len(layer_plans)`` meshes with nonlinearities between."""

    num_modes: int
    layer_plans: tuple[MeshPlan, ...]
    nonlinearity: Nonlinearity = field(default_factory=Nonlinearity)
    buffer: int = 1

    def __post_init__(self):
        object.__setattr__(self, "layer_plans", tuple(self.layer_plans))
        if not self.layer_plans:
            raise ValueError("a network needs at least one layer")
        if any(p.num_modes != self.num_modes for p in self.layer_plans):
            raise ValueError("layer plans disagree with num_modes")
        if self.nonlinearity.kind == "QD" and len(self.nonlinearity.detunings) != self.num_layers - 1:
            raise ValueError(
                f"QD networks need one detuning per nonlinear layer ({self.num_layers - 1}), "
                f"got {len(self.nonlinearity.detunings)}"
            )
        if self.buffer < 0:
            raise ValueError("buffer must be non-negative")

    @property
    def num_layers(self) -> int:
        return len(self.layer_plans)

    def unitaries(self) -> list[np.ndarray]:
        return [reconstruct(p) for p in self.layer_plans]

    def to_dict(self) -> dict:
        return {
            "N": self.num_modes,
            "layers": [p.to_dict() for p in self.layer_plans],
            "nonlinearity": asdict(self.nonlinearity),
            "buffer": self.buffer,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        nl = d.get("nonlinearity", {})
        return cls(
            int(d["N"]),
            tuple(MeshPlan.from_dict(p) for p in d["layers"]),
            Nonlinearity(**{**nl, "detunings": tuple(nl.get("detunings", ()))}),
            int(d.get("buffer", 1)),
        )


def linear_unitary(spec: NetworkSpec) -> np.ndarray:
    """Single-photon transfer matrix with every nonlinearity replaced by the identity."""
    U = np.eye(spec.num_modes, dtype=complex)
    for Ul in spec.unitaries():
        U = Ul @ U
    return U


def system_function(spec: NetworkSpec, num_photons: int = 2) -> np.ndarray:
    """Fock-space transfer matrix of a network with no or Kerr nonlinearity.

    Raises:
        ValueError: for emitter nonlinearities, whose outputs carry wavefunctions
    """
    if spec.nonlinearity.kind == "QD":
        raise ValueError("emitter networks distort wavepackets; use propagate_extended")
    basis = enumerate_basis(spec.num_modes, num_photons)
    kerr = kerr_phases(basis, spec.nonlinearity.phase if spec.nonlinearity.kind == "KERR" else 0.0)
    S = None
    for Ul in spec.unitaries():
        P = lift(Ul, num_photons)
        S = P if S is None else P @ (kerr[:, None] * S)
    return S


@dataclass(frozen=True)
class ExtendedState:
    """Two-photon state whose Fock components each carry a joint spectral amplitude.

    Attributes:
        basis: two-photon Fock basis
        grid: frequency grid shared by all attachments
        attachments: array (D, M, M), exchange-symmetric in the two frequency arguments
    """

    basis: FockBasis
    grid: FrequencyGrid
    attachments: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.attachments, dtype=complex)
        M = self.grid.points
        if a.shape != (self.basis.dim, M, M):
            raise ValueError(f"attachments have shape {a.shape}, expected {(self.basis.dim, M, M)}")
        object.__setattr__(self, "attachments", a)
        if self.norm > 1 + 1e-6:
            raise ValueError(f"extended state norm {self.norm} exceeds 1")

    @property
    def populations(self) -> np.ndarray:
        return np.sum(np.abs(self.attachments) ** 2, axis=(1, 2)) * self.grid.spacing**2

    @property
    def norm(self) -> float:
        return float(self.populations.sum())

    def density_matrix(self) -> DensityMatrix:
        """Reduced state on the Fock labels with frequencies traced out."""
        flat = self.attachments.reshape(self.basis.dim, -1)
        rho = flat @ flat.conj().T * self.grid.spacing**2
        return DensityMatrix(self.basis, 0.5 * (rho + rho.conj().T))

    def amplitude(self, index: int) -> TwoPhotonAmplitude:
        return TwoPhotonAmplitude(self.grid, self.attachments[index])

    @classmethod
    def product_input(cls, basis, grid, amplitudes, sigma_p: float) -> "ExtendedState":
        g = gaussian_wavepacket(grid, 0.0, sigma_p)
        return cls(basis, grid, np.asarray(amplitudes)[:, None, None] * np.outer(g, g)[None])


def propagate_extended(spec: NetworkSpec, state: ExtendedState) -> ExtendedState:
    """Propagate a two-photon extended state through an emitter network, attachment by attachment.

    Raises:
        ValueError: if the network is not an emitter network or the basis does not match
    """
    if spec.nonlinearity.kind != "QD":
        raise ValueError("propagate_extended needs an emitter (QD) network")
    if state.basis.num_modes != spec.num_modes or state.basis.num_photons != 2:
        raise ValueError("extended state basis does not match the network")
    grid, att = state.grid, state.attachments
    double = state.basis.multi_occupied
    for layer, Ul in enumerate(spec.unitaries()):
        att = np.tensordot(lift(Ul, 2), att, axes=(1, 0))
        if layer == spec.num_layers - 1:
            break
        params = spec.nonlinearity.qd_params(layer)
        t = t_coeff(grid.omega, params)
        tt = np.outer(t, t)
        out = np.empty_like(att)
        for i in range(len(att)):
            if double[i]:
                out[i] = scatter_two(TwoPhotonAmplitude(grid, att[i]), params, sym_tol=1e-8).values
            else:
                out[i] = tt * att[i]
        att = out
    return ExtendedState(state.basis, grid, att)


class WavefunctionFamily:
    """Joint spectral amplitudes reachable from a product Gaussian through a chain of emitter layers.

    Member ``j`` records, bit by bit, whether each emitter layer scattered the pair separately (0) or
    jointly (1). ``gram[a, b] = <W_a | W_b>`` on the grid.
    """

    def __init__(self, grid: FrequencyGrid, sigma_p: float, tau_qd: float, detunings):
        self.grid = grid
        g = gaussian_wavepacket(grid, 0.0, sigma_p)
        family = [np.outer(g, g)]
        for delta in detunings:
            params = QDParams(tau_qd, float(delta))
            t = t_coeff(grid.omega, params)
            tt = np.outer(t, t)
            nxt = []
            for W in family:
                nxt.append(tt * W)
                nxt.append(scatter_two(TwoPhotonAmplitude(grid, W), params, sym_tol=1e-8).values)
            family = nxt
        self.members = np.array(family)
        flat = self.members.reshape(len(family), -1)
        self.gram = flat.conj() @ flat.T * grid.spacing**2


def family_coefficients(lifts, double_mask: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Coefficients of output Fock amplitudes on the wavefunction family.

    Args:
        lifts: per layer, lifted transfer matrices of shape (..., D, D)
        double_mask: boolean (D,) marking doubly occupied states
        inputs: input Fock amplitudes (K, D)

    Returns:
        array (..., D, K, 2^(L-1))
    """
    single = (~double_mask).astype(float)[:, None, None]
    double = double_mask.astype(float)[:, None, None]
    coef = inputs.T[..., None].astype(complex)
    for layer, P in enumerate(lifts):
        coef = np.einsum("...od,...dkj->...okj", P, coef)
        if layer < len(lifts) - 1:
            split = np.empty(coef.shape[:-1] + (2 * coef.shape[-1],), dtype=complex)
            split[..., 0::2] = coef * single
            split[..., 1::2] = coef * double
            coef = split
    return coef


def family_density(coef: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Reduced density matrices rho[..., k, o, o'] from family coefficients (..., D, K, J)."""
    return np.einsum("...okj,...ij,...pki->...kop", coef, gram, coef.conj())


def family_populations(coef: np.ndarray, gram: np.ndarray) -> np.ndarray:
    """Output populations (..., D, K); ``gram`` may carry the same leading batch axes."""
    return np.einsum("...okj,...ij,...oki->...ok", coef, gram, coef.conj()).real


@dataclass(frozen=True)
class LossBudget:
    """Fractional losses per traversal and fibre parameters of the two-loop architecture.

    Attributes:
        alpha_mzi, alpha_switch, alpha_ps, alpha_chip: loss per pass through each component
        fiber_attenuation: fractional loss per metre of fibre
        group_index: fibre group index (group velocity c / n)
        tau_b: time-bin duration in ns
    """

    alpha_mzi: float = 0.0
    alpha_switch: float = 0.0
    alpha_ps: float = 0.0
    alpha_chip: float = 0.0
    fiber_attenuation: float = 0.0
    group_index: float = 1.46
    tau_b: float = 10.0

    def __post_init__(self):
        for name in ("alpha_mzi", "alpha_switch", "alpha_ps", "alpha_chip", "fiber_attenuation"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")

    @property
    def group_velocity(self) -> float:
        """Metres per ns."""
        return 0.299792458 / self.group_index


def omega_mzi(num_modes: int) -> int:
    """MZI passes per mode in one linear layer."""
    return num_modes + 2 - num_modes % 2


def omega_switch(num_modes: int) -> int:
    """Switch passes per mode in one linear layer (defined for N >= 4)."""
    if num_modes < 4:
        raise ValueError(f"switch pass count is defined for N >= 4, got {num_modes}")
    return (num_modes - 4) // 2 + 6


def layer_fiber_length(num_modes: int, budget: LossBudget) -> float:
    return 0.5 * (num_modes + 1) * (num_modes + 2) * budget.tau_b * budget.group_velocity


def linear_layer_transmissivity(num_modes: int, budget: LossBudget) -> float:
    fiber = (1 - budget.fiber_attenuation) ** layer_fiber_length(num_modes, budget)
    n_sw = omega_switch(num_modes)
    return (
        (1 - budget.alpha_mzi) ** omega_mzi(num_modes)
        * (1 - budget.alpha_switch) ** n_sw
        * (1 - budget.alpha_ps)
        * (1 - budget.alpha_chip) ** (2 * (n_sw - 1))
        * fiber
    )


def nonlinear_segment_transmissivity(buffer: int, budget: LossBudget) -> float:
    return (1 - budget.fiber_attenuation) ** (buffer * budget.tau_b * budget.group_velocity)


def transmissivity(spec: NetworkSpec, budget: LossBudget) -> float:
    """Overall photon transmissivity ``1 - alpha`` of a network under a loss budget."""
    L = spec.num_layers
    lin = linear_layer_transmissivity(spec.num_modes, budget) ** L
    return lin * nonlinear_segment_transmissivity(spec.buffer, budget) ** (L - 1)


def operational_rate(eta: float, alpha: float, n_t: int, tau_b: float) -> float:
    """Successful operations per unit time, ``eta (1 - alpha) / (n_t tau_b)``.

    Raises:
        ValueError: if ``n_t`` is not positive or the inputs leave their ranges
    """
    if n_t <= 0:
        raise ValueError("n_t must be positive")
    if not (0 <= eta <= 1 + 1e-12 and 0 <= alpha <= 1 and tau_b > 0):
        raise ValueError("eta and alpha must lie in [0, 1] and tau_b must be positive")
    return eta * (1 - alpha) / (n_t * tau_b)


@dataclass(frozen=True)
class EvaluationReport:
    """Figures of merit of a network on a task.

    ``F`` is the mean over inputs of the success probability conditioned on a logical outcome;
    ``F_ensemble`` is the ratio of total success to total logical probability. ``C_avg`` carries the
    ``(1 - alpha)`` factor, ``C_unscaled`` does not.
    """

    task: str
    V: float
    F: float
    F_ensemble: float
    eta: float
    C_avg: float
    C_unscaled: float
    alpha: float
    n_t: int
    tau_b: float
    r: float
    fid: tuple[float, ...]
    eta_per_input: tuple[float, ...]
    probabilities: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("task", "V", "F", "F_ensemble", "eta", "C_avg", "C_unscaled")}
        d.update(alpha=self.alpha, n_t=self.n_t, tau_b=self.tau_b, r=self.r)
        d.update(fid=list(self.fid), eta_per_input=list(self.eta_per_input))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def task_fidelity(task: TaskDefinition, k: int, rho: DensityMatrix) -> float:
    """Success of input ``k``: fidelity with the CNOT target, or population on the assigned outcomes."""
    if task.target_vectors is not None:
        t = task.target_vectors[k]
        return uhlmann_fidelity(np.outer(t, t.conj()), rho)
    return float(rho.populations[list(task.targets[k])].sum())


def output_states(
    spec: NetworkSpec,
    task: TaskDefinition,
    visibility: float = 1.0,
    grid: FrequencyGrid | None = None,
    sigma_p: float = 1.0,
) -> list[DensityMatrix]:
    """Reduced output density matrix for each task input at the given visibility."""
    from .distinguishability import labeled_pair_populations

    if task.num_modes != spec.num_modes:
        raise ValueError("task and network disagree on the number of modes")
    basis = task.basis
    if spec.nonlinearity.kind == "QD":
        grid = grid or FrequencyGrid.default(sigma_p, spec.nonlinearity.tau_qd)
        fam = WavefunctionFamily(grid, sigma_p, spec.nonlinearity.tau_qd, spec.nonlinearity.detunings)
        lifts = [lift(U, 2) for U in spec.unitaries()]
        coef = family_coefficients(lifts, basis.multi_occupied, task.inputs)
        rhos = family_density(coef, fam.gram)
    else:
        S = system_function(spec, 2)
        out = S @ task.inputs.T
        rhos = np.einsum("ok,pk->kop", out, out.conj())
    V = float(visibility)
    input_fidelity(V)
    states = []
    U_lin = linear_unitary(spec) if V < 1 else None
    for k in range(task.num_inputs):
        rho = V * rhos[k]
        if V < 1:
            rho = rho + (1 - V) * np.diag(labeled_pair_populations(U_lin, task.pair_inputs[k], basis))
        states.append(DensityMatrix(basis, 0.5 * (rho + rho.conj().T)))
    return states


def network_steps(spec: NetworkSpec) -> int:
    """Measured step count of the composed two-loop schedule for this network."""
    from .scheduler import compile_schedule, compose_layers

    schedules = [compile_schedule(p, 0) for p in spec.layer_plans]
    return compose_layers(schedules, spec.buffer if spec.num_layers > 1 else 0).n_t


def evaluate(
    spec: NetworkSpec,
    task: TaskDefinition,
    visibility: float = 1.0,
    budget: LossBudget | None = None,
    alpha: float | None = None,
    n_t: int | None = None,
    tau_b: float | None = None,
    grid: FrequencyGrid | None = None,
    sigma_p: float = 1.0,
) -> EvaluationReport:
    """Fidelity, efficiency, cost and rate of ``spec`` on ``task``.

    Loss enters through ``alpha`` if given, otherwise through ``budget`` (lossless when both are absent).
    ``n_t`` defaults to the measured step count of the compiled schedule.
    """
    states = output_states(spec, task, visibility, grid, sigma_p)
    f_in = input_fidelity(visibility)
    fid = np.array([task_fidelity(task, k, rho) for k, rho in enumerate(states)])
    cb = task.cb_indices
    eta_k = np.array([rho.populations[cb].sum() for rho in states])
    if alpha is None:
        alpha = 1.0 - transmissivity(spec, budget) if budget is not None else 0.0
    if tau_b is None:
        tau_b = budget.tau_b if budget is not None else 10.0
    if n_t is None:
        n_t = network_steps(spec)
    eta = float(eta_k.mean())
    cond = np.divide(fid, eta_k, out=np.zeros_like(fid), where=eta_k > 0)
    c_unscaled = float(np.mean(1 - fid / f_in))
    probs = np.array([rho.populations[cb] for rho in states])
    return EvaluationReport(
        task=task.kind,
        V=float(visibility),
        F=float(cond.mean()),
        F_ensemble=float(fid.sum() / eta_k.sum()) if eta_k.sum() > 0 else 0.0,
        eta=eta,
        C_avg=(1 - alpha) * c_unscaled,
        C_unscaled=c_unscaled,
        alpha=float(alpha),
        n_t=int(n_t),
        tau_b=float(tau_b),
        r=operational_rate(min(eta, 1.0), alpha, n_t, tau_b),
        fid=tuple(float(x) for x in fid),
        eta_per_input=tuple(float(x) for x in eta_k),
        probabilities=probs,
    )


def hinton_table(report: EvaluationReport) -> np.ndarray:
    """Input x logical-output probabilities renormalized to the computational basis."""
    p = report.probabilities
    return p / np.maximum(p.sum(axis=1, keepdims=True), 1e-300)


def calibrate_budget(target_alpha: float, num_modes: int = 6, tau_b: float = 10.0, fiber_db_per_km: float = 0.2):
    """Uniform component loss reproducing a target single-layer loss for an ``num_modes`` mesh.

    Fibre loss is fixed from ``fiber_db_per_km``; the MZI, switch, phase-shifter and chip-coupling losses
    share one value solved by bisection.
    """
    from scipy.optimize import brentq

    fiber = 1 - 10 ** (-fiber_db_per_km / 10 / 1000)

    def miss(a):
        b = LossBudget(a, a, a, a, fiber, tau_b=tau_b)
        return 1 - linear_layer_transmissivity(num_modes, b) - target_alpha

    if miss(0.0) > 0:
        raise ValueError("fibre loss alone exceeds the target")
    a = brentq(miss, 0.0, 0.5, xtol=1e-15)
    return LossBudget(a, a, a, a, fiber, tau_b=tau_b)


LOSS_PRESETS = {"lossless": LossBudget()}


def loss_preset(name: str) -> LossBudget:
    """Named loss budgets. "linear_cnot_sota" is calibrated to 36% loss for the 6-mode linear CNOT."""
    if name == "linear_cnot_sota":
        return calibrate_budget(0.36, 6)
    if name in LOSS_PRESETS:
        return LOSS_PRESETS[name]
    raise ValueError(f"unknown loss preset {name!r}")
