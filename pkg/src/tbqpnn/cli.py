"""Command-line harness: configuration, experiment orchestration and result persistence.

Every run writes into ``--out``: a ``manifest.json`` (config hash, code version, seed, command), the
command's records as JSON or JSON lines, and plot-ready CSV tables whose headers carry units in brackets.
Times are in ns, angular frequencies in rad/ns and angles in rad.

Exit codes: 0 success, 1 invalid input, 2 verification failure, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_VALIDATION, EXIT_VERIFICATION, EXIT_NUMERICAL = 0, 1, 2, 3
THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class ConfigError(ValueError):
    """Invalid configuration; the message lists every offending field."""


class VerificationFailure(RuntimeError):
    """A computed artifact failed its consistency check."""


class NumericalFailure(RuntimeError):
    """A computation produced no finite result."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Settings shared by the experiment subcommands.

    Attributes:
        task: "CNOT", "BSA" or "LINEAR_CNOT"
        num_modes, num_layers: network size
        nonlinearity: "NONE", "KERR" or "QD"
        kerr_phase: Kerr phase per photon pair [rad]
        sigma_p: photon temporal width [ns]
        tau_qd: initial emitter lifetime [ns]; defaults to sigma_p
        visibility: HOM visibility used for training and evaluation
        sigma_j: timing-jitter FWHM [ns]; when set, the visibility is derived from it
        jitter_samples: Monte Carlo samples of the jitter
        loss_preset: named loss budget for evaluation
        alpha: aggregate loss, overriding the preset
        n_t: step count for the rate, overriding the measured schedule
        tau_b: time-bin duration [ns]
        grid_points, eval_grid_points: frequency samples for training and for evaluation
        epochs, trials, seed, learning_rate: training settings
        buffer: nonlinear-loop buffer steps
        network: path to a network JSON written by ``train``, or "linear_cnot"
        sweep_visibilities: visibilities of the visibility sweep
        sweep_sigma_j: jitter widths [ns] of the visibility sweep (used instead when non-empty)
        online: retrain at each swept visibility in addition to evaluating the fixed network
        fractions: filter thresholds of the filter scan
        mask_fractions: thresholds whose masks are exported
    """

    task: str = "CNOT"
    num_modes: int = 4
    num_layers: int = 2
    nonlinearity: str = "KERR"
    kerr_phase: float = math.pi
    sigma_p: float = 1.0
    tau_qd: float | None = None
    visibility: float = 1.0
    sigma_j: float | None = None
    jitter_samples: int = 200
    loss_preset: str | None = None
    alpha: float | None = None
    n_t: int | None = None
    tau_b: float = 10.0
    grid_points: int = 128
    eval_grid_points: int = 512
    epochs: int = 250
    trials: int = 100
    seed: int = 0
    learning_rate: float = 0.05
    buffer: int = 1
    network: str | None = None
    sweep_visibilities: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    sweep_sigma_j: tuple[float, ...] = ()
    online: bool = False
    fractions: tuple[float, ...] = tuple(round(0.05 * i, 2) for i in range(20))
    mask_fractions: tuple[float, ...] = (0.2, 0.5, 0.9)

    def __post_init__(self):
        for name in ("sweep_visibilities", "sweep_sigma_j", "fractions", "mask_fractions"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        errors = self.problems()
        if errors:
            raise ConfigError("invalid configuration:\n  " + "\n  ".join(errors))

    def problems(self) -> list[str]:
        """Field-level validation messages (empty when the config is valid)."""
        out = []

        def need(ok, name, msg):
            if not ok:
                out.append(f"{name}: {msg} (got {getattr(self, name)!r})")

        need(self.task.upper() in ("CNOT", "BSA", "LINEAR_CNOT"), "task", "must be CNOT, BSA or LINEAR_CNOT")
        need(self.nonlinearity.upper() in ("NONE", "KERR", "QD"), "nonlinearity", "must be NONE, KERR or QD")
        need(self.num_modes >= 2, "num_modes", "must be at least 2")
        need(self.task.upper() != "BSA" or self.num_modes >= 4, "num_modes", "a BSA needs at least 4 modes")
        need(self.num_layers >= 1, "num_layers", "must be at least 1")
        need(self.sigma_p > 0, "sigma_p", "must be positive")
        need(self.tau_qd is None or self.tau_qd > 0, "tau_qd", "must be positive")
        need(0 <= self.visibility <= 1, "visibility", "must lie in [0, 1]")
        need(self.sigma_j is None or self.sigma_j >= 0, "sigma_j", "must be non-negative")
        need(self.jitter_samples >= 1, "jitter_samples", "must be at least 1")
        need(self.alpha is None or 0 <= self.alpha < 1, "alpha", "must lie in [0, 1)")
        need(self.n_t is None or self.n_t >= 1, "n_t", "must be positive")
        need(self.tau_b > 0, "tau_b", "must be positive")
        for name in ("grid_points", "eval_grid_points"):
            M = getattr(self, name)
            need(M >= 64 and M & (M - 1) == 0, name, "must be a power of two >= 64")
        need(self.epochs >= 1, "epochs", "must be at least 1")
        need(self.trials >= 1, "trials", "must be at least 1")
        need(self.seed >= 0, "seed", "must be non-negative")
        need(self.learning_rate > 0, "learning_rate", "must be positive")
        need(self.buffer >= 0, "buffer", "must be non-negative")
        need(all(0 <= v <= 1 for v in self.sweep_visibilities), "sweep_visibilities", "values must lie in [0, 1]")
        need(all(v >= 0 for v in self.sweep_sigma_j), "sweep_sigma_j", "values must be non-negative")
        need(all(0 <= f < 1 for f in self.fractions), "fractions", "values must lie in [0, 1)")
        need(all(0 < f < 1 for f in self.mask_fractions), "mask_fractions", "values must lie in (0, 1)")
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"invalid configuration:\n  unknown fields {unknown}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"invalid configuration:\n  {exc}") from exc

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in dataclasses.asdict(self).items()}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    def train_config(self, **overrides):
        from .trainer import TrainConfig

        kw = dict(
            task=self.task,
            num_modes=self.num_modes,
            num_layers=self.num_layers,
            nonlinearity=self.nonlinearity,
            epochs=self.epochs,
            trials=self.trials,
            seed=self.seed,
            visibility=self.effective_visibility(),
            learning_rate=self.learning_rate,
            kerr_phase=self.kerr_phase,
            sigma_p=self.sigma_p,
            tau_init=self.tau_qd,
            grid_points=self.grid_points,
            eval_grid_points=self.eval_grid_points,
            buffer=self.buffer,
        )
        kw.update(overrides)
        return TrainConfig(**kw)

    def effective_visibility(self) -> float:
        if self.sigma_j is None:
            return self.visibility
        from .distinguishability import JitterModel, mean_visibility

        return mean_visibility(JitterModel(self.sigma_p, self.sigma_j, self.jitter_samples, self.seed))


@dataclass
class ResultStore:
    """Run directory with a manifest; all writes go through this object."""

    root: Path
    files: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.root = Path(self.root)
        self.root.mkdir(parents=True, exist_ok=True)

    def write_text(self, name: str, text: str) -> Path:
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.files.append(name)
        return path

    def write_bytes(self, name: str, blob: bytes) -> Path:
        path = self.root / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(blob)
        self.files.append(name)
        return path

    def write_json(self, name: str, obj) -> Path:
        return self.write_text(name, json.dumps(obj, indent=1, sort_keys=True) + "\n")

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return self.write_text(name, buf.getvalue())

    def write_manifest(self, command: str, config: ExperimentConfig | None, seed: int | None, extra: dict | None = None):
        from datetime import datetime, timezone

        manifest = {
            "command": command,
            "code_version": __version__,
            "config_hash": config.digest() if config else None,
            "config": config.to_dict() if config else None,
            "seed": seed,
            "files": sorted(self.files),
            "created": datetime.now(timezone.utc).isoformat(),
        }
        manifest.update(extra or {})
        (self.root / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


# ---- loading helpers ----


def read_complex_matrix(path: Path):
    """Read a JSON complex matrix.

    Accepted forms: ``{"real": [[...]], "imag": [[...]]}``, a nested list of numbers, or a nested list of
    ``[re, im]`` pairs.
    """
    import numpy as np

    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        if "real" not in data:
            raise ConfigError(f"{path}: matrix object needs a 'real' field")
        re = np.asarray(data["real"], dtype=float)
        im = np.asarray(data.get("imag", np.zeros_like(re)), dtype=float)
        if re.shape != im.shape:
            raise ConfigError(f"{path}: real and imag parts differ in shape")
        M = re + 1j * im
    else:
        arr = np.asarray(data, dtype=float)
        M = arr[..., 0] + 1j * arr[..., 1] if arr.ndim == 3 and arr.shape[-1] == 2 else arr.astype(complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError(f"{path}: expected a square matrix, got shape {M.shape}")
    return M


def write_complex_matrix(M) -> dict:
    import numpy as np

    M = np.asarray(M, dtype=complex)
    return {"real": M.real.tolist(), "imag": M.imag.tolist()}


def network_document(spec, task) -> dict:
    return {
        "network": spec.to_dict(),
        "task": task.kind if task.kind != "CNOT" or task.num_modes == 4 else "LINEAR_CNOT",
        "assignment": task.assignment.to_dict() if task.assignment else None,
    }


def load_network(config: ExperimentConfig, base: Path | None = None):
    """Network and task named by ``config.network``."""
    from .engine import NetworkSpec, Nonlinearity
    from .mesh import clements_decompose
    from .tasks import OutcomeAssignment, bsa_task, linear_cnot_task, linear_cnot_unitary, make_task

    if config.network is None:
        raise ConfigError("invalid configuration:\n  network: required by this command")
    if config.network.lower() == "linear_cnot":
        spec = NetworkSpec(6, (clements_decompose(linear_cnot_unitary()),), Nonlinearity("NONE"), config.buffer)
        return spec, linear_cnot_task()
    path = Path(config.network)
    if not path.is_absolute() and base is not None:
        path = base / path
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"invalid configuration:\n  network: cannot read {path} ({exc})") from exc
    spec = NetworkSpec.from_dict(doc["network"])
    if doc.get("assignment"):
        task = bsa_task(spec.num_modes, OutcomeAssignment.from_dict(doc["assignment"]))
    else:
        task = make_task(doc.get("task", "CNOT"), spec.num_modes)
    return spec, task


def load_config(path: str | None, seed: int | None) -> tuple[ExperimentConfig, Path | None]:
    data, base = {}, None
    if path:
        p = Path(path)
        try:
            data = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        base = p.parent
    if seed is not None:
        data["seed"] = seed
    return ExperimentConfig.from_dict(data), base


def _grid(config: ExperimentConfig, spec, points: int):
    from .nonlinear import FrequencyGrid

    return FrequencyGrid.default(config.sigma_p, spec.nonlinearity.tau_qd, points)


# ---- subcommands ----


def cmd_decompose(args) -> int:
    import numpy as np

    from .mesh import clements_decompose, reconstruct

    U = read_complex_matrix(args.unitary)
    plan = clements_decompose(U)
    err = float(np.linalg.norm(reconstruct(plan) - U))
    store = ResultStore(args.out)
    store.write_text("plan.json", plan.to_json() + "\n")
    store.write_json("report.json", {"N": plan.num_modes, "mzis": len(plan.placements), "round_trip_error": err})
    store.write_manifest("decompose", None, None, {"input": str(args.unitary)})
    print(f"decomposed {plan.num_modes}x{plan.num_modes} unitary into {len(plan.placements)} MZIs; round trip {err:.2e}")
    if err > 1e-9:
        raise VerificationFailure(f"round-trip error {err:.3e} exceeds 1e-9")
    return EXIT_OK


def cmd_schedule(args) -> int:
    import numpy as np

    from .engine import NetworkSpec
    from .mesh import MeshPlan, reconstruct
    from .scheduler import ScheduleError, compile_schedule, compose_layers, simulate_schedule

    doc = json.loads(Path(args.plan).read_text())
    if "layers" in doc:
        spec = NetworkSpec.from_dict(doc)
        plans = list(spec.layer_plans)
    elif "network" in doc:
        plans = list(NetworkSpec.from_dict(doc["network"]).layer_plans)
    else:
        plans = [MeshPlan.from_dict(doc)]
    store = ResultStore(args.out)
    try:
        if len(plans) == 1:
            sched = compile_schedule(plans[0], args.buffer)
        else:
            sched = compose_layers([compile_schedule(p, 0) for p in plans], args.buffer)
        simulated = simulate_schedule(sched)
    except ScheduleError as exc:
        store.write_json("verification.json", {"status": "FAIL", "timestep": exc.timestep, "error": str(exc)})
        store.write_manifest("schedule", None, None, {"input": str(args.plan)})
        raise VerificationFailure(f"FAIL {exc}") from exc
    target = np.eye(plans[0].num_modes, dtype=complex)
    for p in plans:
        target = reconstruct(p) @ target
    err = float(np.linalg.norm(simulated - target))
    status = "PASS" if err < 1e-10 else "FAIL"
    report = {
        "status": status,
        "frobenius_error": err,
        "n_t": sched.n_t,
        "first_mode_span": sched.first_mode_span(0),
        "num_steps": sched.num_steps,
        "buffer": args.buffer,
    }
    table = sched.control_table()
    store.write_text("schedule.txt", table + "\n")
    store.write_text("schedule.json", sched.to_json() + "\n")
    store.write_json("verification.json", report)
    store.write_manifest("schedule", None, None, {"input": str(args.plan)})
    print(table)
    print(f"{status}: ||simulated - target||_F = {err:.2e}; first-mode span {report['first_mode_span']}; n_t {sched.n_t}")
    if status != "PASS":
        raise VerificationFailure(f"schedule does not reproduce the mesh unitary (error {err:.3e})")
    return EXIT_OK


def cmd_train(args) -> int:
    import numpy as np

    from .trainer import best_record, optimize, record_spec, record_task

    config, _ = load_config(args.config, args.seed)
    tc = config.train_config()
    records = optimize(tc)
    ok = [r for r in records if r.status == "ok" and np.isfinite(r.F)]
    store = ResultStore(args.out)
    store.write_text("records.jsonl", "".join(r.to_json() + "\n" for r in records))
    store.write_csv(
        "summary.csv",
        ["trial [1]", "final_cost [1]", "F [1]", "eta [1]", "status [text]"],
        ([r.trial, r.costs[-1], r.F, r.eta, r.status] for r in records),
    )
    store.write_csv(
        "costs.csv",
        ["epoch [1]"] + [f"trial_{r.trial} [1]" for r in records],
        ([e] + [r.costs[e] for r in records] for e in range(tc.epochs)),
    )
    if not ok:
        store.write_manifest("train", config, config.seed)
        raise NumericalFailure("no trial finished with a finite result")
    best = best_record(ok, eta_tol=1e-3)
    store.write_json("best_network.json", network_document(record_spec(best, tc), record_task(best, tc)))
    store.write_manifest("train", config, config.seed, {"best_trial": best.trial})
    print(f"trained {len(records)} trials; best trial {best.trial}: F = {best.F:.6f}, eta = {best.eta:.6f}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    import numpy as np

    from .engine import evaluate, hinton_table, loss_preset

    config, base = load_config(args.config, args.seed)
    spec, task = load_network(config, base)
    budget = loss_preset(config.loss_preset) if config.loss_preset else None
    grid = _grid(config, spec, config.eval_grid_points) if spec.nonlinearity.kind == "QD" else None
    rep = evaluate(
        spec,
        task,
        config.effective_visibility(),
        budget=budget,
        alpha=config.alpha,
        n_t=config.n_t,
        tau_b=config.tau_b if budget is None else None,
        grid=grid,
        sigma_p=config.sigma_p,
    )
    if not np.isfinite(rep.F):
        raise NumericalFailure("evaluation produced a non-finite fidelity")
    d = rep.to_dict()
    d["r_kHz"] = rep.r * 1e6
    store = ResultStore(args.out)
    store.write_json("report.json", d)
    H = hinton_table(rep)
    cols = task.cb_map.labels
    store.write_csv(
        "hinton.csv",
        ["input [label]"] + [f"{c} [1]" for c in cols],
        ([task.labels[k]] + [float(v) for v in H[k]] for k in range(H.shape[0])),
    )
    store.write_manifest("evaluate", config, config.seed)
    print(f"F = {rep.F:.6f}  eta = {rep.eta:.6f}  alpha = {rep.alpha:.4f}  n_t = {rep.n_t}  r = {rep.r * 1e6:.3f} kHz")
    return EXIT_OK


def cmd_visibility_sweep(args) -> int:
    from .distinguishability import JitterModel, input_fidelity, mean_visibility
    from .engine import evaluate
    from .trainer import best_record, optimize

    config, base = load_config(args.config, args.seed)
    spec, task = load_network(config, base)
    grid = _grid(config, spec, config.eval_grid_points) if spec.nonlinearity.kind == "QD" else None
    if config.sweep_sigma_j:
        points = [
            (sj, mean_visibility(JitterModel(config.sigma_p, sj, config.jitter_samples, config.seed)))
            for sj in config.sweep_sigma_j
        ]
    else:
        points = [(None, V) for V in config.sweep_visibilities]
    rows = []
    for sj, V in points:
        rep = evaluate(spec, task, V, n_t=1, grid=grid, sigma_p=config.sigma_p)
        row = ["" if sj is None else float(sj), float(V), input_fidelity(V), rep.F, rep.eta]
        if config.online:
            best = best_record(optimize(config.train_config(visibility=V)), eta_tol=1e-3)
            row += [best.F, best.eta]
        rows.append(row)
    header = ["sigma_j [ns]", "V [1]", "F_in [1]", "F_offline [1]", "eta_offline [1]"]
    if config.online:
        header += ["F_online [1]", "eta_online [1]"]
    store = ResultStore(args.out)
    store.write_csv("visibility_sweep.csv", header, rows)
    store.write_manifest("visibility-sweep", config, config.seed)
    for row in rows:
        print(", ".join(f"{v:.6g}" if isinstance(v, float) else str(v) for v in row))
    return EXIT_OK


def cmd_filter_scan(args) -> int:
    from .timegate import build_masks, filter_scan, gated_outputs, mask_csv, scan_csv, window_extent

    config, base = load_config(args.config, args.seed)
    spec, task = load_network(config, base)
    outputs = gated_outputs(spec, task, _grid(config, spec, config.eval_grid_points), config.sigma_p)
    fractions = sorted(set(config.fractions) | set(config.mask_fractions))
    results = filter_scan(outputs, fractions)
    store = ResultStore(args.out)
    store.write_text("filter_scan.csv", scan_csv(results))
    windows = []
    for f in config.mask_fractions:
        for m in build_masks(outputs, f):
            name = f"masks/f{f:.3f}_m{m.outcome[0]}{m.outcome[1]}.csv"
            store.write_text(name, mask_csv(m, outputs.times))
            windows.append([f, f"{m.outcome[0]}-{m.outcome[1]}", window_extent(m, outputs.times)])
    store.write_csv("windows.csv", ["f [1]", "outcome [modes]", "window [ns]"], windows)
    for k in range(outputs.density.shape[0]):
        for dist in outputs.distributions(k):
            store.write_bytes(f"distributions/input{k}_m{dist.outcome[0]}{dist.outcome[1]}.bin", dist.to_bytes())
    store.write_manifest("filter-scan", config, config.seed)
    for r in results:
        print(f"f = {r.fraction:.3f}  F = {r.F:.6f}  eta = {r.eta:.6f}")
    return EXIT_OK


def cmd_calibrate_loss(args) -> int:
    from .engine import calibrate_budget, linear_layer_transmissivity

    config, _ = load_config(args.config, args.seed)
    if config.alpha is None:
        raise ConfigError("invalid configuration:\n  alpha: calibrate-loss needs a target loss")
    budget = calibrate_budget(config.alpha, config.num_modes, config.tau_b)
    achieved = 1 - linear_layer_transmissivity(config.num_modes, budget)
    if abs(achieved - config.alpha) > 1e-9:
        raise VerificationFailure(f"calibrated loss {achieved:.12f} misses the target {config.alpha}")
    store = ResultStore(args.out)
    doc = {k: getattr(budget, k) for k in ("alpha_mzi", "alpha_switch", "alpha_ps", "alpha_chip", "fiber_attenuation")}
    doc.update(group_index=budget.group_index, tau_b=budget.tau_b, alpha=achieved, num_modes=config.num_modes)
    store.write_json("loss_budget.json", doc)
    store.write_manifest("calibrate-loss", config, config.seed)
    print(f"per-component loss {budget.alpha_mzi:.6g} reproduces alpha = {achieved:.6f} for N = {config.num_modes}")
    return EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "schedule": cmd_schedule,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "filter-scan": cmd_filter_scan,
    "visibility-sweep": cmd_visibility_sweep,
    "calibrate-loss": cmd_calibrate_loss,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tbqpnn", description="Time-bin QPNN simulation and training.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="experiment config (JSON)")
        p.add_argument("--out", default="run", help="run directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--threads", type=int, default=None, help="BLAS threads")

    p = sub.add_parser("decompose", help="decompose a unitary into an MZI mesh")
    p.add_argument("unitary", type=Path, help="JSON complex matrix")
    common(p, config=False)
    p = sub.add_parser("schedule", help="compile and verify a two-loop schedule")
    p.add_argument("plan", type=Path, help="mesh plan or network JSON")
    p.add_argument("--buffer", type=int, default=0, help="nonlinear-loop steps")
    common(p, config=False)
    for name, text in (
        ("train", "train randomly initialized networks"),
        ("evaluate", "evaluate a network"),
        ("filter-scan", "time-filter scan of an emitter BSA"),
        ("visibility-sweep", "fidelity versus HOM visibility"),
        ("calibrate-loss", "fit a component loss budget to an aggregate loss"),
    ):
        common(sub.add_parser(name, help=text))
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("validation error: --threads must be positive", file=sys.stderr)
            return EXIT_VALIDATION
        for var in THREAD_VARS:
            os.environ[var] = str(args.threads)
    if args.seed is not None and args.seed < 0:
        print("validation error: --seed must be non-negative", file=sys.stderr)
        return EXIT_VALIDATION
    import numpy as np

    try:
        return COMMANDS[args.command](args)
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except (NumericalFailure, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
