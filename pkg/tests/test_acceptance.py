"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line (printed in the terminal summary) before asserting.
"""

import math
import time

import numpy as np
import pytest

from conftest import haar
from tbqpnn.distinguishability import JitterModel, input_fidelity, mean_visibility
from tbqpnn.engine import NetworkSpec, Nonlinearity, evaluate, operational_rate
from tbqpnn.fock import enumerate_basis, lift_unitary
from tbqpnn.mesh import clements_decompose, reconstruct
from tbqpnn.nonlinear import (
    FrequencyGrid,
    QDParams,
    gaussian_wavepacket,
    product_amplitude,
    scatter_two,
    separate_scatter,
    t_coeff,
    to_time_domain,
)
from tbqpnn.scheduler import compile_schedule, simulate_schedule
from tbqpnn.tasks import linear_cnot_task, linear_cnot_unitary, make_task
from tbqpnn.timegate import build_masks, filter_scan, gated_outputs, in_mask_probabilities, scan_csv
from tbqpnn.trainer import (
    TrainConfig,
    best_record,
    initial_parameters,
    make_objective,
    optimize,
    record_spec,
    record_task,
)

RESULTS: dict[int, str] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    return ok


# ---- shared training runs ----

CNOT_CONFIG = TrainConfig(task="CNOT", nonlinearity="KERR", trials=100, epochs=250, seed=0)
BSA_CONFIG = TrainConfig(task="BSA", nonlinearity="QD", num_layers=2, trials=100, epochs=250, seed=0, grid_points=128)


@pytest.fixture(scope="module")
def qd_bsa_run():
    t0 = time.perf_counter()
    records = optimize(BSA_CONFIG)
    return records, time.perf_counter() - t0


def _linear_cnot_spec():
    return NetworkSpec(6, (clements_decompose(linear_cnot_unitary()),), Nonlinearity("NONE"))


# ---- property helpers shared by criteria 5, 6 and 7 ----


def scattering_properties(tau: float, detuning: float, sigma_p: float = 1.0) -> dict:
    params = QDParams(tau, detuning)
    grid = FrequencyGrid.default(sigma_p, tau, 512)
    t = t_coeff(grid.omega, params)
    errs = []
    for M in (512, 1024, 2048):
        g = FrequencyGrid(grid.spacing * M / 2, M)
        psi = product_amplitude(g, gaussian_wavepacket(g, 0.0, sigma_p))
        errs.append(abs(scatter_two(psi, params).norm - 1))
    return {
        "unit_modulus": float(np.max(np.abs(np.abs(t) - 1))),
        "resonance": complex(t_coeff(np.array([detuning]), params)[0]),
        "norm_errors": errs,
    }


def scattering_ok(p: dict) -> bool:
    e = p["norm_errors"]
    return p["unit_modulus"] < 1e-12 and p["resonance"] == -1 and e[0] < 1e-4 and e[1] < e[0] and e[2] < e[1]


def filtering_properties(outputs, fractions) -> dict:
    results = filter_scan(outputs, fractions)
    eta = [r.eta for r in results]
    ident = 0.0
    for f, r in zip(fractions, results):
        p = in_mask_probabilities(outputs, build_masks(outputs, f))
        own = outputs.owner[None, :] == np.arange(p.shape[0])[:, None]
        ident = max(ident, abs(r.F * sum(r.logical) + (p * ~own).sum() - p.sum()))
    return {
        "results": results,
        "monotone": all(b <= a for a, b in zip(eta, eta[1:])),
        "bookkeeping": ident,
        "csv": scan_csv(results),
    }


FRACTIONS = [round(0.01 * i, 2) for i in range(100)] + [0.995]


# ---- criteria ----


def test_criterion_1_scheduler_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    for i in range(50):
        N = (4, 5, 6, 7)[i % 4]
        plan = clements_decompose(haar(N, 1000 + i))
        sched = compile_schedule(plan, 0)
        worst = max(worst, float(np.linalg.norm(simulate_schedule(sched) - reconstruct(plan))))
    span = compile_schedule(clements_decompose(haar(6, 7)), 0).first_mode_span(0)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and span == 28 and elapsed < 10
    assert record(1, ok, f"max Frobenius error {worst:.1e}, N=6 span {span}, {elapsed:.1f} s")


def test_criterion_2_linear_cnot_curve():
    t0 = time.perf_counter()
    spec, task = _linear_cnot_spec(), linear_cnot_task()
    reps = {V: evaluate(spec, task, V, n_t=28) for V in (1.0, 0.5, 0.0)}
    elapsed = time.perf_counter() - t0
    ok = (
        abs(reps[1.0].F - 1) <= 1e-6
        and abs(reps[1.0].eta - 1 / 9) <= 1e-9
        and abs(reps[0.5].F - 0.75) <= 0.01
        and abs(reps[0.0].F - 0.67) <= 0.01
        and elapsed < 5
    )
    detail = ", ".join(f"F({V})={r.F:.4f}" for V, r in reps.items()) + f", eta(1)={reps[1.0].eta:.10f}"
    assert record(2, ok, detail + f", {elapsed:.2f} s")


def test_criterion_3_rates():
    r1 = operational_rate(1 / 9, 0.0, 28, 10.0) * 1e6  # 1/ns -> kHz
    r2 = operational_rate(1 / 9, 0.36, 28, 10.0) * 1e6
    r3 = operational_rate(1.0, 0.0, 58, 10.0) * 1e3  # 1/ns -> MHz
    ok = abs(r1 - 396.8) <= 0.1 and abs(r2 - 254) <= 1 and abs(r3 - 1.724) <= 0.01
    assert record(3, ok, f"{r1:.2f} kHz, {r2:.2f} kHz, {r3:.4f} MHz")


@pytest.mark.slow
def test_criterion_4_kerr_cnot_training():
    t0 = time.perf_counter()
    records = optimize(CNOT_CONFIG)
    good = [r for r in records if r.F > 0.999 and abs(r.eta - 1) <= 1e-6]
    best = max(good or records, key=lambda r: r.F)
    spec, task = record_spec(best, CNOT_CONFIG), make_task("CNOT")
    vs = (0.0, 0.25, 0.5, 0.75, 1.0)
    offline = {V: evaluate(spec, task, V, n_t=1).F for V in vs}
    online = {}
    for V in vs:
        run = records if V == 1.0 else optimize(TrainConfig(**{**CNOT_CONFIG.__dict__, "visibility": V}))
        top = min((r for r in run if r.status == "ok"), key=lambda r: r.costs[-1])
        online[V] = top.F
    gap = max(abs(offline[V] - online[V]) for V in vs)
    elapsed = time.perf_counter() - t0
    ok = bool(good) and gap <= 1e-3 and abs(offline[0.0] - 0.5) <= 0.01 and elapsed < 600
    detail = (
        f"{len(good)}/100 trials with F>0.999 and eta=1, best F={best.F:.6f}; "
        f"offline F(V)={[round(offline[V], 4) for V in vs]}, max offline-online gap {gap:.1e}; {elapsed:.0f} s"
    )
    assert record(4, ok, detail)


def test_criterion_5_scattering_physics():
    t0 = time.perf_counter()
    p = scattering_properties(1.0, 0.0)
    g = FrequencyGrid.default(1.0, 1.0, 512)
    psi = product_amplitude(g, gaussian_wavepacket(g, 0.0, 1.0))
    qd = QDParams(1.0, 0.0)
    joint = scatter_two(psi, qd)
    imag = max(
        float(np.max(np.abs(tt.imag)) / np.max(np.abs(tt)))
        for tt in (to_time_domain(joint), to_time_domain(separate_scatter(psi, qd)))
    )
    c = g.points // 2
    centre = to_time_domain(joint).real[c - 1 : c + 1, c - 1 : c + 1]
    # detuned emitter: resonance still maps to -1
    off = t_coeff(np.array([0.7]), QDParams(0.8, 0.7))[0]
    elapsed = time.perf_counter() - t0
    ok = scattering_ok(p) and off == -1 and imag < 1e-6 and bool(np.all(centre < 0)) and elapsed < 60
    detail = (
        f"max||t|-1|={p['unit_modulus']:.1e}, norm errors (512/1024/2048)="
        f"{', '.join(f'{e:.1e}' for e in p['norm_errors'])}, max imag ratio {imag:.1e}, "
        f"centre {centre.max():.3f}; {elapsed:.1f} s"
    )
    assert record(5, ok, detail)


@pytest.mark.slow
def test_criterion_6_qd_bsa_training(qd_bsa_run):
    records, elapsed = qd_bsa_run
    ok_records = [r for r in records if r.status == "ok"]
    unit = [r for r in ok_records if abs(r.eta - 1) <= 1e-3]
    best = max(unit, key=lambda r: r.F) if unit else best_record(records)
    a = bool(unit) and best.F >= 0.75
    spec, task = record_spec(best, BSA_CONFIG), record_task(best, BSA_CONFIG)
    nl = spec.nonlinearity
    sp = scattering_properties(nl.tau_qd, nl.detunings[0])
    fp = filtering_properties(gated_outputs(spec, task, FrequencyGrid.default(1.0, nl.tau_qd, 512)), FRACTIONS)
    unfiltered = fp["results"][0].F
    gain = max(r.F for r in fp["results"]) - unfiltered
    b = scattering_ok(sp) and fp["monotone"] and fp["bookkeeping"] < 1e-9 and gain > 0
    c = all(np.all(np.diff(np.minimum.accumulate(r.costs)) <= 0) for r in records)
    ok = a and b and c and elapsed < 7200
    detail = (
        f"(a) {len(unit)}/{len(records)} trials with eta=1+-1e-3, best F={best.F:.4f} eta={best.eta:.5f} "
        f"tau={nl.tau_qd:.4f} delta={nl.detunings[0]:.2e}; (b) norm error {sp['norm_errors'][0]:.1e}, "
        f"filter gain {gain:.3f}; (c) min-so-far non-increasing: {c}; training {elapsed:.0f} s"
    )
    assert record(6, ok, detail)


@pytest.mark.slow
def test_criterion_7_time_filtering(qd_bsa_run, tmp_path):
    records, _ = qd_bsa_run
    t0 = time.perf_counter()
    ok_records = [r for r in records if r.status == "ok"]
    monotone = True
    scans = {}
    # every distinct trained model up to rounding of the final cost
    distinct = {}
    for r in sorted(ok_records, key=lambda r: r.costs[-1]):
        distinct.setdefault(round(r.costs[-1], 6), r)
    for r in distinct.values():
        spec, task = record_spec(r, BSA_CONFIG), record_task(r, BSA_CONFIG)
        grid = FrequencyGrid.default(1.0, spec.nonlinearity.tau_qd, 512)
        fp = filtering_properties(gated_outputs(spec, task, grid), FRACTIONS)
        monotone &= fp["monotone"]
        scans[r.trial] = fp
    high = {t: fp for t, fp in scans.items() if fp["results"][0].F >= 0.9}
    path = tmp_path / "filter_scan.csv"
    first = next(iter(scans.values()))
    path.write_text(first["csv"])
    emitted = path.read_text().splitlines()[0].startswith("f [1],F [1],eta [1]")
    if high:
        improves = all(max(r.F for r in fp["results"]) > fp["results"][0].F for fp in high.values())
        cond = f"{len(high)} model(s) with unfiltered F>=0.9, all improved by filtering: {improves}"
    else:
        improves = False
        cond = "no trained model reached unfiltered F>=0.9"
    # informative: the best filtered points at F >= 0.99 and 0.995
    best_fp = max(scans.values(), key=lambda fp: fp["results"][0].F)
    info = []
    for target in (0.99, 0.995):
        hits = [r for r in best_fp["results"] if r.F >= target]
        info.append(f"F>={target}: eta={max(r.eta for r in hits):.3f}" if hits else f"F>={target}: not reached")
    elapsed = time.perf_counter() - t0
    ok = monotone and emitted and improves and elapsed < 300
    detail = f"{len(scans)} models scanned, eta monotone: {monotone}; {cond}; {'; '.join(info)}; {elapsed:.0f} s"
    assert record(7, ok, detail)


def test_criterion_8_property_suites():
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    hom_err = unit_err = 0.0
    for s in range(20):
        U, V = haar(4, 2 * s), haar(4, 2 * s + 1)
        hom_err = max(hom_err, float(np.linalg.norm(lift_unitary(U @ V, 2) - lift_unitary(U, 2) @ lift_unitary(V, 2))))
        P = lift_unitary(U, 2)
        unit_err = max(unit_err, float(np.linalg.norm(P.conj().T @ P - np.eye(len(P)))))
    b = enumerate_basis(2, 2)
    bs = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    hom_amp = abs((lift_unitary(bs, 2) @ b.ket((1, 1)))[b.index((1, 1))])
    sw = 0.0
    sym = np.array([[1, 0, 0, 0], [0, 1, 1, 0] / np.sqrt(2), [0, 0, 0, 1]], dtype=complex).T
    Q = np.column_stack([sym, np.array([0, 1, -1, 0]) / np.sqrt(2)])
    for s in range(20):
        U = haar(2, 500 + s)
        blk = Q.conj().T @ np.kron(U, U) @ Q
        sw = max(sw, abs(blk[3, 3] - np.linalg.det(U)), float(np.abs(blk[:3, :3] - lift_unitary(U, 2)).max()))
        sw = max(sw, float(np.abs(blk[:3, 3]).max()), float(np.abs(blk[3, :3]).max()))
    f_in = (input_fidelity(0.0), input_fidelity(1.0))
    v0 = mean_visibility(JitterModel(1.0, 0.0, 100, int(rng.integers(1000))))
    cfg = TrainConfig(num_layers=2, trials=4, seed=8)
    obj = make_objective(cfg, make_task("CNOT"))
    X = np.array([initial_parameters(cfg, i) for i in range(4)])
    ga, gf = obj.analytic_gradient(X), obj.fd_gradient(X)
    grad = float(np.max(np.abs(ga - gf)) / np.max(np.abs(gf)))
    elapsed = time.perf_counter() - t0
    ok = (
        hom_err < 1e-9
        and unit_err < 1e-9
        and hom_amp < 1e-12
        and sw < 1e-12
        and f_in == (0.5, 1.0)
        and v0 == 1.0
        and grad < 1e-4
        and elapsed < 60
    )
    detail = (
        f"homomorphism {hom_err:.1e}, unitarity {unit_err:.1e}, HOM |1,1> {hom_amp:.1e}, Schur-Weyl {sw:.1e}, "
        f"F_in endpoints {f_in}, V(sigma_j=0)={v0}, gradient rel. error {grad:.1e}; {elapsed:.1f} s"
    )
    assert record(8, ok, detail)
