import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import haar, seeds
from tbqpnn.distinguishability import input_fidelity
from tbqpnn.engine import NetworkSpec, Nonlinearity, evaluate, output_states
from tbqpnn.fock import uhlmann_fidelity
from tbqpnn.mesh import clements_decompose
from tbqpnn.tasks import assign_bsa_outcomes, bsa_task, make_task
from tbqpnn.trainer import (
    NetworkObjective,
    ParameterLayout,
    TrainConfig,
    TrainRecord,
    best_record,
    cost,
    initial_parameters,
    make_objective,
    optimize,
    record_spec,
    record_task,
    summary_csv,
    trial_task,
)


def rel_err(a, b):
    return np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-12)


class TestParameterLayout:
    @pytest.mark.parametrize("N,L,qd", [(4, 2, False), (4, 2, True), (6, 4, True), (5, 1, False), (3, 3, True)])
    def test_length_formula(self, N, L, qd):
        lay = ParameterLayout(N, L, qd)
        assert lay.size == L * (N * (N - 1) + N) + ((1 + (L - 1)) if qd else 0)

    def test_slices_partition_vector(self):
        lay = ParameterLayout(4, 3, True)
        covered = []
        for layer in range(3):
            for s in lay.layer_slices(layer):
                covered += list(range(s.start, s.stop))
        covered += list(range(lay.qd_slice.start, lay.qd_slice.stop))
        assert sorted(covered) == list(range(lay.size))

    def test_to_spec_reproduces_unitaries(self):
        lay = ParameterLayout(4, 2, False)
        x = np.random.default_rng(3).uniform(0, 2 * np.pi, lay.size)
        spec = lay.to_spec(x, Nonlinearity("KERR"))
        obj = NetworkObjective(make_task("CNOT"), 2, "KERR")
        for U, V in zip(obj.unitaries(x[None, None, :]), spec.unitaries()):
            np.testing.assert_allclose(U[0, 0], V, atol=1e-12)

    def test_qd_parameters_in_spec(self):
        lay = ParameterLayout(4, 3, True)
        x = np.zeros(lay.size)
        q = lay.qd_slice
        x[q.start] = math.log(0.5)
        x[q.start + 1 : q.stop] = [0.3, -0.2]
        spec = lay.to_spec(x, Nonlinearity("QD"))
        assert spec.nonlinearity.tau_qd == pytest.approx(0.5)
        assert spec.nonlinearity.detunings == (0.3, -0.2)


class TestCost:
    def test_identity_bsa_cost_in_range(self):
        spec = NetworkSpec(4, (clements_decompose(np.eye(4)),), Nonlinearity("NONE"))
        task = bsa_task(4, assign_bsa_outcomes(4, 0))
        C_avg, C = cost(spec, task)
        assert 0 < C <= 1

    def test_loss_scales_cost(self):
        spec = NetworkSpec(4, tuple(clements_decompose(haar(4, s)) for s in (1, 2)), Nonlinearity("KERR"))
        task = make_task("CNOT")
        C_avg, C = cost(spec, task, alpha=0.36)
        assert C_avg == pytest.approx(0.64 * C, rel=1e-12)

    @given(seed=seeds)
    @settings(max_examples=20, deadline=None)
    def test_random_cost_matches_pair_oracle(self, seed):
        spec = NetworkSpec(4, tuple(clements_decompose(haar(4, seed + i)) for i in range(2)), Nonlinearity("KERR"))
        task = make_task("CNOT")
        _, C = cost(spec, task)
        states = output_states(spec, task)
        direct = np.mean(
            [1 - uhlmann_fidelity(np.outer(t, t.conj()), rho) for t, rho in zip(task.target_vectors, states)]
        )
        assert C == pytest.approx(direct, abs=1e-9)
        assert 0 < C <= 1

    @pytest.mark.parametrize("V", [1.0, 0.7])
    def test_objective_matches_evaluate(self, V):
        cfg = TrainConfig(visibility=V, trials=3)
        obj = make_objective(cfg, make_task("CNOT"))
        X = np.array([initial_parameters(cfg, i) for i in range(3)])
        out = obj.forward(X[:, None, :])
        for i in range(3):
            rep = evaluate(obj.layout.to_spec(X[i], Nonlinearity("KERR")), make_task("CNOT"), V, n_t=1)
            assert out["cost"][i, 0] == pytest.approx(rep.C_unscaled, abs=1e-10)
            assert out["eta"][i, 0].mean() == pytest.approx(rep.eta, abs=1e-10)

    def test_cost_bounded_at_unit_visibility(self):
        cfg = TrainConfig(trials=20)
        obj = make_objective(cfg, make_task("CNOT"))
        X = np.array([initial_parameters(cfg, i) for i in range(20)])
        fid = obj.forward(X[:, None, :])["fid"]
        assert np.all(fid / input_fidelity(1.0) <= 1 + 1e-9)
        c = obj.cost(X[:, None, :])
        assert np.all((c >= 0) & (c <= 1))


class TestGradient:
    @pytest.mark.parametrize("V", [1.0, 0.6])
    @pytest.mark.parametrize("L", [1, 2, 3])
    def test_kerr_matches_finite_difference(self, V, L):
        cfg = TrainConfig(num_layers=L, visibility=V, trials=2, seed=7)
        obj = make_objective(cfg, make_task("CNOT"))
        for i in range(2):
            x = initial_parameters(cfg, i)
            assert rel_err(obj.analytic_gradient(x[None])[0], obj.fd_gradient(x[None])[0]) < 1e-4

    def test_bsa_per_trial_masks(self):
        cfg = TrainConfig(task="BSA", nonlinearity="KERR", trials=3, seed=2)
        tasks = [trial_task(cfg, i) for i in range(3)]
        obj = make_objective(cfg, tasks)
        X = np.array([initial_parameters(cfg, i) for i in range(3)])
        assert rel_err(obj.analytic_gradient(X), obj.fd_gradient(X)) < 1e-4

    def test_linear_network_gradient(self):
        cfg = TrainConfig(nonlinearity="NONE", num_layers=2, trials=1, seed=4, visibility=0.8)
        obj = make_objective(cfg, make_task("CNOT"))
        x = initial_parameters(cfg, 0)[None]
        assert rel_err(obj.analytic_gradient(x), obj.fd_gradient(x)) < 1e-4

    def test_qd_gradient_is_finite_difference(self):
        cfg = TrainConfig(task="BSA", nonlinearity="QD", trials=1, grid_points=128)
        obj = make_objective(cfg, [trial_task(cfg, 0)])
        x = initial_parameters(cfg, 0)[None]
        np.testing.assert_allclose(obj.gradient(x), obj.fd_gradient(x))


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(epochs=0), dict(trials=0), dict(nonlinearity="FOO"), dict(task="XOR"), dict(visibility=1.5)],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            TrainConfig(**kw)


class TestOptimize:
    def test_epochs_one_returns_initialization(self):
        cfg = TrainConfig(epochs=1, trials=3, seed=5)
        recs = optimize(cfg)
        obj = make_objective(cfg, make_task("CNOT"))
        for r in recs:
            x0 = initial_parameters(cfg, r.trial)
            assert len(r.costs) == 1
            np.testing.assert_array_equal(r.params, x0)
            assert r.costs[0] == pytest.approx(obj.cost(x0[None, None])[0, 0], abs=1e-14)

    def test_trajectory_length_and_monotone(self):
        cfg = TrainConfig(epochs=30, trials=4, seed=1)
        for r in optimize(cfg):
            assert len(r.costs) == 30
            best = np.minimum.accumulate(r.costs)
            assert np.all(np.diff(best) <= 0)
            # accepted steps never raise the cost, so the trajectory is itself non-increasing
            assert np.all(np.diff(r.costs) <= 0)

    def test_deterministic(self):
        cfg = TrainConfig(epochs=15, trials=3, seed=11)
        a = [r.to_json() for r in optimize(cfg)]
        b = [r.to_json() for r in optimize(cfg)]
        assert a == b

    def test_seed_changes_outcome(self):
        a = optimize(TrainConfig(epochs=2, trials=1, seed=1))[0]
        b = optimize(TrainConfig(epochs=2, trials=1, seed=2))[0]
        assert a.params != b.params

    def test_trial_independent_of_batch(self):
        # trial i depends only on (seed, i)
        a = optimize(TrainConfig(epochs=10, trials=2, seed=3))
        b = optimize(TrainConfig(epochs=10, trials=4, seed=3))
        assert a[1].to_json() == b[1].to_json()

    def test_record_reproduces_evaluation(self):
        cfg = TrainConfig(task="BSA", epochs=20, trials=2, seed=9)
        for r in optimize(cfg):
            rep = evaluate(record_spec(r, cfg), record_task(r, cfg), n_t=1)
            assert rep.F == pytest.approx(r.F, abs=1e-12)
            assert rep.C_unscaled == pytest.approx(r.costs[-1], abs=1e-12)

    def test_qd_records_grid_gap(self):
        cfg = TrainConfig(task="BSA", nonlinearity="QD", epochs=3, trials=2, grid_points=128, eval_grid_points=256)
        recs = optimize(cfg)
        for r in recs:
            assert r.status == "ok"
            assert r.grid_gap is not None and abs(r.grid_gap) < 0.05
            lo, hi = (math.log(b * cfg.sigma_p) for b in cfg.tau_bounds)
            assert lo <= r.params[-2] <= hi

    def test_bsa_assignment_recorded(self):
        cfg = TrainConfig(task="BSA", epochs=1, trials=2, seed=4)
        recs = optimize(cfg)
        assert recs[0].assignment != recs[1].assignment
        assert record_task(recs[0], cfg).assignment == trial_task(cfg, 0).assignment

    def test_non_finite_cost_aborts_trial(self):
        cfg = TrainConfig(epochs=3, trials=2)

        class Broken(NetworkObjective):
            def cost(self, X):
                c = super().cost(X)
                c[0] = np.nan
                return c

        from tbqpnn.trainer import adam_descent

        obj = make_objective(cfg, make_task("CNOT"))
        obj.__class__ = Broken
        X0 = np.array([initial_parameters(cfg, i) for i in range(2)])
        _, _, status = adam_descent(obj, X0, cfg)
        assert status[0].startswith("aborted")
        assert status[1] == "ok"


class TestRecords:
    def test_json_round_trip(self):
        r = TrainRecord(0, 1, [0.5, 0.25], 0.9, 1.0, 0.1, [0.1, 0.2], None)
        assert TrainRecord.from_json(r.to_json()) == r

    def test_summary_csv(self):
        recs = [TrainRecord(i, 0, [1.0, 0.5 - 0.1 * i], 0.5 + 0.1 * i, 1.0, 0.5, [0.0]) for i in range(3)]
        rows = list(csv.reader(io.StringIO(summary_csv(recs))))
        assert rows[0][:4] == ["trial [1]", "final_cost [1]", "F [1]", "eta [1]"]
        assert len(rows) == 4
        assert float(rows[2][1]) == pytest.approx(0.4)

    def test_best_record_prefers_unit_efficiency(self):
        recs = [
            TrainRecord(0, 0, [0.1], 0.95, 0.6, 0.1, [0.0]),
            TrainRecord(1, 0, [0.2], 0.80, 0.9995, 0.2, [0.0]),
            TrainRecord(2, 0, [0.2], float("nan"), float("nan"), 0.2, [0.0], status="aborted"),
        ]
        assert best_record(recs).trial == 0
        assert best_record(recs, eta_tol=1e-3).trial == 1


class TestAssignment:
    @pytest.mark.parametrize("N,per,left", [(4, 1, 2), (5, 2, 2), (6, 3, 3), (7, 5, 1)])
    def test_counts(self, N, per, left):
        a = assign_bsa_outcomes(N, 0)
        assert all(len(g) == per for g in a.outcomes)
        assert len(a.unassigned) == left

    @given(N=st.integers(4, 9), seed=seeds)
    @settings(max_examples=40, deadline=None)
    def test_disjoint_single_occupancy(self, N, seed):
        a = assign_bsa_outcomes(N, seed)
        flat = [o for g in a.outcomes for o in g]
        assert len(flat) == len(set(flat)) == 4 * (math.comb(N, 2) // 4)
        assert all(i != j and 0 <= i < N and 0 <= j < N for i, j in flat)
        assert a == assign_bsa_outcomes(N, seed)

    def test_rejects_small(self):
        with pytest.raises(ValueError):
            assign_bsa_outcomes(3, 0)
