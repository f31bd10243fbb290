"""Linear six-mode CNOT on the two-loop processor: control table, F and eta versus visibility, truth tables."""

import argparse
from dataclasses import dataclass

import numpy as np

from tbqpnn.cli import ResultStore
from tbqpnn.engine import NetworkSpec, Nonlinearity, evaluate, hinton_table
from tbqpnn.mesh import clements_decompose
from tbqpnn.scheduler import compile_schedule, simulate_schedule
from tbqpnn.tasks import linear_cnot_task, linear_cnot_unitary


@dataclass(frozen=True)
class Fig2Config:
    visibilities: tuple[float, ...] = tuple(np.round(np.linspace(0, 1, 21), 3))
    hinton_visibilities: tuple[float, ...] = (1.0, 0.5, 0.0)
    alpha: float = 0.36
    tau_b: float = 10.0


def run(cfg: Fig2Config, out: str) -> None:
    store = ResultStore(out)
    plan = clements_decompose(linear_cnot_unitary())
    sched = compile_schedule(plan, 0)
    err = np.linalg.norm(simulate_schedule(sched) - linear_cnot_unitary())
    store.write_text("control_table.txt", sched.control_table() + "\n")
    spec, task = NetworkSpec(6, (plan,), Nonlinearity("NONE")), linear_cnot_task()
    rows = []
    for V in cfg.visibilities:
        rep = evaluate(spec, task, float(V), alpha=cfg.alpha, n_t=sched.n_t, tau_b=cfg.tau_b)
        rows.append([float(V), rep.F, rep.eta, rep.r * 1e6])
    store.write_csv("fidelity_vs_visibility.csv", ["V [1]", "F [1]", "eta [1]", "r [kHz]"], rows)
    for V in cfg.hinton_visibilities:
        H = hinton_table(evaluate(spec, task, V, n_t=sched.n_t))
        store.write_csv(
            f"hinton_V{V:.2f}.csv",
            ["input [label]"] + [f"{c} [1]" for c in task.cb_map.labels],
            ([task.labels[k]] + [float(v) for v in H[k]] for k in range(4)),
        )
    store.write_manifest("fig2", None, None)
    print(f"n_t = {sched.n_t}, schedule error {err:.1e}")
    for row in rows[:: max(1, len(rows) // 4)]:
        print("V = {:.2f}  F = {:.4f}  eta = {:.4f}  r = {:.1f} kHz".format(*row))


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="runs/fig2")
    run(Fig2Config(), p.parse_args().out)
