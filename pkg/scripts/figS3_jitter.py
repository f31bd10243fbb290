"""Mean HOM visibility versus timing jitter, and the linear CNOT fidelity it implies."""

import argparse
from dataclasses import dataclass

import numpy as np

from tbqpnn.cli import ResultStore
from tbqpnn.distinguishability import JitterModel, mean_visibility, visibility_stderr
from tbqpnn.engine import NetworkSpec, Nonlinearity, evaluate
from tbqpnn.mesh import clements_decompose
from tbqpnn.tasks import linear_cnot_task, linear_cnot_unitary


@dataclass(frozen=True)
class JitterConfig:
    sigma_p: float = 1.0
    sigma_j: tuple[float, ...] = tuple(np.round(np.linspace(0, 5, 26), 2))
    samples: int = 2000
    seed: int = 0


def run(cfg: JitterConfig, out: str) -> None:
    spec = NetworkSpec(6, (clements_decompose(linear_cnot_unitary()),), Nonlinearity("NONE"))
    task = linear_cnot_task()
    rows = []
    for sj in cfg.sigma_j:
        model = JitterModel(cfg.sigma_p, float(sj), cfg.samples, cfg.seed)
        V = mean_visibility(model)
        rep = evaluate(spec, task, V, n_t=28)
        rows.append([float(sj), V, visibility_stderr(model), rep.F, rep.eta])
    store = ResultStore(out)
    store.write_csv("visibility_vs_jitter.csv", ["sigma_j [ns]", "V [1]", "V_stderr [1]", "F [1]", "eta [1]"], rows)
    store.write_manifest("figS3", None, cfg.seed)
    for row in rows[::5]:
        print("sigma_j = {:.2f} ns  V = {:.4f} +- {:.4f}  F = {:.4f}".format(*row[:4]))


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="runs/figS3")
    run(JitterConfig(), p.parse_args().out)
