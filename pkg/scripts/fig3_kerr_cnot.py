"""Kerr-QPNN CNOT: training trajectories and fidelity versus visibility (offline and retrained)."""

import argparse
from dataclasses import dataclass, replace

from tbqpnn.cli import ResultStore
from tbqpnn.engine import evaluate
from tbqpnn.tasks import make_task
from tbqpnn.trainer import TrainConfig, best_record, optimize, record_spec


@dataclass(frozen=True)
class Fig3Config:
    train: TrainConfig = TrainConfig(task="CNOT", nonlinearity="KERR", trials=100, epochs=250, seed=0)
    visibilities: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)
    online: bool = True


def run(cfg: Fig3Config, out: str) -> None:
    store = ResultStore(out)
    records = optimize(cfg.train)
    store.write_text("records.jsonl", "".join(r.to_json() + "\n" for r in records))
    store.write_csv(
        "costs.csv",
        ["epoch [1]"] + [f"trial_{r.trial} [1]" for r in records],
        ([e] + [r.costs[e] for r in records] for e in range(cfg.train.epochs)),
    )
    best = best_record(records, eta_tol=1e-6)
    spec, task = record_spec(best, cfg.train), make_task("CNOT")
    rows = []
    for V in cfg.visibilities:
        off = evaluate(spec, task, V, n_t=1)
        row = [V, off.F, off.eta]
        if cfg.online:
            run_v = optimize(replace(cfg.train, visibility=V))
            top = min((r for r in run_v if r.status == "ok"), key=lambda r: r.costs[-1])
            row += [top.F, top.eta]
        rows.append(row)
        print(", ".join(f"{v:.4f}" for v in row))
    header = ["V [1]", "F_offline [1]", "eta_offline [1]"] + (["F_online [1]", "eta_online [1]"] if cfg.online else [])
    store.write_csv("fidelity_vs_visibility.csv", header, rows)
    store.write_manifest("fig3", None, cfg.train.seed, {"best_trial": best.trial})
    print(f"{sum(r.F > 0.999 for r in records)} / {len(records)} trials reached F > 0.999")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--out", default="runs/fig3")
    p.add_argument("--trials", type=int, default=100)
    a = p.parse_args()
    base = Fig3Config()
    run(replace(base, train=replace(base.train, trials=a.trials)), a.out)
