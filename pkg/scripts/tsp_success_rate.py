"""Success rate of simulated annealing on random 7-city instances.

For each instance the brute-force optimum is computed, then the annealer is
run with independent substreams; a run succeeds when it finds that optimum.
"""

import argparse
import csv
from dataclasses import dataclass

from stochastik.mcmc import AnnealSchedule, brute_force_tsp, distances_from_coords, simulated_annealing_tsp
from stochastik.rng import RngStream


@dataclass
class TspConfig:
    cities: int = 7
    instances: int = 5
    runs: int = 100
    beta0: float = 0.1
    K: float = 1.001
    steps: int = 100_000
    moves: str = "transposition"
    seed: int = 1
    out: str = "tsp_success.csv"


def run(cfg: TspConfig) -> list:
    root = RngStream(cfg.seed)
    sched = AnnealSchedule(cfg.beta0, cfg.K, cfg.steps)
    rows = []
    for inst in range(cfg.instances):
        base = root.substream(inst)
        d = distances_from_coords(base.generator.random((cfg.cities, 2)))
        _, optimum = brute_force_tsp(d)
        hits = sum(
            abs(simulated_annealing_tsp(d, sched, base.substream(r), moves=cfg.moves).length - optimum) < 1e-9
            for r in range(cfg.runs)
        )
        rows.append([inst, optimum, hits, cfg.runs])
        print(f"instance {inst}: optimum {optimum:.4f}, hits {hits}/{cfg.runs}")
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["instance", "optimum", "hits", "runs"])
        w.writerows(rows)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=TspConfig.seed)
    ap.add_argument("--instances", type=int, default=TspConfig.instances)
    ap.add_argument("--moves", choices=("transposition", "2opt"), default=TspConfig.moves)
    ap.add_argument("--out", default=TspConfig.out)
    a = ap.parse_args()
    run(TspConfig(instances=a.instances, moves=a.moves, seed=a.seed, out=a.out))
