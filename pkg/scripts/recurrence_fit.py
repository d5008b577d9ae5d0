"""Fit the decay exponent of P0(X_2m = 0) for the simple walk in d = 1, 2, 3.

Prints the fitted exponent and verdict per dimension and writes the
partial sums of the return probabilities to a CSV file.
"""

import argparse
import csv
from dataclasses import dataclass

from stochastik.random_walk import recurrence_diagnostic


@dataclass
class RecurrenceConfig:
    horizons: tuple = (2000, 2000, 300)  # M for d = 1, 2, 3
    out: str = "recurrence.csv"


def run(cfg: RecurrenceConfig) -> list:
    reports = [recurrence_diagnostic(d, M) for d, M in zip((1, 2, 3), cfg.horizons)]
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "m", "P0(X_2m=0)", "partial_sum"])
        for rep in reports:
            for m, (p, s) in enumerate(zip(rep.return_probabilities, rep.partial_sums), start=1):
                w.writerow([rep.d, m, float(p), float(s)])
    for rep in reports:
        print(f"d={rep.d}  M={rep.M}  exponent={rep.exponent:+.3f}  partial sum={float(rep.partial_sums[-1]):.4f}  {rep.verdict}")
    return reports


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=RecurrenceConfig.out)
    run(RecurrenceConfig(out=ap.parse_args().out))
