#!/usr/bin/env python3
"""Strong-stable contraction experiment on the golden torus and on random
thick tori: fit the decay exponent of the stable distance under the flow."""

import argparse
import math
import pathlib
import random
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from veertrack.fixtures import GOLD_DILATATION, GOLD_PERIOD_T, gold, slope_torus
from veertrack.lab import contraction_experiment


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--periods", type=int, default=5)
    ap.add_argument("--trials", type=int, default=6)
    ap.add_argument("--delta", type=float, default=1e-4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    fit = contraction_experiment(
        gold(), args.periods * GOLD_PERIOD_T, checkpoints=args.periods,
        trials=args.trials, delta=args.delta, seed=args.seed,
    )
    print(f"golden torus: alpha_hat {fit.alpha:.6f} (expect 2), R^2 {fit.r_squared:.6f}")
    row = fit.log_ratios[0]
    per_period = [math.exp(b - a) for a, b in zip(row, row[1:])]
    print(f"  per-period ratios {['%.6f' % r for r in per_period]}"
          f" (expect {GOLD_DILATATION ** -2:.6f})")

    rng = random.Random(args.seed)
    for k in range(3):
        x = rng.uniform(1.35, 1.85)
        fit = contraction_experiment(
            slope_torus(x), 4.0, checkpoints=6, trials=args.trials,
            delta=args.delta, seed=args.seed + k + 1,
        )
        print(f"slope {x:.4f}: alpha_hat {fit.alpha:.4f}, R^2 {fit.r_squared:.4f}, "
              f"dropped {fit.dropped}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
