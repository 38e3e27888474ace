"""Robust estimator error as the supplied w1 is distorted by alpha = (1 - w1') / (1 - w1).

    python3 scripts/w1_sensitivity.py --m 2000 --dims 10 --reps 10 --out sensitivity.csv
"""

import argparse

from robust2gmm import dataio
from robust2gmm.bench import SENSITIVITY_COLUMNS, DEFAULT_ALPHAS, BenchmarkConfig, run_sensitivity


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--dims", type=int, nargs="+", default=[10])
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alphas", type=float, nargs="+", default=list(DEFAULT_ALPHAS))
    ap.add_argument("--out", default="sensitivity.csv")
    args = ap.parse_args(argv)

    cfg = BenchmarkConfig(m=args.m, dims=tuple(args.dims), reps=args.reps, seed=args.seed,
                          alpha_grid=tuple(args.alphas))
    _, rows = run_sensitivity(cfg)
    dataio.write_table(args.out, SENSITIVITY_COLUMNS, rows, cfg.echo())
    for row in rows:
        print(f"n={row['n']:>3} alpha={row['alpha']:.2f} w1'={row['w1_input']:.3f}  err_total {row['cell']}")


if __name__ == "__main__":
    main()
