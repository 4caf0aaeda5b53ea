"""Selection time of NKRLS and NYTRO against the subset size, with log-log slopes.

    python3 scripts/run_scaling.py --repeats 5 --out scaling.csv
"""

import argparse
import logging

from nytrolab.scaling import run_scaling


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m-grid", default="100,200,400,700,1000,1500,2000")
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--n", type=int, default=6000)
    ap.add_argument("--bandwidth", type=float, default=3.0)
    ap.add_argument("--max-iter", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="scaling.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    res = run_scaling([int(v) for v in args.m_grid.split(",")], args.repeats, n=args.n,
                      bandwidth=args.bandwidth, max_iter=args.max_iter, seed=args.seed,
                      progress=lambda m, a, t: logging.info("%-6s m=%5d  %.3fs", a, m, t))
    with open(args.out, "w") as fh:
        fh.write(res.to_csv())
    for algo, s in sorted(res.slopes.items()):
        print(f"{algo}: slope {s:.3f}")


if __name__ == "__main__":
    main()
