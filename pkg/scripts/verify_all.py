"""Run every verification suite and write one CSV report per suite.

    python3 scripts/verify_all.py --outdir reports/
"""

import argparse
import os
import sys
import time

from nytrolab.verify import SUITES, failures_json, rows_to_csv, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="reports")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--suites", default=",".join(SUITES))
    args = ap.parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    failed = []
    for name in args.suites.split(","):
        t0 = time.perf_counter()
        rows = run_suite(name, seed=args.seed)
        bad = sum(not r.ok for r in rows)
        with open(os.path.join(args.outdir, f"{name}.csv"), "w") as fh:
            fh.write(rows_to_csv(rows))
        if bad:
            failed.append(name)
            with open(os.path.join(args.outdir, f"{name}.failures.json"), "w") as fh:
                fh.write(failures_json(rows, args.seed))
        print(f"{name:9s} {len(rows) - bad:6d}/{len(rows):<6d} hold  "
              f"{time.perf_counter() - t0:6.1f}s")
    if failed:
        print("suites with violations:", ", ".join(failed))
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
