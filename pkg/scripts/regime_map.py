"""Tabulate the four-way regime decision over a grid of (SNR, d_tilde) at fixed n.

Writes a CSV for external plotting:  python3 scripts/regime_map.py --n 1000
"""

import argparse
import csv
import sys

import numpy as np

from nytrolab.complexity import curve_c1, curve_c2, regime_classify


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--points", type=int, default=60)
    ap.add_argument("--out")
    args = ap.parse_args()
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    fh.write("# nytro-lab v1\n")
    w = csv.writer(fh)
    w.writerow(["snr", "d_tilde", "c1", "c2", "region"])
    for s in np.geomspace(1e-3, 1e3, args.points):
        for d in np.geomspace(1e-2, args.n, args.points):
            w.writerow([f"{s:.6g}", f"{d:.6g}", f"{curve_c1(s, args.n):.6g}",
                        f"{curve_c2(s):.6g}", regime_classify(s, d, args.n)])
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
