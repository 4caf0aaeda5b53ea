"""Hold-out selection of NKRLS and NYTRO on InsuranceCompany (CoIL 2000).

Needs the benchmark files locally (no download is attempted):

    python3 scripts/insurance_replica.py --data /path/to/coil2000
"""

import argparse
import json

from nytrolab.data_io import load_insurance
from nytrolab.estimators import predict
from nytrolab.kernel import KernelSpec
from nytrolab.selection import HoldoutData, lambda_grid, rmse, select_nkrls, select_nytro


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", required=True)
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--bandwidth", type=float, default=3.0)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--unsigned", action="store_true", help="keep the 0/1 labels")
    args = ap.parse_args()
    train, test = load_insurance(args.data, signed_labels=not args.unsigned)
    spec = KernelSpec("gaussian", args.bandwidth)
    out = []
    for rep in range(args.repeats):
        data = HoldoutData.split(train.points, train.targets, 0.2, seed=rep)
        for sel in (select_nkrls(data, spec, args.m, lambda_grid(), seed=rep),
                    select_nytro(data, spec, args.m, 500, seed=rep)):
            err = rmse(predict(sel.model, spec, data.X_train, test.points), test.targets)
            out.append({"repeat": rep, "algo": sel.algorithm_tag, "hyper": sel.chosen_hyper,
                        "selection_time": sel.wall_time, "test_rmse": err})
            print(json.dumps(out[-1]))


if __name__ == "__main__":
    main()
