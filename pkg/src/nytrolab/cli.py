"""Command-line front end: ``nytro-lab {train,select,verify,scaling,regime,generate}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import estimators as est
from . import selection as sel
from .complexity import full_dim, regime_classify, regime_profile, snr
from .data_io import load_libsvm, scale_targets_unit, spectrum_profile, synthesize_fixed_design
from .errors import InputError, NumericError, ParseError
from .kernel import KernelGram, KernelSpec, gram_full
from .scaling import run_scaling, synthetic_regression

log = logging.getLogger("nytrolab")

ALGOS = {"kols": "kols", "krls": "krls", "es": "early_stopping", "nkrls": "nkrls",
         "nytro": "nytro"}


@dataclass
class RunConfig:
    command: str
    kernel: KernelSpec = field(default_factory=KernelSpec)
    algo: Optional[str] = None
    m: Optional[int] = None
    lambda_grid: tuple = (100, 1e-15, 1.0)
    lam: Optional[float] = None
    gamma: Optional[float] = None
    max_iter: int = 500
    stop_threshold: float = 0.05
    holdout: float = 0.2
    seed: int = 0
    trials: Optional[int] = None
    out: Optional[str] = None
    fmt: str = "json"

    def validate(self):
        count, lo, hi = self.lambda_grid
        if count < 2 or not 0 < lo < hi:
            raise InputError("--lambda-grid needs count>=2 and 0<lo<hi")
        if self.m is not None and self.m < 1:
            raise InputError("--m must be >= 1")
        if self.max_iter < 1:
            raise InputError("--max-iter must be >= 1")
        if not self.stop_threshold > 0:
            raise InputError("--stop-threshold must be positive")
        if not 0 < self.holdout < 1:
            raise InputError("--holdout must lie in (0, 1)")
        if self.lam is not None and not self.lam > 0:
            raise InputError("--lambda must be positive")
        if self.gamma is not None and not self.gamma > 0:
            raise InputError("--gamma must be positive")
        if self.trials is not None and self.trials < 1:
            raise InputError("--trials must be >= 1")
        if self.algo in ("nkrls", "nytro") and self.m is None:
            raise InputError(f"--algo {self.algo} needs --m")
        return self


def _grid(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected count,lo,hi")
    return int(parts[0]), float(parts[1]), float(parts[2])


def _common(p: argparse.ArgumentParser):
    p.add_argument("--kernel", choices=["gaussian", "linear"], default="gaussian")
    p.add_argument("--bandwidth", type=float, default=1.0)
    p.add_argument("--algo", choices=sorted(ALGOS))
    p.add_argument("--m", type=int)
    p.add_argument("--lambda-grid", type=_grid, default=(100, 1e-15, 1.0))
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--stop-threshold", type=float, default=0.05)
    p.add_argument("--holdout", type=float, default=0.2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.add_argument("--format", dest="fmt", choices=["json", "csv"], default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nytro-lab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit one estimator and write the model JSON")
    _common(p)
    p.add_argument("--data", required=True, help="libsvm training file")
    p.add_argument("--scale-targets", action="store_true")

    p = sub.add_parser("select", help="hold-out model selection")
    _common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="libsvm training file")
    src.add_argument("--synthetic", type=int, metavar="N",
                     help="use N synthetic regression points instead of a file")
    p.add_argument("--test", help="optional libsvm test file for a test RMSE")
    p.add_argument("--scale-targets", action="store_true")

    p = sub.add_parser("verify", help="run a risk-bound verification suite")
    _common(p)
    from .verify import SUITES

    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--self-test", action="store_true",
                   help="corrupt Q_ols by +0.1 I; the thm1 suite must then fail")

    p = sub.add_parser("scaling", help="time NKRLS/NYTRO selection against m")
    _common(p)
    p.add_argument("--m-grid", default="100,200,400,700,1000,1500,2000")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--n", type=int, default=6000)

    p = sub.add_parser("regime", help="classify a problem into the faster-algorithm regime")
    _common(p)
    p.add_argument("--snr", type=float)
    p.add_argument("--d-tilde", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--problem", help="problem JSON written by `generate`")

    p = sub.add_parser("generate", help="write a synthetic fixed-design problem")
    _common(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--d", type=int, default=5)
    p.add_argument("--family", choices=["abstract", "geometric"], default="abstract")
    p.add_argument("--spectrum", choices=["poly", "exp", "flat"], default="poly")
    p.add_argument("--decay", type=float, default=2.0)
    p.add_argument("--zeros", type=int, default=0)
    p.add_argument("--snr", type=float, default=1.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(args.command, KernelSpec(args.kernel, args.bandwidth),
                     ALGOS.get(args.algo) if args.algo else None, args.m,
                     tuple(args.lambda_grid), args.lam, args.gamma, args.max_iter,
                     args.stop_threshold, args.holdout, args.seed, args.trials, args.out,
                     args.fmt).validate()


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load(path, scale):
    ds = load_libsvm(path)
    y = scale_targets_unit(ds.targets) if scale else ds.targets
    return ds.points, y


def cmd_train(args, cfg: RunConfig) -> int:
    X, y = _load(args.data, args.scale_targets)
    spec, algo = cfg.kernel, cfg.algo or "krls"
    if algo in ("kols", "krls", "early_stopping"):
        K = gram_full(spec, X)
        if algo == "kols":
            model = est.fit_kols(K, y, kernel_spec=spec)
        elif algo == "krls":
            if cfg.lam is None:
                raise InputError("--algo krls needs --lambda")
            model = est.fit_krls(K, y, cfg.lam, kernel_spec=spec)
        else:
            model = est.fit_early_stopping(K, y, cfg.gamma, cfg.max_iter, keep_path=False,
                                           kernel_spec=spec).final
    else:
        data = sel.HoldoutData(X, y, X[:0], y[:0])
        nf, _ = sel.nystrom_setup(data, spec, cfg.m, cfg.seed)
        if algo == "nkrls":
            if cfg.lam is None:
                raise InputError("--algo nkrls needs --lambda")
            model = est.fit_nkrls(nf, y, cfg.lam, kernel_spec=spec)
        else:
            model = est.fit_nytro(nf, y, cfg.gamma, cfg.max_iter, keep_path=False,
                                  kernel_spec=spec).final
    _emit(model.to_json(indent=2), cfg.out)
    return 0


def cmd_select(args, cfg: RunConfig) -> int:
    if args.data:
        X, y = _load(args.data, args.scale_targets)
    else:
        X, y = synthetic_regression(args.synthetic, seed=cfg.seed)
    data = sel.HoldoutData.split(X, y, cfg.holdout, cfg.seed)
    spec, algo = cfg.kernel, cfg.algo or "nytro"
    grid = sel.lambda_grid(*cfg.lambda_grid)
    if algo == "kols":
        rep = sel.select_kols(data, spec)
    elif algo == "krls":
        rep = sel.select_krls(data, spec, grid)
    elif algo == "nkrls":
        rep = sel.select_nkrls(data, spec, cfg.m, grid, seed=cfg.seed)
    elif algo == "early_stopping":
        rep = sel.select_early_stopping(data, spec, cfg.max_iter, cfg.stop_threshold,
                                        gamma=cfg.gamma)
    else:
        rep = sel.select_nytro(data, spec, cfg.m, cfg.max_iter, cfg.stop_threshold,
                               gamma=cfg.gamma, seed=cfg.seed)
    if cfg.fmt == "csv":
        _emit(rep.to_csv(), cfg.out)
        return 0
    doc = rep.to_dict()
    if args.test:
        Xt, yt = _load(args.test, args.scale_targets)
        doc["test_rmse"] = sel.rmse(est.predict(rep.model, spec, data.X_train, Xt), yt)
    _emit(json.dumps(doc, indent=2), cfg.out)
    return 0


def cmd_verify(args, cfg: RunConfig) -> int:
    from .verify import failures_json, rows_to_csv, run_suite

    kw = {"corrupt": True} if args.self_test and args.suite == "thm1" else {}
    if args.self_test and args.suite != "thm1":
        raise InputError("--self-test applies to the thm1 suite")
    rows = run_suite(args.suite, cfg.trials, cfg.seed, **kw)
    bad = [r for r in rows if not r.ok]
    _emit(rows_to_csv(rows), cfg.out)
    if bad:
        if cfg.out:
            with open(cfg.out + ".failures.json", "w") as fh:
                fh.write(failures_json(rows, cfg.seed))
        log.error("%s: %d of %d checks failed", args.suite, len(bad), len(rows))
        return 1
    log.info("%s: all %d checks passed", args.suite, len(rows))
    return 0


def cmd_scaling(args, cfg: RunConfig) -> int:
    ms = [int(v) for v in args.m_grid.split(",")]
    res = run_scaling(ms, args.repeats, n=args.n, bandwidth=cfg.kernel.bandwidth,
                      lambda_count=cfg.lambda_grid[0], max_iter=cfg.max_iter, seed=cfg.seed,
                      progress=lambda m, a, t: log.info("%s m=%d %.3fs", a, m, t))
    if cfg.fmt == "csv":
        _emit(res.to_csv(), cfg.out)
    else:
        _emit(json.dumps({"rows": [dict(zip(["m", "algo", "mean_time", "sd_time",
                                             "median_time"], r)) for r in res.rows],
                          "slopes": res.slopes}, indent=2), cfg.out)
    return 0


def cmd_regime(args, cfg: RunConfig) -> int:
    if args.problem:
        with open(args.problem) as fh:
            doc = json.load(fh)
        K = KernelGram(np.asarray(doc["K"]))
        out = regime_profile(K, _problem_snr(doc, K)).to_dict()
    else:
        if args.snr is None or args.d_tilde is None or args.n is None:
            raise InputError("regime needs --problem, or all of --snr, --d-tilde, --n")
        from .complexity import curve_c1, curve_c2

        out = {"snr": args.snr, "d_tilde": args.d_tilde, "n": args.n,
               "c1": curve_c1(args.snr, args.n), "c2": curve_c2(args.snr),
               "region": regime_classify(args.snr, args.d_tilde, args.n)}
    _emit(json.dumps(out, indent=2), cfg.out)
    return 0


def _problem_snr(doc, K):
    a = np.asarray(doc["alpha_opt"])
    return float(a @ K.matrix @ a / doc["sigma2"])


def cmd_generate(args, cfg: RunConfig) -> int:
    spectrum = None
    if args.family == "abstract":
        spectrum = spectrum_profile(args.n, args.spectrum, args.decay, args.zeros)
    points, problem, K = synthesize_fixed_design(
        args.n, args.d, spectrum, args.snr, args.sigma2, cfg.seed, args.family,
        cfg.kernel.bandwidth)
    y = problem.sample_y(np.random.default_rng(cfg.seed))
    doc = {
        "family": args.family, "n": args.n, "sigma2": problem.sigma2, "seed": cfg.seed,
        "snr": snr(problem), "d_star": full_dim(K),
        "mu": problem.mu.tolist(), "alpha_opt": problem.alpha_opt.tolist(), "y": y.tolist(),
        "K": K.matrix.tolist(),
        "points": points.tolist() if points is not None else None,
    }
    _emit(json.dumps(doc), cfg.out)
    return 0


COMMANDS = {"train": cmd_train, "select": cmd_select, "verify": cmd_verify,
            "scaling": cmd_scaling, "regime": cmd_regime, "generate": cmd_generate}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
        threads = os.environ.get("NYTRO_THREADS")
        if threads:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(int(threads)):
                return COMMANDS[args.command](args, cfg)
        return COMMANDS[args.command](args, cfg)
    except (InputError, NumericError, ParseError) as exc:
        print(f"nytro-lab {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
