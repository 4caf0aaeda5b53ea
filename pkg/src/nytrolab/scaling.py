"""Wall-clock scaling of NKRLS and NYTRO model selection in the subset size."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .kernel import KernelSpec
from .selection import HoldoutData, lambda_grid, select_nkrls, select_nytro

CSV_HEADER = "# nytro-lab v1"


def synthetic_regression(n: int = 6000, d: int = 12, noise: float = 0.1, seed: int = 0):
    """Smooth nonlinear target on standard normal inputs, plus Gaussian noise."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    w = rng.standard_normal(d) / np.sqrt(d)
    f = np.sin(X @ w) + 0.5 * np.cos(X[:, 0] * X[:, 1 % d])
    return X, f + noise * rng.standard_normal(n)


@dataclass
class ScalingResult:
    rows: list = field(default_factory=list)  # (m, algo, mean, sd, median)
    slopes: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        w = csv.writer(buf)
        w.writerow(["m", "algo", "mean_time", "sd_time", "median_time"])
        for r in self.rows:
            w.writerow([r[0], r[1], f"{r[2]:.6g}", f"{r[3]:.6g}", f"{r[4]:.6g}"])
        for algo, s in sorted(self.slopes.items()):
            buf.write(f"# slope {algo} {s:.4f}\n")
        return buf.getvalue()


def loglog_slope(ms, times) -> float:
    return float(np.polyfit(np.log(ms), np.log(times), 1)[0])


def run_scaling(m_grid, repeats=5, n=6000, d=12, bandwidth=3.0, lambda_count=100,
                max_iter=500, seed=0, algos=("nytro", "nkrls"), threads=1,
                progress=None) -> ScalingResult:
    """Time full model selection for each ``m``: one path of ``max_iter`` steps for
    NYTRO, ``lambda_count`` grid fits for NKRLS.  A warm-up run precedes the
    repeats and is discarded."""
    m_grid = list(m_grid)
    if m_grid != sorted(m_grid):
        raise ValueError("m_grid must be ascending")
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    X, y = synthetic_regression(n, d, seed=seed)
    data = HoldoutData.split(X, y, 0.2, seed)
    spec = KernelSpec("gaussian", bandwidth)
    grid = lambda_grid(lambda_count)
    runners = {
        # threshold never triggers an early exit: the whole path is computed
        "nytro": lambda m, s: select_nytro(data, spec, m, max_iter, seed=s),
        "nkrls": lambda m, s: select_nkrls(data, spec, m, grid, seed=s),
    }
    result = ScalingResult()
    with threadpool_limits(threads):
        for algo in algos:
            means = []
            for m in m_grid:
                runners[algo](m, seed)
                ts = []
                for rep in range(repeats):
                    t0 = time.perf_counter()
                    runners[algo](m, seed + rep)
                    ts.append(time.perf_counter() - t0)
                ts = np.asarray(ts)
                sd = float(ts.std(ddof=1)) if repeats > 1 else 0.0
                result.rows.append((m, algo, float(ts.mean()), sd, float(np.median(ts))))
                means.append(ts.mean())
                if progress:
                    progress(m, algo, ts.mean())
            result.slopes[algo] = loglog_slope(m_grid, means)
    return result
