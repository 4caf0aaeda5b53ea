"""Hold-out model selection: lambda grid search and an early-stopping rule."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import estimators as est
from .errors import InputError
from .kernel import KernelGram, KernelSpec, gram_full, kernel_matrix, uniform_subset
from .spectral import nystrom_factor


def rmse(pred, y) -> float:
    pred = np.asarray(pred, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if pred.shape != y.shape:
        raise InputError(f"length mismatch: {pred.shape[0]} vs {y.shape[0]}")
    return float(np.sqrt(np.mean((pred - y) ** 2)))


def holdout_split(n: int, fraction: float = 0.2, seed=None):
    """Uniform random split; the validation part has ``round(fraction * n)`` points."""
    if not 0 < fraction < 1:
        raise InputError("fraction must lie in (0, 1)")
    n_val = int(np.floor(fraction * n + 0.5))
    if n_val == 0 or n_val == n:
        raise InputError(f"fraction {fraction} of n={n} leaves an empty split")
    perm = np.random.default_rng(seed).permutation(n)
    return np.sort(perm[n_val:]), np.sort(perm[:n_val])


def lambda_grid(count: int = 100, lo: float = 1e-15, hi: float = 1.0) -> np.ndarray:
    if not 0 < lo < hi:
        raise InputError("need 0 < lo < hi")
    if count < 2:
        raise InputError("count must be >= 2")
    return np.geomspace(lo, hi, count)


@dataclass
class SelectionReport:
    algorithm_tag: str
    hyper_name: str
    chosen_hyper: float
    validation_curve: list
    wall_time: float
    model: Optional[est.CoefficientModel] = field(default=None, repr=False)

    @property
    def chosen_rmse(self) -> float:
        return dict(self.validation_curve)[self.chosen_hyper]

    def to_dict(self, include_model=True):
        d = {
            "algorithm_tag": self.algorithm_tag,
            "hyper_name": self.hyper_name,
            "chosen_hyper": self.chosen_hyper,
            "validation_rmse": self.chosen_rmse,
            "validation_curve": [[h, r] for h, r in self.validation_curve],
            "wall_time": self.wall_time,
        }
        if include_model and self.model is not None:
            d["model"] = self.model.to_dict()
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# nytro-lab v1\n")
        w = csv.writer(buf)
        w.writerow([self.hyper_name, "rmse", "chosen"])
        for h, r in self.validation_curve:
            w.writerow([repr(h), repr(r), int(h == self.chosen_hyper)])
        return buf.getvalue()


def select_lambda(fit_predict: Callable, grid: Sequence[float], y_val,
                  tag: str = "krls") -> SelectionReport:
    """Grid search: ``fit_predict(lam)`` returns ``(model, validation predictions)``.

    The minimizer of validation RMSE wins; exact ties go to the larger lambda.
    """
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise InputError("empty lambda grid")
    t0 = time.perf_counter()
    curve, models = [], []
    for lam in grid:
        model, pred = fit_predict(lam)
        curve.append((lam, rmse(pred, y_val)))
        models.append(model)
    errs = np.array([r for _, r in curve])
    best = int(np.flatnonzero(errs == errs.min())[-1])
    return SelectionReport(tag, "lambda", grid[best], curve, time.perf_counter() - t0,
                           models[best])


def early_stop_rule(val_rmse: Sequence[float], threshold: float = 0.05, window: int = 1) -> int:
    """Smallest 1-based ``t`` whose relative improvement over the next ``window``
    steps, ``(r[t] - r[t + window]) / r[t]``, is below ``threshold``; else ``T``."""
    r = np.asarray(val_rmse, dtype=float)
    if r.size == 0:
        raise InputError("empty validation sequence")
    if not threshold > 0:
        raise InputError("threshold must be positive")
    if window < 1:
        raise InputError("window must be >= 1")
    T = r.size
    for t in range(T - window):
        cur = r[t]
        rel = (cur - r[t + window]) / cur if cur > 0 else 0.0
        if rel < threshold:
            return t + 1
    return T


@dataclass(frozen=True)
class HoldoutData:
    """Training/validation views of one dataset."""

    X_train: np.ndarray
    y_train: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray

    @classmethod
    def split(cls, X, y, fraction=0.2, seed=None):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        tr, va = holdout_split(len(y), fraction, seed)
        return cls(X[tr], y[tr], X[va], y[va])


def select_krls(data: HoldoutData, spec: KernelSpec, grid) -> SelectionReport:
    t0 = time.perf_counter()
    K = gram_full(spec, data.X_train)
    K_val = kernel_matrix(spec, data.X_val, data.X_train)

    def fp(lam):
        model = est.fit_krls(K, data.y_train, lam, kernel_spec=spec)
        return model, K_val @ model.alpha

    rep = select_lambda(fp, grid, data.y_val, "krls")
    rep.wall_time = time.perf_counter() - t0
    return rep


def nystrom_setup(data: HoldoutData, spec: KernelSpec, m: int, seed=None, rank_tol=None):
    """Subset drawn from the training part; returns the factor and ``K_val,m``."""
    idx = uniform_subset(len(data.y_train), m, seed)
    centres = data.X_train[idx]
    K_nm = kernel_matrix(spec, data.X_train, centres)
    K_mm = kernel_matrix(spec, centres, centres)
    diag_max = 1.0 if spec.family == "gaussian" else float(
        np.max(np.einsum("ij,ij->i", data.X_train, data.X_train)))
    if spec.family == "gaussian":
        K_nm[idx, np.arange(m)] = 1.0
        np.fill_diagonal(K_mm, 1.0)
    nf = nystrom_factor(K_nm, (K_mm + K_mm.T) / 2.0, idx, rank_tol, diag_max)
    K_vm = kernel_matrix(spec, data.X_val, centres)
    return nf, K_vm


def select_nkrls(data: HoldoutData, spec: KernelSpec, m: int, grid, seed=None,
                 rank_tol=None) -> SelectionReport:
    t0 = time.perf_counter()
    nf, K_vm = nystrom_setup(data, spec, m, seed, rank_tol)

    def fp(lam):
        model = est.fit_nkrls(nf, data.y_train, lam, kernel_spec=spec)
        return model, K_vm @ model.alpha

    rep = select_lambda(fp, grid, data.y_val, "nkrls")
    rep.wall_time = time.perf_counter() - t0
    return rep


def _select_path(fit, K_val, y_val, threshold, window, tag):
    curve = []

    def observer(t, alpha):
        curve.append((t, rmse(K_val @ alpha, y_val)))

    path = fit(observer)
    t_star = early_stop_rule([r for _, r in curve], threshold, window)
    return path, curve, t_star


def select_early_stopping(data: HoldoutData, spec: KernelSpec, max_iter: int = 500,
                          threshold: float = 0.05, window: int = 1,
                          gamma=None) -> SelectionReport:
    t0 = time.perf_counter()
    K = gram_full(spec, data.X_train)
    K_val = kernel_matrix(spec, data.X_val, data.X_train)
    path, curve, t_star = _select_path(
        lambda obs: est.fit_early_stopping(K, data.y_train, gamma, max_iter, observer=obs,
                                           kernel_spec=spec),
        K_val, data.y_val, threshold, window, "early_stopping")
    return SelectionReport("early_stopping", "t", t_star, curve, time.perf_counter() - t0,
                           path.model(t_star))


def select_nytro(data: HoldoutData, spec: KernelSpec, m: int, max_iter: int = 500,
                 threshold: float = 0.05, window: int = 1, gamma=None, seed=None,
                 rank_tol=None) -> SelectionReport:
    t0 = time.perf_counter()
    nf, K_vm = nystrom_setup(data, spec, m, seed, rank_tol)
    path, curve, t_star = _select_path(
        lambda obs: est.fit_nytro(nf, data.y_train, gamma, max_iter, observer=obs,
                                  kernel_spec=spec),
        K_vm, data.y_val, threshold, window, "nytro")
    return SelectionReport("nytro", "t", t_star, curve, time.perf_counter() - t0,
                           path.model(t_star))


def select_kols(data: HoldoutData, spec: KernelSpec) -> SelectionReport:
    t0 = time.perf_counter()
    K = gram_full(spec, data.X_train)
    model = est.fit_kols(K, data.y_train, kernel_spec=spec)
    r = rmse(kernel_matrix(spec, data.X_val, data.X_train) @ model.alpha, data.y_val)
    return SelectionReport("kols", "none", 0.0, [(0.0, r)], time.perf_counter() - t0, model)
