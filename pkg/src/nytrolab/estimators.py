"""KOLS, KRLS, early stopping, Nystrom KRLS and NYTRO.

Every estimator is linear in ``y``.  Iterative methods return the whole
regularization path.  All step sizes use the ``gamma / n`` recursion, so the
contraction condition is ``gamma * ||K|| <= n`` (``gamma * ||K_nm R||^2 <= n``
for NYTRO); ``gamma = 1 / max_i k(x_i, x_i)`` always satisfies it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg as la

from .errors import InputError
from .kernel import KernelGram, KernelSpec, kernel_matrix
from .spectral import NystromFactor, pinv

TAGS = ("kols", "krls", "early_stopping", "nkrls", "nytro")
# slack for gamma validation; gamma = 1/diag_max can hit ||K|| = n*diag_max exactly
_STEP_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class CoefficientModel:
    expansion_idx: np.ndarray
    alpha: np.ndarray
    algorithm_tag: str
    hyper: dict = field(default_factory=dict)
    kernel_spec: Optional[KernelSpec] = None

    def __post_init__(self):
        if len(self.alpha) != len(self.expansion_idx):
            raise InputError("alpha and expansion_idx lengths differ")
        if self.algorithm_tag not in TAGS:
            raise InputError(f"unknown algorithm {self.algorithm_tag!r}")

    def train_predictions(self, K) -> np.ndarray:
        K = K.matrix if isinstance(K, KernelGram) else np.asarray(K)
        return K[:, self.expansion_idx] @ self.alpha

    def to_dict(self):
        return {
            "algorithm_tag": self.algorithm_tag,
            "hyper": {k: float(v) for k, v in self.hyper.items()},
            "expansion_idx": [int(i) for i in self.expansion_idx],
            "alpha": [float(a) for a in self.alpha],
            "kernel_spec": self.kernel_spec.to_dict() if self.kernel_spec else None,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        spec = d.get("kernel_spec")
        hyper = {k: (int(v) if k == "t" else float(v)) for k, v in d["hyper"].items()}
        return cls(np.asarray(d["expansion_idx"], dtype=np.int64),
                   np.asarray(d["alpha"], dtype=float), d["algorithm_tag"], hyper,
                   KernelSpec.from_dict(spec) if spec else None)

    @classmethod
    def from_json(cls, s: str):
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True, eq=False)
class IterationPath:
    """Coefficient snapshots for ``t = 1..T``.

    ``alphas[t - 1]`` holds the coefficients after ``t`` steps.  With
    ``keep_path=False`` only the last step is stored and ``alphas`` has a
    single row.
    """

    algorithm_tag: str
    expansion_idx: np.ndarray
    gamma: float
    T: int
    alphas: np.ndarray
    beta_map: Optional[np.ndarray] = None
    kernel_spec: Optional[KernelSpec] = None

    @property
    def betas(self) -> Optional[np.ndarray]:
        """Reduced iterates ``beta_t`` (NYTRO only), one row per stored step."""
        if self.beta_map is None:
            return None
        return self.alphas @ self.beta_map.T

    @property
    def keeps_path(self) -> bool:
        return self.alphas.shape[0] == self.T

    def alpha(self, t: int) -> np.ndarray:
        if not 1 <= t <= self.T:
            raise InputError(f"t must be in [1, {self.T}]")
        if not self.keeps_path:
            if t != self.T:
                raise InputError("path was not retained; only t = T is available")
            return self.alphas[-1]
        return self.alphas[t - 1]

    def model(self, t: int) -> CoefficientModel:
        return CoefficientModel(self.expansion_idx, self.alpha(t), self.algorithm_tag,
                                {"gamma": self.gamma, "t": t}, self.kernel_spec)

    @property
    def models(self) -> list:
        ts = range(1, self.T + 1) if self.keeps_path else [self.T]
        return [self.model(t) for t in ts]

    @property
    def final(self) -> CoefficientModel:
        return self.model(self.T)


def _matrix(K):
    return K.matrix if isinstance(K, KernelGram) else np.asarray(K, dtype=float)


def _check_y(y, n):
    y = np.asarray(y, dtype=float).ravel()
    if y.shape[0] != n:
        raise InputError(f"y has length {y.shape[0]}, expected {n}")
    return y


def fit_kols(K, y, rank_tol=None, kernel_spec=None) -> CoefficientModel:
    Km = _matrix(K)
    y = _check_y(y, Km.shape[0])
    Kp = pinv(K.eig if isinstance(K, KernelGram) else Km, rank_tol)
    return CoefficientModel(np.arange(len(y)), Kp @ y, "kols", {}, kernel_spec)


def fit_krls(K, y, lam: float, kernel_spec=None) -> CoefficientModel:
    if not lam > 0:
        raise InputError("lambda must be positive")
    Km = _matrix(K)
    n = Km.shape[0]
    y = _check_y(y, n)
    alpha = la.solve(Km + lam * n * np.eye(n), y, assume_a="pos")
    return CoefficientModel(np.arange(n), alpha, "krls", {"lambda": lam}, kernel_spec)


def default_gamma(diag_max: float) -> float:
    return 1.0 / diag_max


def _resolve_gamma_es(K, gamma):
    Km = _matrix(K)
    n = Km.shape[0]
    diag_max = K.diag_max if isinstance(K, KernelGram) else float(np.max(np.diag(Km)))
    if gamma is None:
        return default_gamma(diag_max)
    if not gamma > 0:
        raise InputError("gamma must be positive")
    if gamma * diag_max <= 1.0:
        return gamma
    norm = K.norm if isinstance(K, KernelGram) else float(la.eigvalsh(Km)[-1])
    if gamma * norm > n * (1 + _STEP_SLACK):
        raise InputError(f"step size too large: gamma*||K|| = {gamma * norm:.6g} > n = {n}")
    return gamma


def es_step(K: np.ndarray, y: np.ndarray, gamma: float, alpha: np.ndarray) -> np.ndarray:
    n = K.shape[0]
    return alpha - (gamma / n) * (K @ alpha - y)


def fit_early_stopping(K, y, gamma: Optional[float] = None, T: int = 100,
                       keep_path: bool = True, observer: Optional[Callable] = None,
                       kernel_spec=None) -> IterationPath:
    """Gradient descent on the empirical risk over the full expansion.

    ``observer(t, alpha)`` is called after each step, which lets model
    selection score every iterate without storing the path.
    """
    Km = _matrix(K)
    n = Km.shape[0]
    y = _check_y(y, n)
    if T < 1:
        raise InputError("T must be >= 1")
    gamma = _resolve_gamma_es(K, gamma)
    alpha = np.zeros(n)
    out = np.empty((T if keep_path else 1, n))
    for t in range(1, T + 1):
        alpha = es_step(Km, y, gamma, alpha)
        if keep_path:
            out[t - 1] = alpha
        if observer is not None:
            observer(t, alpha)
    if not keep_path:
        out[0] = alpha
    return IterationPath("early_stopping", np.arange(n), gamma, T, out, None, kernel_spec)


def fit_nkrls(nf: NystromFactor, y, lam: float, kernel_spec=None) -> CoefficientModel:
    """Nystrom KRLS through the R-factor: ``alpha = R (A^T A + lam n I)^{-1} A^T y``."""
    if not lam > 0:
        raise InputError("lambda must be positive")
    n = nf.n
    y = _check_y(y, n)
    G = nf.gram_small.copy()
    G[np.diag_indices_from(G)] += lam * n
    c = la.cho_factor(G, lower=False, check_finite=False)
    beta = la.cho_solve(c, nf.A.T @ y, check_finite=False)
    return CoefficientModel(nf.subset_idx, nf.R @ beta, "nkrls", {"lambda": lam}, kernel_spec)


def fit_nkrls_direct(K_nm, K_mm, y, lam: float, subset_idx=None, rank_tol=None,
                     kernel_spec=None) -> CoefficientModel:
    """Nystrom KRLS from ``(K_nm^T K_nm + lam n K_mm)^+ K_nm^T y``."""
    if not lam > 0:
        raise InputError("lambda must be positive")
    K_nm = np.asarray(K_nm, dtype=float)
    n, m = K_nm.shape
    y = _check_y(y, n)
    M = K_nm.T @ K_nm + lam * n * np.asarray(K_mm, dtype=float)
    M = (M + M.T) / 2.0
    alpha = pinv(M, rank_tol) @ (K_nm.T @ y)
    idx = np.arange(m) if subset_idx is None else np.asarray(subset_idx)
    return CoefficientModel(idx, alpha, "nkrls", {"lambda": lam}, kernel_spec)


def _resolve_gamma_nytro(nf: NystromFactor, gamma):
    if gamma is None:
        if nf.diag_max is None:
            raise InputError("default gamma needs diag_max on the Nystrom factor")
        return default_gamma(nf.diag_max)
    if not gamma > 0:
        raise InputError("gamma must be positive")
    if nf.diag_max is not None and gamma * nf.diag_max <= 1.0:
        return gamma
    if gamma * nf.z_norm > nf.n * (1 + _STEP_SLACK):
        raise InputError(f"step size too large: gamma*||A||^2 = {gamma * nf.z_norm:.6g} "
                         f"> n = {nf.n}")
    return gamma


def nytro_step(nf: NystromFactor, y: np.ndarray, gamma: float, alpha: np.ndarray) -> np.ndarray:
    """One NYTRO step on the subset coefficients ``alpha = R beta``.

    Equivalent to ``beta <- beta - gamma/n R^T K_nm^T (K_nm R beta - y)``;
    per step this is two passes over ``K_nm`` plus one ``m x m`` product,
    and ``A A^T`` is never formed.
    """
    r = nf.K_nm @ alpha - y
    return alpha - (gamma / nf.n) * (nf.pinv_mm @ (nf.K_nm.T @ r))


def fit_nytro(nf: NystromFactor, y, gamma: Optional[float] = None, T: int = 100,
              keep_path: bool = True, observer: Optional[Callable] = None,
              kernel_spec=None) -> IterationPath:
    """Early stopping restricted to the span of the Nystrom subset.

    ``path.betas`` gives the reduced ``k``-dimensional iterates.
    """
    n = nf.n
    y = _check_y(y, n)
    if T < 1:
        raise InputError("T must be >= 1")
    gamma = _resolve_gamma_nytro(nf, gamma)
    alpha = np.zeros(nf.m)
    out = np.empty((T if keep_path else 1, nf.m))
    for t in range(1, T + 1):
        alpha = nytro_step(nf, y, gamma, alpha)
        if keep_path:
            out[t - 1] = alpha
        if observer is not None:
            observer(t, alpha)
    if not keep_path:
        out[0] = alpha
    return IterationPath("nytro", nf.subset_idx, gamma, T, out, nf.beta_map, kernel_spec)


def predict(model: CoefficientModel, spec: Optional[KernelSpec], train_points,
            query_points) -> np.ndarray:
    spec = spec or model.kernel_spec
    if spec is None:
        raise InputError("a kernel spec is required for prediction")
    X = np.asarray(train_points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    idx = np.asarray(model.expansion_idx)
    if idx.size and (idx.min() < 0 or idx.max() >= X.shape[0]):
        raise InputError("expansion indices out of range for train_points")
    Kq = kernel_matrix(spec, query_points, X[idx])
    return Kq @ model.alpha
