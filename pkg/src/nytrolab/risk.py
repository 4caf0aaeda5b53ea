"""Exact fixed-design excess risk through Q-matrices, and a Monte-Carlo check.

For an estimator whose coefficients are ``C y`` the training predictions are
``Q y`` with ``Q = K C``, and the expected excess risk splits into

    variance  sigma^2 / n * tr(Q^2)
    bias      1 / n * ||P (I - Q) mu||^2

with ``P = K^+ K`` the projector on the range of ``K``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import estimators as est
from .errors import InputError
from .kernel import KernelGram
from .spectral import NystromFactor, default_rank_tol, eigh


@dataclass(frozen=True, eq=False)
class FixedDesignProblem:
    K: KernelGram
    mu: np.ndarray
    sigma2: float
    alpha_opt: np.ndarray
    points: Optional[np.ndarray] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.sigma2 >= 0:
            raise InputError("sigma2 must be non-negative")

    @property
    def n(self) -> int:
        return self.K.n

    def sample_y(self, rng) -> np.ndarray:
        return self.mu + np.sqrt(self.sigma2) * rng.standard_normal(self.n)


@dataclass(frozen=True, eq=False)
class RiskReport:
    variance: float
    bias: float
    excess_risk: float
    q_matrix: np.ndarray

    def to_dict(self, include_q=False):
        d = {"variance": self.variance, "bias": self.bias, "excess_risk": self.excess_risk}
        if include_q:
            d["q_matrix"] = self.q_matrix.tolist()
        return d

    def to_json(self, include_q=False, **kw):
        return json.dumps(self.to_dict(include_q), **kw)


def _sym(A):
    return (A + A.T) / 2.0


def q_matrix(tag: str, hyper: dict, K: KernelGram, nf: Optional[NystromFactor] = None,
             rank_tol=None) -> np.ndarray:
    """The matrix ``Q`` mapping ``y`` to training predictions for ``tag``.

    ``hyper`` holds ``lambda`` for Tikhonov methods and ``gamma``/``t`` for
    iterative ones.  Nystrom methods need ``nf``.
    """
    n = K.n
    if tag == "kols":
        return K.eig.projector(rank_tol)
    if tag == "krls":
        lam = hyper["lambda"]
        Km = K.matrix
        return _sym(np.linalg.solve(Km + lam * n * np.eye(n), Km))
    if tag == "early_stopping":
        g, t = hyper["gamma"], int(hyper["t"])
        return _sym(np.eye(n) - K.eig.apply(lambda s: (1.0 - g * s / n) ** t))
    if tag in ("nkrls", "nytro"):
        if nf is None:
            raise InputError(f"{tag} requires a Nystrom factor")
        Zs = eigh(nf.Z)
        if tag == "nkrls":
            lam = hyper["lambda"]
            s = np.maximum(Zs.values, 0.0)
            return _sym(Zs.apply(lambda _: s / (s + lam * n)))
        g, t = hyper["gamma"], int(hyper["t"])
        return _sym(np.eye(n) - Zs.apply(lambda s: (1.0 - g * s / n) ** t))
    raise InputError(f"unknown algorithm {tag!r}")


def expected_excess_risk(Q, K: KernelGram, mu, sigma2: float, rank_tol=None) -> RiskReport:
    Q = np.asarray(Q, dtype=float)
    n = K.n
    if Q.shape != (n, n):
        raise InputError(f"Q must be {n}x{n}")
    mu = np.asarray(mu, dtype=float)
    P = K.eig.projector(rank_tol)
    variance = float(sigma2 / n * np.sum(Q * Q.T))
    r = P @ (mu - Q @ mu)
    bias = float(r @ r / n)
    return RiskReport(variance, bias, variance + bias, Q)


def risk_of(tag, hyper, problem: FixedDesignProblem, nf=None, rank_tol=None) -> RiskReport:
    Q = q_matrix(tag, hyper, problem.K, nf, rank_tol)
    return expected_excess_risk(Q, problem.K, problem.mu, problem.sigma2, rank_tol)


def make_fitter(tag: str, hyper: dict, K: KernelGram, nf: Optional[NystromFactor] = None):
    """Return ``y -> training predictions`` running the actual estimator."""
    Km = K.matrix
    if tag == "kols":
        return lambda y: est.fit_kols(K, y).train_predictions(Km)
    if tag == "krls":
        return lambda y: est.fit_krls(K, y, hyper["lambda"]).train_predictions(Km)
    if tag == "early_stopping":
        return lambda y: est.fit_early_stopping(
            K, y, hyper["gamma"], int(hyper["t"]), keep_path=False).final.train_predictions(Km)
    if nf is None:
        raise InputError(f"{tag} requires a Nystrom factor")
    if tag == "nkrls":
        return lambda y: nf.K_nm @ est.fit_nkrls(nf, y, hyper["lambda"]).alpha
    if tag == "nytro":
        return lambda y: nf.K_nm @ est.fit_nytro(
            nf, y, hyper["gamma"], int(hyper["t"]), keep_path=False).final.alpha
    raise InputError(f"unknown algorithm {tag!r}")


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    trials: int


def monte_carlo_excess_risk(problem: FixedDesignProblem, tag: str, hyper: dict, trials: int,
                            seed: int, nf: Optional[NystromFactor] = None,
                            rank_tol=None) -> MonteCarloEstimate:
    """Average of ``||P (K alpha_hat - mu)||^2 / n`` over independent noise draws.

    Each trial draws from its own child of ``SeedSequence(seed)``, so the
    result does not depend on evaluation order.
    """
    if trials < 2:
        raise InputError("trials must be >= 2")
    fit = make_fitter(tag, hyper, problem.K, nf)
    P = problem.K.eig.projector(rank_tol)
    n = problem.n
    vals = np.empty(trials)
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        y = problem.sample_y(np.random.default_rng(child))
        r = P @ (fit(y) - problem.mu)
        vals[i] = r @ r / n
    return MonteCarloEstimate(float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(trials)), trials)


@dataclass(frozen=True)
class BoundCheck:
    passed: bool
    q: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.q


def bias_filter_sup(sigmas, n: int, gamma: float, t: int) -> float:
    """``max_i (1 - gamma s_i / n)^(2t) (s_i + n / (gamma t))^2``."""
    s = np.maximum(np.asarray(sigmas, dtype=float), 0.0)
    return float(np.max((1.0 - gamma * s / n) ** (2 * t) * (s + n / (gamma * t)) ** 2))


def bias_bound_check(nf: NystromFactor, gamma: float, t: int) -> BoundCheck:
    if t < 1:
        raise InputError("t must be >= 1")
    n = nf.n
    s = eigh(nf.Z).values
    if gamma * max(s[0], 0.0) > n * (1 + 1e-12):
        raise InputError("step size violates gamma * ||Z|| <= n")
    q = bias_filter_sup(s, n, gamma, t)
    bound = n**2 / (gamma**2 * t**2)
    return BoundCheck(q <= bound * (1 + 1e-12), q, bound)


def full_nystrom_factor(K: KernelGram, rank_tol=None) -> NystromFactor:
    """Nystrom factor that uses every training point as a centre."""
    from .spectral import nystrom_factor

    return nystrom_factor(K.matrix, K.matrix, np.arange(K.n), rank_tol, K.diag_max)


def subset_nystrom_factor(K: KernelGram, idx, rank_tol=None) -> NystromFactor:
    from .spectral import nystrom_factor

    idx = np.asarray(idx)
    Km = K.matrix
    return nystrom_factor(Km[:, idx], Km[np.ix_(idx, idx)], idx,
                          rank_tol if rank_tol is not None else default_rank_tol(len(idx)),
                          K.diag_max)
