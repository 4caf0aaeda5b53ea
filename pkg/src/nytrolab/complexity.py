"""Dimension measures, signal-to-noise ratio, subsample-size bound and the
four-way regime classifier."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
import scipy.linalg as la

from .errors import InputError
from .kernel import KernelGram

REGIONS = ("nytro", "early_stopping", "nkrls", "krls")


def _gram(K) -> KernelGram:
    return K if isinstance(K, KernelGram) else KernelGram(np.asarray(K, dtype=float))


def full_dim(K, rank_tol: Optional[float] = None) -> int:
    return _gram(K).eig.rank(rank_tol)


def effective_dim(K, lam: float) -> float:
    """``tr(K (K + lam n I)^{-1})`` from the eigenvalues of ``K``."""
    if not lam > 0:
        raise InputError("lambda must be positive")
    K = _gram(K)
    s = np.maximum(K.eig.values, 0.0)
    return float(np.sum(s / (s + lam * K.n)))


def coherence_dim(K, lam: float) -> float:
    """``n * max_i (K (K + lam n I)^{-1})_ii``."""
    if not lam > 0:
        raise InputError("lambda must be positive")
    K = _gram(K)
    U = K.eig.vectors
    s = np.maximum(K.eig.values, 0.0)
    diag = np.einsum("ij,j,ij->i", U, s / (s + lam * K.n), U)
    return float(K.n * np.max(diag))


def snr(problem, K=None) -> float:
    """``alpha_opt^T K alpha_opt / sigma^2``."""
    K = _gram(K if K is not None else problem.K)
    if not problem.sigma2 > 0:
        raise InputError("SNR is undefined for sigma2 = 0")
    a = problem.alpha_opt
    return float(a @ K.matrix @ a / problem.sigma2)


@dataclass(frozen=True)
class SizeBound:
    m: int
    raw: float
    vacuous: bool


def nystrom_size_bound(d_tilde: float, delta: float, lam: float, n: int,
                       K_norm: float) -> SizeBound:
    """Subset size ``(32 d~ / delta + 2) log(||K|| n / (delta lam))``, clamped to [1, n]."""
    if not 0 < delta < 1:
        raise InputError("delta must lie in (0, 1)")
    if not lam > 0:
        raise InputError("lambda must be positive")
    raw = (32.0 * d_tilde / delta + 2.0) * math.log(K_norm * n / (delta * lam))
    m = math.ceil(raw - 1e-9 * abs(raw))
    return SizeBound(int(min(max(m, 1), n)), raw, m > n)


def curve_c1(snr_value: float, n: int) -> float:
    """Boundary between subsampled and exact methods; ``+inf`` where ``n SNR = 1``."""
    d = abs(math.log(n * snr_value))
    return math.inf if d == 0 else n / d


def curve_c2(snr_value: float) -> float:
    """Boundary between iterative and Tikhonov methods; ``+inf`` at ``SNR = 1``."""
    d = abs(math.log(snr_value))
    return math.inf if d == 0 else snr_value / d


def regime_classify(snr_value: float, d_tilde: float, n: int) -> str:
    # ties go to the cheaper side: subsampling over exact, iterative over Tikhonov
    if not snr_value > 0 or not d_tilde > 0:
        raise InputError("snr and d_tilde must be positive")
    subsample = d_tilde <= curve_c1(snr_value, n)
    iterative = d_tilde >= curve_c2(snr_value)
    if subsample:
        return "nytro" if iterative else "nkrls"
    return "early_stopping" if iterative else "krls"


@dataclass(frozen=True)
class RegimeProfile:
    d_star: int
    d_eff: float
    d_tilde: float
    snr: float
    lambda_star: float
    n: int
    region: str
    c1: float
    c2: float

    def to_dict(self):
        return asdict(self)

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def regime_profile(K, snr_value: float) -> RegimeProfile:
    K = _gram(K)
    lam = 1.0 / snr_value
    dt = coherence_dim(K, lam)
    return RegimeProfile(full_dim(K), effective_dim(K, lam), dt, snr_value, lam, K.n,
                         regime_classify(snr_value, dt, K.n),
                         curve_c1(snr_value, K.n), curve_c2(snr_value))


def estimate_snr(K, y, lam: float) -> float:
    """SNR estimate for real data from a KRLS fit at ``lam``.

    Uses ``alpha^T K alpha`` of the fit over the residual variance.  This is
    an estimate and never enters the verification suites.
    """
    K = _gram(K)
    n = K.n
    y = np.asarray(y, dtype=float)
    alpha = la.solve(K.matrix + lam * n * np.eye(n), y, assume_a="pos")
    fit = K.matrix @ alpha
    resid = y - fit
    s2 = float(resid @ resid / max(n - 1, 1))
    if s2 <= 0:
        raise InputError("zero residual variance; SNR estimate undefined")
    return float(alpha @ fit / s2)
