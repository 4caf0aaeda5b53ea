"""Symmetric eigendecomposition, pseudo-inverse, spectral functions, and the
Nystrom R-factor."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .errors import InputError, NumericError

EPS = np.finfo(np.float64).eps


def default_rank_tol(n: int) -> float:
    """Relative eigenvalue threshold below which a direction counts as null."""
    return n * EPS


def _check_symmetric(A, tol=1e-10):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("matrix must be square")
    scale = np.max(np.abs(A)) if A.size else 0.0
    if scale > 0 and np.max(np.abs(A - A.T)) > tol * scale:
        raise InputError("matrix is not symmetric")
    return (A + A.T) / 2.0


@dataclass(frozen=True, eq=False)
class EigenSystem:
    vectors: np.ndarray
    values: np.ndarray  # descending

    def rank(self, rank_tol: Optional[float] = None) -> int:
        return int(np.count_nonzero(self.range_mask(rank_tol)))

    def range_mask(self, rank_tol: Optional[float] = None) -> np.ndarray:
        if rank_tol is None:
            rank_tol = default_rank_tol(len(self.values))
        top = self.values[0] if len(self.values) else 0.0
        if top <= 0:
            return np.zeros(len(self.values), dtype=bool)
        return self.values > rank_tol * top

    def apply(self, f: Callable) -> np.ndarray:
        U = self.vectors
        return (U * f(self.values)) @ U.T

    def projector(self, rank_tol: Optional[float] = None) -> np.ndarray:
        Ur = self.vectors[:, self.range_mask(rank_tol)]
        return Ur @ Ur.T


def eigh(A) -> EigenSystem:
    A = _check_symmetric(A)
    w, U = np.linalg.eigh(A)
    return EigenSystem(U[:, ::-1].copy(), w[::-1].copy())


def pinv(A, rank_tol: Optional[float] = None) -> np.ndarray:
    """Pseudo-inverse of a symmetric PSD matrix via its eigensystem."""
    es = A if isinstance(A, EigenSystem) else eigh(A)
    keep = es.range_mask(rank_tol)
    Ur = es.vectors[:, keep]
    return (Ur / es.values[keep]) @ Ur.T


def apply_spectral(f: Callable, A) -> np.ndarray:
    """``U f(S) U^T`` for symmetric ``A = U S U^T``; ``f`` acts elementwise."""
    es = A if isinstance(A, EigenSystem) else eigh(A)
    return es.apply(lambda s: np.asarray(f(s), dtype=float) * np.ones_like(s))


@dataclass(frozen=True, eq=False)
class NystromFactor:
    """Subset blocks of a kernel matrix and a factor ``R`` with ``R R^T = K_mm^+``.

    ``A = K_nm R`` is only materialized on first access; the iterative
    solver works with ``K_nm`` and ``R R^T`` directly.
    """

    subset_idx: np.ndarray
    K_nm: np.ndarray
    K_mm: np.ndarray
    R: np.ndarray
    rank_k: int
    diag_max: Optional[float] = None

    @property
    def n(self) -> int:
        return self.K_nm.shape[0]

    @property
    def m(self) -> int:
        return self.K_mm.shape[0]

    @cached_property
    def A(self) -> np.ndarray:
        return self.K_nm @ self.R

    @cached_property
    def pinv_mm(self) -> np.ndarray:
        """``R R^T``, the pseudo-inverse of ``K_mm``."""
        G = self.R @ self.R.T
        return (G + G.T) / 2.0

    @cached_property
    def beta_map(self) -> np.ndarray:
        """``R^T K_mm``: recovers ``beta`` from ``alpha = R beta``."""
        return self.R.T @ self.K_mm

    @cached_property
    def Z(self) -> np.ndarray:
        A = self.A
        Z = A @ A.T
        return (Z + Z.T) / 2.0

    @cached_property
    def gram_small(self) -> np.ndarray:
        """``A^T A`` (k x k)."""
        A = self.A
        G = A.T @ A
        return (G + G.T) / 2.0

    @cached_property
    def z_norm(self) -> float:
        """Operator norm of ``A A^T``, i.e. ``||A||^2``."""
        s = la.svdvals(self.A) if self.rank_k else np.zeros(1)
        return float(s[0] ** 2)


def _full_rank(K_mm, rank_tol) -> bool:
    """Pivoted Cholesky screen: every pivot stays above ``rank_tol * max diag``."""
    top = float(np.max(np.diag(K_mm))) if K_mm.size else 0.0
    if top <= 0:
        return False
    _, _, rank, info = lapack.dpstrf(K_mm, lower=0, tol=rank_tol * top, overwrite_a=0)
    return info == 0 and rank == K_mm.shape[0]


def nystrom_factor(K_nm, K_mm, subset_idx=None, rank_tol: Optional[float] = None,
                   diag_max: Optional[float] = None) -> NystromFactor:
    """Build ``R = S T^{-1}`` from an economic QR ``K_mm = S D`` and the
    Cholesky factor ``T`` of ``S^T K_mm S``.

    A pivoted Cholesky screen detects numerically full-rank ``K_mm``, where
    plain QR suffices.  Otherwise column-pivoted QR is used so that the
    leading ``k`` columns of ``S`` span the numerical range of ``K_mm``.
    """
    K_mm = _check_symmetric(K_mm)
    K_nm = np.asarray(K_nm, dtype=float)
    m = K_mm.shape[0]
    if K_nm.ndim != 2 or K_nm.shape[1] != m:
        raise InputError(f"K_nm must have {m} columns")
    if subset_idx is None:
        subset_idx = np.arange(m)
    if rank_tol is None:
        rank_tol = default_rank_tol(m)

    if _full_rank(K_mm, rank_tol):
        # blocked unpivoted QR is about twice as fast as the pivoted one
        Q, D = la.qr(K_mm, mode="economic")
        piv, k = np.arange(m), m
    else:
        Q, D, piv = la.qr(K_mm, mode="economic", pivoting=True)
        d = np.abs(np.diag(D))
        k = int(np.count_nonzero(d > rank_tol * d[0])) if d[0] > 0 else 0
        if k == 0:
            raise NumericError("K_mm is numerically zero")
    S = Q[:, :k]
    # K_mm[:, piv] = Q D, so S^T K_mm = (first k rows of D) with columns un-permuted
    SK = np.empty((k, m))
    SK[:, piv] = D[:k]
    M = SK @ S
    M = (M + M.T) / 2.0
    try:
        T = la.cholesky(M, lower=False)
    except la.LinAlgError as exc:
        raise NumericError(f"Cholesky of S^T K_mm S failed ({exc}); "
                           f"K_mm is indefinite beyond tolerance at rank {k}") from exc
    # T^T T = M, so R R^T = S M^{-1} S^T
    R = la.solve_triangular(T, S.T, trans="T", lower=False).T
    return NystromFactor(np.asarray(subset_idx), K_nm, K_mm, R, k, diag_max)
