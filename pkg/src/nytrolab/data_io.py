"""libsvm text I/O, target scaling, and synthetic fixed-design problems."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, ParseError
from .kernel import KernelGram, KernelSpec, gram_full
from .risk import FixedDesignProblem
from .spectral import default_rank_tol

CACHE_VERSION = 1
CACHE_SUFFIX = ".nytro.npz"


@dataclass(frozen=True, eq=False)
class Dataset:
    points: np.ndarray
    targets: np.ndarray
    name: str = ""
    scaled: bool = False

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def parse_libsvm(lines, n_features: Optional[int] = None, name: str = "") -> Dataset:
    targets, rows = [], []
    width = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise ParseError(f"non-numeric label {tokens[0]!r}", lineno) from None
        feats = {}
        for tok in tokens[1:]:
            idx, sep, val = tok.partition(":")
            if not sep:
                raise ParseError(f"expected idx:val, got {tok!r}", lineno)
            try:
                j = int(idx)
                v = float(val)
            except ValueError:
                raise ParseError(f"non-numeric entry {tok!r}", lineno) from None
            if j < 1:
                raise ParseError(f"feature indices are 1-based, got {j}", lineno)
            feats[j] = v
            width = max(width, j)
        targets.append(label)
        rows.append(feats)
    if n_features is not None:
        if width > n_features:
            raise ParseError(f"feature index {width} exceeds n_features={n_features}")
        width = n_features
    X = np.zeros((len(rows), width))
    for i, feats in enumerate(rows):
        for j, v in feats.items():
            X[i, j - 1] = v
    return Dataset(X, np.asarray(targets, dtype=float), name)


def _cache_path(path):
    return str(path) + CACHE_SUFFIX


def load_libsvm(path, n_features: Optional[int] = None, cache: bool = False) -> Dataset:
    """Read a libsvm file into a dense matrix (absent features are zero).

    With ``cache=True`` a binary sidecar ``<path>.nytro.npz`` is written and
    reused while its version, source size and mtime still match.
    """
    path = os.fspath(path)
    name = os.path.basename(path)
    st = os.stat(path)
    stamp = np.array([CACHE_VERSION, st.st_size, st.st_mtime_ns], dtype=np.int64)
    cp = _cache_path(path)
    if cache and os.path.exists(cp):
        with np.load(cp) as z:
            if np.array_equal(z["stamp"], stamp) and (
                    n_features is None or z["points"].shape[1] == n_features):
                return Dataset(z["points"], z["targets"], name)
    with open(path) as fh:
        ds = parse_libsvm(fh, n_features, name)
    if cache:
        with open(cp, "wb") as fh:
            np.savez(fh, stamp=stamp, points=ds.points, targets=ds.targets)
    return ds


def write_libsvm(path, points, targets):
    points = np.asarray(points, dtype=float)
    with open(path, "w") as fh:
        for x, label in zip(points, targets):
            feats = " ".join(f"{j + 1}:{float(v)!r}" for j, v in enumerate(x) if v != 0)
            fh.write(f"{float(label)!r} {feats}".rstrip() + "\n")


def scale_targets_unit(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    lo, hi = y.min(), y.max()
    if not hi > lo:
        raise InputError("cannot scale constant targets")
    return (y - lo) / (hi - lo)


def random_orthonormal(n: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def spectrum_profile(n: int, kind: str = "poly", decay: float = 2.0, zeros: int = 0,
                     top: float = 1.0) -> np.ndarray:
    """Descending eigenvalues: ``poly`` ~ i^-decay, ``exp`` ~ exp(-decay i), ``flat``."""
    if not 0 <= zeros <= n:
        raise InputError("zeros must lie in [0, n]")
    i = np.arange(n - zeros, dtype=float)
    if kind == "poly":
        s = (1.0 + i) ** -decay
    elif kind == "exp":
        s = np.exp(-decay * i)
    elif kind == "flat":
        s = np.ones(n - zeros)
    else:
        raise InputError(f"unknown spectrum kind {kind!r}")
    return np.concatenate([top * s, np.zeros(zeros)])


def synthesize_fixed_design(n: int, d: int = 1, spectrum=None, target_snr: float = 1.0,
                            sigma2: float = 1.0, seed=None, family: str = "abstract",
                            bandwidth: float = 1.0, out_of_range: float = 0.0):
    """Build a fixed-design problem with ``alpha_opt^T K alpha_opt / sigma2 = target_snr``.

    ``family="abstract"`` forms ``K = U diag(spectrum) U^T`` with random
    orthonormal ``U`` and no points.  ``family="geometric"`` samples standard
    normal points in ``d`` dimensions and uses a Gaussian kernel.
    ``out_of_range`` adds a component orthogonal to the range of ``K`` with
    that norm relative to ``||mu||``.

    Returns ``(points, problem, K)``.
    """
    if n < 1:
        raise InputError("n must be >= 1")
    if not target_snr > 0:
        raise InputError("target_snr must be positive")
    if not sigma2 > 0:
        raise InputError("sigma2 must be positive")
    rng = np.random.default_rng(seed)
    if family == "abstract":
        s = spectrum_profile(n) if spectrum is None else np.asarray(spectrum, dtype=float)
        if s.shape != (n,):
            raise InputError(f"spectrum must have {n} entries")
        if np.any(s < 0):
            raise InputError("spectrum must be non-negative (PSD)")
        U = random_orthonormal(n, rng)
        Km = (U * s) @ U.T
        K = KernelGram((Km + Km.T) / 2.0)
        points = None
    elif family == "geometric":
        points = rng.standard_normal((n, d))
        K = gram_full(KernelSpec("gaussian", bandwidth), points)
    else:
        raise InputError(f"unknown family {family!r}")
    es = K.eig
    keep = es.range_mask(default_rank_tol(n))
    Ur = es.vectors[:, keep]
    if Ur.shape[1] == 0:
        raise InputError("kernel matrix is zero")
    alpha = Ur @ rng.standard_normal(Ur.shape[1])
    energy = alpha @ K.matrix @ alpha
    alpha *= np.sqrt(target_snr * sigma2 / energy)
    mu = K.matrix @ alpha
    if out_of_range:
        Un = es.vectors[:, ~keep]
        if Un.shape[1] == 0:
            raise InputError("out_of_range needs a rank-deficient kernel matrix")
        w = Un @ rng.standard_normal(Un.shape[1])
        mu = mu + out_of_range * np.linalg.norm(mu) * w / np.linalg.norm(w)
    problem = FixedDesignProblem(K, mu, float(sigma2), alpha, points, seed)
    return points, problem, K


INSURANCE_FILES = ("ticdata2000.txt", "ticeval2000.txt", "tictgts2000.txt")


def load_insurance(directory, signed_labels: bool = True):
    """Load the InsuranceCompany (CoIL 2000) benchmark from a local directory.

    Accepts either the UCI whitespace tables ``ticdata2000.txt`` (85 features
    plus the label), ``ticeval2000.txt`` and ``tictgts2000.txt``, or a libsvm
    pair ``insurance.train`` / ``insurance.test``.  With ``signed_labels`` the
    0/1 label becomes -1/+1.

    Returns ``(train, test)`` datasets.
    """
    directory = os.fspath(directory)
    tab = [os.path.join(directory, f) for f in INSURANCE_FILES]
    if all(os.path.exists(p) for p in tab):
        data = np.loadtxt(tab[0])
        Xt = np.loadtxt(tab[1])
        yt = np.loadtxt(tab[2])
        X, y = data[:, :-1], data[:, -1]
    else:
        tr = os.path.join(directory, "insurance.train")
        te = os.path.join(directory, "insurance.test")
        if not (os.path.exists(tr) and os.path.exists(te)):
            raise InputError(f"no InsuranceCompany files found in {directory}")
        a = load_libsvm(tr)
        b = load_libsvm(te, n_features=a.d)
        X, y, Xt, yt = a.points, a.targets, b.points, b.targets
    if signed_labels:
        y, yt = 2.0 * y - 1.0, 2.0 * yt - 1.0
    return Dataset(X, y, "insurance-train"), Dataset(Xt, yt, "insurance-test")
