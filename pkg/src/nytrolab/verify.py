"""Randomized verification suites for the excess-risk identities and bounds.

Each suite returns a list of :class:`Check` rows, one inequality or identity
per row, evaluated with closed-form Q-matrix risks (no Monte-Carlo noise)
except ``oracle``, which validates the closed forms against simulation.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

from . import estimators as est
from .complexity import coherence_dim, effective_dim, full_dim, nystrom_size_bound, snr
from .data_io import spectrum_profile, synthesize_fixed_design
from .errors import InputError
from .kernel import KernelGram, uniform_subset
from .risk import (
    bias_bound_check,
    expected_excess_risk,
    full_nystrom_factor,
    monte_carlo_excess_risk,
    q_matrix,
    risk_of,
    subset_nystrom_factor,
)
from .spectral import apply_spectral

CSV_HEADER = "# nytro-lab v1"
# relative floating-point slack for inequalities evaluated in closed form
FP_SLACK = 1e-12


@dataclass
class Check:
    suite: str
    instance_id: int
    check: str
    hyper: str
    lhs: float
    rhs: float
    margin: float
    ok: bool


def c_t(t: int) -> float:
    return 4.0 * (1.0 + 1.0 / (t - 1)) ** 2


def c_t_delta(t: int, delta: float) -> float:
    return c_t(t) * (1.0 + 4.0 * delta)


def _leq(suite, iid, name, hyper, lhs, rhs):
    ok = lhs <= rhs + FP_SLACK * abs(rhs)
    return Check(suite, iid, name, hyper, float(lhs), float(rhs), float(rhs - lhs), bool(ok))


def _close(suite, iid, name, hyper, lhs, rhs, tol):
    err = abs(lhs - rhs)
    return Check(suite, iid, name, hyper, float(lhs), float(rhs), float(tol - err), bool(err <= tol))


def random_instance(seed: int, n_range=(10, 80), cond: float = 1e6, allow_zeros=True):
    """Abstract fixed-design problem with a mixed-rank spectrum.

    Nonzero eigenvalues span at most ``cond`` in ratio; part of the spectrum
    is exactly zero when ``allow_zeros``.  The spectrum scale, noise level and
    SNR are drawn on log scales.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    zeros = int(rng.integers(0, n // 2 + 1)) if allow_zeros and rng.random() < 0.7 else 0
    r = n - zeros
    kind = rng.choice(["poly", "exp", "flat"], p=[0.5, 0.4, 0.1])
    if kind == "poly":
        decay = rng.uniform(0.3, max(0.31, math.log(cond) / math.log(max(r, 2))))
    elif kind == "exp":
        decay = rng.uniform(0.01, max(0.011, math.log(cond) / max(r - 1, 1)))
    else:
        decay = 0.0
    top = 10 ** rng.uniform(-1, 2)
    s = spectrum_profile(n, str(kind), decay, zeros, top)
    sigma2 = 10 ** rng.uniform(-2, 1)
    target = 10 ** rng.uniform(-2, 3)
    _, problem, _ = synthesize_fixed_design(n, spectrum=s, target_snr=target, sigma2=sigma2,
                                            seed=int(rng.integers(2**31)))
    return problem


def _instances(trials, seed, **kw):
    seeds = np.random.SeedSequence(seed).generate_state(trials)
    return [(i, random_instance(int(s), **kw)) for i, s in enumerate(seeds)]


def suite_thm1(trials=50, seed=0, corrupt=False):
    rows = []
    for iid, p in _instances(trials, seed):
        Q = q_matrix("kols", {}, p.K)
        if corrupt:
            Q = Q + 0.1 * np.eye(p.n)
        risk = expected_excess_risk(Q, p.K, p.mu, p.sigma2).excess_risk
        target = p.sigma2 * full_dim(p.K) / p.n
        rows.append(_close("thm1", iid, "risk(kols) == sigma2 d*/n", "", risk, target,
                           1e-9 * target))
    return rows


def suite_thm2(trials=100, seed=0, lambda_scaling="snr"):
    """KRLS at the oracle lambda against ``sigma2 d_eff / n`` and ``sigma2 d* / n``.

    ``lambda_scaling="snr"`` uses ``lambda* = 1 / SNR``; ``"n_snr"`` uses
    ``1 / (n SNR)``.
    """
    name = "thm2" if lambda_scaling == "snr" else "thm2n"
    rows = []
    for iid, p in _instances(trials, seed):
        lam = 1.0 / snr(p) if lambda_scaling == "snr" else 1.0 / (p.n * snr(p))
        risk = risk_of("krls", {"lambda": lam}, p).excess_risk
        deff_bound = p.sigma2 * effective_dim(p.K, lam) / p.n
        dstar_bound = p.sigma2 * full_dim(p.K) / p.n
        h = f"lambda={lam:.6g}"
        rows.append(_leq(name, iid, "risk(krls) <= sigma2 d_eff/n", h, risk, deff_bound))
        rows.append(_leq(name, iid, "sigma2 d_eff/n <= sigma2 d*/n", h, deff_bound, dstar_bound))
    return rows


def _nytro_vs_nkrls(suite, iid, p, nf, ts, gamma, ref_tag="nkrls"):
    rows = []
    for t in ts:
        lam = 1.0 / (gamma * t)
        lhs = risk_of("nytro", {"gamma": gamma, "t": t}, p, nf).excess_risk
        rhs = c_t(t) * risk_of(ref_tag, {"lambda": lam}, p, nf).excess_risk
        rows.append(_leq(suite, iid, f"risk(nytro) <= c_t risk({ref_tag})",
                         f"m={nf.m},t={t}", lhs, rhs))
    return rows


def suite_thm5(trials=20, seed=0, t_max=200, subsets_per_instance=3, n_range=(10, 60)):
    rows = []
    rng = np.random.default_rng(seed + 1)
    for iid, p in _instances(trials, seed, n_range=n_range):
        gamma = est.default_gamma(p.K.diag_max)
        for _ in range(subsets_per_instance):
            m = int(rng.integers(1, p.n + 1))
            idx = uniform_subset(p.n, m, int(rng.integers(2**31)))
            nf = subset_nystrom_factor(p.K, idx)
            rows += _nytro_vs_nkrls("thm5", iid, p, nf, range(2, t_max + 1), gamma)
    return rows


def suite_thm3(trials=20, seed=0, t_max=200, n_range=(10, 60)):
    """Early stopping against KRLS at ``lambda = 1 / (gamma t)`` (the ``m = n`` case)."""
    rows = []
    for iid, p in _instances(trials, seed, n_range=n_range):
        gamma = est.default_gamma(p.K.diag_max)
        for t in range(2, t_max + 1):
            lhs = risk_of("early_stopping", {"gamma": gamma, "t": t}, p).excess_risk
            rhs = c_t(t) * risk_of("krls", {"lambda": 1.0 / (gamma * t)}, p).excess_risk
            rows.append(_leq("thm3", iid, "risk(es) <= c_t risk(krls)", f"t={t}", lhs, rhs))
        nf = full_nystrom_factor(p.K)
        rows += _nytro_vs_nkrls("thm3", iid, p, nf, range(2, t_max + 1), gamma)
    return rows


def suite_cor1(trials=10, seed=0, draws=5, n_range=(10, 60)):
    """NYTRO averaged over uniform subsets of the prescribed size against
    ``c_{t,delta}`` times KRLS, plus the constant's stated ceiling."""
    rows = []
    rng = np.random.default_rng(seed + 2)
    for iid, p in _instances(trials, seed, n_range=n_range):
        gamma = 1.0 / p.K.norm
        t = int(rng.integers(2, 100))
        delta = float(rng.uniform(0.05, 0.95))
        lam = 1.0 / (gamma * t)
        bound = nystrom_size_bound(coherence_dim(p.K, lam), delta, lam, p.n, p.K.norm)
        risks = []
        for _ in range(draws):
            idx = uniform_subset(p.n, bound.m, int(rng.integers(2**31)))
            nf = subset_nystrom_factor(p.K, idx)
            risks.append(risk_of("nytro", {"gamma": gamma, "t": t}, p, nf).excess_risk)
        rhs = c_t_delta(t, delta) * risk_of("krls", {"lambda": lam}, p).excess_risk
        h = f"m={bound.m},t={t},delta={delta:.3f}"
        rows.append(_leq("cor1", iid, "mean_M risk(nytro) <= c_t,delta risk(krls)", h,
                         float(np.mean(risks)), rhs))
        rows.append(_leq("cor1", iid, "c_t,delta <= 80", h, c_t_delta(t, delta), 80.0))
    return rows


def suite_collapse(trials=20, seed=0, t_max=100, n_range=(10, 60)):
    rows = []
    rng = np.random.default_rng(seed + 3)
    for iid, p in _instances(trials, seed, n_range=n_range):
        nf = full_nystrom_factor(p.K)
        lam = 10 ** rng.uniform(-6, 0)
        Qn = q_matrix("nkrls", {"lambda": lam}, p.K, nf)
        Qk = q_matrix("krls", {"lambda": lam}, p.K)
        rows.append(_close("collapse", iid, "||Q_nkrls - Q_krls||_F", f"lambda={lam:.3g}",
                           float(np.linalg.norm(Qn - Qk)), 0.0, 1e-9))
        y = p.sample_y(rng)
        gamma = est.default_gamma(p.K.diag_max)
        ny = est.fit_nytro(nf, y, gamma, t_max)
        es = est.fit_early_stopping(p.K, y, gamma, t_max)
        worst = max(float(np.max(np.abs(nf.K_nm @ ny.alpha(t) - p.K.matrix @ es.alpha(t))))
                    for t in range(1, t_max + 1))
        rows.append(_close("collapse", iid, "max_t |pred_nytro - pred_es|", f"t<={t_max}",
                           worst, 0.0, 1e-8))
    return rows


def suite_eqnyst(trials=20, seed=0, n_range=(10, 60)):
    """R-factor and pseudo-inverse Nystrom KRLS formulas agree on training predictions.

    Subsets larger than ``rank K`` make ``K_mm`` rank deficient.
    """
    rows = []
    rng = np.random.default_rng(seed + 4)
    for iid, p in _instances(trials, seed, n_range=n_range, cond=1e3):
        m = int(rng.integers(1, p.n + 1))
        idx = uniform_subset(p.n, m, int(rng.integers(2**31)))
        nf = subset_nystrom_factor(p.K, idx)
        lam = 10 ** rng.uniform(-4, 0)
        y = p.sample_y(rng)
        a = est.fit_nkrls(nf, y, lam)
        b = est.fit_nkrls_direct(nf.K_nm, nf.K_mm, y, lam, idx)
        err = float(np.max(np.abs(nf.K_nm @ a.alpha - nf.K_nm @ b.alpha)))
        deficient = nf.rank_k < m
        rows.append(_close("eqnyst", iid, "max |pred_char - pred_direct|",
                           f"m={m},k={nf.rank_k},deficient={deficient}", err, 0.0, 1e-8))
    return rows


def suite_bounds(trials=200, seed=0, bias_trials=100):
    """Dimension inequality chain and the NYTRO bias-filter bound."""
    rows = []
    rng = np.random.default_rng(seed + 5)
    for iid, p in _instances(trials, seed):
        lam = 10 ** rng.uniform(-6, 1)
        # d_tilde <= 1/lambda needs a bounded kernel, max_i K_ii <= 1
        K = KernelGram(p.K.matrix * (10 ** rng.uniform(-1, 0) / p.K.diag_max))
        de, dt, ds = effective_dim(K, lam), coherence_dim(K, lam), full_dim(K)
        h = f"lambda={lam:.3g}"
        rows.append(_leq("bounds", iid, "d_eff <= d_tilde", h, de, dt))
        rows.append(_leq("bounds", iid, "d_tilde <= 1/lambda", h, dt, 1.0 / lam))
        rows.append(_leq("bounds", iid, "d_eff <= d*", h, de, ds))
        rows.append(_leq("bounds", iid, "d* <= n", h, ds, p.n))
        rows.append(_leq("bounds", iid, "d_tilde <= max_i K_ii / lambda (unscaled K)", h,
                         coherence_dim(p.K, lam), p.K.diag_max / lam))
    for iid, p in _instances(bias_trials, seed + 1000):
        m = int(rng.integers(1, p.n + 1))
        nf = subset_nystrom_factor(p.K, uniform_subset(p.n, m, int(rng.integers(2**31))))
        t = int(rng.choice([1, 2, 10, 100, int(rng.integers(1, 500))]))
        gamma = est.default_gamma(p.K.diag_max)
        bc = bias_bound_check(nf, gamma, t)
        rows.append(Check("bounds", iid, "q(A, n/(gamma t)) <= n^2/(gamma t)^2",
                          f"m={m},t={t}", bc.q, bc.bound, bc.margin, bc.passed))
    return rows


def suite_spectral(trials=20, seed=0):
    """Push-through and multiplicativity of spectral functions on random matrices."""
    rows = []
    rng = np.random.default_rng(seed + 6)
    for iid in range(trials):
        n, m = (int(v) for v in rng.integers(1, 21, size=2))
        B = rng.standard_normal((n, m))
        c = float(rng.uniform(0.1, 2.0))
        L = max(np.linalg.norm(B, 2) ** 2, 1e-12)
        g, t = 1.0 / L, int(rng.integers(1, 50))
        for name, f in [("id", lambda s: s), ("ridge", lambda s: s / (s + c)),
                        ("landweber", lambda s: 1 - (1 - g * s) ** t)]:
            lhs = apply_spectral(f, B.T @ B) @ B.T
            rhs = B.T @ apply_spectral(f, B @ B.T)
            rows.append(_close("spectral", iid, f"push-through {name}", f"n={n},m={m}",
                               float(np.max(np.abs(lhs - rhs))), 0.0, 1e-9))
        A = B @ B.T
        f1 = lambda s: s / (s + c)
        f2 = lambda s: np.exp(-s / L)
        prod = apply_spectral(lambda s: f1(s) * f2(s), A)
        rows.append(_close("spectral", iid, "multiplicativity", f"n={n}",
                           float(np.max(np.abs(prod - apply_spectral(f1, A) @ apply_spectral(f2, A)))),
                           0.0, 1e-9))
    return rows


def suite_oracle(trials=10, seed=0, mc_trials=2000, n_range=(10, 40)):
    """Monte-Carlo excess risk against the closed form, for four estimators."""
    rows = []
    rng = np.random.default_rng(seed + 7)
    for iid, p in _instances(trials, seed, n_range=n_range):
        gamma = est.default_gamma(p.K.diag_max)
        m = int(rng.integers(1, p.n + 1))
        nf = subset_nystrom_factor(p.K, uniform_subset(p.n, m, int(rng.integers(2**31))))
        cases = [
            ("kols", {}, None),
            ("krls", {"lambda": 10 ** rng.uniform(-4, 0)}, None),
            ("nkrls", {"lambda": 10 ** rng.uniform(-4, 0)}, nf),
            ("nytro", {"gamma": gamma, "t": int(rng.integers(2, 60))}, nf),
        ]
        for tag, hyper, f in cases:
            exact = risk_of(tag, hyper, p, f).excess_risk
            mc = monte_carlo_excess_risk(p, tag, hyper, mc_trials, int(rng.integers(2**31)), f)
            h = ",".join(f"{k}={v:.4g}" for k, v in hyper.items()) + (f",m={m}" if f else "")
            rows.append(_close("oracle", iid, f"|mc - exact| <= 3 se ({tag})", h,
                               mc.estimate, exact, 3.0 * mc.stderr))
    return rows


SUITES: dict[str, Callable] = {
    "thm1": suite_thm1,
    "thm2": suite_thm2,
    "thm2n": lambda trials=100, seed=0: suite_thm2(trials, seed, "n_snr"),
    "thm3": suite_thm3,
    "thm5": suite_thm5,
    "cor1": suite_cor1,
    "collapse": suite_collapse,
    "eqnyst": suite_eqnyst,
    "spectral": suite_spectral,
    "bounds": suite_bounds,
    "oracle": suite_oracle,
}


def run_suite(name: str, trials: Optional[int] = None, seed: int = 0, **kw):
    if name not in SUITES:
        raise InputError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    fn = SUITES[name]
    return fn(trials=trials, seed=seed, **kw) if trials is not None else fn(seed=seed, **kw)


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf)
    w.writerow(["suite", "instance_id", "check", "hyper", "lhs", "rhs", "margin", "ok"])
    for r in rows:
        w.writerow([r.suite, r.instance_id, r.check, r.hyper, repr(r.lhs), repr(r.rhs),
                    repr(r.margin), int(r.ok)])
    return buf.getvalue()


def failures_json(rows, seed) -> str:
    bad = [asdict(r) for r in rows if not r.ok]
    return json.dumps({"seed": seed, "failures": bad}, indent=2)
