import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nytrolab.complexity import (coherence_dim, curve_c1, curve_c2, effective_dim, full_dim,
                                 nystrom_size_bound, regime_classify, regime_profile, snr)
from nytrolab.data_io import spectrum_profile, synthesize_fixed_design
from nytrolab.errors import InputError
from nytrolab.kernel import KernelGram
from nytrolab.risk import FixedDesignProblem

from conftest import random_psd


def test_full_dim_examples():
    assert full_dim(np.eye(6)) == 6
    v = np.arange(1.0, 6.0)
    assert full_dim(np.outer(v, v)) == 1
    _, _, K = synthesize_fixed_design(8, spectrum=spectrum_profile(8, zeros=3), seed=0)
    assert full_dim(K) == 5


def test_effective_dim_examples():
    assert effective_dim(np.eye(2), 0.5) == pytest.approx(1.0)
    K = random_psd(10, rank=6, seed=1)
    assert effective_dim(K, 1e-10) == pytest.approx(6, abs=1e-5)
    with pytest.raises(InputError):
        effective_dim(K, 0.0)


def test_effective_dim_direct_solve():
    K = random_psd(12, seed=2)
    lam = 0.03
    direct = np.trace(np.linalg.solve(K + lam * 12 * np.eye(12), K))
    assert effective_dim(K, lam) == pytest.approx(direct, rel=1e-10)


def test_coherence_examples():
    assert coherence_dim(np.eye(2), 0.5) == pytest.approx(1.0)
    n, c, lam = 6, 2.0, 0.1
    K = np.zeros((n, n))
    K[0, 0] = c
    assert coherence_dim(K, lam) == pytest.approx(n * c / (c + lam * n), rel=1e-12)


def test_snr_examples():
    K = KernelGram(np.eye(4))
    mu = np.array([1.0, 2.0, 0.0, -1.0])
    assert snr(FixedDesignProblem(K, mu, 1.0, np.zeros(4))) == 0.0
    assert snr(FixedDesignProblem(K, mu, mu @ mu, mu)) == pytest.approx(1.0)
    with pytest.raises(InputError):
        snr(FixedDesignProblem(K, mu, 0.0, mu))


def test_snr_matches_pseudo_root():
    _, p, K = synthesize_fixed_design(15, spectrum=spectrum_profile(15, zeros=4), seed=3,
                                      target_snr=2.5)
    es = K.eig
    keep = es.range_mask()
    U = es.vectors[:, keep]
    half = (U / np.sqrt(es.values[keep])) @ U.T
    v = half @ K.eig.projector() @ p.mu
    assert snr(p) * p.sigma2 == pytest.approx(v @ v, rel=1e-9)


def test_size_bound_example():
    # ||K|| n / (delta lam) = e makes the log factor 1
    n, lam, delta = 1000, 1.0, 0.5
    b = nystrom_size_bound(1.0, delta, lam, n, math.e * delta * lam / n)
    assert b.m == 66 and not b.vacuous


def test_size_bound_clamp_and_monotone():
    b = nystrom_size_bound(50.0, 0.1, 1e-3, 100, 1.0)
    assert b.m == 100 and b.vacuous
    raws = [nystrom_size_bound(2.0, d, 1e-2, 10**6, 1.0).raw for d in (0.9, 0.5, 0.1, 0.01)]
    assert np.all(np.diff(raws) > 0)
    with pytest.raises(InputError):
        nystrom_size_bound(1.0, 1.0, 0.1, 10, 1.0)


def test_regime_examples():
    n = 1000
    s = 0.5
    c1, c2 = curve_c1(s, n), curve_c2(s)
    assert c1 == pytest.approx(n / abs(math.log(n * s)))
    assert c2 == pytest.approx(s / abs(math.log(s)))
    # above both curves: exact iterative
    assert regime_classify(s, 10 * c1, n) == "early_stopping"
    # SNR below one with d_tilde between the curves
    assert regime_classify(s, 10.0, n) == "nytro"
    # high SNR, d_tilde below both: subsampled Tikhonov
    s, n = 1e3, 10**5
    assert curve_c1(s, n) > 50 and curve_c2(s) > 50
    assert regime_classify(s, 50.0, n) == "nkrls"
    # above c1, below c2: exact Tikhonov
    s, n = 1e8, 1000
    assert curve_c1(s, n) < 100 < curve_c2(s)
    assert regime_classify(s, 100.0, n) == "krls"


def test_regime_singular_curves():
    assert curve_c1(0.01, 100) == math.inf
    assert curve_c2(1.0) == math.inf
    # at SNR = 1 the iterative side is never reached
    assert regime_classify(1.0, 5.0, 100) == "nkrls"
    with pytest.raises(InputError):
        regime_classify(0.0, 1.0, 10)


def test_regime_ties_go_cheaper():
    s, n = 0.5, 200
    assert regime_classify(s, curve_c1(s, n), n) == "nytro"
    assert regime_classify(s, curve_c2(s), n) == "nytro"


def test_regime_profile_json():
    import json
    _, p, K = synthesize_fixed_design(20, seed=4, target_snr=0.5)
    prof = regime_profile(K, snr(p))
    d = json.loads(prof.to_json())
    assert d["region"] in {"nytro", "nkrls"}
    assert d["lambda_star"] == pytest.approx(2.0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 40), seed=st.integers(0, 2**31 - 1), lam=st.floats(1e-8, 10.0),
       scale=st.floats(0.1, 1.0))
def test_dimension_chain(n, seed, lam, scale):
    K = random_psd(n, rank=max(1, n - seed % 4), seed=seed)
    K = scale * K / np.max(np.diag(K))
    de, dt = effective_dim(K, lam), coherence_dim(K, lam)
    assert de <= dt * (1 + 1e-12) + 1e-12
    assert dt <= 1 / lam * (1 + 1e-12)
    assert de <= full_dim(K) + 1e-12 <= n + 1e-12


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), seed=st.integers(0, 2**31 - 1), lam=st.floats(1e-6, 1.0))
def test_effective_dim_strictly_decreasing(n, seed, lam):
    K = random_psd(n, seed=seed)
    assert effective_dim(K, lam * 1.1) < effective_dim(K, lam)


@settings(max_examples=40, deadline=None)
@given(s=st.floats(1e-4, 1e4), dt=st.floats(1e-3, 1e4), n=st.integers(2, 10**6),
       c=st.floats(1e-3, 1e3))
def test_regime_scale_invariance(s, dt, n, c):
    # scaling y by c scales f_opt and sigma by c, so SNR and the decision are unchanged
    K = KernelGram(np.eye(3))
    a = np.array([math.sqrt(s), 0.0, 0.0])
    p1 = FixedDesignProblem(K, a, 1.0, a)
    p2 = FixedDesignProblem(K, c * a, c * c, c * a)
    assert snr(p2) == pytest.approx(snr(p1), rel=1e-12)
    assert regime_classify(snr(p2), dt, n) == regime_classify(snr(p1), dt, n)
