import json

import numpy as np
import pytest

from nytrolab.errors import InputError
from nytrolab.verify import (SUITES, c_t, c_t_delta, failures_json, random_instance, rows_to_csv,
                             run_suite)


def test_constants():
    assert c_t(2) == pytest.approx(16.0)
    assert c_t(101) == pytest.approx(4 * 1.01**2)
    assert c_t_delta(2, 0.5) <= 80.0


def test_random_instance_mixed_rank():
    ranks = []
    for s in range(12):
        p = random_instance(s)
        assert 10 <= p.n <= 80
        np.testing.assert_allclose(p.K.eig.projector() @ p.mu, p.mu, atol=1e-8 * np.linalg.norm(p.mu))
        ranks.append(p.K.eig.rank() < p.n)
    assert any(ranks) and not all(ranks)


def test_self_test_corrupted_q_fails():
    rows = run_suite("thm1", 5, 0, corrupt=True)
    assert rows and not any(r.ok for r in rows)


def test_corrected_oracle_lambda_holds():
    # with lambda = 1/(n SNR) the risk bound holds on every instance
    rows = run_suite("thm2n", 100, 0)
    assert all(r.ok for r in rows)


def test_literal_oracle_lambda_counterexample():
    # rank-one K = n e1 e1^T, alpha = a e1: at lambda = 1/SNR the bias alone
    # exceeds sigma2 d_eff / n once n > 1
    from nytrolab.complexity import effective_dim, snr
    from nytrolab.kernel import KernelGram
    from nytrolab.risk import FixedDesignProblem, risk_of

    n = 10
    K = np.zeros((n, n))
    K[0, 0] = 1.0
    a = np.zeros(n)
    a[0] = 2.0
    p = FixedDesignProblem(KernelGram(K), K @ a, 1.0, a)
    lam = 1.0 / snr(p)
    assert risk_of("krls", {"lambda": lam}, p).excess_risk > effective_dim(p.K, lam) / n


@pytest.mark.parametrize("name", ["cor1", "spectral", "eqnyst"])
def test_small_suites_pass(name):
    rows = run_suite(name, 4, 1)
    assert rows and all(r.ok for r in rows)


def test_unknown_suite():
    with pytest.raises(InputError):
        run_suite("thm9")


def test_report_formats():
    rows = run_suite("thm1", 3, 0, corrupt=True)
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == "# nytro-lab v1"
    assert len(text.splitlines()) == 5
    doc = json.loads(failures_json(rows, 0))
    assert doc["seed"] == 0 and len(doc["failures"]) == 3
    assert set(SUITES) >= {"thm1", "thm2", "thm3", "thm5", "cor1", "bounds"}
