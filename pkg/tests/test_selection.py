import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nytrolab import estimators as est
from nytrolab.errors import InputError
from nytrolab.kernel import KernelSpec
from nytrolab.scaling import synthetic_regression
from nytrolab.selection import (HoldoutData, early_stop_rule, holdout_split, lambda_grid, rmse,
                                select_early_stopping, select_krls, select_lambda,
                                select_nkrls, select_nytro)

SPEC = KernelSpec("gaussian", 2.0)


@pytest.fixture(scope="module")
def data():
    X, y = synthetic_regression(250, d=3, seed=0)
    return HoldoutData.split(X, y, 0.2, seed=0)


def test_holdout_small():
    tr, va = holdout_split(10, 0.2, seed=1)
    assert len(va) == 2 and not set(tr) & set(va)
    assert sorted(np.concatenate([tr, va])) == list(range(10))
    tr2, va2 = holdout_split(10, 0.2, seed=1)
    np.testing.assert_array_equal(va, va2)


def test_holdout_insurance_size():
    _, va = holdout_split(5822, 0.2, seed=0)
    assert len(va) == 1164


def test_holdout_empty():
    with pytest.raises(InputError):
        holdout_split(2, 0.1)


def test_lambda_grid_examples():
    np.testing.assert_allclose(lambda_grid(2), [1e-15, 1.0])
    np.testing.assert_allclose(lambda_grid(3, 0.01, 1.0), [0.01, 0.1, 1.0])
    g = lambda_grid()
    assert len(g) == 100
    np.testing.assert_allclose(g[1:] / g[:-1], (1e15) ** (1 / 99), rtol=1e-12)


def _fake(values):
    y_val = np.zeros(1)

    def fp(lam):
        return None, np.array([values(lam)])

    return fp, y_val


def test_select_single_and_tie():
    fp, yv = _fake(lambda lam: 1.0)
    assert select_lambda(fp, [0.3], yv).chosen_hyper == 0.3
    assert select_lambda(fp, [0.1, 0.2, 0.3], yv).chosen_hyper == 0.3


def test_select_interior_minimum():
    grid = lambda_grid(41, 1e-8, 1.0)
    target = 3e-5
    fp, yv = _fake(lambda lam: np.log(lam / target) ** 2 + 0.1)
    rep = select_lambda(fp, grid, yv)
    oracle = grid[np.argmin([np.log(g / target) ** 2 for g in grid])]
    assert rep.chosen_hyper == oracle
    assert grid[0] < rep.chosen_hyper < grid[-1]


def test_early_stop_examples():
    assert early_stop_rule([1.0] * 10) == 1
    r = 0.8 ** np.arange(12)
    assert early_stop_rule(r) == 12


def test_early_stop_hand_simulated():
    # r1..r5 fall 10% per step, later values 1% per step; at t = 5 the next
    # relative improvement is 1% < 5%, and every earlier t improves by 10%
    seq = [0.9 ** k for k in range(5)] + [0.9**4 * 0.99 ** k for k in range(1, 10)]
    assert early_stop_rule(seq, 0.05, 1) == 5


def test_early_stop_errors():
    with pytest.raises(InputError):
        early_stop_rule([])
    with pytest.raises(InputError):
        early_stop_rule([1.0, 0.5], threshold=0.0)


def test_rmse_examples():
    assert rmse([1, 2], [1, 2]) == 0.0
    assert rmse([3, 4], [0, 0]) == pytest.approx(np.sqrt(12.5))
    rng = np.random.default_rng(0)
    a, b = rng.standard_normal(9), rng.standard_normal(9)
    naive = (sum((x - y) ** 2 for x, y in zip(a, b)) / 9) ** 0.5
    assert rmse(a, b) == pytest.approx(naive, rel=1e-14)
    with pytest.raises(InputError):
        rmse([1, 2], [1])


class Counter:
    def __init__(self, monkeypatch, name):
        self.calls = 0
        orig = getattr(est, name)

        def wrapped(*a, **kw):
            self.calls += 1
            return orig(*a, **kw)

        monkeypatch.setattr(est, name, wrapped)


def test_one_fit_per_iterative_selection(data, monkeypatch):
    c1 = Counter(monkeypatch, "fit_nytro")
    c2 = Counter(monkeypatch, "fit_early_stopping")
    rep = select_nytro(data, SPEC, 40, 60, seed=0)
    select_early_stopping(data, SPEC, 60)
    assert c1.calls == 1 and c2.calls == 1
    assert len(rep.validation_curve) == 60


def test_grid_fits_per_tikhonov_selection(data, monkeypatch):
    c1 = Counter(monkeypatch, "fit_nkrls")
    c2 = Counter(monkeypatch, "fit_krls")
    grid = lambda_grid(17, 1e-9, 1.0)
    select_nkrls(data, SPEC, 40, grid, seed=0)
    select_krls(data, SPEC, grid)
    assert c1.calls == 17 and c2.calls == 17


def test_selection_deterministic(data):
    a = select_nytro(data, SPEC, 30, 80, seed=3)
    b = select_nytro(data, SPEC, 30, 80, seed=3)
    assert a.chosen_hyper == b.chosen_hyper and a.validation_curve == b.validation_curve
    np.testing.assert_array_equal(a.model.alpha, b.model.alpha)
    g = lambda_grid(10, 1e-8, 1.0)
    assert select_nkrls(data, SPEC, 30, g, seed=3).to_dict(False)["validation_curve"] == \
        select_nkrls(data, SPEC, 30, g, seed=3).to_dict(False)["validation_curve"]


def test_nytro_end_to_end():
    X, y = synthetic_regression(500, d=4, seed=1)
    data = HoldoutData.split(X, y, 0.2, seed=1)
    rep = select_nytro(data, SPEC, 100, 500, seed=1)
    curve = dict(rep.validation_curve)
    assert rep.hyper_name == "t" and 1 <= rep.chosen_hyper <= 500
    assert curve[rep.chosen_hyper] <= curve[1]
    assert rep.model.hyper["t"] == rep.chosen_hyper
    text = rep.to_csv()
    assert text.startswith("# nytro-lab v1\n")


@settings(max_examples=50, deadline=None)
@given(r=st.lists(st.floats(1e-6, 1e6), min_size=1, max_size=60),
       thr=st.floats(1e-4, 0.5), w=st.integers(1, 4))
def test_early_stop_rule_properties(r, thr, w):
    t = early_stop_rule(r, thr, w)
    assert 1 <= t <= len(r)
    for s in range(1, t):
        if s + w <= len(r):
            assert (r[s - 1] - r[s - 1 + w]) / r[s - 1] >= thr
