import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize

from rrv.errors import SingleClass
from rrv.recognize.svm import chi2_distances, chi2_kernel, default_gamma, smo, svm_predict, svm_train

hists = arrays(np.float64, st.tuples(st.integers(1, 6), st.just(5)), elements=st.floats(0, 1))


@given(hists)
def test_kernel_identity(x):
    k = chi2_kernel(x, gamma=0.7)
    assert np.allclose(np.diag(k), 1.0)
    assert np.allclose(k, k.T)
    assert np.all((k > 0) & (k <= 1))


def test_chi2_distance_by_hand():
    x = np.array([[0.5, 0.5, 0.0]])
    y = np.array([[0.25, 0.25, 0.5]])
    expected = 2 * 0.25**2 / 0.75 + 0.25 / 0.5
    assert np.isclose(chi2_distances(x, y)[0, 0], expected)


def test_default_gamma(rng):
    x = rng.dirichlet(np.ones(6), 10)
    d = chi2_distances(x)
    assert np.isclose(default_gamma(x), 1 / d[np.triu_indices(10, 1)].mean())


def test_smo_matches_generic_qp(rng):
    x = np.vstack([rng.dirichlet([4, 1, 1], 12), rng.dirichlet([1, 1, 4], 12)])
    x[0] = x[-1]  # one overlapping point keeps the problem non-separable
    y = np.array([1.0] * 12 + [-1.0] * 12)
    k = chi2_kernel(x, gamma=default_gamma(x))
    c = 10.0
    alpha, b = smo(k, y, c, tol=1e-8)
    q = k * np.outer(y, y)
    obj = lambda a: 0.5 * a @ q @ a - a.sum()
    ref = minimize(obj, np.zeros(24), jac=lambda a: q @ a - 1, bounds=[(0, c)] * 24,
                   constraints=[{"type": "eq", "fun": lambda a: a @ y, "jac": lambda a: y}], method="SLSQP",
                   options={"ftol": 1e-12, "maxiter": 1000})
    assert obj(alpha) <= ref.fun + 1e-6
    assert abs(alpha @ y) < 1e-9
    assert np.all((alpha >= 0) & (alpha <= c))


def test_kkt_at_tolerance(rng):
    x = rng.dirichlet(np.ones(4), 40)
    y = np.where(x[:, 0] > x[:, 1], 1.0, -1.0)
    k = chi2_kernel(x, gamma=2.0)
    c = 1.0
    alpha, b = smo(k, y, c, tol=1e-3)
    f = (k * y) @ alpha + b
    margin = y * f
    tol = 1e-3
    assert np.all(margin[alpha < 1e-12] >= 1 - tol)
    assert np.all(margin[alpha > c - 1e-12] <= 1 + tol)


def test_separable_two_bins(rng):
    x = np.vstack([rng.uniform([0.8, 0.0], [1.0, 0.2], (20, 2)), rng.uniform([0.0, 0.8], [0.2, 1.0], (20, 2))])
    y = ["a"] * 20 + ["b"] * 20
    m = svm_train(x, y)
    assert svm_predict(m, x) == y


def test_three_class_round_trip(rng):
    x = np.vstack([rng.dirichlet(a, 15) for a in ([8, 1, 1], [1, 8, 1], [1, 1, 8])])
    y = ["1"] * 15 + ["2"] * 15 + ["10"] * 15
    m = svm_train(x, y)
    assert m.classes == ["1", "2", "10"]
    assert len(m.pairs) == 3
    sv = np.flatnonzero(np.abs(m.coef).sum(axis=0) > 0)
    assert len(sv)
    pred = svm_predict(m, x[sv])
    assert pred == [y[i] for i in sv]


def test_vote_tie_smallest_class():
    # three classes with all-zero decisions: each pair votes for its first class -> class 0 wins 2 votes
    x = np.vstack([np.eye(3)] * 2)
    m = svm_train(x, ["a", "b", "c"] * 2)
    m.coef[:] = 0
    m.bias[:] = 0
    assert svm_predict(m, [[1 / 3, 1 / 3, 1 / 3]]) == ["a"]
    # a genuine 1-1-1 cycle: a beats b, b beats c, c beats a
    m.bias[:] = [1.0, -1.0, 1.0]  # pairs (a,b), (a,c), (b,c)
    assert svm_predict(m, [[1 / 3, 1 / 3, 1 / 3]]) == ["a"]


def test_single_class():
    with pytest.raises(SingleClass):
        svm_train(np.eye(3), ["a"] * 3)


def test_deterministic(rng):
    x = rng.dirichlet(np.ones(5), 30)
    y = [str(i % 3) for i in range(30)]
    a = svm_train(x, y)
    b = svm_train(x, y)
    assert a.coef.tobytes() == b.coef.tobytes() and a.bias.tobytes() == b.bias.tobytes()
