"""Chi-square kernel SVM trained by SMO, one-against-one for multi-class."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..data.samples import natural_key
from ..errors import DimensionMismatch, InvalidParams, SingleClass

EPS_CHI = 1e-12


def chi2_distances(x, y=None, chunk: int = 64) -> np.ndarray:
    """``sum_i (x_i - y_i)^2 / (x_i + y_i + eps)`` for every row pair."""
    x = np.asarray(x, dtype=float)
    y = x if y is None else np.asarray(y, dtype=float)
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"histogram lengths {x.shape[1]} and {y.shape[1]} differ")
    out = np.empty((len(x), len(y)))
    for s in range(0, len(x), chunk):
        a = x[s : s + chunk, None, :]
        out[s : s + chunk] = ((a - y[None]) ** 2 / (a + y[None] + EPS_CHI)).sum(axis=-1)
    return out


def chi2_kernel(x, y=None, gamma: float = 1.0) -> np.ndarray:
    return np.exp(-gamma * chi2_distances(x, y))


def default_gamma(x) -> float:
    """Inverse of the mean pairwise chi-square distance (distinct pairs)."""
    d = chi2_distances(x)
    n = len(d)
    if n < 2:
        return 1.0
    mean = d[np.triu_indices(n, 1)].mean()
    return 1.0 / mean if mean > 0 else 1.0


def smo(k: np.ndarray, y: np.ndarray, c: float, tol: float = 1e-3, max_iter: int = 100_000):
    """Solve the binary soft-margin dual on a precomputed kernel.

    Maximal-violating-pair selection with second-order choice of the second
    index. ``y`` is +-1. Stops when the KKT gap ``m - M`` drops below ``tol``.
    Returns ``(alpha, b)`` for ``f(x) = sum alpha_i y_i k(x_i, x) + b``.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    q = k * np.outer(y, y)
    diag = np.diag(k).copy()
    alpha = np.zeros(n)
    g = -np.ones(n)  # gradient of 1/2 a'Qa - e'a
    for _ in range(max_iter):
        yg = -y * g
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        m_up = yg[i]
        m_low = np.where(low, yg, np.inf).min()
        if m_up - m_low < tol:
            break
        cand = low & (yg < m_up)
        b = m_up - yg
        a = diag[i] + diag - 2.0 * k[i]
        a = np.where(a > 0, a, 1e-12)
        j = int(np.argmin(np.where(cand, -(b * b) / a, np.inf)))
        t = b[j] / a[j]
        t = min(t, c - alpha[i] if y[i] > 0 else alpha[i])
        t = min(t, alpha[j] if y[j] > 0 else c - alpha[j])
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        alpha[i] = min(max(alpha[i], 0.0), c)
        alpha[j] = min(max(alpha[j], 0.0), c)
        g += q[:, i] * (y[i] * t) - q[:, j] * (y[j] * t)
    yg = -y * g
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(yg[free].mean())
    else:
        up = ((y > 0) & (alpha < c)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < c))
        hi = yg[up].max() if up.any() else 0.0
        lo = yg[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2)
    return alpha, bias


@dataclass
class SvmModel:
    classes: list
    train_x: np.ndarray  # (n, d)
    pairs: np.ndarray  # (P, 2) class indices, first < second
    coef: np.ndarray  # (P, n) alpha_i y_i, zero outside the pair
    bias: np.ndarray  # (P,)
    gamma: float
    c: float

    def decision(self, x) -> np.ndarray:
        kx = chi2_kernel(np.atleast_2d(x), self.train_x, self.gamma)
        return kx @ self.coef.T + self.bias


def svm_train(histograms, labels, gamma: float | None = None, c: float = 10.0, tol: float = 1e-3) -> SvmModel:
    x = np.asarray(histograms, dtype=float)
    labels = list(labels)
    if len(x) != len(labels):
        raise InvalidParams("histograms and labels differ in length")
    if np.any(x < 0):
        raise InvalidParams("histograms must be nonnegative")
    classes = sorted(set(labels), key=lambda lab: natural_key(str(lab)))
    if len(classes) < 2:
        raise SingleClass("SVM training needs at least two classes")
    if gamma is None:
        gamma = default_gamma(x)
    k = chi2_kernel(x, gamma=gamma)
    idx = np.array([classes.index(lab) for lab in labels])
    pairs = list(itertools.combinations(range(len(classes)), 2))
    coef = np.zeros((len(pairs), len(x)))
    bias = np.zeros(len(pairs))
    for p, (ca, cb) in enumerate(pairs):
        sel = np.flatnonzero((idx == ca) | (idx == cb))
        y = np.where(idx[sel] == ca, 1.0, -1.0)
        alpha, b = smo(k[np.ix_(sel, sel)], y, c, tol)
        coef[p, sel] = alpha * y
        bias[p] = b
    return SvmModel(classes, x, np.array(pairs, dtype=int).reshape(-1, 2), coef, bias, float(gamma), float(c))


def svm_predict(model: SvmModel, histograms) -> list:
    """Majority vote over pair decisions; ties go to the smallest class index."""
    x = np.atleast_2d(np.asarray(histograms, dtype=float))
    if x.shape[1] != model.train_x.shape[1]:
        raise DimensionMismatch(f"histogram length {x.shape[1]} != {model.train_x.shape[1]}")
    dec = model.decision(x)
    votes = np.zeros((len(x), len(model.classes)), dtype=int)
    winners = np.where(dec >= 0, model.pairs[:, 0], model.pairs[:, 1])
    for p in range(len(model.pairs)):
        np.add.at(votes, (np.arange(len(x)), winners[:, p]), 1)
    return [model.classes[i] for i in votes.argmax(axis=1)]
