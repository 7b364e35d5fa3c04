"""Shared numerical oracles for the test suite.

These deliberately avoid the library's own helper code: quadrature is a
fresh Gauss-Legendre tensor product, the transport oracle enumerates all
permutations.  Tests freeze expected values computed through these routes.
"""

import itertools
import math

import numpy as np
import pytest


def gl_tensor(f, d, n_nodes):
    """Integral of f over [-1,1]^d, tensor Gauss-Legendre; f maps (N,d)->(N,)."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    if d == 1:
        return float(np.sum(w * f(x[:, None])))
    if d == 2:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        ww = np.multiply.outer(w, w).ravel()
        return float(np.sum(ww * f(pts)))
    if d == 3:
        total = 0.0
        yy, zz = np.meshgrid(x, x, indexing="ij")
        for i, xi in enumerate(x):
            pts = np.column_stack([np.full(yy.size, xi), yy.ravel(), zz.ravel()])
            vals = f(pts).reshape(n_nodes, n_nodes)
            total += w[i] * float(np.einsum("j,k,jk->", w, w, vals))
        return total
    raise ValueError("d <= 3 only")


def gl_interval(f, a, b, n_nodes=200):
    """Integral of a scalar function over [a, b]."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return float(half * np.sum(w * f(mid + half * x)))


def w2_brute(x, y):
    """Exact quadratic transport distance by permutation enumeration (n <= 8)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.shape[0]
    assert n <= 8
    cost = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=2)
    best = min(
        float(cost[np.arange(n), perm].sum()) for perm in itertools.permutations(range(n))
    )
    return math.sqrt(best / n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
