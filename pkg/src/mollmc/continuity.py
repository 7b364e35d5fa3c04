"""Moduli of continuity and the growth bounds they imply.

A modulus ``omega(r)`` records the largest fluctuation of a function over
pairs of points at distance at most ``r``.  Finiteness of the modulus (rather
than Lipschitz continuity) is the regularity currency of this package: it is
what gradients of dissipative potentials are assumed to have, and every
quantitative bound below is written in terms of it.

Three modulus shapes are supported:

* ``hoelder(M, alpha)`` evaluates ``M * max(r**alpha, r)``, so growth is at
  most linear beyond ``r = 1``,
* ``lipschitz(K)`` evaluates ``K * r``,
* ``table(pairs)`` interpolates user-supplied upper bounds piecewise
  linearly (monotonicity is enforced at construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModulusSpec",
    "MNorm",
    "linear_growth_bound",
    "convolved_grad_lipschitz",
    "sup_deviation_bound",
    "local_lipschitz_bound",
    "quadratic_growth_bound",
]


@dataclass(frozen=True)
class ModulusSpec:
    """A nondecreasing upper bound ``omega(r)`` on a function's fluctuation scale.

    Construct through :meth:`hoelder`, :meth:`lipschitz`, or :meth:`table`.
    """

    kind: str
    scale: float = 1.0
    alpha: float = 1.0
    knots_r: tuple[float, ...] = field(default=())
    knots_w: tuple[float, ...] = field(default=())

    @classmethod
    def hoelder(cls, scale: float, alpha: float) -> "ModulusSpec":
        if not (0.0 < alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        if scale <= 0.0:
            raise ValueError("scale must be positive")
        return cls(kind="hoelder", scale=float(scale), alpha=float(alpha))

    @classmethod
    def lipschitz(cls, scale: float) -> "ModulusSpec":
        if scale <= 0.0:
            raise ValueError("scale must be positive")
        return cls(kind="lipschitz", scale=float(scale))

    @classmethod
    def table(cls, pairs) -> "ModulusSpec":
        pts = sorted((float(r), float(w)) for r, w in pairs)
        if not pts:
            raise ValueError("table modulus needs at least one knot")
        rs = tuple(p[0] for p in pts)
        ws = tuple(p[1] for p in pts)
        if rs[0] < 0.0:
            raise ValueError("knot radii must be nonnegative")
        if any(w < 0.0 for w in ws):
            raise ValueError("knot values must be nonnegative")
        if any(b < a for a, b in zip(ws, ws[1:])):
            raise ValueError("table modulus must be nondecreasing")
        return cls(kind="table", knots_r=rs, knots_w=ws)

    def eval(self, r: float) -> float:
        """omega(r) for r > 0."""
        r = float(r)
        if not (r > 0.0) or not math.isfinite(r):
            raise ValueError(f"modulus argument must be a positive real, got {r}")
        if self.kind == "hoelder":
            return self.scale * max(r**self.alpha, r)
        if self.kind == "lipschitz":
            return self.scale * r
        rs, ws = self.knots_r, self.knots_w
        if r <= rs[0]:
            # nondecreasing omega, so the first knot is still an upper bound
            return ws[0]
        if r > rs[-1]:
            # extend by the subadditive scaling omega(t r) <= ceil(t) omega(r)
            return math.ceil(r / rs[-1]) * ws[-1]
        return float(np.interp(r, rs, ws))

    def __call__(self, r: float) -> float:
        return self.eval(r)


@dataclass(frozen=True)
class MNorm:
    """Value at the origin plus unit-scale fluctuation of a function.

    ``norm = grad_at_zero + omega_one`` is the quantity every growth bound
    below is expressed in.  Both entries must be finite and nonnegative.
    """

    grad_at_zero: float
    omega_one: float

    def __post_init__(self):
        for name in ("grad_at_zero", "omega_one"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"{name} must be finite and nonnegative, got {v}")

    @property
    def norm(self) -> float:
        return self.grad_at_zero + self.omega_one


def linear_growth_bound(n: MNorm, x_norm: float) -> float:
    """Upper bound on ``|phi(x)|`` at ``|x| = x_norm``: ``|phi(0)| + omega(1)(1 + |x|)``."""
    if x_norm < 0.0:
        raise ValueError("x_norm must be nonnegative")
    return n.grad_at_zero + n.omega_one + n.omega_one * float(x_norm)


def _check_unit_radius(r: float) -> float:
    r = float(r)
    if not (0.0 < r <= 1.0):
        raise ValueError(f"radius must lie in (0, 1], got {r}")
    return r


def convolved_grad_lipschitz(m: ModulusSpec, d: int, r: float) -> float:
    """Spectral-norm bound ``(d + 4) * omega(r) / r`` for the gradient of a
    kernel-smoothed function at smoothing radius ``r``.

    This is the Lipschitz constant available for ``phi`` smoothed with the
    compact polynomial kernel, valid for any ``phi`` with finite modulus.
    """
    if d < 1:
        raise ValueError("dimension must be a positive integer")
    r = _check_unit_radius(r)
    return (d + 4) * m.eval(r) / r


def sup_deviation_bound(m: ModulusSpec, r: float) -> float:
    """Uniform bound ``omega(r)`` on the smoothing error ``sup_x |phi*rho_r - phi|``."""
    r = _check_unit_radius(r)
    return m.eval(r)


def local_lipschitz_bound(n: MNorm, x_norm: float, y_norm: float) -> float:
    """Factor L with ``|Phi(x) - Phi(y)| <= L |x - y|`` for ``|x|, |y|`` as given.

    ``L = |grad Phi(0)| + omega(1) (1 + (|x| + |y|) / 2)``.
    """
    if x_norm < 0.0 or y_norm < 0.0:
        raise ValueError("norms must be nonnegative")
    return n.grad_at_zero + n.omega_one * (1.0 + 0.5 * (float(x_norm) + float(y_norm)))


def quadratic_growth_bound(n: MNorm, sup_unit_ball: float, x_norm: float) -> float:
    """Upper bound on the smoothed function ``Phi * rho_r`` at ``|x| = x_norm``.

    ``omega(1)/2 |x|^2 + (|grad Phi(0)| + 5 omega(1)/2) |x| + sup_{B_1} |Phi|``,
    valid for every smoothing radius in (0, 1].
    """
    if x_norm < 0.0:
        raise ValueError("x_norm must be nonnegative")
    x = float(x_norm)
    return (
        0.5 * n.omega_one * x * x
        + (n.grad_at_zero + 2.5 * n.omega_one) * x
        + float(sup_unit_ball)
    )
