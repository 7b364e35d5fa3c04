"""Potential descriptors, built-in test potentials, and assumption checks.

A :class:`PotentialSpec` packages a nonnegative potential together with the
constants every bound in this package consumes: a representative weak
gradient, dissipativity constants ``(m, b)`` with
``<x, grad U(x)> >= m |x|^2 - b``, a declared modulus of continuity for the
gradient, ``|grad U(0)|``, and the sup of ``U`` over the unit ball.

``value`` and ``weak_grad`` must be pure and accept arrays of shape ``(d,)``
or ``(n, d)``; everything downstream (samplers, smoothing oracles, ensemble
runners) relies on that batching contract.

Declared constants are exactly that: declarations.  :func:`check_assumptions`
re-validates them by sampling, reporting worst-case margins rather than
raising, so a deliberately wrong declaration is visible instead of fatal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .continuity import MNorm, ModulusSpec

__all__ = [
    "PotentialSpec",
    "FiniteSumPotential",
    "builtin",
    "check_assumptions",
    "check_finite_sum",
    "BUILTIN_NAMES",
]

BUILTIN_NAMES = ("quadratic", "double_well", "hoelder_mix", "elastic_net_logistic")


@dataclass(frozen=True)
class PotentialSpec:
    """A potential with the constants needed by samplers and bounds."""

    name: str
    dim: int
    value: Callable[[np.ndarray], np.ndarray]
    weak_grad: Callable[[np.ndarray], np.ndarray]
    m: float
    b: float
    modulus: ModulusSpec
    grad_at_zero: float
    u0: float
    params: dict = field(default_factory=dict)
    modulus_is_global: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.m <= 0.0 or self.b < 0.0:
            raise ValueError("dissipativity requires m > 0 and b >= 0")

    def mnorm(self) -> MNorm:
        """|grad U(0)| + omega(1) packaged for the growth bounds."""
        return MNorm(self.grad_at_zero, self.modulus.eval(1.0))


@dataclass(frozen=True)
class FiniteSumPotential:
    """A potential ``U = sum_i U_i`` for mini-batch smoothed gradients.

    ``omega_hat`` is the aggregate fluctuation scale: each component gradient
    is declared to fluctuate by at most ``omega_hat(r) / n`` over distance
    ``r``.  The check below validates this on the component *gradients*; the
    value-level variant would exclude every dissipative sum (bounded value
    oscillation at all scales forces bounded gradients, which contradicts
    ``<x, grad U> >= m |x|^2 - b``).
    """

    name: str
    dim: int
    values: tuple
    grads: tuple
    m: float
    b: float
    omega_hat: ModulusSpec
    base: PotentialSpec | None = None

    @property
    def n_components(self) -> int:
        return len(self.grads)

    def total_value(self, x):
        return sum(v(x) for v in self.values)

    def total_grad(self, x):
        return sum(g(x) for g in self.grads)

    @classmethod
    def equal_split(cls, p: PotentialSpec, n: int) -> "FiniteSumPotential":
        """Split ``p`` into ``n`` identical components ``U / n``."""
        if n < 1:
            raise ValueError("need at least one component")

        def make(fun, w):
            return lambda x: w * fun(x)

        w = 1.0 / n
        values = tuple(make(p.value, w) for _ in range(n))
        grads = tuple(make(p.weak_grad, w) for _ in range(n))
        return cls(
            name=f"{p.name}/split{n}",
            dim=p.dim,
            values=values,
            grads=grads,
            m=p.m,
            b=p.b,
            omega_hat=p.modulus,
            base=p,
        )


def _sigmoid(u):
    return 0.5 * (1.0 + np.tanh(0.5 * u))


def _sig_prod(u):
    # sigma(u) * sigma(-u), the magnitude of the sigmoid-loss gradient
    s = _sigmoid(u)
    return s * (1.0 - s)


# max_u |d/du sigma(u)sigma(-u)|, attained where sigma = 1/2 +- 1/(2 sqrt 3)
_SIG_CURVATURE = 1.0 / (6.0 * math.sqrt(3.0))


def builtin(name: str, d: int, **params) -> PotentialSpec:
    """A built-in potential by name.

    quadratic            |x|^2 / 2
    double_well          (|x|^2 - c)^2 / 4 + |x|^2 / 2            (c > 0)
    hoelder_mix          |x|^2/2 + sum_i |x_i|^{1+alpha}/(1+alpha) (alpha in (0,1])
    elastic_net_logistic sum_i sigma(-x_i) + lam1 ||x||_1 + lam2 |x|^2 / 2
    """
    if d < 1 or int(d) != d:
        raise ValueError("d must be a positive integer")
    d = int(d)

    if name == "quadratic":
        if params:
            raise ValueError(f"quadratic takes no parameters, got {params}")
        return PotentialSpec(
            name="quadratic",
            dim=d,
            value=lambda x: 0.5 * np.sum(np.square(x), axis=-1),
            weak_grad=lambda x: np.asarray(x, dtype=float),
            m=1.0,
            b=0.0,
            modulus=ModulusSpec.lipschitz(1.0),
            grad_at_zero=0.0,
            u0=0.5,
        )

    if name == "double_well":
        c = float(params.pop("c", 1.0))
        if params:
            raise ValueError(f"unknown double_well parameters {params}")
        if c <= 0.0:
            raise ValueError("c must be positive")

        def dw_value(x, c=c):
            s = np.sum(np.square(x), axis=-1)
            return 0.25 * (s - c) ** 2 + 0.5 * s

        def dw_grad(x, c=c):
            x = np.asarray(x, dtype=float)
            s = np.sum(np.square(x), axis=-1)
            return (s - c + 1.0)[..., None] * x if x.ndim > 1 else (s - c + 1.0) * x

        # Hessian norm within |x| <= R0; the global modulus is infinite
        # (cubic gradient growth), so modulus_is_global is False and the
        # assumption check is expected to flag the modulus line.
        r0 = 2.0 * max(1.0, math.sqrt(c))
        k_local = 3.0 * r0 * r0 + abs(1.0 - c)
        return PotentialSpec(
            name="double_well",
            dim=d,
            value=dw_value,
            weak_grad=dw_grad,
            m=1.0,
            b=0.25 * c * c,
            modulus=ModulusSpec.lipschitz(k_local),
            grad_at_zero=0.0,
            u0=max(0.25 * c * c, 0.25 * (1.0 - c) ** 2 + 0.5),
            params={"c": c},
            modulus_is_global=False,
        )

    if name == "hoelder_mix":
        alpha = float(params.pop("alpha", 0.5))
        if params:
            raise ValueError(f"unknown hoelder_mix parameters {params}")
        if not (0.0 < alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")

        def hm_value(x, alpha=alpha):
            x = np.asarray(x, dtype=float)
            s = np.sum(np.square(x), axis=-1)
            return 0.5 * s + np.sum(np.abs(x) ** (1.0 + alpha), axis=-1) / (1.0 + alpha)

        def hm_grad(x, alpha=alpha):
            x = np.asarray(x, dtype=float)
            return x + np.sign(x) * np.abs(x) ** alpha

        # |sgn(u)|u|^a - sgn(v)|v|^a| <= 2^{1-a} |u-v|^a per coordinate and
        # sum_i a_i^alpha <= d^{1-alpha} (sum_i a_i)^alpha give the constant
        big_m = 1.0 + 2.0 ** (1.0 - alpha) * d ** (0.5 * (1.0 - alpha))
        return PotentialSpec(
            name="hoelder_mix",
            dim=d,
            value=hm_value,
            weak_grad=hm_grad,
            m=1.0,
            b=0.0,
            modulus=ModulusSpec.hoelder(big_m, alpha),
            grad_at_zero=0.0,
            u0=0.5 + d ** (0.5 * (1.0 - alpha)) / (1.0 + alpha),
            params={"alpha": alpha},
        )

    if name == "elastic_net_logistic":
        lam1 = float(params.pop("lam1", 0.1))
        lam2 = float(params.pop("lam2", 1.0))
        if params:
            raise ValueError(f"unknown elastic_net_logistic parameters {params}")
        if lam1 < 0.0 or lam2 <= 0.0:
            raise ValueError("need lam1 >= 0 and lam2 > 0")

        def en_value(x, lam1=lam1, lam2=lam2):
            x = np.asarray(x, dtype=float)
            return (
                np.sum(_sigmoid(-x), axis=-1)
                + lam1 * np.sum(np.abs(x), axis=-1)
                + 0.5 * lam2 * np.sum(np.square(x), axis=-1)
            )

        def en_grad(x, lam1=lam1, lam2=lam2):
            x = np.asarray(x, dtype=float)
            return -_sig_prod(x) + lam1 * np.sign(x) + lam2 * x

        # b = d * sup_u (u sig_prod(u) - lam1 |u|), found on a dense grid;
        # the sup is attained below |u| = 8 since sig_prod decays like e^{-u}
        u = np.linspace(0.0, 8.0, 20001)
        b1 = float(np.max(u * _sig_prod(u) - lam1 * u))
        b1 = max(b1, 0.0)

        # affine modulus: sign jumps contribute 2 lam1 sqrt(d) at any scale,
        # the smooth part is (lam2 + max|d sig_prod|)-Lipschitz
        jump = 2.0 * lam1 * math.sqrt(d)
        slope = lam2 + _SIG_CURVATURE
        r_hi = 128.0
        return PotentialSpec(
            name="elastic_net_logistic",
            dim=d,
            value=en_value,
            weak_grad=en_grad,
            m=lam2,
            b=d * b1,
            modulus=ModulusSpec.table([(0.0, jump), (r_hi, jump + slope * r_hi)]),
            grad_at_zero=0.25 * math.sqrt(d),
            u0=d * float(_sigmoid(1.0 / math.sqrt(d))) + lam1 * math.sqrt(d) + 0.5 * lam2,
            params={"lam1": lam1, "lam2": lam2},
        )

    raise ValueError(f"unknown builtin potential {name!r}; choose from {BUILTIN_NAMES}")


@dataclass(frozen=True)
class CheckItem:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "margin": float(self.margin),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class AssumptionReport:
    target: str
    items: tuple

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def to_dict(self) -> dict:
        return {
            "target": self.target,
            "passed": self.passed,
            "items": [item.to_dict() for item in self.items],
        }


def _sample_points(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Points on a radial log grid with random directions.

    Dissipativity violations show up at large radius and modulus violations
    at small scales, so radii span [1e-3, 1e2] logarithmically.
    """
    radii = np.geomspace(1e-3, 1e2, n)
    dirs = rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return radii[:, None] * dirs


def check_assumptions(p: PotentialSpec, n_samples: int = 10_000, rng=None) -> AssumptionReport:
    """Sampled validation of the declared constants of ``p``.

    Four lines are checked, each with its worst-case margin (nonnegative
    means pass): nonnegativity of the value, the dissipativity inequality,
    the quadratic lower bound ``U >= m/3 |x|^2 - b/2 log 3`` it implies, and
    the declared modulus against sampled gradient fluctuations.  Failures are
    reported, not raised.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    rng = np.random.default_rng(0) if rng is None else rng
    x = _sample_points(p.dim, n_samples, rng)
    val = np.asarray(p.value(x), dtype=float)
    grad = np.asarray(p.weak_grad(x), dtype=float)
    r2 = np.sum(np.square(x), axis=-1)

    items = []
    # pass predicates carry a relative float-rounding allowance: the two
    # sides of each inequality are reduced in different orders, which costs
    # about |x|^2 * eps at the largest sampled radii
    rounding = 1e-9 * (1.0 + p.m * r2 + p.b)

    margin = float(np.min(val))
    items.append(
        CheckItem("nonnegative_value", margin >= 0.0, margin, f"min U over {n_samples} points")
    )

    diss = np.einsum("ij,ij->i", x, grad) - (p.m * r2 - p.b)
    i_bad = int(np.argmin(diss + rounding))
    items.append(
        CheckItem(
            "dissipativity",
            float(diss[i_bad] + rounding[i_bad]) >= 0.0,
            float(diss[i_bad]),
            f"worst at |x|={math.sqrt(r2[i_bad]):.3g}",
        )
    )

    lower = val - (p.m / 3.0 * r2 - 0.5 * p.b * math.log(3.0))
    j_bad = int(np.argmin(lower + rounding))
    items.append(
        CheckItem(
            "quadratic_lower_bound",
            float(lower[j_bad] + rounding[j_bad]) >= 0.0,
            float(lower[j_bad]),
            "U >= m/3 |x|^2 - b/2 log 3",
        )
    )

    # gradient fluctuation against the declared modulus on paired points;
    # the modulus is evaluated at the realized (rounded) pair distance and
    # the pass predicate carries a float-rounding allowance
    n_pairs = min(n_samples, 2000)
    base = x[rng.choice(n_samples, size=n_pairs, replace=n_pairs > n_samples)]
    deltas = rng.standard_normal((n_pairs, p.dim))
    deltas /= np.linalg.norm(deltas, axis=1, keepdims=True)
    steps = np.geomspace(1e-3, 1.0, n_pairs)
    other = base + steps[:, None] * deltas
    real_steps = np.linalg.norm(other - base, axis=1)
    fluct = np.linalg.norm(
        np.asarray(p.weak_grad(base)) - np.asarray(p.weak_grad(other)), axis=-1
    )
    allowed = np.array([p.modulus.eval(s) for s in real_steps])
    gap = allowed - fluct + 1e-9 * (1.0 + allowed)
    j = int(np.argmin(gap))
    note = "" if p.modulus_is_global else " (declared modulus is local only)"
    items.append(
        CheckItem(
            "gradient_modulus",
            float(gap[j]) >= 0.0,
            float(gap[j]),
            f"worst at |x|={np.linalg.norm(base[j]):.3g}, step={steps[j]:.3g}{note}",
        )
    )

    return AssumptionReport(target=p.name, items=tuple(items))


def check_finite_sum(f: FiniteSumPotential, n_samples: int = 2000, rng=None) -> AssumptionReport:
    """Sampled validation of a finite-sum descriptor.

    Checks aggregate dissipativity with the declared ``(m, b)`` and the
    per-component gradient fluctuation bound ``omega_hat(r) / n``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    x = _sample_points(f.dim, n_samples, rng)
    grad = np.asarray(f.total_grad(x), dtype=float)
    r2 = np.sum(np.square(x), axis=-1)
    items = []
    rounding = 1e-9 * (1.0 + f.m * r2 + f.b)

    diss = np.einsum("ij,ij->i", x, grad) - (f.m * r2 - f.b)
    items.append(
        CheckItem(
            "sum_dissipativity",
            float(np.min(diss + rounding)) >= 0.0,
            float(np.min(diss)),
        )
    )

    n_pairs = min(n_samples, 500)
    base = x[:n_pairs]
    deltas = rng.standard_normal((n_pairs, f.dim))
    deltas /= np.linalg.norm(deltas, axis=1, keepdims=True)
    steps = np.geomspace(1e-3, 1.0, n_pairs)
    other = base + steps[:, None] * deltas
    real_steps = np.linalg.norm(other - base, axis=1)
    worst = math.inf
    for g in f.grads:
        fluct = np.linalg.norm(np.asarray(g(base)) - np.asarray(g(other)), axis=-1)
        allowed = np.array([f.omega_hat.eval(s) for s in real_steps]) / f.n_components
        worst = min(worst, float(np.min(allowed - fluct + 1e-9 * (1.0 + allowed))))
    items.append(
        CheckItem(
            "component_gradient_modulus",
            worst >= 0.0,
            worst,
            "per-component gradient fluctuation <= omega_hat(r)/n",
        )
    )

    return AssumptionReport(target=f.name, items=tuple(items))
