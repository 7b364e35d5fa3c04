"""Invariant batteries behind ``mollmc verify``.

Each suite re-derives a module's desk-checkable claims with an independent
numerical route (tensor quadrature, permutation enumeration, finite
differences, Monte Carlo with stated standard errors) and reports one
pass/fail line per claim.  The suites are deterministic: every random check
runs under a fixed seed.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import stats

from . import bounds as _bounds
from . import metrics as _metrics
from .continuity import ModulusSpec
from .mollifier import Mollifier, density, grad_density, grad_l1_norm, sample
from .potentials import (
    FiniteSumPotential,
    PotentialSpec,
    builtin,
    check_assumptions,
    check_finite_sum,
)
from .samplers import ExactGradient, ss_gradient_batch

__all__ = ["verify_suite", "SUITES"]


def _check(name, passed, detail=""):
    return {"name": name, "passed": bool(passed), "detail": str(detail)}


def _report(suite, checks):
    return {"suite": suite, "passed": all(c["passed"] for c in checks), "checks": checks}


# ---------------------------------------------------------------------------
# quadrature helpers


def _leggauss(n):
    return np.polynomial.legendre.leggauss(n)


def tensor_quadrature(f, d, n_nodes):
    """Integral of ``f`` over [-1, 1]^d by tensor-product Gauss-Legendre.

    ``f`` maps an (N, d) array to (N,).  Feasible for d <= 3.
    """
    x, w = _leggauss(n_nodes)
    if d == 1:
        return float(np.sum(w * f(x[:, None])))
    if d == 2:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        ww = np.multiply.outer(w, w).ravel()
        return float(np.sum(ww * f(pts)))
    if d == 3:
        vals = np.empty((n_nodes, n_nodes, n_nodes))
        for i, xi in enumerate(x):
            yy, zz = np.meshgrid(x, x, indexing="ij")
            pts = np.column_stack([np.full(yy.size, xi), yy.ravel(), zz.ravel()])
            vals[i] = f(pts).reshape(n_nodes, n_nodes)
        ww = np.einsum("i,j,k->ijk", w, w, w)
        return float(np.sum(ww * vals))
    raise ValueError("tensor quadrature supported for d <= 3 only")


def _w2_enumerate(a, b):
    """Exact transport distance by full permutation enumeration (n <= 8)."""
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    n = x.shape[0]
    if n > 8:
        raise ValueError("enumeration oracle limited to n <= 8")
    cost = np.sum((x[:, None, :] - y[None, :, :]) ** 2, axis=2)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, float(cost[np.arange(n), perm].sum()))
    return math.sqrt(best / n)


# ---------------------------------------------------------------------------
# mollifier suite


def verify_mollifier(seed=20240801):
    checks = []
    nodes = {1: 220, 2: 150, 3: 110}

    for d in (1, 2, 3):
        m = Mollifier(d, 1.0)
        val = tensor_quadrature(lambda p: density(p, m), d, nodes[d])
        checks.append(
            _check(f"normalization_d{d}", abs(val - 1.0) <= 1e-6, f"quadrature={val!r}")
        )

    m1 = Mollifier(1, 1.0)
    peak = density(0.0, m1)
    checks.append(_check("peak_d1", abs(peak - 35.0 / 32.0) <= 1e-9, f"rho(0)={peak!r}"))

    mhalf = Mollifier(1, 0.5)
    val = tensor_quadrature(lambda p: density(p, mhalf), 1, 220)
    checks.append(_check("normalization_rescaled", abs(val - 1.0) <= 1e-6, f"r=0.5: {val!r}"))

    # the integrand has an |x| kink at the origin; in 1-D brute node count
    # is the cheap way to resolve it
    grad_nodes = {1: 4000, 2: 150, 3: 110}
    for d in (1, 2, 3):
        m = Mollifier(d, 1.0)
        val = tensor_quadrature(
            lambda p: np.linalg.norm(grad_density(p, m), axis=1), d, grad_nodes[d]
        )
        ref = grad_l1_norm(d)
        checks.append(
            _check(
                f"grad_l1_quadrature_d{d}",
                abs(val - ref) <= 1e-4,
                f"quadrature={val!r} closed_form={ref!r}",
            )
        )

    ok = all(d <= grad_l1_norm(d) <= d + 4 for d in range(1, 101))
    checks.append(_check("grad_l1_bounds_d1_100", ok, "d <= value <= d+4"))

    rng = np.random.default_rng(seed)
    m2 = Mollifier(2, 0.8)
    pts = rng.uniform(-0.5, 0.5, size=(100, 2))
    h = 1e-6
    worst = 0.0
    for x in pts:
        g = grad_density(x, m2)
        fd = np.empty(2)
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            fd[j] = (density(x + e, m2) - density(x - e, m2)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(g - fd))))
    checks.append(_check("gradient_fd", worst <= 1e-6, f"max abs err={worst:.3g}"))

    e1 = np.array([1.0, 0.0])
    inner = np.linalg.norm(grad_density((1.0 - 1e-9) * e1 * m2.radius, m2))
    outer = np.linalg.norm(grad_density((1.0 + 1e-9) * e1 * m2.radius, m2))
    checks.append(
        _check("boundary_continuity", abs(inner - outer) < 1e-8, f"jump={inner - outer:.3g}")
    )

    m3 = Mollifier(3, 0.7)
    draws = sample(m3, np.random.default_rng(seed), size=100_000)
    radii = np.linalg.norm(draws, axis=1)
    checks.append(_check("sample_support", float(radii.max()) <= m3.radius, f"max={radii.max()}"))

    again = sample(m3, np.random.default_rng(seed), size=100_000)
    checks.append(_check("sample_determinism", np.array_equal(draws, again)))

    for d in (1, 3, 10):
        md = Mollifier(d, 1.0)
        z = sample(md, np.random.default_rng(seed + d), size=100_000)
        sq = np.sum(z * z, axis=1)
        target = d / (d + 8)
        se = sq.std(ddof=1) / math.sqrt(len(sq))
        checks.append(
            _check(
                f"sample_second_moment_d{d}",
                abs(sq.mean() - target) <= 3 * se,
                f"mean={sq.mean():.5f} target={target:.5f} se={se:.2g}",
            )
        )

    z1 = sample(Mollifier(1, 1.0), np.random.default_rng(seed + 99), size=100_000)
    ks = stats.kstest(np.sum(z1 * z1, axis=1), "beta", args=(0.5, 4.0))
    checks.append(_check("sample_ks_d1", ks.pvalue >= 0.01, f"p={ks.pvalue:.4f}"))

    return _report("mollifier", checks)


# ---------------------------------------------------------------------------
# potential suite


def _fd_gradient_check(p: PotentialSpec, rng, keep_away=0.0):
    pts = rng.uniform(-2.0, 2.0, size=(100, p.dim))
    if keep_away > 0.0:
        s = np.sign(pts)
        s[s == 0] = 1.0
        pts = s * np.maximum(np.abs(pts), keep_away + 1e-3)
    h = 1e-6
    worst = 0.0
    for x in pts:
        g = np.asarray(p.weak_grad(x), dtype=float)
        fd = np.empty(p.dim)
        for j in range(p.dim):
            e = np.zeros(p.dim)
            e[j] = h
            fd[j] = (float(p.value(x + e)) - float(p.value(x - e))) / (2 * h)
        worst = max(worst, float(np.max(np.abs(g - fd))))
    return worst


def verify_potentials(seed=20240802):
    checks = []
    rng = np.random.default_rng(seed)

    specs = {
        "quadratic": builtin("quadratic", 2),
        "double_well": builtin("double_well", 2, c=1.5),
        "hoelder_mix": builtin("hoelder_mix", 2, alpha=0.5),
        "elastic_net_logistic": builtin("elastic_net_logistic", 2),
    }
    for name, p in specs.items():
        away = 1e-3 if name in ("hoelder_mix", "elastic_net_logistic") else 0.0
        worst = _fd_gradient_check(p, rng, keep_away=away)
        checks.append(_check(f"gradient_fd_{name}", worst <= 1e-5, f"max err={worst:.3g}"))

    for d in (1, 2, 5, 10):
        rep = check_assumptions(builtin("quadratic", d), rng=np.random.default_rng(seed + d))
        checks.append(_check(f"assumptions_quadratic_d{d}", rep.passed))

    good = builtin("quadratic", 2)
    falsified = PotentialSpec(
        name="quadratic_false_m",
        dim=2,
        value=good.value,
        weak_grad=good.weak_grad,
        m=2.0,
        b=0.0,
        modulus=good.modulus,
        grad_at_zero=0.0,
        u0=0.5,
    )
    rep = check_assumptions(falsified, rng=np.random.default_rng(seed))
    diss = next(item for item in rep.items if item.name == "dissipativity")
    checks.append(_check("falsified_m_detected", not diss.passed, f"margin={diss.margin:.3g}"))

    hm = builtin("hoelder_mix", 1, alpha=0.5)
    r = np.random.default_rng(seed + 5)
    x = r.uniform(-30, 30, size=(10_000, 1))
    steps = r.uniform(1e-4, 2.0, size=10_000)
    y = x + (r.choice([-1.0, 1.0], size=(10_000, 1)) * steps[:, None])
    fluct = np.abs(hm.weak_grad(x) - hm.weak_grad(y))[:, 0]
    allowed = np.array([hm.modulus.eval(s) for s in steps])
    worst = float(np.min(allowed - fluct))
    checks.append(_check("hoelder_modulus_pairs", worst >= 0.0, f"worst margin={worst:.3g}"))

    en = builtin("elastic_net_logistic", 1, lam1=0.1, lam2=1.0)
    g = np.linspace(-50, 50, 40_001)[:, None]
    margin = float(
        np.min(np.einsum("ij,ij->i", g, en.weak_grad(g)) - (en.m * g[:, 0] ** 2 - en.b))
    )
    checks.append(_check("elastic_net_dissipativity", margin >= -1e-12, f"margin={margin:.3g}"))

    dw = check_assumptions(specs["double_well"], rng=np.random.default_rng(seed + 6))
    mod_item = next(item for item in dw.items if item.name == "gradient_modulus")
    others = [it for it in dw.items if it.name != "gradient_modulus"]
    checks.append(
        _check(
            "double_well_modulus_flagged",
            (not mod_item.passed) and all(it.passed for it in others),
            "cubic gradient growth defeats any global modulus; report must say so",
        )
    )

    # smoothing a linear gradient is bias-free by kernel symmetry
    q = builtin("quadratic", 2)
    from .samplers import SphericalSmoothed

    orc = SphericalSmoothed(q, r=0.5, n_batch=1)
    x0 = np.array([0.7, -1.3])
    draws = ss_gradient_batch(orc, x0, 40_000, np.random.default_rng(seed + 7))
    se = draws.std(axis=0, ddof=1) / math.sqrt(draws.shape[0])
    gap = np.abs(draws.mean(axis=0) - x0)
    checks.append(
        _check("mollified_gradient_symmetry", bool(np.all(gap <= 3 * se)), f"gap={gap}")
    )

    fs = FiniteSumPotential.equal_split(builtin("hoelder_mix", 1, alpha=0.5), 8)
    rep = check_finite_sum(fs, rng=np.random.default_rng(seed + 8))
    checks.append(_check("finite_sum_split", rep.passed))

    return _report("potential", checks)


# ---------------------------------------------------------------------------
# metrics suite


def verify_metrics(seed=20240803):
    checks = []
    rng = np.random.default_rng(seed)

    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        d = int(rng.integers(1, 4))
        a = _metrics.SampleSet(rng.standard_normal((n, d)))
        b = _metrics.SampleSet(rng.standard_normal((n, d)))
        worst = max(worst, abs(_metrics.w2_exact(a, b) - _w2_enumerate(a.points, b.points)))
    checks.append(_check("assignment_vs_enumeration", worst <= 1e-12, f"max gap={worst:.3g}"))

    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 9))
        a = _metrics.SampleSet(rng.standard_normal((n, 1)))
        b = _metrics.SampleSet(rng.standard_normal((n, 1)))
        worst = max(worst, abs(_metrics.w2_1d(a, b) - _metrics.w2_exact(a, b)))
    checks.append(_check("sorted_matching_vs_assignment", worst <= 1e-12, f"max gap={worst:.3g}"))

    a = _metrics.SampleSet(rng.standard_normal((64, 2)))
    b = _metrics.SampleSet(rng.standard_normal((64, 2)))
    checks.append(
        _check(
            "symmetry",
            abs(_metrics.w2_exact(a, b) - _metrics.w2_exact(b, a)) <= 1e-12,
        )
    )

    ok = True
    for _ in range(25):
        pts = [
            _metrics.SampleSet(rng.standard_normal((6, 2))) for _ in range(3)
        ]
        dab = _w2_enumerate(pts[0].points, pts[1].points)
        dbc = _w2_enumerate(pts[1].points, pts[2].points)
        dac = _w2_enumerate(pts[0].points, pts[2].points)
        ok = ok and dac <= dab + dbc + 1e-12
    checks.append(_check("triangle_inequality", ok))

    ok = True
    for shift in (0.5, -2.0, 4.0):
        base = rng.standard_normal((32, 3))
        c = np.full(3, shift / math.sqrt(3))
        val = _metrics.w2_exact(_metrics.SampleSet(base), _metrics.SampleSet(base + c))
        ok = ok and abs(val - abs(shift)) <= 1e-10
    checks.append(_check("translation_identity", ok))

    base_a = rng.standard_normal((20, 2))
    base_b = rng.standard_normal((20, 2))
    w = _metrics.w2_exact(_metrics.SampleSet(base_a), _metrics.SampleSet(base_b))
    w3 = _metrics.w2_exact(_metrics.SampleSet(3.0 * base_a), _metrics.SampleSet(3.0 * base_b))
    checks.append(_check("scale_equivariance", abs(w3 - 3.0 * w) <= 1e-10))

    sl = _metrics.w2_sliced(a, b, 64, np.random.default_rng(seed + 1))
    checks.append(_check("sliced_le_exact", sl <= _metrics.w2_exact(a, b) + 1e-12))

    a1 = _metrics.SampleSet(rng.standard_normal((128, 1)))
    b1 = _metrics.SampleSet(rng.standard_normal((128, 1)))
    sl1 = _metrics.w2_sliced(a1, b1, 1, np.random.default_rng(seed + 2))
    checks.append(_check("sliced_d1_reduces", abs(sl1 - _metrics.w2_1d(a1, b1)) <= 1e-12))

    return _report("metrics", checks)


# ---------------------------------------------------------------------------
# bounds suite


def verify_bounds():
    checks = []
    lip1 = ModulusSpec.lipschitz(1.0)
    base = _bounds.BoundInputs(
        d=1, beta=1.0, m=1.0, b=0.0, m_tilde=1.0, b_tilde=0.0,
        kappa0=1.0, p0_sup_log=0.0, grad_u_mnorm=0.0, g_tilde_mnorm=1.0,
        omega_grad_u=lip1, omega_g_tilde_one=1.0, u0=0.0,
    )

    checks.append(_check("kappa_inf_example", abs(_bounds.kappa_inf(base, 0.1) - 3.2) <= 1e-12))
    checks.append(_check("poincare_example", _bounds.poincare_bound(base) == 18.0))
    checks.append(
        _check("log_sobolev_example", abs(_bounds.log_sobolev_bound(base, 1.0) - 2356.4) <= 1e-9)
    )
    checks.append(_check("c_zero_example", abs(_bounds.c_zero(base, 0.1) - 9.5) <= 1e-12))

    b4 = _bounds.BoundInputs(
        d=1, beta=4.0, m=1.0, b=0.0, m_tilde=1.0, b_tilde=0.0,
        kappa0=1.0, p0_sup_log=0.0, grad_u_mnorm=1.0, g_tilde_mnorm=1.0,
        omega_grad_u=lip1, omega_g_tilde_one=1.0, u0=0.5,
    )
    tb = _bounds.theorem_bound(b4, r=0.5, eta=0.1, k=100)
    checks.append(
        _check("c1_example", abs(tb.c1 - 2.0 * math.sqrt(54.0)) <= 1e-12, f"c1={tb.c1!r}")
    )

    kg = _bounds.kl_gibbs(
        _bounds.BoundInputs(
            d=1, beta=1.0, m=1.0, b=0.0, m_tilde=1.0, b_tilde=0.0,
            kappa0=1.0, p0_sup_log=0.0, grad_u_mnorm=1.0, g_tilde_mnorm=1.0,
            omega_grad_u=lip1, omega_g_tilde_one=1.0, u0=0.0,
        ),
        r=0.1,
        pi_first_moment=1.0,
    )
    checks.append(_check("kl_gibbs_example", abs(kg - 0.2) <= 1e-12, f"value={kg!r}"))

    w = _bounds.w2_from_kl(2.0, 1.0)
    checks.append(_check("w2_from_kl_example", abs(w - (math.sqrt(2) + 1.0)) <= 1e-12))

    em = _bounds.exp_moment_bound(
        _bounds.BoundInputs(
            d=1, beta=4.0, m=2.0, b=0.0, m_tilde=2.0, b_tilde=0.0,
            kappa0=1.0, p0_sup_log=0.0, grad_u_mnorm=1.0, g_tilde_mnorm=1.0,
            omega_grad_u=lip1, omega_g_tilde_one=1.0, u0=0.0,
        ),
        t=math.inf,
        alpha_exp=1.0,
    )
    checks.append(_check("exp_moment_asymptote", abs(em - 2.0 * math.exp(6.0)) <= 1e-9))

    from .potentials import builtin
    from .samplers import ExactGradient as _EG

    q = builtin("quadratic", 1)
    bi = _bounds.inputs_from(q, _EG(q), beta=1.0, r=0.1)
    tq = _bounds.theorem_bound(bi, r=0.1, eta=0.01, k=1000)
    fields = [tq.c0, tq.c1, tq.c1_prime, tq.c2, tq.kappa_inf, tq.c_p_bound, tq.c_ls_bound,
              tq.f_value, tq.w2_bound]
    checks.append(
        _check(
            "finite_for_quadratic_defaults",
            all(math.isfinite(v) and v > 0 for v in fields),
            f"w2_bound={tq.w2_bound:.6g}",
        )
    )

    grid = (0.0, 0.1, 1.0)
    ok = True
    prev_by_axis = {}
    for axis in range(4):
        vals = []
        for g in grid:
            delta = [0.0, 0.0, 0.0, 0.0]
            delta[axis] = g
            bi2 = _bounds.BoundInputs(
                d=1, beta=1.0, m=1.0, b=0.0, m_tilde=1.0, b_tilde=0.0,
                kappa0=1.0, p0_sup_log=0.0, grad_u_mnorm=1.0, g_tilde_mnorm=1.0,
                omega_grad_u=lip1, omega_g_tilde_one=1.0, u0=0.5, delta=tuple(delta),
            )
            vals.append(_bounds.theorem_bound(bi2, r=0.5, eta=0.05, k=50).w2_bound)
        ok = ok and all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        prev_by_axis[axis] = vals
    checks.append(_check("monotone_in_delta", ok))

    expos = [
        _bounds.theorem_bound(base, r=0.5, eta=0.1, k=k).exp_term for k in (100, 1000, 10_000)
    ]
    checks.append(
        _check("exp_term_decreasing_in_k", expos[0] > expos[1] > expos[2], f"{expos}")
    )

    pvals = []
    for m in np.linspace(0.5, 4.0, 8):
        bi3 = _bounds.BoundInputs(
            d=1, beta=1.0, m=float(m), b=0.0, m_tilde=float(m), b_tilde=0.0,
            kappa0=1.0, p0_sup_log=0.0, grad_u_mnorm=0.0, g_tilde_mnorm=1.0,
            omega_grad_u=lip1, omega_g_tilde_one=1.0, u0=0.0,
        )
        pvals.append(_bounds.poincare_bound(bi3))
    checks.append(
        _check("poincare_decreasing_in_m", all(b < a for a, b in zip(pvals, pvals[1:])))
    )

    two_a = _bounds.BoundInputs(
        d=1, beta=1.0, m=1.0, b=0.0, m_tilde=1.0, b_tilde=0.0,
        kappa0=1.0, p0_sup_log=0.0, grad_u_mnorm=0.0, g_tilde_mnorm=1.0,
        omega_grad_u=lip1, omega_g_tilde_one=1.0, u0=0.0, a_abs=2.0,
    )
    first = 2.0  # 4 / (m beta (d + (b+m) beta)) at these inputs
    checks.append(
        _check(
            "poincare_linear_in_a",
            abs((_bounds.poincare_bound(two_a) - first) - 2.0 * (18.0 - first)) <= 1e-12,
        )
    )

    return _report("bounds", checks)


SUITES = {
    "mollifier": verify_mollifier,
    "potential": verify_potentials,
    "metrics": verify_metrics,
    "bounds": verify_bounds,
}


def verify_suite(name: str) -> dict:
    """Run one named invariant battery and return its report dict."""
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()
