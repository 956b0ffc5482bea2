"""Validation suites: closed forms against independent oracles.

Every suite returns rows ``(suite, case, measured, bound, passed)``. The
oracles are adaptive quadrature (scipy's QUADPACK through
:mod:`tubeafd.numerics`), brute-force Gram factorizations and explicit
residual norms; none of them reuse the closed forms they check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels as K
from .afd import (
    Approximant,
    OrthoSystem,
    ResidualState,
    SearchConfig,
    SpectralTarget,
    afd_run,
    correlation_objective,
    escalate_order,
    gram_normalized,
    mp_run,
    order_from_count,
    project_interpolate,
    random_atoms,
    rate_harness,
)
from .cones import (
    Cone2D,
    PolygonalCone,
    cone_szego_diag,
    cone_szego_quadrature,
    dual_cone,
    first_octant_path,
    poisson_lp_bound_check,
)
from .hardy_signal import (
    BoundarySamples,
    OctantSignature,
    boundary_values,
    from_density,
    hardy_project,
    reconstruct,
    split_all,
)
from .numerics import Grid, QuadratureSpec, integrate_nd

ORACLE = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-16)


def _phi_scalar(alpha, z, w) -> complex:
    # definition of phi_{alpha,z}(w) in plain complex arithmetic, for quadrature
    out = 1.0 + 0j
    for a, zj, wj in zip(alpha, z, w):
        out *= -math.factorial(a) / (2j * math.pi * (wj - zj.conjugate()) ** (a + 1))
    return out


@dataclass(frozen=True)
class Row:
    suite: str
    case: str
    measured: float
    bound: float
    passed: bool

    def csv(self) -> str:
        return f"{self.suite},{self.case},{self.measured:.17g},{self.bound:.17g},{str(self.passed).lower()}"


def _row(suite, case, measured, bound, passed=None) -> Row:
    measured = float(measured)
    return Row(suite, case, measured, float(bound), bool(measured <= bound) if passed is None else bool(passed))


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _random_element(rng, dim, max_order=4):
    while True:
        alpha = tuple(int(v) for v in rng.integers(0, max_order + 1, size=dim))
        if sum(alpha) <= max_order:
            break
    z = rng.uniform(-1.5, 1.5, size=dim) + 1j * np.exp(rng.uniform(np.log(0.3), np.log(3.0), size=dim))
    return alpha, z


def _quad_over_R(f, dim, centers, real=False) -> complex:
    bps = [sorted({0.0, *(float(c) for c in centers[:, j])}) for j in range(dim)]
    if dim == 1:
        return integrate_nd(lambda t: f((t,)), [(-math.inf, math.inf)], ORACLE, [bps[0]], real=real)
    return integrate_nd(
        lambda t0, t1: f((t0, t1)),
        [(-math.inf, math.inf), (-math.inf, math.inf)],
        ORACLE,
        [bps[0], bps[1]],
        real=real,
    )


# -- criterion 1 --------------------------------------------------------------------


def suite_norms(seed: int = 1, cases: int = 50) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(cases):
        dim = 1 if k % 2 == 0 else 2
        alpha, z = _random_element(rng, dim)
        closed = float(K.phi_norm(alpha, z.imag)) ** 2
        zs = [complex(v) for v in z]
        quad = _quad_over_R(lambda w: abs(_phi_scalar(alpha, zs, w)) ** 2, dim, z.real[None, :], real=True).real
        rows.append(_row("norms", f"quadrature n={dim} alpha={alpha}", _rel(closed, quad), 1e-6))
        ratio = quad / float(K.phi_norm_sq_printed(alpha, z.imag))
        rows.append(_row("norms", f"printed-ratio n={dim} alpha={alpha}", _rel(ratio, (2 * math.pi) ** -dim), 1e-6))
    return rows


# -- criterion 2 --------------------------------------------------------------------


def suite_inner(seed: int = 2, cases: int = 50) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(cases):
        dim = 1 if k % 2 == 0 else 2
        a1, z1 = _random_element(rng, dim)
        a2, z2 = _random_element(rng, dim)
        closed = complex(K.ip_phi_phi(a1, z1, a2, z2))
        z1s, z2s = [complex(v) for v in z1], [complex(v) for v in z2]
        quad = _quad_over_R(
            lambda w: _phi_scalar(a1, z1s, w) * _phi_scalar(a2, z2s, w).conjugate(), dim, np.vstack([z1.real, z2.real])
        )
        rows.append(_row("inner", f"n={dim} {a1},{a2}", _rel(closed, quad), 1e-6))
    return rows


# -- criterion 3 --------------------------------------------------------------------


def suite_interp(seed: int = 3, sets: int = 5) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(sets):
        dim = 1 if k % 2 == 0 else 2
        target = Approximant.from_combination(
            np.zeros((4, dim), dtype=int),
            random_atoms(4, dim, rng),
            rng.normal(size=4) + 1j * rng.normal(size=4),
        )
        nodes = random_atoms(int(rng.integers(2, 9)), dim, rng, min_sep=0.8)
        model = project_interpolate(target, nodes)
        fz = target.evaluate_view(nodes)
        err = np.max(np.abs(model.evaluate_view(nodes) - fz)) / np.max(np.abs(fz))
        rows.append(_row("interp", f"set{k} n={dim} nodes={len(nodes)}", err, 1e-8))
    return rows


# -- criterion 4 --------------------------------------------------------------------


def suite_energy(seed: int = 4, instances: int = 5, steps: int = 8) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    cfg = SearchConfig(x_range=(-4, 4), y_range=(0.05, 8.0), x_points=24, y_points=12)
    for k in range(instances):
        dim = 1 if k % 2 == 0 else 2
        count = 5
        target = Approximant.from_combination(
            np.zeros((count, dim), dtype=int), random_atoms(count, dim, rng), rng.normal(size=count) + 1j * rng.normal(size=count)
        )
        worst = [0.0]
        f2 = target.norm() ** 2

        def check(m, model):
            g = model.residual_norm(target)
            captured = float(np.sum(np.abs(model.coeffs) ** 2))
            worst[0] = max(worst[0], abs(f2 - captured - g**2) / f2)

        afd_run(target, steps, 0.0, cfg, callback=check)
        rows.append(_row("energy", f"instance{k} n={dim} steps={steps}", worst[0], 1e-8))
    return rows


# -- criterion 5 --------------------------------------------------------------------


def suite_recovery(seed: int = 5) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    for dim in (1, 2):
        b = rng.uniform(-2, 2, size=dim) + 1j * np.exp(rng.uniform(np.log(0.3), np.log(3.0), size=dim))
        target = Approximant.from_combination(np.zeros((1, dim), dtype=int), [b], [1.0])
        cfg = SearchConfig(x_range=(-4, 4), y_range=(0.05, 8.0))
        model = afd_run(target, 1, 0.0, cfg)
        rows.append(_row("recovery", f"n={dim} residual", model.residual_history[-1], 1e-4))
        rows.append(_row("recovery", f"n={dim} |z*-b|", float(np.max(np.abs(model.points[0] - b))), 1e-3))
    return rows


# -- criterion 6 --------------------------------------------------------------------


def suite_rate(seed: int = 6, instances: int = 10, atoms: int = 10, m_max: int = 20) -> list[Row]:
    rows = []
    for k in range(instances):
        s = seed * 1000 + k
        mags = np.random.default_rng(s).uniform(0.1, 1.0, size=atoms)
        rep = rate_harness(atoms, list(mags), m_max, seed=s)
        worst = max(r / b for _, r, b in rep.rows)
        rows.append(_row("rate", f"seed={s} max residual/bound", worst, 1.0, not rep.violations))
    return rows


# -- criterion 7 --------------------------------------------------------------------


def bump_density(a: float, b: float) -> Callable[[np.ndarray], np.ndarray]:
    """Smooth compactly supported density on ``(a, b)``."""

    def f(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        m = (t > a) & (t < b)
        out[m] = np.exp(-((b - a) ** 2) / ((t[m] - a) * (b - t[m])))
        return out

    return f


def bvc_test_function() -> SpectralTarget:
    """Band-limited F on [1/64, 1/4] sampled finely enough that the discrete sum
    does not repeat before ``x = 2^12``."""
    a, b = 1 / 64, 1 / 4
    count = int(round((b - a) * 2**14)) + 1
    return SpectralTarget(from_density(bump_density(a, b), OctantSignature((1,)), [(a, b)], [count]))


def suite_bvc(steps: int = 12) -> list[Row]:
    target = bvc_test_function()
    state = ResidualState(target, OrthoSystem(1), [])
    rows = []
    for kind in ("boundary", "scale", "xinf"):
        pts = np.array(first_octant_path(kind, 1, steps, base=[0.3]))
        vals = correlation_objective(state, (0,), pts)
        rows.append(_row("bvc", f"path={kind} final/initial", vals[-1] / vals[0], 0.05))
    return rows


# -- criterion 8 --------------------------------------------------------------------


def suite_split(seed: int = 8) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    g1 = Grid.symmetric(32.0, 1024)
    x = g1.axes()[0]
    centers = rng.uniform(-4, 4, size=3)
    v = sum(np.exp(-((x - c) ** 2) * rng.uniform(0.5, 2)) * (rng.normal() + 1j * rng.normal()) for c in centers)
    s = BoundarySamples(g1, v)
    r = reconstruct(split_all(s))
    rows.append(_row("split", "roundtrip n=1", np.linalg.norm(r.values - v) / np.linalg.norm(v), 1e-8))
    g2 = Grid.symmetric(16.0, 128, 2)
    X, Y = g2.mesh()
    v2 = np.exp(-((X - 0.5) ** 2) - 2 * (Y + 0.3) ** 2) * (1 + 0.5j * X * Y) + 0.3 * np.exp(-((X + 2) ** 2 + Y**2))
    s2 = BoundarySamples(g2, v2)
    r2 = reconstruct(split_all(s2))
    rows.append(_row("split", "roundtrip n=2", np.linalg.norm(r2.values - v2) / np.linalg.norm(v2), 1e-8))
    # analytic witness: 2/(1+x^2) has upper component i/(x+i)
    g = Grid.symmetric(64.0, 4096)
    x = g.axes()[0]
    plus = hardy_project(BoundarySamples(g, 2 / (1 + x**2) + 0j, True), OctantSignature((1,)))
    err = np.max(np.abs(boundary_values(plus) - 1j / (x + 1j)))
    rows.append(_row("split", "witness i/(x+i) max error (grid 4096, [-64,64])", err, 1e-4))
    return rows


# -- criterion 9 --------------------------------------------------------------------


def suite_escalation(seed: int = 9) -> list[Row]:
    rng = np.random.default_rng(seed)
    z = np.array([rng.uniform(-1, 1) + 1j * rng.uniform(0.3, 2)])
    sys_ = OrthoSystem(1)
    for _ in range(4):
        alpha = escalate_order(sys_.points, z, 1e-9, used=sys_.alphas)
        sys_.add(alpha, z)
    alphas = np.arange(4)[:, None]
    h = gram_normalized(alphas, np.repeat(z[None, :], 4, axis=0))
    brute = np.linalg.inv(np.linalg.cholesky(h))
    rows = [_row("escalation", "repeated point n=1, 4 selections vs Gram-Schmidt", np.max(np.abs(sys_.coef - brute)), 1e-8)]
    expected = [0, 1, 1, 2]
    got = [order_from_count(l, 2) for l in range(1, 5)]
    rows.append(_row("escalation", f"n=2 orders for l=1..4 {got}", float(got != expected), 0.0))
    hist = np.zeros((0, 2), dtype=complex)
    used = np.zeros((0, 2), dtype=int)
    p = np.array([0.1 + 1j, -0.2 + 0.5j])
    seq = []
    for _ in range(4):
        a = escalate_order(hist, p, 1e-9, used=used)
        seq.append(sum(a))
        hist = np.vstack([hist, p])
        used = np.vstack([used, a])
    rows.append(_row("escalation", f"n=2 escalate_order orders {seq}", float(seq != expected), 0.0))
    return rows


# -- criterion 10 -------------------------------------------------------------------


def suite_cones(seed: int = 10, cases: int = 20) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(cases):
        c = Cone2D(float(np.exp(rng.uniform(np.log(0.25), np.log(4.0)))))
        y2 = float(np.exp(rng.uniform(np.log(0.3), np.log(3.0))))
        y = np.array([rng.uniform(-0.9, 0.9) * c.kappa * y2, y2])
        rows.append(_row("cones", f"K closed vs quadrature kappa={c.kappa:.4g}", _rel(cone_szego_diag(c, y), cone_szego_quadrature(c, y)), 1e-5))
        d = dual_cone(dual_cone(c))
        rows.append(_row("cones", f"dual involution kappa={c.kappa:.4g}", float(d != c), 0.0))
    for k in range(cases):
        if k % 4 == 3:
            cone = PolygonalCone.from_dual_generators([[1.0, 0.5], [0.0, 1.0], [-1.0, 2.0]])
            y = np.array([rng.uniform(-0.1, 0.1), rng.uniform(0.5, 2.0)])
        else:
            cone = Cone2D(float(np.exp(rng.uniform(np.log(0.5), np.log(2.0)))))
            y = np.array([rng.uniform(-0.5, 0.5) * cone.kappa, 1.0]) * rng.uniform(0.5, 2.0)
        p = math.inf if k % 5 == 4 else float(rng.uniform(1.2, 6.0))
        x = rng.uniform(-1, 1, size=2)
        res = poisson_lp_bound_check(cone, x + 1j * y, p)
        rows.append(_row("cones", f"Poisson L^p bound p={p:.3g} slack={res.slack:.3e}", res.lhs / res.rhs, 1.0, res.ok))
    return rows


# -- criterion 11 -------------------------------------------------------------------


def suite_mp(seed: int = 11, steps: int = 10) -> list[Row]:
    rng = np.random.default_rng(seed)
    rows = []
    cfg = SearchConfig(x_range=(-4, 4), y_range=(0.05, 8.0), x_points=24, y_points=12, alpha_cap=3)
    target = Approximant.from_combination(
        np.zeros((5, 1), dtype=int), random_atoms(5, 1, rng), rng.normal(size=5) + 1j * rng.normal(size=5)
    )
    model = mp_run(target, steps, cfg)
    f2 = target.norm() ** 2
    worst = 0.0
    for m in range(1, model.size + 1):
        sub = Approximant(1, model.sigma, model.alphas[:m], model.points[:m], model.coeffs[:m], np.eye(m), [], "mp")
        g = sub.residual_norm(target)
        worst = max(worst, abs(f2 - np.sum(np.abs(model.coeffs[:m]) ** 2) - g**2) / f2)
    rows.append(_row("mp", f"energy bookkeeping over {model.size} steps", worst, 1e-8))
    for k in range(3):
        dim = 1 if k < 2 else 2
        F = Approximant.from_combination(
            np.zeros((4, dim), dtype=int), random_atoms(4, dim, rng), rng.normal(size=4) + 1j * rng.normal(size=4)
        )
        m_steps = 8 if dim == 1 else 5
        a = afd_run(F, m_steps, 0.0, cfg)
        p = mp_run(F, m_steps, cfg, alpha_cap=0)
        n = min(len(a.residual_history), len(p.residual_history))
        excess = max(ra - rp for ra, rp in zip(a.residual_history[:n], p.residual_history[:n]))
        rows.append(_row("mp", f"input{k} n={dim} max(afd - mp residual), kernel atoms", excess, 1e-12))
    return rows


SUITES: dict[str, tuple[int, Callable[[], list[Row]]]] = {
    "norms": (1, suite_norms),
    "inner": (2, suite_inner),
    "interp": (3, suite_interp),
    "energy": (4, suite_energy),
    "recovery": (5, suite_recovery),
    "rate": (6, suite_rate),
    "bvc": (7, suite_bvc),
    "split": (8, suite_split),
    "escalation": (9, suite_escalation),
    "cones": (10, suite_cones),
    "mp": (11, suite_mp),
}


def run_suite(name: str) -> list[Row]:
    if name == "all":
        return [r for key in SUITES for r in SUITES[key][1]()]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name][1]()
