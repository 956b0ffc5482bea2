"""Greedy loops: pre-orthogonal AFD, projection onto given points, matching
pursuit, and the convergence-rate harness."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..hardy_signal import OctantSignature
from ..kernels import graded_multi_indices
from .model import Approximant
from .search import ResidualState, ResidualZero, SearchConfig, escalate_order, msp_select
from .system import DegenerateElement, OrthoSystem, gram_normalized, overlap_points
from .targets import as_target


class IllConditionedGram(ValueError):
    def __init__(self, cond: float, pair: tuple[int, int], points: np.ndarray):
        i, j = pair
        super().__init__(
            f"Gram matrix condition estimate {cond:.3e} exceeds 1e12; closest points are "
            f"#{i} {[complex(v) for v in points[i]]} and #{j} {[complex(v) for v in points[j]]}"
        )
        self.cond = cond
        self.pair = pair


def _sigma_of(target, dim: int) -> OctantSignature:
    return getattr(target, "sigma", None) or OctantSignature((1,) * dim)


def afd_run(
    F,
    m_max: int,
    stop_tol: float = 0.0,
    cfg: SearchConfig | None = None,
    callback: Callable[[int, Approximant], None] | None = None,
) -> Approximant:
    """Pre-orthogonal adaptive decomposition of ``F`` with up to ``m_max`` terms.

    ``F`` is a sampled component or any object implementing the target
    protocol. The residual norm is tracked through
    ``||g_{m+1}||^2 = ||g_m||^2 - |<F, B_{m+1}>|^2``.
    """
    if m_max < 0:
        raise ValueError("number of terms must be non-negative")
    target = as_target(F)
    cfg = cfg or SearchConfig()
    dim = target.dim
    system = OrthoSystem(dim, cfg.degeneracy)
    state = ResidualState(target, system, [])
    fnorm = target.norm()
    history = [fnorm]
    fpsi: list[complex] = []
    r2 = fnorm**2
    for _ in range(m_max):
        if math.sqrt(r2) <= stop_tol:
            break
        try:
            sel = msp_select(state, cfg)
            row = system.add(sel.alpha, sel.z)
        except (ResidualZero, DegenerateElement):
            break
        fpsi.append(complex(target.inner_psi(sel.alpha, sel.z[None, :])[0]))
        c = complex(np.conj(row) @ np.asarray(fpsi))
        state.coeffs.append(c)
        r2 = max(r2 - abs(c) ** 2, 0.0)
        history.append(math.sqrt(r2))
        if callback is not None:
            callback(system.size, _model(target, system, state.coeffs, history))
    return _model(target, system, state.coeffs, history)


def _model(target, system: OrthoSystem, coeffs, history, kind="afd") -> Approximant:
    return Approximant(
        target.dim,
        _sigma_of(target, target.dim),
        system.alphas.copy(),
        system.points.copy(),
        np.asarray(coeffs, dtype=complex),
        system.coef.copy(),
        list(history),
        kind,
    )


def _closest_pair(points: np.ndarray) -> tuple[int, int]:
    best, pair = math.inf, (0, 1)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d = float(np.max(np.abs(points[i] - points[j])))
            if d < best:
                best, pair = d, (i, j)
    return pair


def project_interpolate(F, points, eps: float = 0.0, cond_limit: float = 1e12) -> Approximant:
    """Orthogonal projection of ``F`` onto the kernels at ``points``.

    Points repeated within ``eps`` are escalated to derivatives in the same way
    as the greedy loop. Points are first-octant view coordinates.
    """
    target = as_target(F)
    dim = target.dim
    pts = np.asarray(points, dtype=complex).reshape(-1, dim)
    if not np.all(pts.imag > 0):
        raise ValueError("interpolation nodes must be interior")
    alphas = []
    for k, p in enumerate(pts):
        alphas.append(escalate_order(pts[:k], p, eps, used=np.asarray(alphas, dtype=int).reshape(-1, dim)))
    alphas = np.asarray(alphas, dtype=int).reshape(-1, dim)
    if len(pts) > 1:
        cond = float(np.linalg.cond(gram_normalized(alphas, pts)))
        if not cond <= cond_limit:
            raise IllConditionedGram(cond, _closest_pair(pts), pts)
    system = OrthoSystem(dim, 1e-15)
    fpsi, coeffs = [], []
    fnorm = target.norm()
    history = [fnorm]
    r2 = fnorm**2
    for a, p in zip(alphas, pts):
        row = system.add(a, p)
        fpsi.append(complex(target.inner_psi(a, p[None, :])[0]))
        c = complex(np.conj(row) @ np.asarray(fpsi))
        coeffs.append(c)
        r2 = max(r2 - abs(c) ** 2, 0.0)
        history.append(math.sqrt(r2))
    return _model(target, system, coeffs, history, kind="projection")


def mp_run(F, m_max: int, cfg: SearchConfig | None = None, alpha_cap: int | None = None) -> Approximant:
    """Plain matching pursuit over normalized elements of order at most ``alpha_cap``.

    The residual is ``R^{m+1} = R^m - <R^m, psi_m> psi_m``; atoms are not
    orthogonalized, so the model coefficient matrix is the identity over the
    normalized elements.
    """
    target = as_target(F)
    cfg = cfg or SearchConfig()
    cap = cfg.alpha_cap if alpha_cap is None else alpha_cap
    dim = target.dim
    orders = [a for h in range(cap + 1) for a in graded_multi_indices(dim, h)]
    system = OrthoSystem(dim, cfg.degeneracy)
    state = ResidualState(target, system, [], orthogonal=False)
    fnorm = target.norm()
    history = [fnorm]
    r2 = fnorm**2
    alphas, pts = [], []
    for _ in range(m_max):
        try:
            sel = msp_select(state, cfg, alphas=orders)
        except ResidualZero:
            break
        w = state.weights
        c = complex(target.inner_psi(sel.alpha, sel.z[None, :])[0])
        if len(alphas):
            c -= complex(w @ overlap_points(system.alphas, system.points, sel.alpha, sel.z[None, :])[:, 0])
        alphas.append(sel.alpha)
        pts.append(sel.z)
        # the system only carries the element list here; no orthogonalization
        system.alphas = np.asarray(alphas, dtype=int).reshape(-1, dim)
        system.points = np.asarray(pts, dtype=complex).reshape(-1, dim)
        state.coeffs.append(c)
        r2 = max(r2 - abs(c) ** 2, 0.0)
        history.append(math.sqrt(r2))
    m = len(alphas)
    return Approximant(
        dim,
        _sigma_of(target, dim),
        np.asarray(alphas, dtype=int).reshape(-1, dim),
        np.asarray(pts, dtype=complex).reshape(-1, dim),
        np.asarray(state.coeffs, dtype=complex),
        np.eye(m, dtype=complex),
        history,
        "mp",
    )


@dataclass
class RateReport:
    rows: list[tuple[int, float, float]]
    M: float
    target: Approximant
    model: Approximant
    seed: int
    stopped_at: int

    @property
    def violations(self) -> list[int]:
        return [m for m, r, b in self.rows if r > b]


def random_atoms(count: int, dim: int, rng: np.random.Generator, box=(-3.0, 3.0), y_range=(0.4, 2.5), min_sep=0.6):
    """Well-separated random interior points (rejection sampling)."""
    pts: list[np.ndarray] = []
    tries = 0
    while len(pts) < count:
        tries += 1
        if tries > 100000:
            raise RuntimeError("could not place well-separated atoms; enlarge the box")
        x = rng.uniform(*box, size=dim)
        y = np.exp(rng.uniform(np.log(y_range[0]), np.log(y_range[1]), size=dim))
        z = x + 1j * y
        if all(np.max(np.abs(z - p)) >= min_sep for p in pts):
            pts.append(z)
    return np.asarray(pts)


def synthesize(coeff_magnitudes: Sequence[float], dim: int, seed: int) -> Approximant:
    """``F = sum_j c_j psi_{w_j}`` with random points and phases drawn from ``seed``."""
    rng = np.random.default_rng(seed)
    mags = np.asarray(coeff_magnitudes, dtype=float)
    pts = random_atoms(len(mags), dim, rng)
    phases = np.exp(2j * np.pi * rng.uniform(size=len(mags)))
    return Approximant.from_combination(np.zeros((len(mags), dim), dtype=int), pts, mags * phases)


def rate_harness(
    atom_count: int,
    coeff_magnitudes: Sequence[float] | None,
    m_max: int,
    cfg: SearchConfig | None = None,
    seed: int = 0,
    dim: int = 1,
) -> RateReport:
    """Run AFD on a synthetic member of the class with ``M = sum |c_j|`` and
    tabulate ``(m, residual_m, M / sqrt(m))``."""
    if coeff_magnitudes is None:
        coeff_magnitudes = [2.0 ** -(j + 1) for j in range(atom_count)]
    if len(coeff_magnitudes) != atom_count:
        raise ValueError("need one coefficient magnitude per atom")
    cfg = cfg or SearchConfig(x_range=(-4.0, 4.0), y_range=(0.05, 8.0), x_points=32, y_points=16)
    target = synthesize(coeff_magnitudes, dim, seed)
    M = float(np.sum(np.abs(target.coeffs)))
    model = afd_run(target, m_max, 0.0, cfg)
    hist = model.residual_history
    stopped = len(hist) - 1
    rows = []
    for m in range(1, m_max + 1):
        r = hist[min(m, stopped)]
        rows.append((m, float(r), M / math.sqrt(m)))
    return RateReport(rows, M, target, model, seed, stopped)
