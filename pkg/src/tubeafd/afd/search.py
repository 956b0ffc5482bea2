"""Parameter selection: multiplicity escalation, the correlation objective and
the maximal selection search (coarse lattice followed by simplex refinement).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..kernels import graded_multi_indices
from ..numerics import Grid
from .system import OrthoSystem, overlap_axes, overlap_points, tensor_overlap


class ResidualZero(RuntimeError):
    """Every candidate correlation is below the zero threshold."""


class DictionaryExhausted(RuntimeError):
    def __init__(self, z, order: int, cap: int):
        super().__init__(f"dictionary exhausted at point {[complex(v) for v in np.ravel(z)]}: order {order} exceeds cap {cap}")
        self.z = np.asarray(z)
        self.order = order


@dataclass(frozen=True)
class SearchConfig:
    """Search box and optimizer settings, shared by all axes.

    ``y_range`` is searched on a log scale; ``merge_radius`` decides when two
    points count as the same point for order escalation.
    """

    x_range: tuple[float, float] = (-8.0, 8.0)
    y_range: tuple[float, float] = (2.0**-5, 16.0)
    x_points: int = 32
    y_points: int = 16
    refine_iterations: int = 200
    refine_tol: float = 1e-6
    refine_starts: int = 3
    degeneracy: float = 1e-10
    merge_radius: float = 1e-8
    alpha_cap: int = 12
    zero_tol: float = 1e-14
    threads: int | None = None

    def __post_init__(self):
        if not self.x_range[0] < self.x_range[1]:
            raise ValueError("x range must be increasing")
        if not 0 < self.y_range[0] < self.y_range[1]:
            raise ValueError("y range must lie strictly inside the cone and be increasing")
        if self.x_points < 1 or self.y_points < 1:
            raise ValueError("lattice must be non-empty")
        if not 0 < self.degeneracy < 1:
            raise ValueError("degeneracy threshold must lie in (0, 1)")
        if self.merge_radius < 0 or self.alpha_cap < 0:
            raise ValueError("merge radius and order cap must be non-negative")

    @classmethod
    def for_grid(cls, grid: Grid, **overrides) -> "SearchConfig":
        """Defaults tied to a sampling grid: x over the grid, y in [spacing, extent]."""
        h = min(grid.spacing)
        lo = min(grid.lower)
        hi = max(lo_ + e for lo_, e in zip(grid.lower, grid.extent))
        kw = dict(x_range=(lo, hi), y_range=(h, max(grid.extent)), merge_radius=1e-6 * h)
        kw.update(overrides)
        return cls(**kw)

    def with_(self, **kw) -> "SearchConfig":
        return replace(self, **kw)

    def lattice_axis(self) -> np.ndarray:
        """Candidate coordinates for one axis, x-major."""
        x = np.linspace(*self.x_range, self.x_points) if self.x_points > 1 else np.array([np.mean(self.x_range)])
        y = np.geomspace(*self.y_range, self.y_points) if self.y_points > 1 else np.array([math.sqrt(np.prod(self.y_range))])
        return (x[:, None] + 1j * y[None, :]).ravel()

    def simplex_steps(self) -> tuple[float, float]:
        dx = (self.x_range[1] - self.x_range[0]) / max(self.x_points - 1, 1)
        dly = math.log(self.y_range[1] / self.y_range[0]) / max(self.y_points - 1, 1)
        return 0.5 * dx, 0.5 * dly

    def worker_count(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        env = os.environ.get("AFD_THREADS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ValueError(f"AFD_THREADS must be an integer, got {env!r}") from None
        return max(1, min(8, os.cpu_count() or 1))


def order_from_count(l: int, dim: int) -> int:
    """Smallest ``h`` with ``C(h - 1 + n, n) < l <= C(h + n, n)``."""
    if l < 1:
        raise ValueError("occurrence count is 1-based")
    h = 0
    while math.comb(h + dim, dim) < l:
        h += 1
    return h


def escalate_order(
    history: Sequence,
    z,
    eps: float,
    alpha_cap: int | None = None,
    used: Sequence[Sequence[int]] | None = None,
) -> tuple[int, ...]:
    """Multi-index for a candidate at ``z`` given previously selected points.

    ``l`` counts the earlier selections within ``eps`` of ``z`` plus one; the
    order ``h`` follows from the binomial bracketing and the multi-index is the
    first one of that order, in graded order, not already used at the point.
    """
    if eps < 0:
        raise ValueError("merge radius must be non-negative")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    dim = len(z)
    pts = np.asarray(history, dtype=complex).reshape(-1, dim)
    near = np.max(np.abs(pts - z[None, :]), axis=1) <= eps if len(pts) else np.zeros(0, dtype=bool)
    l = 1 + int(np.sum(near))
    h = order_from_count(l, dim)
    taken = set()
    if used is not None:
        used = np.asarray(used, dtype=int).reshape(-1, dim)
        taken = {tuple(int(v) for v in a) for a in used[near]}
    while True:
        if alpha_cap is not None and h > alpha_cap:
            raise DictionaryExhausted(z, h, alpha_cap)
        for a in graded_multi_indices(dim, h):
            if a not in taken:
                return a
        h += 1


@dataclass
class ResidualState:
    """Current residual ``g_m = F - sum_k c_k B_k`` seen through closed forms.

    With ``orthogonal=False`` the coefficients multiply the normalized
    elements directly (matching pursuit) and no projection is removed from the
    candidate.
    """

    target: object
    system: OrthoSystem
    coeffs: list
    orthogonal: bool = True

    @property
    def weights(self) -> np.ndarray:
        c = np.asarray(self.coeffs, dtype=complex)
        if not self.orthogonal:
            return c
        return self.system.coef.T @ c if len(c) else c


def _objective_from_parts(fvals, overlaps, state: ResidualState, degeneracy: float) -> np.ndarray:
    """``|<g_m, psi~>| / sqrt(1 - sum_k |<psi~, B_k>|^2)`` on arrays of candidates."""
    if state.system.size == 0:
        return np.abs(fvals)
    a = state.weights
    num = fvals - np.tensordot(a, overlaps, axes=(0, 0))
    if not state.orthogonal:
        return np.abs(num)
    q = np.tensordot(np.conj(state.system.coef), np.conj(overlaps), axes=(1, 0))
    rem = 1.0 - np.sum(np.abs(q) ** 2, axis=0)
    ok = rem >= degeneracy
    out = np.zeros(np.shape(num))
    out[ok] = np.abs(num[ok]) / np.sqrt(rem[ok])
    return out


def correlation_objective(state: ResidualState, alpha, z, degeneracy: float = 1e-10) -> np.ndarray:
    """Objective at candidate rows ``z`` (first-octant view) for order ``alpha``."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if not np.all(z.imag > 0):
        raise ValueError("candidate points must be interior")
    fvals = state.target.inner_psi(alpha, z)
    if state.system.size == 0:
        return np.abs(fvals)
    ov = overlap_points(state.system.alphas, state.system.points, alpha, z)
    return _objective_from_parts(fvals, ov, state, degeneracy)


def lattice_objective(state: ResidualState, alpha, axis_points, degeneracy: float, workers: int = 1) -> np.ndarray:
    """Objective on the tensor lattice of per-axis candidates, chunked over the first axis."""
    axis_points = [np.asarray(p, dtype=complex) for p in axis_points]
    n0 = len(axis_points[0])
    chunk = max(1, -(-n0 // (4 * workers))) if workers > 1 else n0

    def run(start: int) -> np.ndarray:
        pts = [axis_points[0][start:start + chunk], *axis_points[1:]]
        fvals = state.target.inner_psi_lattice(alpha, pts)
        if state.system.size == 0:
            return np.abs(fvals)
        ov = tensor_overlap(overlap_axes(state.system.alphas, state.system.points, alpha, pts))
        return _objective_from_parts(fvals, ov, state, degeneracy)

    starts = range(0, n0, chunk)
    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    return np.concatenate(parts, axis=0)


@dataclass(frozen=True)
class Selection:
    alpha: tuple[int, ...]
    z: np.ndarray
    value: float
    lattice_best: float


def _pack(z: np.ndarray) -> np.ndarray:
    return np.concatenate([[v.real, math.log(v.imag)] for v in z])


def _unpack(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1, 2)
    return p[:, 0] + 1j * np.exp(np.clip(p[:, 1], -700, 700))


def refine(state: ResidualState, alpha, z0, cfg: SearchConfig) -> tuple[np.ndarray, float]:
    """Nelder-Mead on ``(x_j, log y_j)`` from ``z0``, kept inside the search box.

    Never returns worse than ``z0``.
    """
    z0 = np.asarray(z0, dtype=complex)
    x0 = _pack(z0)
    dx, dly = cfg.simplex_steps()
    steps = np.tile([dx, dly], len(z0))
    simplex = np.vstack([x0] + [x0 + np.eye(len(x0))[k] * steps[k] for k in range(len(x0))])

    def f(p):
        return -float(correlation_objective(state, alpha, _unpack(p)[None, :], cfg.degeneracy)[0])

    f0 = f(x0)
    box = [cfg.x_range, (math.log(cfg.y_range[0]), math.log(cfg.y_range[1]))] * len(z0)
    res = minimize(
        f,
        x0,
        method="Nelder-Mead",
        bounds=box,
        options=dict(
            initial_simplex=simplex,
            maxiter=cfg.refine_iterations * len(x0),
            xatol=cfg.refine_tol,
            fatol=1e-15,
        ),
    )
    if res.fun <= f0:
        return _unpack(res.x), -float(res.fun)
    return z0, -f0


def _distinct_points(points: np.ndarray, eps: float) -> list[np.ndarray]:
    out: list[np.ndarray] = []
    for p in points:
        if not any(np.max(np.abs(p - q)) <= eps for q in out):
            out.append(p)
    return out


def msp_select(state: ResidualState, cfg: SearchConfig, alphas: Sequence[Sequence[int]] | None = None) -> Selection:
    """Maximize the correlation objective over the search box.

    Order-0 candidates (or every multi-index in ``alphas``, for matching
    pursuit) are scanned on the lattice and the best few refined; previously
    selected points are added as candidates with their escalated order.
    """
    dim = state.target.dim
    axis = cfg.lattice_axis()
    workers = cfg.worker_count()
    orders = [tuple(a) for a in alphas] if alphas is not None else [(0,) * dim]
    candidates: list[tuple[float, tuple[int, ...], np.ndarray]] = []
    lattice_best = 0.0
    for alpha in orders:
        vals = lattice_objective(state, alpha, [axis] * dim, cfg.degeneracy, workers)
        flat = vals.ravel()
        lattice_best = max(lattice_best, float(flat.max()))
        top = np.argsort(-flat, kind="stable")[: cfg.refine_starts]
        for idx in top:
            if flat[idx] <= 0:
                continue
            z0 = np.array([axis[i] for i in np.unravel_index(idx, vals.shape)])
            candidates.append((float(flat[idx]), alpha, z0))
    if lattice_best < cfg.zero_tol and state.system.size == 0:
        raise ResidualZero(f"all lattice correlations below {cfg.zero_tol:g}")

    best: tuple[float, tuple[int, ...], np.ndarray] | None = None
    candidates.sort(key=lambda c: -c[0])
    for val, alpha, z0 in candidates[: cfg.refine_starts]:
        z, v = refine(state, alpha, z0, cfg)
        if best is None or v > best[0]:
            best = (v, alpha, z)

    if state.orthogonal and state.system.size:
        for p in _distinct_points(state.system.points, cfg.merge_radius):
            try:
                alpha = escalate_order(state.system.points, p, cfg.merge_radius, cfg.alpha_cap, state.system.alphas)
            except DictionaryExhausted:
                continue
            v = float(correlation_objective(state, alpha, p[None, :], cfg.degeneracy)[0])
            if best is None or v > best[0]:
                best = (v, alpha, p.copy())

    if best is None or best[0] < cfg.zero_tol:
        raise ResidualZero(f"all candidate correlations below {cfg.zero_tol:g}")
    v, alpha, z = best
    if state.orthogonal:
        # snap onto an earlier point when the optimizer lands inside the merge radius
        for p in state.system.points:
            if np.max(np.abs(p - z)) <= cfg.merge_radius:
                z = p.copy()
                alpha = escalate_order(state.system.points, z, cfg.merge_radius, cfg.alpha_cap, state.system.alphas)
                v = float(correlation_objective(state, alpha, z[None, :], cfg.degeneracy)[0])
                break
    return Selection(tuple(int(a) for a in alpha), np.asarray(z), v, lattice_best)
