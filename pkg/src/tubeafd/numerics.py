"""Numeric substrate: grids, the quadrature oracle and the DFT contract.

The DFT pair is normalized so that it approximates the continuous pair

    g_hat(t) = int g(x) exp(-2 pi i x.t) dx,    g(x) = int g_hat(t) exp(2 pi i x.t) dt

with the spacing factors included, i.e. ``dft_forward`` multiplies the raw FFT
by ``h**n`` and the phase of the grid origin, and ``dft_inverse`` is its exact
inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, estimate: complex, error: float):
        super().__init__(f"{message} (estimate={estimate!r}, error bound={error:.3e})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid ``lower + k * spacing``, ``k = 0..count-1`` per axis."""

    counts: tuple[int, ...]
    lower: tuple[float, ...]
    spacing: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.counts) == len(self.lower) == len(self.spacing)):
            raise ValueError("grid axes disagree in length")
        if self.dim not in (1, 2):
            raise ValueError(f"grid dimension must be 1 or 2, got {self.dim}")
        for c, h in zip(self.counts, self.spacing):
            if c < 8:
                raise ValueError(f"grid needs at least 8 points per axis, got {c}")
            if not h > 0:
                raise ValueError(f"grid spacing must be positive, got {h}")

    @classmethod
    def symmetric(cls, half_width: float, count: int, dim: int = 1) -> "Grid":
        """Grid on ``[-half_width, half_width)`` with ``count`` points per axis."""
        h = 2.0 * half_width / count
        return cls((count,) * dim, (-half_width,) * dim, (h,) * dim)

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(c * h for c, h in zip(self.counts, self.spacing))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.counts)

    def axes(self) -> list[np.ndarray]:
        return [lo + h * np.arange(c) for c, lo, h in zip(self.counts, self.lower, self.spacing)]

    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def frequency_axes(self) -> list[np.ndarray]:
        """Dual-grid frequencies in numpy FFT order."""
        return [np.fft.fftfreq(c, d=h) for c, h in zip(self.counts, self.spacing)]

    def frequency_spacing(self) -> tuple[float, ...]:
        return tuple(1.0 / e for e in self.extent)

    def is_power_of_two(self) -> bool:
        return all(c & (c - 1) == 0 for c in self.counts)


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    tail_radius: float = 1.0
    max_depth: int = 400

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if not self.tail_radius > 0:
            raise ValueError("tail radius must be positive")


DEFAULT_QUADRATURE = QuadratureSpec()


def _quad_real(f, a, b, spec: QuadratureSpec) -> tuple[float, float]:
    val, err, info, *rest = integrate.quad(
        f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_depth, full_output=1
    )
    # a fourth return value is QUADPACK's warning message; a roundoff warning
    # is tolerated when the error bound is still inside tolerance
    if rest and err > max(spec.abs_tol, spec.rel_tol * abs(val)):
        message = str(rest[0]).split(".")[0]
        raise QuadratureError(f"tolerance not reached on [{a}, {b}]: {message}", val, err)
    return val, err


def _panels(a: float, b: float, breakpoints: Sequence[float], radius: float) -> list[tuple[float, float]]:
    """Split ``[a, b]`` at the breakpoints, cutting infinite ends at +-radius around them."""
    pts = sorted(p for p in set(breakpoints) if a < p < b)
    if not pts:
        pts = [min(max(0.0, a), b)] if math.isinf(a) or math.isinf(b) else []
    inner = []
    for p in pts:
        inner.extend([p - radius, p, p + radius])
    inner = sorted(p for p in set(inner) if a < p < b)
    edges = [a, *inner, b]
    return [(lo, hi) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def integrate_1d(
    f: Callable[[float], complex],
    a: float = -math.inf,
    b: float = math.inf,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints: Sequence[float] = (),
    real: bool = False,
) -> complex:
    """Adaptive quadrature of a complex integrand over a (possibly infinite) interval.

    Infinite tails are handled by quadpack's variable substitution; the finite
    part is cut at the breakpoints and at ``spec.tail_radius`` around them so
    that narrow peaks away from the origin are not missed. ``real=True`` skips
    the imaginary part for integrands known to be real.
    """
    total_re = total_im = 0.0
    for lo, hi in _panels(a, b, breakpoints, spec.tail_radius):
        if real:
            re, _ = _quad_real(lambda t: float(np.real(f(t))), lo, hi, spec)
        else:
            re, _ = _quad_real(lambda t: complex(f(t)).real, lo, hi, spec)
            im, _ = _quad_real(lambda t: complex(f(t)).imag, lo, hi, spec)
            total_im += im
        total_re += re
    return complex(total_re, total_im)


Bound = tuple[float, float] | Callable[..., tuple[float, float]]


def integrate_nd(
    f: Callable[..., complex],
    bounds: Sequence[Bound],
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    breakpoints: Sequence[Sequence[float] | Callable[..., Sequence[float]]] | None = None,
    real: bool = False,
) -> complex:
    """Iterated adaptive quadrature in one or two dimensions.

    ``bounds[0]`` is the outer axis. ``bounds[1]`` (and ``breakpoints[1]``)
    may be callables of the outer coordinate, which is how cone-shaped domains
    are described. ``f`` is called as ``f(t0)`` or ``f(t0, t1)``.
    """
    dim = len(bounds)
    if dim not in (1, 2):
        raise ValueError("integrate_nd supports dimension 1 or 2")
    if breakpoints is None:
        breakpoints = [()] * dim
    if dim == 1:
        return integrate_1d(f, *bounds[0], spec=spec, breakpoints=breakpoints[0], real=real)

    cache: dict[float, complex] = {}

    def inner(t0: float) -> complex:
        # the outer real and imaginary passes visit the same nodes
        if t0 not in cache:
            b1 = bounds[1](t0) if callable(bounds[1]) else bounds[1]
            bp1 = breakpoints[1](t0) if callable(breakpoints[1]) else breakpoints[1]
            cache[t0] = integrate_1d(lambda t1: f(t0, t1), *b1, spec=spec, breakpoints=bp1, real=real)
        return cache[t0]

    return integrate_1d(inner, *bounds[0], spec=spec, breakpoints=breakpoints[0], real=real)


def _check_transform_grid(values: np.ndarray, grid: Grid) -> None:
    if values.shape != grid.shape:
        raise ValueError(f"array shape {values.shape} does not match grid {grid.shape}")
    if not grid.is_power_of_two():
        raise ValueError(f"transform grids must have power-of-two counts, got {grid.counts}")


def dft_forward(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Samples on ``grid`` to spectrum samples on ``grid.frequency_axes()`` (FFT order)."""
    values = np.asarray(values, dtype=complex)
    _check_transform_grid(values, grid)
    spec = np.fft.fftn(values)
    for ax, (t, lo, h) in enumerate(zip(grid.frequency_axes(), grid.lower, grid.spacing)):
        shape = [1] * grid.dim
        shape[ax] = -1
        spec = spec * (h * np.exp(-2j * np.pi * lo * t)).reshape(shape)
    return spec


def dft_inverse(spectrum: np.ndarray, grid: Grid) -> np.ndarray:
    """Exact inverse of :func:`dft_forward`."""
    spectrum = np.asarray(spectrum, dtype=complex)
    _check_transform_grid(spectrum, grid)
    work = spectrum
    for ax, (t, lo, h) in enumerate(zip(grid.frequency_axes(), grid.lower, grid.spacing)):
        shape = [1] * grid.dim
        shape[ax] = -1
        work = work * (np.exp(2j * np.pi * lo * t) / h).reshape(shape)
    return np.fft.ifftn(work)


@lru_cache(maxsize=None)
def _gregory_corrections(order: int) -> tuple[float, ...]:
    # corrections c_k at one end such that trapezoid + c reproduces the
    # Euler-Maclaurin endpoint terms for polynomials of degree < order
    with mpmath.workdps(60):
        rows = [[mpmath.mpf(k) ** j if (k or j) else mpmath.mpf(1) for k in range(order)] for j in range(order)]
        rhs = [mpmath.bernoulli(j + 1) / (j + 1) if j % 2 == 1 else mpmath.mpf(0) for j in range(order)]
        sol = mpmath.lu_solve(mpmath.matrix(rows), mpmath.matrix(rhs))
        return tuple(float(sol[k]) for k in range(order))


def endpoint_weights(count: int, spacing: float, order: int = 8, ends: str = "both") -> np.ndarray:
    """Trapezoid weights with Gregory endpoint corrections of the given order.

    ``ends`` is ``"both"``, ``"lo"`` or ``"hi"``; an uncorrected end keeps the
    plain trapezoid half weight.
    """
    if count < 2 * order:
        raise ValueError(f"need at least {2 * order} nodes for order-{order} corrections")
    w = np.ones(count)
    w[0] = w[-1] = 0.5
    c = np.array(_gregory_corrections(order)) if order > 0 else np.zeros(0)
    if ends in ("both", "lo"):
        w[: len(c)] += c
    if ends in ("both", "hi"):
        w[count - len(c):] += c[::-1]
    return w * spacing
