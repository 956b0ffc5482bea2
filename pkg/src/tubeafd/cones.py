"""Szego kernels of regular cones in the plane and boundary-vanishing diagnostics.

A cone is described through its dual: when the dual cone is a union of
simplicial pieces ``V_k * (closed first octant)`` (generators as columns),

    K(w, conj(z)) = sum_k |det V_k| prod_j -1 / (2 pi i (V_k^T u)_j),   u = w - conj(z),

which is the first-octant kernel after the change of variables ``t = V_k s``.
The cone ``{|y_1| < kappa y_2}`` has the single piece with generators
``(1, kappa)`` and ``(-1, kappa)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate_1d, integrate_nd


@dataclass(frozen=True)
class PolygonalCone:
    """Open cone whose closed dual is spanned by ``generators`` (ordered by angle)."""

    generators: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        g = np.asarray(self.generators, dtype=float)
        if g.ndim != 2 or g.shape[0] < g.shape[1]:
            raise ValueError("need at least n generators of dimension n")
        for piece in self.pieces():
            if abs(np.linalg.det(piece)) < 1e-14:
                raise ValueError("consecutive dual generators must be linearly independent")

    @classmethod
    def from_dual_generators(cls, gens: Sequence[Sequence[float]]) -> "PolygonalCone":
        g = np.asarray(gens, dtype=float)
        if g.shape[1] == 2:
            ang = np.arctan2(g[:, 1], g[:, 0])
            # order counter-clockwise starting after the widest gap
            order = np.argsort(ang)
            ang = ang[order]
            gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
            start = (int(np.argmax(gaps)) + 1) % len(ang)
            if gaps.max() <= np.pi:
                raise ValueError("dual generators do not span a pointed cone")
            order = np.roll(order, -start)
            g = g[order]
        return cls(tuple(tuple(float(v) for v in row) for row in g))

    @classmethod
    def first_octant(cls, dim: int = 2) -> "PolygonalCone":
        return cls(tuple(tuple(float(v) for v in row) for row in np.eye(dim)))

    @property
    def dim(self) -> int:
        return len(self.generators[0])

    def pieces(self) -> list[np.ndarray]:
        """Generator matrices ``V_k`` (columns) of a fan split of the dual cone."""
        g = np.asarray(self.generators, dtype=float)
        n = g.shape[1]
        if len(g) == n:
            return [g.T.copy()]
        if n != 2:
            raise ValueError("fan splitting is implemented for planar cones only")
        return [np.column_stack([g[k], g[k + 1]]) for k in range(len(g) - 1)]

    def hull(self) -> np.ndarray:
        """Single simplicial piece spanned by the extreme generators.

        In the plane the fan pieces tile this one piece, so summing the fan
        and using the hull give the same kernel; the hull avoids the
        cancellation between fan terms far from the origin.
        """
        g = np.asarray(self.generators, dtype=float)
        if g.shape[1] != 2:
            raise ValueError("hull piece only exists for planar cones")
        return np.column_stack([g[0], g[-1]])

    def split(self) -> list[np.ndarray]:
        """Maps ``Q_k = V_k^{-T}`` sending the first octant onto the simplicial sub-cones."""
        return [np.linalg.inv(v).T for v in self.pieces()]

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(np.asarray(self.generators) @ y > 0))

    def dual_contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        for v in self.pieces():
            s = np.linalg.solve(v, t)
            if np.all(s >= -1e-12):
                return True
        return False


@dataclass(frozen=True)
class Cone2D:
    """``{y : |y_1| < kappa y_2}`` with ``kappa = rise / run``.

    Keeping the slope as a ratio makes taking the dual an exact involution.
    """

    rise: float
    run: float = 1.0

    def __post_init__(self):
        for v in (self.rise, self.run):
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"kappa must be a positive finite number, got {self.rise}/{self.run}")

    @property
    def kappa(self) -> float:
        return self.rise / self.run

    @property
    def dim(self) -> int:
        return 2

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(abs(y[0]) < self.kappa * y[1])

    def dual_generators(self) -> np.ndarray:
        return np.array([[1.0, -1.0], [self.kappa, self.kappa]])

    def as_polygonal(self) -> PolygonalCone:
        return PolygonalCone.from_dual_generators(self.dual_generators().T)

    def pieces(self) -> list[np.ndarray]:
        return [self.dual_generators()]

    def split(self) -> list[np.ndarray]:
        return [np.linalg.inv(self.dual_generators()).T]


def dual_cone(c: Cone2D) -> Cone2D:
    """The dual of ``{|y_1| < kappa y_2}`` is ``{|t_1| < t_2 / kappa}``."""
    return Cone2D(c.run, c.rise)


Cone = Cone2D | PolygonalCone


def _check_inside(cone: Cone, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (cone.dim,):
        raise ValueError(f"expected a point of dimension {cone.dim}")
    if not cone.contains(y):
        raise ValueError(f"y={tuple(y)} is not strictly inside the cone")
    return y


def _eval_pieces(cone: "PolygonalCone", fan: bool) -> list[np.ndarray]:
    if not fan and cone.dim == 2:
        return [cone.hull()]
    return cone.pieces()


def cone_szego_diag(cone: Cone, y, fan: bool = False) -> float:
    """``K(iy, conj(iy)) = int_{dual cone} exp(-4 pi y.t) dt`` in closed form.

    ``fan=True`` sums over the fan split instead of the planar hull piece.
    """
    y = _check_inside(cone, y)
    if isinstance(cone, Cone2D):
        k = cone.kappa
        return k / (8 * np.pi**2 * (k**2 * y[1] ** 2 - y[0] ** 2))
    total = 0.0
    for v in _eval_pieces(cone, fan):
        total += abs(np.linalg.det(v)) * float(np.prod(1.0 / (4 * np.pi * (v.T @ y))))
    return total


def cone_szego(cone: Cone, w, z, fan: bool = False) -> complex:
    """``K(w, conj(z))`` for ``Im z`` inside the cone and ``Im w`` in its closure."""
    w = np.asarray(w, dtype=complex)
    z = np.asarray(z, dtype=complex)
    _check_inside(cone, z.imag)
    u = w - np.conj(z)
    if isinstance(cone, Cone2D):
        k = cone.kappa
        return complex(-k / (2 * np.pi**2 * (k**2 * u[1] ** 2 - u[0] ** 2)))
    total = 0j
    for v in _eval_pieces(cone, fan):
        total += abs(np.linalg.det(v)) * np.prod(-1.0 / (2j * np.pi * (v.T @ u)))
    return complex(total)


def cone_szego_quadrature(cone: Cone, y, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Oracle: the dual-cone integral computed directly, piece by piece in polar-free form.

    The dual cone of a planar cone is written as ``{t_2 >= 0, a t_2 <= t_1 <= b t_2}``
    when it lies in the upper half-plane, and integrated iteratively.
    """
    y = _check_inside(cone, y)
    gens = cone.dual_generators().T if isinstance(cone, Cone2D) else np.asarray(cone.generators)
    if cone.dim != 2 or np.any(gens[:, 1] <= 0):
        raise ValueError("quadrature oracle expects a planar dual cone in the open upper half-plane")
    slopes = gens[:, 0] / gens[:, 1]
    a, b = float(slopes.min()), float(slopes.max())
    return integrate_nd(
        lambda t2, t1: math.exp(-4 * math.pi * (y[0] * t1 + y[1] * t2)),
        [(0.0, math.inf), lambda t2: (a * t2, b * t2)],
        spec,
    ).real


def poisson_cone(cone: Cone, z, xi) -> float:
    """``P(xi) = |K(xi, conj(z))|^2 / K(z, conj(z))`` for a real boundary point ``xi``."""
    z = np.asarray(z, dtype=complex)
    return abs(cone_szego(cone, np.asarray(xi, dtype=complex), z)) ** 2 / cone_szego_diag(cone, z.imag)


@dataclass(frozen=True)
class PoissonBound:
    lhs: float
    rhs: float
    ok: bool
    constant: str

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def poisson_lp_bound_check(
    cone: Cone,
    z,
    p: float,
    constant: str = "printed",
    spec: QuadratureSpec = QuadratureSpec(rel_tol=1e-12, abs_tol=1e-14),
) -> PoissonBound:
    """Compare ``||P_y(x - .)||_p`` with a multiple of ``K(z, conj(z))^{1 - 1/p}``.

    ``constant="printed"`` uses ``2^{-n/p}``; ``"sharp"`` uses ``4^{n(1 - 1/p)}``,
    which follows from ``sup P = P(0) = 4^n K`` (degree ``-n`` homogeneity)
    and ``||P||_1 = 1``.
    """
    z = np.asarray(z, dtype=complex)
    y = _check_inside(cone, z.imag)
    n = cone.dim
    kd = cone_szego_diag(cone, y)
    if constant == "printed":
        c = 2.0 ** (-n / p) if math.isfinite(p) else 1.0
    elif constant == "sharp":
        c = 4.0 ** (n * (1 - 1 / p)) if math.isfinite(p) else 4.0**n
    else:
        raise ValueError(f"unknown constant {constant!r}")
    rhs = c * kd ** (1 - 1 / p) if math.isfinite(p) else c * kd
    if not p > 1:
        raise ValueError("p must lie in (1, inf]")
    if not math.isfinite(p):
        lhs = poisson_cone(cone, 1j * y, np.zeros(n))
    else:
        # in s = V^T (xi - x) the kernel of a single simplicial piece factorizes:
        # |K|^2 = det^2 prod 1 / (4 pi^2 (s_j^2 + w_j^2)) with w = V^T y
        if isinstance(cone, Cone2D):
            v = cone.dual_generators()
        else:
            pieces = _eval_pieces(cone, False)
            if len(pieces) != 1:
                raise ValueError("L^p check needs a simplicial dual cone")
            v = pieces[0]
        det = abs(float(np.linalg.det(v)))
        w = v.T @ y
        # int (1 + t^2)^{-p} dt over the line
        line = integrate_1d(lambda t: (1.0 + t * t) ** (-p), -math.inf, math.inf, spec, real=True).real
        log_int = (
            -math.log(det)
            + p * (2 * math.log(det) - math.log(kd))
            + float(np.sum((1 - 2 * p) * np.log(w)))
            - n * p * math.log(4 * math.pi**2)
            + n * math.log(line)
        )
        lhs = math.exp(log_int / p)
    return PoissonBound(float(lhs), float(rhs), bool(lhs <= rhs * (1 + 1e-6)), constant)


# -- boundary-vanishing diagnostics ---------------------------------------------


@dataclass(frozen=True)
class BvcPath:
    """Points of the tube approaching the cone boundary or infinity.

    ``kind`` is ``"boundary"`` (``y = (kappa (1 - 2^-k), 1)``), ``"scale"``
    (``y = 2^k (0, 1)``) or ``"xinf"`` (``x = (2^k, 0)``, ``y = (0, 1)``).
    """

    kind: str
    kappa: float = 1.0
    steps: int = 12
    p: float = 2.0
    base_x: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.kind not in ("boundary", "scale", "xinf"):
            raise ValueError(f"unknown path kind {self.kind!r}")
        if not 1 < self.p < math.inf:
            raise ValueError("exponent must lie in (1, inf)")
        if self.steps < 1:
            raise ValueError("path needs at least one step")

    def points(self) -> Iterator[tuple[int, float, np.ndarray]]:
        x0 = np.asarray(self.base_x, dtype=float)
        for k in range(self.steps + 1):
            if self.kind == "boundary":
                s = 1.0 - 2.0**-k
                y = np.array([self.kappa * s, 1.0])
                x = x0
            elif self.kind == "scale":
                s = 2.0**k
                y = np.array([0.0, s])
                x = x0
            else:
                s = 2.0**k
                y = np.array([0.0, 1.0])
                x = x0 + np.array([s, 0.0])
            yield k, s, x + 1j * y


@dataclass(frozen=True)
class BvcRow:
    step: int
    parameter: float
    ratio: float
    k_diag: float


def bvc_diagnostic(F: Callable[[np.ndarray], complex], path: BvcPath, cone: Cone | None = None) -> list[BvcRow]:
    """``|F(z)| / K(z, conj(z))^{1/p}`` along the path."""
    cone = cone or Cone2D(path.kappa)
    rows = []
    for k, s, z in path.points():
        kd = cone_szego_diag(cone, z.imag)
        rows.append(BvcRow(k, s, abs(F(z)) / kd ** (1 / path.p), kd))
    return rows


def kernel_combination(cone: Cone, centers: Sequence, coeffs: Sequence[complex]) -> Callable[[np.ndarray], complex]:
    """``F(z) = sum_j c_j K(z, conj(w_j))``, an element of every H^p of the tube, p > 1."""
    centers = [np.asarray(c, dtype=complex) for c in centers]
    for c in centers:
        _check_inside(cone, c.imag)

    def F(z):
        return sum(cj * cone_szego(cone, z, w) for cj, w in zip(coeffs, centers))

    return F


def default_test_function(cone: Cone) -> Callable[[np.ndarray], complex]:
    """Fixed two-term kernel combination used by the command-line diagnostic."""
    return kernel_combination(cone, [np.array([0.5 + 0.5j, -0.25 + 1.0j]), np.array([-1.0 + 0.0j, 0.0 + 2.0j])], [1.0, 0.5j])


def write_bvc_csv(path, rows: Sequence[BvcRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["step", "parameter", "ratio", "K_diag"])
        for r in rows:
            w.writerow([r.step, f"{r.parameter:.17g}", f"{r.ratio:.17g}", f"{r.k_diag:.17g}"])


def first_octant_path(kind: str, dim: int, steps: int = 12, base=None) -> list[np.ndarray]:
    """Points of the first-octant tube for the correlation decay checks.

    ``"boundary"``: ``y = 2^-k`` on every axis; ``"scale"``: ``y = 2^k``;
    ``"xinf"``: ``x = 2^k`` with ``y = 1``.
    """
    base = np.zeros(dim) if base is None else np.asarray(base, dtype=float)
    out = []
    for k in range(steps + 1):
        if kind == "boundary":
            out.append(base + 1j * np.full(dim, 2.0**-k))
        elif kind == "scale":
            out.append(base + 1j * np.full(dim, 2.0**k))
        elif kind == "xinf":
            out.append(base + np.full(dim, 2.0**k) + 1j * np.ones(dim))
        else:
            raise ValueError(f"unknown path kind {kind!r}")
    return out
