"""Closed forms for the Cauchy-Szego kernel of the tube over the first octant.

Points are complex arrays whose last axis is the dimension ``n``; every
function broadcasts over the leading axes. A dictionary element is the pair
``(alpha, z)`` standing for

    phi_{alpha,z}(w) = d^alpha/dx^alpha K(w, conj(z))
                     = (-1/(2 pi i))^n prod_j alpha_j! / (w_j - conj(z_j))^(alpha_j + 1)

where the derivative is taken in the real part of ``z``. Normalized elements
``psi = phi / ||phi||`` are computed in log space so high orders and tiny
imaginary parts neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TubePoint:
    """A point ``x + iy`` of the tube, ``y`` strictly inside the first octant."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same dimension")
        if any(not v > 0 for v in self.y):
            raise ValueError(f"imaginary part {self.y} is not inside the first octant")

    @classmethod
    def from_complex(cls, z) -> "TubePoint":
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        return cls(tuple(float(v) for v in z.real), tuple(float(v) for v in z.imag))

    @property
    def dim(self) -> int:
        return len(self.x)

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.x) + 1j * np.asarray(self.y)


@dataclass(frozen=True)
class MultiIndex:
    alpha: tuple[int, ...]

    def __post_init__(self):
        if any(a < 0 for a in self.alpha):
            raise ValueError(f"multi-index entries must be non-negative, got {self.alpha}")

    @property
    def order(self) -> int:
        return sum(self.alpha)


@dataclass(frozen=True)
class DictElement:
    """The dictionary element ``phi_{alpha,z}``."""

    alpha: tuple[int, ...]
    z: tuple[complex, ...]

    def __post_init__(self):
        MultiIndex(self.alpha)
        if len(self.alpha) != len(self.z):
            raise ValueError("multi-index and point dimensions differ")
        if any(not complex(v).imag > 0 for v in self.z):
            raise ValueError(f"{self.z} is not an interior point of the tube")

    @property
    def dim(self) -> int:
        return len(self.alpha)


def _as_points(z, name: str, interior: bool) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if interior and not np.all(z.imag > 0):
        raise ValueError(f"{name} must lie strictly inside the tube")
    if not interior and np.any(z.imag < 0):
        raise ValueError(f"{name} must lie in the closed tube")
    return z


def _check_dims(*arrays, alpha=None) -> int:
    dims = {a.shape[-1] for a in arrays}
    if alpha is not None:
        dims.add(np.shape(alpha)[-1])
    if len(dims) != 1:
        raise ValueError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def szego(w, z) -> np.ndarray:
    """``K(w, conj(z)) = prod_k -1 / (2 pi i (w_k - conj(z_k)))``."""
    w = _as_points(w, "w", interior=False)
    z = _as_points(z, "z", interior=True)
    _check_dims(w, z)
    return np.prod(-1.0 / (2j * np.pi * (w - np.conj(z))), axis=-1)


def poisson(x, y) -> np.ndarray:
    """Poisson-Szego kernel ``prod_k y_k / (pi (x_k^2 + y_k^2))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise ValueError("Poisson kernel needs y strictly positive")
    _check_dims(x, y)
    return np.prod(y / (np.pi * (x**2 + y**2)), axis=-1)


def phi_eval(alpha: Sequence[int], z, w) -> np.ndarray:
    """Value of ``phi_{alpha,z}`` at ``w`` (interior or real boundary point)."""
    alpha = np.asarray(alpha, dtype=int)
    z = _as_points(z, "z", interior=True)
    w = _as_points(w, "w", interior=False)
    _check_dims(w, z, alpha=alpha)
    fact = np.exp(gammaln(alpha + 1.0))
    return np.prod(-fact / (2j * np.pi * (w - np.conj(z)) ** (alpha + 1)), axis=-1)


def phi_lp_norm(alpha: Sequence[int], y, p: float) -> float:
    """``int_{R^n} |prod_j (xi_j - conj(z_j))^-(alpha_j+1)|^p d xi``.

    This is the p-th power of the L^p norm of the bare rational factor; the
    constants ``(2 pi)^-n prod alpha_j!`` of phi are not included.
    """
    alpha = np.asarray(alpha, dtype=float)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise ValueError("y must be strictly positive")
    s = p * (alpha + 1.0)
    if not (1 < p < math.inf) or np.any(s <= 1):
        raise ValueError(f"need 1 < p < inf and p*(alpha_j+1) > 1, got p={p}")
    logs = 0.5 * np.log(np.pi) + gammaln(0.5 * s - 0.5) - gammaln(0.5 * s) - (s - 1.0) * np.log(y)
    return float(np.exp(np.sum(logs)))


def log_phi_norm_sq(alpha, y) -> np.ndarray:
    """``log ||phi_{alpha,z}||^2 = sum_j log((2 alpha_j)! / (2 pi (2 y_j)^(2 alpha_j + 1)))``."""
    alpha = np.asarray(alpha, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(gammaln(2 * alpha + 1) - np.log(TWO_PI) - (2 * alpha + 1) * np.log(2 * y), axis=-1)


def phi_norm(alpha: Sequence[int], y) -> np.ndarray:
    """H^2 norm of ``phi_{alpha,z}``; depends on ``y = Im z`` only."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y <= 0):
        raise ValueError("y must be strictly positive")
    _check_dims(y, alpha=alpha)
    return np.exp(0.5 * log_phi_norm_sq(alpha, y))


def phi_norm_sq_printed(alpha: Sequence[int], y) -> np.ndarray:
    """Uncorrected squared norm ``prod (2 alpha_j)! / (2 y_j)^(2 alpha_j + 1)``.

    It lacks the factor ``(2 pi)^-n`` and is kept only for comparison.
    """
    alpha = np.asarray(alpha, dtype=float)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    return np.exp(np.sum(gammaln(2 * alpha + 1) - (2 * alpha + 1) * np.log(2 * y), axis=-1))


def _axis_ip(a, za, b, zb) -> np.ndarray:
    # <phi_{a,za}, phi_{b,zb}> per axis: (-1/2pi i)(-1)^b (a+b)! / (zb - conj(za))^(a+b+1)
    s = a + b
    return (-1.0 / (2j * np.pi)) * (-1.0) ** b * np.exp(gammaln(s + 1.0)) / (zb - np.conj(za)) ** (s + 1)


def ip_phi_phi(alpha1, z1, alpha2, z2) -> np.ndarray:
    """``<phi_{alpha1,z1}, phi_{alpha2,z2}>`` in H^2, linear in the first slot."""
    a = np.asarray(alpha1, dtype=int)
    b = np.asarray(alpha2, dtype=int)
    z1 = _as_points(z1, "z1", interior=True)
    z2 = _as_points(z2, "z2", interior=True)
    _check_dims(z1, z2, alpha=a)
    _check_dims(z1, alpha=b)
    return np.prod(_axis_ip(a, z1, b, z2), axis=-1)


def axis_ip_psi(a, za, b, zb) -> np.ndarray:
    """Per-axis factor of ``<psi_{a,za}, psi_{b,zb}>`` (normalized elements).

    ``a``/``b`` are integers or integer arrays, ``za``/``zb`` complex arrays
    with interior imaginary parts; everything broadcasts.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    za = np.asarray(za, dtype=complex)
    zb = np.asarray(zb, dtype=complex)
    s = a + b
    logmag = (
        gammaln(s + 1.0)
        - 0.5 * gammaln(2 * a + 1.0)
        - 0.5 * gammaln(2 * b + 1.0)
        + (a + 0.5) * np.log(2 * za.imag)
        + (b + 0.5) * np.log(2 * zb.imag)
        - (s + 1.0) * np.log(zb - np.conj(za))
    )
    return 1j * (-1.0) ** b * np.exp(logmag)


def ip_psi_psi(alpha1, z1, alpha2, z2) -> np.ndarray:
    """``<psi_{alpha1,z1}, psi_{alpha2,z2}>`` for normalized elements."""
    a = np.asarray(alpha1, dtype=int)
    b = np.asarray(alpha2, dtype=int)
    z1 = _as_points(z1, "z1", interior=True)
    z2 = _as_points(z2, "z2", interior=True)
    _check_dims(z1, z2, alpha=a)
    _check_dims(z1, alpha=b)
    return np.prod(axis_ip_psi(a, z1, b, z2), axis=-1)


def psi_eval(alpha: Sequence[int], z, w) -> np.ndarray:
    """Value of the normalized element ``psi_{alpha,z}`` at ``w``."""
    alpha = np.asarray(alpha, dtype=float)
    z = _as_points(z, "z", interior=True)
    w = _as_points(w, "w", interior=False)
    _check_dims(w, z, alpha=alpha)
    logs = (
        gammaln(alpha + 1)
        - 0.5 * gammaln(2 * alpha + 1)
        + 0.5 * np.log(TWO_PI)
        + (alpha + 0.5) * np.log(2 * z.imag)
        - (alpha + 1) * np.log(w - np.conj(z))
    )
    return np.prod((-1.0 / (2j * np.pi)) * np.exp(logs), axis=-1)


def ip_kernel_phi_normalized(w, alpha: Sequence[int], z) -> np.ndarray:
    """``|<K(., conj(w)), phi_{alpha,z}>| / ||phi_{alpha,z}||``.

    Equals ``(2 pi)^(-n/2) prod_j (2 y_j)^(alpha_j + 1/2) alpha_j! /
    (|z_j - conj(w_j)|^(alpha_j + 1) sqrt((2 alpha_j)!))``.
    """
    alpha = np.asarray(alpha, dtype=float)
    w = _as_points(w, "w", interior=True)
    z = _as_points(z, "z", interior=True)
    _check_dims(w, z, alpha=alpha)
    logs = (
        -0.5 * np.log(TWO_PI)
        + (alpha + 0.5) * np.log(2 * z.imag)
        + gammaln(alpha + 1)
        - (alpha + 1) * np.log(np.abs(z - np.conj(w)))
        - 0.5 * gammaln(2 * alpha + 1)
    )
    return np.exp(np.sum(logs, axis=-1))


def mp_order_envelope(alpha: Sequence[int], eta) -> float:
    """Supremum over ``z`` of the normalized kernel correlation at fixed order.

    For a kernel ``K(., conj(w))`` with ``Im w = eta`` the per-axis maximum is
    attained at ``y_j = (2 alpha_j + 1) eta_j`` with ``x_j = Re w_j``; the
    product decays like ``prod alpha_j^(-1/4)``.
    """
    alpha = np.asarray(alpha, dtype=float)
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    y = (2 * alpha + 1) * eta
    logs = (
        -0.5 * np.log(TWO_PI)
        + (alpha + 0.5) * np.log(2 * y)
        + gammaln(alpha + 1)
        - (alpha + 1) * np.log(y + eta)
        - 0.5 * gammaln(2 * alpha + 1)
    )
    return float(np.exp(np.sum(logs)))


def graded_multi_indices(dim: int, order: int) -> list[tuple[int, ...]]:
    """All multi-indices of the given order, first component descending."""
    if dim == 1:
        return [(order,)]
    out = []
    for first in range(order, -1, -1):
        out.extend((first, *rest) for rest in graded_multi_indices(dim - 1, order - first))
    return out


def multi_index_at(dim: int, position: int) -> tuple[int, ...]:
    """The ``position``-th multi-index (1-based) in graded order."""
    if position < 1:
        raise ValueError("position is 1-based")
    order = 0
    seen = 0
    while True:
        block = math.comb(order + dim - 1, dim - 1)
        if seen + block >= position:
            return graded_multi_indices(dim, order)[position - seen - 1]
        seen += block
        order += 1
