"""Selected dictionary elements and their pre-orthogonalized family.

Everything here works with normalized elements ``phi~_j = phi_j / ||phi_j||``
in first-octant coordinates. The orthonormal family is stored through a
lower-triangular matrix ``C`` with ``B_k = sum_j C[k, j] phi~_j``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..kernels import axis_ip_psi, log_phi_norm_sq


class DegenerateElement(ValueError):
    """The candidate lies (numerically) in the span of the selected elements."""

    def __init__(self, alpha, z, remainder: float):
        super().__init__(
            f"element alpha={tuple(int(a) for a in alpha)} at z={[complex(v) for v in np.ravel(z)]} is degenerate "
            f"(1 - sum |<psi, B_k>|^2 = {remainder:.3e}); escalate the derivative order"
        )
        self.alpha = tuple(int(a) for a in alpha)
        self.z = np.asarray(z)
        self.remainder = remainder


def overlap_axes(alphas: np.ndarray, points: np.ndarray, alpha, axis_points) -> list[np.ndarray]:
    """Per-axis factors of ``<phi~_j, psi_{alpha, z}>`` for candidate coordinates.

    Returns one ``(m, p_axis)`` matrix per axis; the overlap for a candidate is
    the product of one column from each.
    """
    out = []
    for ax, pts in enumerate(axis_points):
        pts = np.asarray(pts, dtype=complex)
        out.append(axis_ip_psi(alphas[:, ax, None], points[:, ax, None], alpha[ax], pts[None, :]))
    return out


def overlap_points(alphas: np.ndarray, points: np.ndarray, alpha, z: np.ndarray) -> np.ndarray:
    """``<phi~_j, psi_{alpha, z_p}>`` as an ``(m, p)`` array for candidate rows ``z``."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    prod = np.ones((len(alphas), len(z)), dtype=complex)
    for ax in range(z.shape[1]):
        prod = prod * axis_ip_psi(alphas[:, ax, None], points[:, ax, None], alpha[ax], z[None, :, ax])
    return prod


def tensor_overlap(mats: list[np.ndarray]) -> np.ndarray:
    """Combine per-axis factors into ``(m, p_1[, p_2])``."""
    if len(mats) == 1:
        return mats[0]
    return mats[0][:, :, None] * mats[1][:, None, :]


def gram_normalized(alphas: np.ndarray, points: np.ndarray) -> np.ndarray:
    """``H[i, j] = <phi~_i, phi~_j>`` for the listed elements."""
    m = len(alphas)
    h = np.ones((m, m), dtype=complex)
    for ax in range(alphas.shape[1]):
        h = h * axis_ip_psi(alphas[:, ax, None], points[:, ax, None], alphas[None, :, ax], points[None, :, ax])
    return h


def log_norms(alphas: np.ndarray, points: np.ndarray) -> np.ndarray:
    return 0.5 * log_phi_norm_sq(alphas, points.imag)


@dataclass
class OrthoSystem:
    """Pre-orthogonal Gram-Schmidt over selected (alpha, z) pairs.

    Adding an element uses classical Gram-Schmidt with one re-orthogonalization
    pass, expressed through the closed-form Gram matrix of the normalized
    elements.
    """

    dim: int
    degeneracy: float = 1e-10
    alphas: np.ndarray = field(init=False)
    points: np.ndarray = field(init=False)
    gram: np.ndarray = field(init=False)
    coef: np.ndarray = field(init=False)

    def __post_init__(self):
        if not 0 < self.degeneracy < 1:
            raise ValueError("degeneracy threshold must lie in (0, 1)")
        self.alphas = np.zeros((0, self.dim), dtype=int)
        self.points = np.zeros((0, self.dim), dtype=complex)
        self.gram = np.zeros((0, 0), dtype=complex)
        self.coef = np.zeros((0, 0), dtype=complex)

    @property
    def size(self) -> int:
        return len(self.alphas)

    def projections(self, alpha, z) -> np.ndarray:
        """``q_k = <psi_{alpha,z}, B_k>`` for a single candidate."""
        if self.size == 0:
            return np.zeros(0, dtype=complex)
        p = np.conj(overlap_points(self.alphas, self.points, alpha, z)[:, 0])
        return np.conj(self.coef) @ p

    def remainder(self, alpha, z) -> float:
        """``1 - sum_k |<psi, B_k>|^2``, the squared norm of the orthogonal part."""
        q = self.projections(alpha, z)
        return float(1.0 - np.sum(np.abs(q) ** 2))

    def candidate(self, alpha, z) -> tuple[np.ndarray, float]:
        """Coefficients (over selected plus candidate) of the new ``B`` and ``||beta~||``.

        ``||beta~||`` is the norm of the orthogonal part of the normalized
        candidate; multiply by ``||phi_{alpha,z}||`` for the unnormalized one.
        """
        alpha = np.asarray(alpha, dtype=int)
        z = np.asarray(z, dtype=complex).reshape(self.dim)
        m = self.size
        q = self.projections(alpha, z)
        rem = 1.0 - float(np.sum(np.abs(q) ** 2))
        if rem < self.degeneracy:
            raise DegenerateElement(alpha, z, rem)
        alphas = np.vstack([self.alphas, alpha[None, :]])
        points = np.vstack([self.points, z[None, :]])
        g = np.empty((m + 1, m + 1), dtype=complex)
        g[:m, :m] = self.gram
        col = gram_normalized(alphas, points[:, :])[:, m]
        g[:, m] = col
        g[m, :] = np.conj(col)
        g[m, m] = 1.0
        cpad = np.zeros((m, m + 1), dtype=complex)
        cpad[:, :m] = self.coef
        r = np.zeros(m + 1, dtype=complex)
        r[m] = 1.0
        r = r - q @ cpad
        if m:
            q2 = r @ g @ cpad.conj().T
            r = r - q2 @ cpad
        nrm2 = float(np.real(r @ g @ r.conj()))
        if nrm2 < self.degeneracy:
            raise DegenerateElement(alpha, z, nrm2)
        return r / np.sqrt(nrm2), float(np.sqrt(nrm2))

    def add(self, alpha, z) -> np.ndarray:
        """Append an element; returns the coefficient row of the new ``B``."""
        row, _ = self.candidate(alpha, z)
        m = self.size
        alpha = np.asarray(alpha, dtype=int).reshape(1, self.dim)
        z = np.asarray(z, dtype=complex).reshape(1, self.dim)
        self.alphas = np.vstack([self.alphas, alpha])
        self.points = np.vstack([self.points, z])
        g = np.empty((m + 1, m + 1), dtype=complex)
        g[:m, :m] = self.gram
        col = gram_normalized(self.alphas, self.points)[:, m]
        g[:, m] = col
        g[m, :] = np.conj(col)
        g[m, m] = 1.0
        self.gram = g
        c = np.zeros((m + 1, m + 1), dtype=complex)
        c[:m, :m] = self.coef
        c[m] = row
        self.coef = c
        return row

    def orthonormality_error(self) -> float:
        """``max |<B_j, B_k> - delta_jk|`` from the closed-form Gram."""
        if self.size == 0:
            return 0.0
        gb = self.coef @ self.gram @ self.coef.conj().T
        return float(np.max(np.abs(gb - np.eye(self.size))))

    def copy(self) -> "OrthoSystem":
        other = OrthoSystem(self.dim, self.degeneracy)
        other.alphas = self.alphas.copy()
        other.points = self.points.copy()
        other.gram = self.gram.copy()
        other.coef = self.coef.copy()
        return other
