"""Functions the engine can approximate.

A target exposes ``dim``, ``norm()``, ``inner_psi(alpha, z)`` returning
``<F, psi_{alpha, z_p}>`` for rows of first-octant points, and
``inner_psi_lattice(alpha, axis_points)`` doing the same on a tensor lattice.
Sampled components are wrapped here; fitted models implement the protocol
themselves with closed forms, which makes synthetic kernel combinations
exact targets.
"""

from __future__ import annotations

import numpy as np

from ..hardy_signal import SpectralRep, norm_F
from ..kernels import log_phi_norm_sq


def _axis_inv_norm(alpha: int, z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * log_phi_norm_sq(np.full(z.shape + (1,), alpha), z.imag[..., None]))


class SpectralTarget:
    """First-octant view of a sampled component."""

    def __init__(self, rep: SpectralRep):
        self.rep = rep
        self.dim = rep.dim
        self.sigma = rep.sigma

    def norm(self) -> float:
        return norm_F(self.rep)

    def inner_psi(self, alpha, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        inv = np.exp(-0.5 * log_phi_norm_sq(np.broadcast_to(alpha, z.shape), z.imag))
        return self.rep.derivative_view(tuple(alpha), z) * inv

    def inner_psi_lattice(self, alpha, axis_points) -> np.ndarray:
        vals = self.rep.derivative_lattice(tuple(alpha), axis_points)
        scale = _axis_inv_norm(alpha[0], np.asarray(axis_points[0], dtype=complex))
        if self.dim == 1:
            return vals * scale
        return vals * np.multiply.outer(scale, _axis_inv_norm(alpha[1], np.asarray(axis_points[1], dtype=complex)))

    def value(self, z) -> np.ndarray:
        return self.rep.derivative_view((0,) * self.dim, z)


def as_target(F):
    if isinstance(F, SpectralRep):
        return SpectralTarget(F)
    for attr in ("norm", "inner_psi", "inner_psi_lattice"):
        if not hasattr(F, attr):
            raise TypeError(f"{type(F).__name__} does not implement the target protocol (missing {attr})")
    return F
