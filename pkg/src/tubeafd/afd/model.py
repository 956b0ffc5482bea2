"""Fitted rational approximants and their JSON model files."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..hardy_signal import OctantSignature, SpectralRep, combination_density
from ..kernels import psi_eval
from .system import gram_normalized, log_norms, overlap_axes, overlap_points, tensor_overlap

FORMAT_VERSION = 1


@dataclass
class Approximant:
    """``F*(z) = sum_k c_k B_k(z)`` with ``B_k = sum_j coef[k, j] phi~_j``.

    ``points`` are first-octant view coordinates; the component itself lives
    on ``sigma * z``. ``coef`` is expressed over normalized elements; the
    model file stores the equivalent matrix over unnormalized ones.
    """

    dim: int
    sigma: OctantSignature
    alphas: np.ndarray
    points: np.ndarray
    coeffs: np.ndarray
    coef: np.ndarray
    residual_history: list[float] = field(default_factory=list)
    kind: str = "afd"

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=int).reshape(-1, self.dim)
        self.points = np.asarray(self.points, dtype=complex).reshape(-1, self.dim)
        self.coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        m = len(self.alphas)
        self.coef = np.asarray(self.coef, dtype=complex).reshape(len(self.coeffs), m)
        if len(self.points) != m:
            raise ValueError("atoms and points disagree in number")
        if np.any(self.alphas < 0):
            raise ValueError("negative derivative order in model")
        if m and not np.all(self.points.imag > 0):
            raise ValueError("model atoms must lie inside the tube")
        if self.sigma.dim != self.dim:
            raise ValueError("signature dimension differs from model dimension")

    @classmethod
    def empty(cls, dim: int, sigma: OctantSignature | None = None, norm: float | None = None, kind="afd"):
        sigma = sigma or OctantSignature((1,) * dim)
        hist = [] if norm is None else [float(norm)]
        return cls(dim, sigma, np.zeros((0, dim)), np.zeros((0, dim)), np.zeros(0), np.zeros((0, 0)), hist, kind)

    @classmethod
    def from_combination(cls, alphas, points, coeffs, sigma: OctantSignature | None = None) -> "Approximant":
        """Model equal to ``sum_j c_j psi_{alpha_j, z_j}`` (normalized elements)."""
        alphas = np.asarray(alphas, dtype=int)
        dim = alphas.shape[1]
        coeffs = np.asarray(coeffs, dtype=complex)
        return cls(dim, sigma or OctantSignature((1,) * dim), alphas, points, coeffs, np.eye(len(coeffs)), [], "combination")

    @property
    def size(self) -> int:
        return len(self.alphas)

    @property
    def weights(self) -> np.ndarray:
        """Coefficients over the normalized elements: ``F* = sum_j a_j phi~_j``."""
        return self.coef.T @ self.coeffs

    @property
    def bmatrix(self) -> np.ndarray:
        """Coefficient matrix over unnormalized ``phi_j``."""
        if self.size == 0:
            return self.coef
        return self.coef * np.exp(-log_norms(self.alphas, self.points))[None, :]

    def natural_points(self) -> np.ndarray:
        return self.points * self.sigma.array()

    # -- target protocol -------------------------------------------------------

    def norm(self) -> float:
        if self.size == 0:
            return 0.0
        a = self.weights
        h = gram_normalized(self.alphas, self.points)
        return float(np.sqrt(max(np.real(a @ h @ a.conj()), 0.0)))

    def inner_psi(self, alpha, z) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        if self.size == 0:
            return np.zeros(len(z), dtype=complex)
        return self.weights @ overlap_points(self.alphas, self.points, alpha, z)

    def inner_psi_lattice(self, alpha, axis_points) -> np.ndarray:
        shape = tuple(len(p) for p in axis_points)
        if self.size == 0:
            return np.zeros(shape, dtype=complex)
        mats = overlap_axes(self.alphas, self.points, alpha, axis_points)
        if self.dim == 1:
            return self.weights @ mats[0]
        return (mats[0].T * self.weights) @ mats[1]

    # -- evaluation ------------------------------------------------------------

    def evaluate_view(self, w) -> np.ndarray:
        """Model value at first-octant view points (interior or real boundary)."""
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        out = np.zeros(len(w), dtype=complex)
        for a, z, c in zip(self.alphas, self.points, self.weights):
            out += c * psi_eval(a, z, w)
        return out

    def evaluate(self, w) -> np.ndarray:
        """Model value at natural-coordinate points ``w`` of the component's tube."""
        w = np.atleast_2d(np.asarray(w, dtype=complex))
        if w.shape[-1] != self.dim:
            raise ValueError("point dimension does not match the model")
        return self.evaluate_view(w * self.sigma.array())

    def density_on(self, rep: SpectralRep) -> np.ndarray:
        """Paley-Wiener density of the model sampled on ``rep``'s frequencies."""
        a = self.weights * np.exp(-log_norms(self.alphas, self.points))
        return combination_density(rep, self.alphas, self.points, a)

    def residual_norm(self, target) -> float:
        """Explicit ``||F - F*||`` against a closed-form target model."""
        if not isinstance(target, Approximant):
            raise TypeError("explicit residual norms need a closed-form target")
        # merge identical atoms first so that exact cancellations stay exact
        merged: dict = {}
        for al, pt, w in zip(
            np.vstack([target.alphas, self.alphas]),
            np.vstack([target.points, self.points]),
            np.concatenate([target.weights, -self.weights]),
        ):
            key = (tuple(int(v) for v in al), tuple(complex(v) for v in pt))
            merged[key] = merged.get(key, 0.0) + w
        if not merged:
            return 0.0
        alphas = np.array([k[0] for k in merged], dtype=int)
        points = np.array([k[1] for k in merged], dtype=complex)
        a = np.array(list(merged.values()), dtype=complex)
        h = gram_normalized(alphas, points)
        return float(np.sqrt(max(np.real(a @ h @ a.conj()), 0.0)))

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        nat = self.natural_points()
        atoms = [
            {
                "alpha": [int(v) for v in a],
                "z_re": [float(v) for v in z.real],
                "z_im": [float(v) for v in z.imag],
                "coeff_re": float(c.real),
                "coeff_im": float(c.imag),
            }
            for a, z, c in zip(self.alphas, nat, self.coeffs)
        ]
        bm = [[[float(v.real), float(v.imag)] for v in row] for row in self.bmatrix]
        return {
            "format_version": FORMAT_VERSION,
            "kind": self.kind,
            "dim": self.dim,
            "sigma": list(self.sigma.signs),
            "atoms": atoms,
            "bmatrix": bm,
            "residual_history": [float(r) for r in self.residual_history],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Approximant":
        try:
            dim = int(data["dim"])
            sigma = OctantSignature(tuple(int(s) for s in data["sigma"]))
            atoms = data["atoms"]
            alphas = np.array([a["alpha"] for a in atoms], dtype=int).reshape(-1, dim)
            nat = np.array([np.asarray(a["z_re"]) + 1j * np.asarray(a["z_im"]) for a in atoms]).reshape(-1, dim)
            coeffs = np.array([a["coeff_re"] + 1j * a["coeff_im"] for a in atoms], dtype=complex)
            bm = np.array([[complex(re, im) for re, im in row] for row in data["bmatrix"]], dtype=complex)
            bm = bm.reshape(len(coeffs), len(alphas))
            hist = [float(r) for r in data.get("residual_history", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed model file: {exc}") from exc
        points = nat * sigma.array()
        coef = bm * np.exp(log_norms(alphas, points))[None, :] if len(alphas) else bm
        return cls(dim, sigma, alphas, points, coeffs, coef, hist, data.get("kind", "afd"))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "Approximant":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"model file {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def conjugate_model(model: Approximant, declared_real: bool = True) -> Approximant:
    """Model of the mirrored component of a real signal.

    For real input ``F_{-sigma}(w) = conj(F_sigma(conj(w)))``; in view
    coordinates the atoms move to ``-conj(z)`` and the coefficient matrix picks
    up ``conj`` and a sign ``(-1)^{|alpha_j|}``.
    """
    if not declared_real:
        import warnings

        warnings.warn("conjugate model requested for input not declared real; result may not match", stacklevel=2)
    sign = (-1.0) ** model.alphas.sum(axis=1) if model.size else np.zeros(0)
    return Approximant(
        model.dim,
        model.sigma.mirrored(),
        model.alphas.copy(),
        -np.conj(model.points),
        np.conj(model.coeffs),
        np.conj(model.coef) * sign[None, :],
        list(model.residual_history),
        model.kind,
    )
