"""Octant Hardy decomposition of sampled boundary data.

A component for the sign pattern ``sigma`` is stored by its Paley-Wiener
density on the closed octant ``{sigma_j t_j >= 0}``. Frequencies are kept as
magnitudes ``tau = sigma * t >= 0`` per axis, so that the first-octant view

    G(z) = F_sigma(sigma * z) = sum_tau f(sigma tau) w(tau) exp(2 pi i z.tau)

is the same sum for every octant; the AFD engine only ever sees first-octant
views. Evaluation in natural coordinates maps ``z`` to ``sigma * z`` first.

Frequency masking instead of a principal-value Cauchy integral is used for
the projection. Samples that sit on a coordinate hyperplane ``t_j = 0`` (and
on the Nyquist line of an even grid, which is its own mirror image) are split
with weight 1/2 between the two adjacent octants, so the masks sum to one.
"""

from __future__ import annotations

import csv
import itertools
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .numerics import Grid, dft_forward, dft_inverse, endpoint_weights

BINARY_MAGIC = b"AFDT"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sHHIIdd")


@dataclass(frozen=True)
class OctantSignature:
    signs: tuple[int, ...]

    def __post_init__(self):
        if not self.signs or any(s not in (1, -1) for s in self.signs):
            raise ValueError(f"signature entries must be +1 or -1, got {self.signs}")

    @classmethod
    def parse(cls, text: str) -> "OctantSignature":
        """``"+-"`` style or comma separated ``"1,-1"``."""
        text = text.strip()
        if set(text) <= {"+", "-"}:
            return cls(tuple(1 if c == "+" else -1 for c in text))
        return cls(tuple(int(v) for v in text.split(",")))

    @classmethod
    def all(cls, dim: int) -> list["OctantSignature"]:
        return [cls(s) for s in itertools.product((1, -1), repeat=dim)]

    @property
    def dim(self) -> int:
        return len(self.signs)

    @property
    def minus_count(self) -> int:
        return sum(1 for s in self.signs if s < 0)

    def mirrored(self) -> "OctantSignature":
        return OctantSignature(tuple(-s for s in self.signs))

    def array(self) -> np.ndarray:
        return np.asarray(self.signs, dtype=float)

    def __str__(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class BoundarySamples:
    grid: Grid
    values: np.ndarray
    declared_real: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values of shape {vals.shape} do not fit grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("boundary samples must be finite")
        if self.declared_real and np.any(vals.imag != 0):
            raise ValueError("samples declared real carry nonzero imaginary parts")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * np.prod(self.grid.spacing)))


@dataclass(frozen=True)
class SpectralRep:
    """Sampled Paley-Wiener density of one octant component.

    ``tau[j]`` are the non-negative frequency magnitudes on axis ``j`` and
    ``weights[j]`` the matching quadrature weights; ``density`` lives on their
    tensor product. ``grid`` is the boundary grid the component came from, or
    ``None`` for analytically sampled densities.
    """

    sigma: OctantSignature
    tau: tuple[np.ndarray, ...]
    weights: tuple[np.ndarray, ...]
    density: np.ndarray
    grid: Grid | None = None

    def __post_init__(self):
        if len(self.tau) != self.sigma.dim or len(self.weights) != self.sigma.dim:
            raise ValueError("frequency axes do not match the signature dimension")
        tau = tuple(np.asarray(t, dtype=float) for t in self.tau)
        w = tuple(np.asarray(v, dtype=float) for v in self.weights)
        dens = np.asarray(self.density, dtype=complex)
        for t, v in zip(tau, w):
            if t.ndim != 1 or t.shape != v.shape:
                raise ValueError("each frequency axis needs a matching 1-D weight vector")
            if np.any(t < 0):
                raise ValueError("frequency magnitudes must be non-negative")
        if dens.shape != tuple(len(t) for t in tau):
            raise ValueError(f"density shape {dens.shape} does not match frequency axes")
        if not np.all(np.isfinite(dens)):
            raise ValueError("density must be finite")
        for arr in (*tau, *w, dens):
            arr.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "density", dens)

    @property
    def dim(self) -> int:
        return self.sigma.dim

    def scaled(self, c: complex) -> "SpectralRep":
        return SpectralRep(self.sigma, self.tau, self.weights, c * self.density, self.grid)

    def with_density(self, density: np.ndarray) -> "SpectralRep":
        return SpectralRep(self.sigma, self.tau, self.weights, density, self.grid)

    # -- target protocol used by the AFD engine (first-octant view) --------

    def norm(self) -> float:
        return norm_F(self)

    def _factors(self, alpha: int, axis: int, z: np.ndarray) -> np.ndarray:
        # rows: points, columns: frequency samples
        t = self.tau[axis]
        e = np.exp(2j * np.pi * np.multiply.outer(z, t))
        if alpha:
            e = e * (2j * np.pi * t) ** alpha
        return e * self.weights[axis]

    def derivative_view(self, alpha: Sequence[int], z) -> np.ndarray:
        """``d^alpha G(z)`` for first-octant view points ``z`` (shape ``(m, n)``)."""
        z = np.atleast_2d(np.asarray(z, dtype=complex))
        if z.shape[-1] != self.dim:
            raise ValueError("point dimension does not match the component")
        if self.dim == 1:
            return self._factors(alpha[0], 0, z[:, 0]) @ self.density
        a = self._factors(alpha[0], 0, z[:, 0])
        b = self._factors(alpha[1], 1, z[:, 1])
        return np.einsum("ij,jk,ik->i", a, self.density, b)

    def derivative_lattice(self, alpha: Sequence[int], axis_points: Sequence[np.ndarray]) -> np.ndarray:
        """``d^alpha G`` on the tensor product of per-axis view points."""
        mats = [self._factors(alpha[j], j, np.asarray(axis_points[j], dtype=complex)) for j in range(self.dim)]
        if self.dim == 1:
            return mats[0] @ self.density
        return mats[0] @ self.density @ mats[1].T


def _interior(z: np.ndarray, name: str = "z") -> None:
    if not np.all(z.imag > 0):
        raise ValueError(f"{name} must lie strictly inside the tube of the component")


def _to_view(rep: SpectralRep, z) -> np.ndarray:
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if z.shape[-1] != rep.dim:
        raise ValueError(f"point dimension {z.shape[-1]} does not match component dimension {rep.dim}")
    return z * rep.sigma.array()


def eval_F(rep: SpectralRep, z) -> np.ndarray:
    """Component value at natural-coordinate points ``z`` (``sigma_j Im z_j > 0``)."""
    return eval_dF(rep, (0,) * rep.dim, z)


def eval_dF(rep: SpectralRep, alpha: Sequence[int], z) -> np.ndarray:
    """``d^alpha_x F_sigma(z) = int (2 pi i t)^alpha exp(2 pi i z.t) f(t) dt``."""
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != rep.dim or any(a < 0 for a in alpha):
        raise ValueError(f"invalid multi-index {alpha} for dimension {rep.dim}")
    zv = _to_view(rep, z)
    _interior(zv)
    # d/dx_j in natural coordinates is sigma_j d/dx_j in the view
    sign = np.prod(rep.sigma.array() ** np.asarray(alpha))
    return sign * rep.derivative_view(alpha, zv)


def norm_F(rep: SpectralRep) -> float:
    """Plancherel norm ``(int |f|^2)^(1/2)`` with the stored quadrature weights."""
    mag = np.abs(rep.density) ** 2
    for j, w in enumerate(rep.weights):
        shape = [1] * rep.dim
        shape[j] = -1
        mag = mag * w.reshape(shape)
    return float(np.sqrt(np.sum(mag)))


# -- projection and reconstruction --------------------------------------------


def _signed_bins(grid: Grid, axis: int, signed_index: np.ndarray):
    """FFT bin and alias phase for integer frequency indices ``k`` (t = k / extent).

    The alias phase makes ``value * phase`` at the FFT bin reproduce the same
    grid samples as ``value`` placed at the true frequency.
    """
    n = grid.counts[axis]
    b = np.mod(signed_index, n)
    kb = np.where(b < (n + 1) // 2, b, b - n)  # fftfreq convention
    m = (signed_index - kb) // n
    phase = np.exp(2j * np.pi * grid.lower[axis] * m / grid.spacing[axis])
    return b, phase


def _axis_layout(grid: Grid, axis: int, sign: int):
    # transform grids are powers of two, so the Nyquist line exists and is split
    half = grid.counts[axis] // 2
    k = np.arange(half + 1)
    mask = np.ones(half + 1)
    mask[0] = mask[-1] = 0.5
    bins, phase = _signed_bins(grid, axis, sign * k)
    dt = 1.0 / grid.extent[axis]
    return k * dt, bins, phase, mask, dt


def hardy_project(samples: BoundarySamples, sigma: OctantSignature) -> SpectralRep:
    """Restrict the spectrum of the samples to the closed octant ``Gamma_sigma``."""
    grid = samples.grid
    if sigma.dim != grid.dim:
        raise ValueError(f"signature of dimension {sigma.dim} for a {grid.dim}-D grid")
    spectrum = dft_forward(samples.values, grid)
    layouts = [_axis_layout(grid, j, s) for j, s in enumerate(sigma.signs)]
    idx = np.ix_(*[lay[1] for lay in layouts])
    dens = spectrum[idx]
    for j, (_, _, phase, mask, _) in enumerate(layouts):
        shape = [1] * grid.dim
        shape[j] = -1
        dens = dens * (np.conj(phase) * mask).reshape(shape)
    tau = tuple(lay[0] for lay in layouts)
    weights = tuple(np.full(len(lay[0]), lay[4]) for lay in layouts)
    return SpectralRep(sigma, tau, weights, dens, grid)


def split_all(samples: BoundarySamples) -> list[SpectralRep]:
    return [hardy_project(samples, s) for s in OctantSignature.all(samples.grid.dim)]


def _spectrum_on_grid(rep: SpectralRep, grid: Grid) -> np.ndarray:
    out = np.zeros(grid.shape, dtype=complex)
    bins, phases, scales = [], [], []
    for j in range(rep.dim):
        dt = 1.0 / grid.extent[j]
        k = np.rint(rep.sigma.signs[j] * rep.tau[j] / dt).astype(int)
        if not np.allclose(k * dt, rep.sigma.signs[j] * rep.tau[j], rtol=0, atol=1e-9 * dt):
            raise ValueError("component frequencies are not on the dual grid of the target grid")
        b, ph = _signed_bins(grid, j, k)
        bins.append(b)
        phases.append(ph)
        scales.append(rep.weights[j] / dt)
    vals = rep.density
    for j in range(rep.dim):
        shape = [1] * rep.dim
        shape[j] = -1
        vals = vals * (phases[j] * scales[j]).reshape(shape)
    np.add.at(out, np.ix_(*bins), vals)
    return out


def boundary_values(rep: SpectralRep, grid: Grid | None = None) -> np.ndarray:
    """Samples of the component on a boundary grid (its source grid by default)."""
    grid = grid or rep.grid
    if grid is None:
        raise ValueError("component has no source grid; pass one explicitly")
    return dft_inverse(_spectrum_on_grid(rep, grid), grid)


def reconstruct(components: Sequence[SpectralRep], declared_real: bool = False) -> BoundarySamples:
    """Sum of all ``2^n`` components on their common source grid."""
    if not components:
        raise ValueError("no components given")
    grid = components[0].grid
    dim = components[0].dim
    if grid is None:
        raise ValueError("components carry no source grid")
    seen = [c.sigma for c in components]
    if len(set(seen)) != len(seen):
        raise ValueError(f"duplicate signatures in {[str(s) for s in seen]}")
    missing = set(OctantSignature.all(dim)) - set(seen)
    if missing or len(seen) != 2**dim:
        raise ValueError(f"missing signatures: {sorted(str(s) for s in missing)}")
    if any(c.grid != grid for c in components):
        raise ValueError("components come from different grids")
    spectrum = sum(_spectrum_on_grid(c, grid) for c in components)
    values = dft_inverse(spectrum, grid)
    if declared_real:
        values = values.real.astype(complex)
    return BoundarySamples(grid, values, declared_real)


# -- analytic densities --------------------------------------------------------


def from_density(
    func: Callable[..., np.ndarray],
    sigma: OctantSignature,
    ranges: Sequence[tuple[float, float]],
    counts: Sequence[int],
    order: int = 10,
) -> SpectralRep:
    """Sample ``func(tau_1[, tau_2])`` (broadcasting) on a tensor grid over the octant.

    Weights are trapezoid weights with Gregory end corrections of ``order``.
    """
    tau, weights = [], []
    for (a, b), c in zip(ranges, counts):
        if not (0 <= a < b):
            raise ValueError(f"frequency range must satisfy 0 <= a < b, got {(a, b)}")
        t = np.linspace(a, b, c)
        tau.append(t)
        weights.append(endpoint_weights(c, t[1] - t[0], order=order))
    mesh = np.meshgrid(*tau, indexing="ij")
    return SpectralRep(sigma, tuple(tau), tuple(weights), np.asarray(func(*mesh), dtype=complex))


def kernel_spectrum(z0, tmax: float = 16.0, count: int = 1025, coeff: complex = 1.0, order: int = 10) -> SpectralRep:
    """First-octant density ``coeff * exp(-2 pi i conj(z0).t)`` of ``coeff * K(., conj(z0))``."""
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    if not np.all(z0.imag > 0):
        raise ValueError("kernel centre must be interior")
    n = len(z0)

    def dens(*t):
        phase = sum(np.conj(z0[j]) * t[j] for j in range(n))
        return coeff * np.exp(-2j * np.pi * phase)

    return from_density(dens, OctantSignature((1,) * n), [(0.0, tmax)] * n, [count] * n, order)


def combination_density(rep: SpectralRep, alphas, points, coeffs) -> np.ndarray:
    """Density on ``rep``'s frequency samples of ``sum_k c_k phi_{alpha_k, z_k}``.

    Points are first-octant view coordinates; the density of ``phi_{alpha,z}``
    is ``prod_j (-2 pi i tau_j)^alpha_j exp(-2 pi i conj(z_j) tau_j)``.
    """
    out = np.zeros(rep.density.shape, dtype=complex)
    for a, z, c in zip(alphas, points, coeffs):
        term = np.asarray(c, dtype=complex)
        for j, t in enumerate(rep.tau):
            shape = [1] * rep.dim
            shape[j] = -1
            f = (-2j * np.pi * t) ** a[j] * np.exp(-2j * np.pi * np.conj(z[j]) * t)
            term = term * f.reshape(shape)
        out = out + term
    return out


def conjugate_component(rep: SpectralRep) -> SpectralRep:
    """Component for the mirrored signature of a real signal: ``f(-t) = conj(f(t))``."""
    return SpectralRep(rep.sigma.mirrored(), rep.tau, rep.weights, np.conj(rep.density), rep.grid)


# -- file formats --------------------------------------------------------------


def _grid_from_axes(axes: Sequence[np.ndarray]) -> Grid:
    counts, lower, spacing = [], [], []
    for ax in axes:
        d = np.diff(ax)
        if len(ax) < 8 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
            raise ValueError("sample coordinates must form a uniform grid with at least 8 points per axis")
        counts.append(len(ax))
        lower.append(float(ax[0]))
        spacing.append(float((ax[-1] - ax[0]) / (len(ax) - 1)))
    return Grid(tuple(counts), tuple(lower), tuple(spacing))


def read_csv(path, dim: int, declared_real: bool = False) -> BoundarySamples:
    """Columns ``x1[,x2],re,im`` with a header row; rows in any order."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != dim + 2:
        raise ValueError(f"expected {dim + 2} columns for dimension {dim}, found {data.shape[1]}")
    coords = data[:, :dim]
    axes = [np.unique(coords[:, j]) for j in range(dim)]
    grid = _grid_from_axes(axes)
    if len(data) != int(np.prod(grid.counts)):
        raise ValueError("sample rows do not cover the full tensor grid")
    idx = tuple(np.rint((coords[:, j] - grid.lower[j]) / grid.spacing[j]).astype(int) for j in range(dim))
    values = np.full(grid.shape, np.nan, dtype=complex)
    values[idx] = data[:, dim] + 1j * data[:, dim + 1]
    if np.any(np.isnan(values)):
        raise ValueError("duplicate or missing grid points in sample file")
    return BoundarySamples(grid, values, declared_real)


def write_csv(path, samples: BoundarySamples) -> None:
    grid = samples.grid
    names = [f"x{j + 1}" for j in range(grid.dim)] + ["re", "im"]
    mesh = grid.mesh()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for idx in np.ndindex(*grid.shape):
            v = samples.values[idx]
            w.writerow([f"{m[idx]:.17g}" for m in mesh] + [f"{v.real:.17g}", f"{v.imag:.17g}"])


def read_binary(path, declared_real: bool = False) -> BoundarySamples:
    """32-byte header ``AFDT``, u16 version, u16 dim, u32 counts, f64 half-widths."""
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for the sample header")
    magic, version, dim, n1, n2, l1, l2 = _HEADER.unpack_from(raw)
    if magic != BINARY_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != BINARY_VERSION:
        raise ValueError(f"unsupported version {version}")
    if dim not in (1, 2):
        raise ValueError(f"unsupported dimension {dim}")
    counts = (n1,) if dim == 1 else (n1, n2)
    halfw = (l1,) if dim == 1 else (l1, l2)
    body = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if body.size != int(np.prod(counts)):
        raise ValueError(f"payload holds {body.size} values, header promises {int(np.prod(counts))}")
    grid = Grid(counts, tuple(-h for h in halfw), tuple(2 * h / c for h, c in zip(halfw, counts)))
    return BoundarySamples(grid, body.reshape(counts).copy(), declared_real)


def write_binary(path, samples: BoundarySamples) -> None:
    grid = samples.grid
    halfw = [c * h / 2 for c, h in zip(grid.counts, grid.spacing)]
    if not np.allclose(grid.lower, [-h for h in halfw]):
        raise ValueError("binary format stores symmetric grids only")
    n2 = grid.counts[1] if grid.dim == 2 else 0
    l2 = halfw[1] if grid.dim == 2 else 0.0
    header = _HEADER.pack(BINARY_MAGIC, BINARY_VERSION, grid.dim, grid.counts[0], n2, halfw[0], l2)
    Path(path).write_bytes(header + np.ascontiguousarray(samples.values, dtype="<c16").tobytes())


def read_samples(path, dim: int | None = None, declared_real: bool = False) -> BoundarySamples:
    """Dispatch on the file: binary if it starts with the magic, CSV otherwise."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == BINARY_MAGIC:
        return read_binary(path, declared_real)
    if dim is None:
        with open(path) as fh:
            dim = len(fh.readline().split(",")) - 2
    return read_csv(path, dim, declared_real)


def save_component(path, rep: SpectralRep) -> None:
    extra = {}
    if rep.grid is not None:
        extra = dict(
            grid_counts=np.asarray(rep.grid.counts),
            grid_lower=np.asarray(rep.grid.lower),
            grid_spacing=np.asarray(rep.grid.spacing),
        )
    np.savez(
        path,
        sigma=np.asarray(rep.sigma.signs),
        density=rep.density,
        **{f"tau{j}": t for j, t in enumerate(rep.tau)},
        **{f"weights{j}": w for j, w in enumerate(rep.weights)},
        **extra,
    )


def load_component(path) -> SpectralRep:
    with np.load(path) as data:
        sigma = OctantSignature(tuple(int(s) for s in data["sigma"]))
        tau = tuple(data[f"tau{j}"] for j in range(sigma.dim))
        weights = tuple(data[f"weights{j}"] for j in range(sigma.dim))
        grid = None
        if "grid_counts" in data:
            grid = Grid(
                tuple(int(c) for c in data["grid_counts"]),
                tuple(float(v) for v in data["grid_lower"]),
                tuple(float(v) for v in data["grid_spacing"]),
            )
        return SpectralRep(sigma, tau, weights, data["density"], grid)


def warn_not_real(context: str) -> None:
    warnings.warn(f"{context}: input was not declared real, conjugate symmetry is not guaranteed", stacklevel=3)
