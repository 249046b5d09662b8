"""Incoming projectile wavepacket on a discrete wavevector grid.

The packet is stored as momentum-space amplitudes ``phi_j`` on a uniform
grid with spacing ``dk`` per axis, normalized so that
``sum |phi_j|^2 dk^d == 1``.  Position-space amplitudes follow from the
conjugate Fourier sum

    psi(r) = (2 pi)^(-d/2) dk^d  sum_j exp(-i k_j . r) phi_j

which is the continuum transform evaluated as a Riemann sum.  With the box
length ``L = 2 pi / dk`` the prefactor equals ``(2 pi / L^2)^(d/2)``; the
resulting ``psi`` is periodic in ``r`` with period ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GridTooNarrowError

__all__ = [
    "Dispersion",
    "SpectralGrid",
    "Wavepacket",
    "make_gaussian",
    "make_grid",
    "position_amplitude",
    "psi_bound",
    "dual_grid",
    "spectral_sample",
    "support_interval",
]

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class Dispersion:
    """Map from wavevector magnitude to angular frequency.

    ``kind="linear"`` gives ``omega = c |k|`` (``value`` is the speed);
    ``kind="quadratic"`` gives ``omega = |k|^2 / (2 m)`` with hbar = 1
    (``value`` is the mass).
    """

    kind: str = "linear"
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "quadratic"):
            raise ValueError(f"unknown dispersion kind {self.kind!r}")
        if not self.value > 0:
            raise ValueError("dispersion parameter must be positive")

    def omega(self, kmag):
        kmag = np.asarray(kmag, dtype=float)
        if self.kind == "linear":
            return self.value * kmag
        return kmag**2 / (2.0 * self.value)

    @classmethod
    def from_mapping(cls, spec):
        """Build from ``{"linear": c}`` or ``{"quadratic": m}``."""
        if isinstance(spec, Dispersion):
            return spec
        if not isinstance(spec, dict) or len(spec) != 1:
            raise ValueError('dispersion must be {"linear": c} or {"quadratic": m}')
        (kind, value), = spec.items()
        return cls(kind, float(value))

    def to_mapping(self):
        return {self.kind: self.value}


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Uniform wavevector grid, one sample axis per spatial dimension."""

    k_axes: tuple
    dispersion: Dispersion = field(default_factory=Dispersion)

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=float) for a in self.k_axes)
        if len(axes) not in (1, 3):
            raise ValueError("dimension must be 1 or 3")
        for a in axes:
            if a.ndim != 1 or a.size < 2:
                raise ValueError("each k axis needs at least 2 samples")
            steps = np.diff(a)
            if not np.all(steps > 0):
                raise ValueError("k samples must be strictly increasing")
            if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
                raise ValueError("k samples must be uniformly spaced")
        for a in axes:
            a.setflags(write=False)
        object.__setattr__(self, "k_axes", axes)

    @property
    def dimension(self) -> int:
        return len(self.k_axes)

    @property
    def k_samples(self) -> np.ndarray:
        """Sample values of the first (or only) axis."""
        return self.k_axes[0]

    @property
    def spacings(self) -> tuple:
        return tuple((a[-1] - a[0]) / (a.size - 1) for a in self.k_axes)

    @property
    def cell_volume(self) -> float:
        """``dk^d``, the measure of one grid cell."""
        return float(np.prod(self.spacings))

    @property
    def box_extent(self) -> tuple:
        """Quantization length per axis, ``L = 2 pi / dk``."""
        return tuple(2 * np.pi / dk for dk in self.spacings)

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.k_axes)

    @cached_property
    def kmag(self) -> np.ndarray:
        mesh = np.meshgrid(*self.k_axes, indexing="ij")
        return np.sqrt(sum(m**2 for m in mesh))

    @cached_property
    def omega(self) -> np.ndarray:
        return self.dispersion.omega(self.kmag)


def make_grid(center, span, points, dispersion=None, dimension=1) -> SpectralGrid:
    """Symmetric uniform grid of ``points`` samples covering ``center +- span/2``.

    ``center`` may be a scalar (used on every axis) or one value per axis.
    """
    centers = np.broadcast_to(np.asarray(center, dtype=float), (dimension,))
    axes = tuple(np.linspace(c - span / 2, c + span / 2, int(points)) for c in centers)
    return SpectralGrid(axes, dispersion or Dispersion())


@dataclass(frozen=True, eq=False)
class Wavepacket:
    """Normalized momentum-space amplitudes on a :class:`SpectralGrid`."""

    grid: SpectralGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != self.grid.shape:
            raise ValueError(f"amplitude shape {amps.shape} != grid shape {self.grid.shape}")
        norm = self.norm_of(amps)
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"wavepacket not normalized: sum |phi|^2 dk^d = {norm!r}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm_of(self, amps) -> float:
        return float(np.sum(np.abs(amps) ** 2) * self.grid.cell_volume)

    @classmethod
    def normalized(cls, grid, amplitudes):
        """Rescale arbitrary nonzero amplitudes to unit norm."""
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.sum(np.abs(amps) ** 2) * grid.cell_volume
        if norm <= 0:
            raise ValueError("cannot normalize an all-zero spectrum")
        return cls(grid, amps / np.sqrt(norm))

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    @cached_property
    def weights(self) -> np.ndarray:
        """Probability of each grid cell, ``|phi_j|^2 dk^d`` (flattened)."""
        w = (np.abs(self.amplitudes) ** 2 * self.grid.cell_volume).ravel()
        return w / w.sum()

    @cached_property
    def carrier(self) -> float:
        """Spectral mean frequency ``omega_in``."""
        return float(np.dot(self.weights, self.grid.omega.ravel()))

    @cached_property
    def bandwidth(self) -> float:
        """``Omega``: twice the spectral standard deviation of omega."""
        om = self.grid.omega.ravel()
        var = np.dot(self.weights, (om - self.carrier) ** 2)
        return float(2.0 * np.sqrt(var))

    @cached_property
    def mean_k(self) -> np.ndarray:
        mesh = np.meshgrid(*self.grid.k_axes, indexing="ij")
        return np.array([np.dot(self.weights, m.ravel()) for m in mesh])

    @cached_property
    def _cdf(self) -> np.ndarray:
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        return cdf


def make_gaussian(k0, sigma_k, grid: SpectralGrid, x0=0.0) -> Wavepacket:
    """Gaussian packet with ``|phi|^2`` of standard deviation ``sigma_k`` per axis.

    ``x0`` shifts the position-space centre.  Raises
    :class:`GridTooNarrowError` unless every axis covers ``k0 +- 6 sigma_k``.
    """
    if not sigma_k > 0:
        raise ValueError("sigma_k must be positive")
    d = grid.dimension
    k0 = np.broadcast_to(np.asarray(k0, dtype=float), (d,))
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (d,))
    for axis, (a, c) in enumerate(zip(grid.k_axes, k0)):
        # tolerate round-off at the edges of a grid built exactly to 6 sigma
        slack = 1e-9 * max(abs(c), sigma_k)
        if a[0] > c - 6 * sigma_k + slack or a[-1] < c + 6 * sigma_k - slack:
            raise GridTooNarrowError(
                f"axis {axis} covers [{a[0]:g}, {a[-1]:g}] but the Gaussian needs "
                f"[{c - 6 * sigma_k:g}, {c + 6 * sigma_k:g}]"
            )
    factors = [
        np.exp(-((a - c) ** 2) / (4 * sigma_k**2) + 1j * a * x)
        for a, c, x in zip(grid.k_axes, k0, x0)
    ]
    amps = factors[0]
    for f in factors[1:]:
        amps = np.multiply.outer(amps, f)
    return Wavepacket.normalized(grid, amps)


def _as_points(r, d):
    pts = np.asarray(r, dtype=float)
    scalar = pts.ndim == 0 if d == 1 else pts.ndim == 1
    if d == 1:
        pts = pts.reshape(-1, 1)
    else:
        pts = np.atleast_2d(pts)
        if pts.shape[-1] != d:
            raise ValueError(f"positions must have trailing dimension {d}")
    return pts, scalar


def position_amplitude(wp: Wavepacket, r):
    """Evaluate ``psi(r)``.

    ``r`` is a scalar or 1-D array for one-dimensional packets, or an
    ``(..., 3)`` array for three-dimensional ones.  Returns a complex scalar
    for a single point, otherwise a flat complex array.
    """
    d = wp.dimension
    pts, scalar = _as_points(r, d)
    grid = wp.grid
    pref = (2 * np.pi) ** (-d / 2) * grid.cell_volume
    if d == 1:
        phase = np.exp(-1j * np.outer(pts[:, 0], grid.k_axes[0]))
        out = pref * (phase @ wp.amplitudes)
    else:
        ex, ey, ez = (np.exp(-1j * np.outer(pts[:, a], grid.k_axes[a])) for a in range(3))
        out = pref * np.einsum("mi,mj,mk,ijk->m", ex, ey, ez, wp.amplitudes, optimize=True)
    return complex(out[0]) if scalar else out


def psi_bound(wp: Wavepacket) -> float:
    """Rigorous upper bound on ``|psi(r)|`` over all ``r`` (triangle inequality)."""
    d = wp.dimension
    return float((2 * np.pi) ** (-d / 2) * wp.grid.cell_volume * np.sum(np.abs(wp.amplitudes)))


def dual_grid(wp: Wavepacket, origin=0.0) -> np.ndarray:
    """Position samples dual to a 1-D k grid: ``N`` points spaced ``2 pi / (N dk)``.

    ``sum |psi(r_m)|^2 dr`` over these points equals the discrete norm exactly.
    """
    if wp.dimension != 1:
        raise ValueError("dual_grid is defined for one-dimensional packets")
    n = wp.grid.shape[0]
    dr = wp.grid.box_extent[0] / n
    return origin + dr * np.arange(n)


def spectral_sample(wp: Wavepacket, rng, size=None):
    """Draw ``omega_k`` with probability ``|phi_j|^2 dk^d``."""
    u = rng.random(size)
    idx = np.searchsorted(wp._cdf, u, side="right")
    idx = np.minimum(idx, wp._cdf.size - 1)
    om = wp.grid.omega.ravel()[idx]
    return float(om) if size is None else om


def support_interval(wp: Wavepacket, mass=0.99, samples=8192):
    """Central interval of a 1-D packet holding ``mass`` of ``|psi|^2``.

    Works within one period of the (periodic) discrete transform, centred on
    the density peak.
    """
    if wp.dimension != 1:
        raise ValueError("support_interval is defined for one-dimensional packets")
    coarse = dual_grid(wp)
    dens = np.abs(position_amplitude(wp, coarse)) ** 2
    peak = coarse[int(np.argmax(dens))]
    period = wp.grid.box_extent[0]
    x = np.linspace(peak - period / 2, peak + period / 2, samples)
    dens = np.abs(position_amplitude(wp, x)) ** 2
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    tail = (1.0 - mass) / 2
    lo, hi = np.interp([tail, 1.0 - tail], cdf, x)
    return float(lo), float(hi)
