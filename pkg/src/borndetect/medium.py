"""Detector medium: molecules with classical positions and resonant frequencies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import EmptyMediumError, TooFewMoleculesError

__all__ = [
    "MediumSpec",
    "Molecule",
    "Medium",
    "sample_medium",
    "resonant_candidates",
    "mean_level_spacing",
]

FREQUENCY_LAWS = ("uniform", "gaussian")


@dataclass(frozen=True)
class MediumSpec:
    """Sampling law for a medium.

    ``extent`` is a sequence of ``(lo, hi)`` bounds, one per axis.  With
    ``count_law="fixed"`` exactly ``count`` molecules are drawn; with
    ``"poisson"`` the count is Poisson with mean ``density * volume``.  For
    the gaussian frequency law ``spread`` is the standard deviation.
    """

    density: float
    extent: tuple
    omega_center: float
    spread: float
    frequency_law: str = "uniform"
    count_law: str = "poisson"
    count: int | None = None

    def __post_init__(self):
        ext = tuple((float(lo), float(hi)) for lo, hi in self.extent)
        object.__setattr__(self, "extent", ext)
        if not self.density > 0:
            raise ValueError("density must be positive")
        if not self.spread > 0:
            raise ValueError("spread must be positive")
        if any(not hi > lo for lo, hi in ext):
            raise ValueError("extent must have positive length on every axis")
        if self.frequency_law not in FREQUENCY_LAWS:
            raise ValueError(f"frequency_law must be one of {FREQUENCY_LAWS}")
        if self.count_law == "fixed":
            if self.count is None or self.count < 0:
                raise ValueError("fixed count law needs a non-negative count")
        elif self.count_law != "poisson":
            raise ValueError("count_law must be 'poisson' or 'fixed'")

    @property
    def dimension(self) -> int:
        return len(self.extent)

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.extent]))

    @property
    def expected_count(self) -> float:
        if self.count_law == "fixed":
            return float(self.count)
        return self.density * self.volume


class Molecule(NamedTuple):
    position: np.ndarray
    omega: float


@dataclass(frozen=True, eq=False)
class Medium:
    """An immutable sampled medium.

    ``positions`` has shape ``(N, d)``; ``omegas`` has shape ``(N,)``.
    """

    positions: np.ndarray
    omegas: np.ndarray

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        om = np.array(self.omegas, dtype=float).reshape(-1)
        if pos.shape[0] != om.shape[0]:
            raise ValueError("positions and omegas disagree on the molecule count")
        pos.setflags(write=False)
        om.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "omegas", om)

    def __len__(self):
        return self.omegas.shape[0]

    def __getitem__(self, n) -> Molecule:
        return Molecule(self.positions[n], float(self.omegas[n]))

    def __iter__(self):
        return (self[n] for n in range(len(self)))

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    def with_omegas(self, omegas) -> "Medium":
        return Medium(self.positions, omegas)

    @property
    def spacing(self) -> float:
        """Mean level spacing ``delta``; see :func:`mean_level_spacing`."""
        return mean_level_spacing(self)


def sample_medium(spec: MediumSpec, rng) -> Medium:
    """Draw molecule count, positions and resonant frequencies from ``spec``."""
    if spec.count_law == "fixed":
        n = int(spec.count)
    else:
        n = int(rng.poisson(spec.density * spec.volume))
    if n == 0:
        raise EmptyMediumError("sampled medium has no molecules")
    lo = np.array([e[0] for e in spec.extent])
    hi = np.array([e[1] for e in spec.extent])
    positions = lo + (hi - lo) * rng.random((n, spec.dimension))
    if spec.frequency_law == "uniform":
        omegas = spec.omega_center + spec.spread * (rng.random(n) - 0.5)
    else:
        omegas = rng.normal(spec.omega_center, spec.spread, n)
    return Medium(positions, omegas)


def resonant_candidates(
    medium: Medium,
    omega_in: float,
    window_of: Callable[[np.ndarray], np.ndarray] | float,
    max_window: float | None = None,
) -> list:
    """Indices ``n`` with ``|omega_in - omega_n| < window_of(n)``.

    ``window_of`` maps an array of molecule indices to their (half-)windows,
    or is a constant.  ``max_window``, when given, must bound every window;
    it lets callers skip evaluating windows for molecules that cannot
    qualify.  The result is ordered by detuning, ties broken by index.
    """
    detuning = np.abs(omega_in - medium.omegas)
    if max_window is None:
        idx = np.arange(len(medium))
    else:
        idx = np.flatnonzero(detuning < max_window)
    if idx.size == 0:
        return []
    if callable(window_of):
        windows = np.asarray(window_of(idx), dtype=float)
    else:
        windows = np.full(idx.size, float(window_of))
    if np.any(windows < 0):
        raise ValueError("windows must be non-negative")
    keep = idx[detuning[idx] < windows]
    order = np.lexsort((keep, detuning[keep]))
    return [int(n) for n in keep[order]]


def mean_level_spacing(medium: Medium) -> float:
    """Mean difference between adjacent sorted frequencies."""
    if len(medium) < 2:
        raise TooFewMoleculesError("level spacing needs at least two molecules")
    om = np.sort(medium.omegas)
    return float((om[-1] - om[0]) / (om.size - 1))
