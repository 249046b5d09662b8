"""Fluctuation-driven dephasing as a random walk of the molecular level.

After time ``tau`` the level offset ``dw`` is spread with a Gaussian profile.
Two variants are kept:

``normalized``
    variance ``g tau``, a proper density.
``as_written``
    ``(2 pi g tau)^(-1/2) exp(-dw^2 / (2 pi g tau))``; its exponent implies
    variance ``pi g tau`` and the profile integrates to ``sqrt(pi)``.

Both share the peak value ``(2 pi g tau)^(-1/2)`` that the window estimate
uses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

__all__ = [
    "DiffusionParams",
    "WalkParams",
    "occupancy_pdf",
    "window_probability",
    "p_window_at_detection",
    "step_variance_rate",
    "simulate_walk",
    "simulate_walks",
    "walk_endpoints",
]

VARIANTS = ("normalized", "as_written")
SEMANTICS = ("at_time", "throughout")
STEP_LAWS = ("gaussian", "plus_minus")

MIN_STEPS = 100


@dataclass(frozen=True)
class DiffusionParams:
    g: float
    G: float
    variant: str = "normalized"
    semantics: str = "at_time"

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("g must be positive")
        if self.G < 0:
            raise ValueError("G must be non-negative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.semantics not in SEMANTICS:
            raise ValueError(f"semantics must be one of {SEMANTICS}")


@dataclass(frozen=True)
class WalkParams:
    """Random-walk discretization.

    ``max_steps`` caps the number of steps per walk; beyond it the step is
    lengthened to ``tau / max_steps``.
    """

    dt: float
    step_law: str = "gaussian"
    max_steps: int = 100_000

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.step_law not in STEP_LAWS:
            raise ValueError(f"step_law must be one of {STEP_LAWS}")
        if self.max_steps < MIN_STEPS:
            raise ValueError(f"max_steps must be at least {MIN_STEPS}")


def occupancy_pdf(d_omega, tau, p: DiffusionParams):
    if not tau > 0:
        raise PreconditionError("tau must be positive")
    d_omega = np.asarray(d_omega, dtype=float)
    peak = 1.0 / math.sqrt(2 * math.pi * p.g * tau)
    if p.variant == "as_written":
        out = peak * np.exp(-(d_omega**2) / (2 * math.pi * p.g * tau))
    else:
        out = peak * np.exp(-(d_omega**2) / (2 * p.g * tau))
    return float(out) if out.ndim == 0 else out


def window_probability(tau, p: DiffusionParams, clamp=True) -> float:
    """``G * P(0, tau)``: chance the level sits within ``G/2`` of its start."""
    if not tau > 0:
        raise PreconditionError("tau must be positive")
    val = p.G / math.sqrt(2 * math.pi * p.g * tau)
    return min(val, 1.0) if clamp else val


def p_window_at_detection(coupling_mag, gamma, g, clamp=True) -> float:
    """Window probability at ``tau = gamma/|c|^2`` with ``G = gamma``.

    Reduces to ``|c| sqrt(gamma / (2 pi g))``.
    """
    if not gamma > 0 or not g > 0:
        raise PreconditionError("gamma and g must be positive")
    val = abs(coupling_mag) * math.sqrt(gamma / (2 * math.pi * g))
    return min(val, 1.0) if clamp else val


def step_variance_rate(p: DiffusionParams) -> float:
    """Variance growth per unit time of the walk for the chosen variant."""
    return p.g if p.variant == "normalized" else math.pi * p.g


def _n_steps(walk: WalkParams, tau: float) -> int:
    ratio = tau / walk.dt
    if not ratio >= MIN_STEPS:
        raise PreconditionError(
            f"tau/dt = {ratio:.3g} < {MIN_STEPS}; the walk is not in its diffusion limit"
        )
    return min(int(round(ratio)), walk.max_steps)


def _steps(rng, walk, sigma, shape):
    if walk.step_law == "gaussian":
        return rng.normal(0.0, sigma, shape)
    return sigma * (2.0 * rng.integers(0, 2, shape) - 1.0)


def simulate_walks(rng, walk: WalkParams, p: DiffusionParams, tau: float, n: int, chunk=None):
    """Run ``n`` independent walkers; return a boolean detection array.

    ``at_time`` scores ``|dw(tau)| < G/2``; ``throughout`` requires the
    condition at every step.
    """
    steps = _n_steps(walk, tau)
    sigma = math.sqrt(step_variance_rate(p) * tau / steps)
    half = p.G / 2
    chunk = chunk or max(1, 4_000_000 // steps)
    out = np.empty(n, dtype=bool)
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        path = np.cumsum(_steps(rng, walk, sigma, (m, steps)), axis=1)
        if p.semantics == "at_time":
            out[start:start + m] = np.abs(path[:, -1]) < half
        else:
            out[start:start + m] = np.all(np.abs(path) < half, axis=1)
    return out


def simulate_walk(rng, walk: WalkParams, p: DiffusionParams, tau: float) -> bool:
    return bool(simulate_walks(rng, walk, p, tau, 1)[0])


def walk_endpoints(rng, walk: WalkParams, p: DiffusionParams, tau: float, n: int, chunk=None):
    """Final offsets ``dw(tau)`` of ``n`` walkers."""
    steps = _n_steps(walk, tau)
    sigma = math.sqrt(step_variance_rate(p) * tau / steps)
    chunk = chunk or max(1, 4_000_000 // steps)
    out = np.empty(n)
    for start in range(0, n, chunk):
        m = min(chunk, n - start)
        out[start:start + m] = _steps(rng, walk, sigma, (m, steps)).sum(axis=1)
    return out
