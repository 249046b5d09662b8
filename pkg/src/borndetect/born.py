"""Closed-form resonance and detection probabilities.

Every function takes ``clamp``; with ``clamp=False`` the raw leading-order
value is returned, which may exceed 1 in extreme parameter corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = ["BornParams", "p_resonance", "p_detection", "efficiency_factorization"]


@dataclass(frozen=True)
class BornParams:
    epsilon: float
    gamma: float
    g: float
    bandwidth: float
    omega_in: float

    def __post_init__(self):
        for name in ("epsilon", "gamma", "g", "bandwidth", "omega_in"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def _clip(val, clamp):
    return min(max(val, 0.0), 1.0) if clamp else val


def p_resonance(epsilon, psi_mag, bandwidth, clamp=True) -> float:
    """Chance the carrier lands within ``epsilon |psi|`` of a level: ``2 eps |psi| / Omega``."""
    if not bandwidth > 0:
        raise ValueError("bandwidth must be positive")
    return _clip(2.0 * epsilon * abs(psi_mag) / bandwidth, clamp)


def p_detection(epsilon, psi_mag, gamma, g, bandwidth, clamp=True) -> float:
    """``eps^2 |psi|^2 sqrt(2 gamma / (pi g Omega^2))``."""
    if not (gamma > 0 and g > 0 and bandwidth > 0):
        raise ValueError("gamma, g and bandwidth must be positive")
    val = epsilon**2 * abs(psi_mag) ** 2 * math.sqrt(2 * gamma / (math.pi * g * bandwidth**2))
    return _clip(val, clamp)


def efficiency_factorization(params: BornParams, psi_mag):
    """Split the unclamped detection probability into three factors.

    Returns ``(|psi|^2, eps^2 / w_in^2, w_in^2 sqrt(2 gamma / (pi g Omega^2)))``:
    the density, an interaction volume fixed by the capture process, and a
    capture-independent efficiency.
    """
    p = params
    psi_sq = abs(psi_mag) ** 2
    volume = p.epsilon**2 / p.omega_in**2
    efficiency = p.omega_in**2 * math.sqrt(2 * p.gamma / (math.pi * p.g * p.bandwidth**2))
    return psi_sq, volume, efficiency
