"""Restricted Hamiltonian: coupling elements and the resonant 2x2 reduction.

Sign convention
---------------
The decay width enters the excited diagonal as ``+i gamma`` exactly as in the
reduced matrix ``[[w_in, c*], [c, w_n + i gamma]]``.  Amplitudes are
propagated as ``da/dt = +i H a`` so that an eigenvalue with positive
imaginary part is a decay rate: a mode with eigenvalue ``lam`` evolves as
``exp(i lam t)``.  Under this convention the seesaw pair ``(i gamma,
i |c|^2 / gamma)`` is a fast and a slow decay, and norm never grows.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, RegimeViolationError, ZeroCouplingError
from .medium import Medium
from .wavepacket import Wavepacket, position_amplitude

__all__ = [
    "EffectivePair",
    "RegimeMargins",
    "RegimeVerdict",
    "FullEvolution",
    "coupling_element",
    "reduced_matrix",
    "exact_eigen",
    "seesaw_approx",
    "regime_check",
    "detection_timescale",
    "restricted_hamiltonian",
    "integrate_full",
]


@dataclass(frozen=True)
class EffectivePair:
    omega_in: float
    omega_n: float
    coupling: complex
    gamma: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")


@dataclass(frozen=True)
class RegimeMargins:
    resonance: float = 10.0
    width: float = 10.0

    def __post_init__(self):
        if self.resonance < 1 or self.width < 1:
            raise ValueError("regime margins must be >= 1")


@dataclass(frozen=True)
class RegimeVerdict:
    resonance_ok: bool
    width_ok: bool
    detuning: float
    coupling: float
    gamma: float
    margins: RegimeMargins

    @property
    def passed(self) -> bool:
        return self.resonance_ok and self.width_ok

    def __bool__(self):
        return self.passed

    @property
    def failures(self) -> list:
        out = []
        if not self.resonance_ok:
            out.append(
                f"resonance: |w_in - w_n| * {self.margins.resonance:g} = "
                f"{self.detuning * self.margins.resonance:.3g} > |c| = {self.coupling:.3g}"
            )
        if not self.width_ok:
            out.append(
                f"width: |c| * {self.margins.width:g} = "
                f"{self.coupling * self.margins.width:.3g} > gamma = {self.gamma:.3g}"
            )
        return out


def coupling_element(wp: Wavepacket, epsilon: float, r_n):
    """``<in| H/hbar |n> = epsilon * conj(psi(r_n))``."""
    return epsilon * np.conj(position_amplitude(wp, r_n))


def reduced_matrix(pair: EffectivePair) -> np.ndarray:
    c = complex(pair.coupling)
    return np.array(
        [[pair.omega_in, c.conjugate()], [c, pair.omega_n + 1j * pair.gamma]],
        dtype=complex,
    )


def _in_weight(lam, a, c):
    # eigenvector (c*, lam - a) from the first row
    v0 = abs(c)
    v1 = abs(lam - a)
    if v0 == 0.0 and v1 == 0.0:
        return 1.0
    return v0**2 / (v0**2 + v1**2)


def _second_first(first, second, a, c, rtol=1e-12):
    """True when ``first`` should be labelled lam2 (larger ``|in>`` weight).

    Weights and eigenvalue components are compared with a relative
    tolerance so that exact ties (e.g. on resonance with gamma < 2|c|) are
    not decided by round-off.
    """
    wf, ws = _in_weight(first, a, c), _in_weight(second, a, c)
    if abs(wf - ws) > rtol:
        return wf > ws
    scale = max(abs(first), abs(second), abs(c)) * rtol
    if abs(first.imag - second.imag) > scale:
        return first.imag < second.imag
    return first.real < second.real


def exact_eigen(pair: EffectivePair):
    """Exact eigenvalues ``(lam1, lam2)`` of the reduced 2x2 matrix.

    ``lam2`` is the eigenvalue whose eigenvector has the larger ``|in>``
    component (ties go to the smaller imaginary part, then smaller real
    part).  Computed in the frame shifted by ``omega_n`` with the
    cancellation-free root pairing, so the slow eigenvalue keeps full
    relative precision even when ``|c| << gamma``.
    """
    shift = pair.omega_n
    a = complex(pair.omega_in - shift)
    b = complex(1j * pair.gamma)
    c = complex(pair.coupling)
    c2 = abs(c) ** 2
    half_tr = 0.5 * (a + b)
    disc = cmath.sqrt(0.25 * (a - b) ** 2 + c2)
    # larger-magnitude root first, the other from the determinant
    big = half_tr + disc if abs(half_tr + disc) >= abs(half_tr - disc) else half_tr - disc
    det = a * b - c2
    small = det / big if big != 0 else 0j
    if c2 == 0.0:
        first, second = b, a
    else:
        first, second = big, small
        if _second_first(first, second, a, c):
            first, second = second, first
    return first + shift, second + shift


def regime_check(pair: EffectivePair, margins: RegimeMargins | None = None) -> RegimeVerdict:
    """Evaluate ``|w_in - w_n| << |c| << gamma`` at the given margins (``<=`` passes)."""
    margins = margins or RegimeMargins()
    detuning = abs(pair.omega_in - pair.omega_n)
    cmag = abs(pair.coupling)
    return RegimeVerdict(
        resonance_ok=detuning * margins.resonance <= cmag,
        width_ok=cmag * margins.width <= pair.gamma,
        detuning=detuning,
        coupling=cmag,
        gamma=pair.gamma,
        margins=margins,
    )


def seesaw_approx(pair: EffectivePair, margins: RegimeMargins | None = None):
    """Asymptotic eigenvalues ``(w_n + i gamma, w_n + i |c|^2 / gamma)``.

    Raises :class:`RegimeViolationError` when the inequality chain fails.
    """
    verdict = regime_check(pair, margins)
    if not verdict.passed:
        raise RegimeViolationError("; ".join(verdict.failures), verdict.failures)
    fast = pair.omega_n + 1j * pair.gamma
    slow = pair.omega_n + 1j * abs(pair.coupling) ** 2 / pair.gamma
    return fast, slow


def detection_timescale(pair: EffectivePair) -> float:
    """``tau_det = gamma / |c|^2``, the inverse of the slow seesaw rate."""
    c2 = abs(pair.coupling) ** 2
    if c2 == 0.0:
        raise ZeroCouplingError("zero coupling: no detection channel")
    return pair.gamma / c2


def restricted_hamiltonian(wp: Wavepacket, medium: Medium, epsilon, gamma) -> np.ndarray:
    """(N+1)-level matrix over ``|in>`` and every ``|n>``.

    Row/column 0 is ``|in>`` at the packet carrier; each excited diagonal
    carries ``omega_n + i gamma``.
    """
    n = len(medium)
    h = np.zeros((n + 1, n + 1), dtype=complex)
    h[0, 0] = wp.carrier
    h[np.arange(1, n + 1), np.arange(1, n + 1)] = medium.omegas + 1j * gamma
    psi = position_amplitude(wp, medium.positions if medium.dimension > 1 else medium.positions[:, 0])
    psi = np.atleast_1d(psi)
    h[0, 1:] = epsilon * np.conj(psi)
    h[1:, 0] = epsilon * psi
    return h


@dataclass(frozen=True)
class FullEvolution:
    times: np.ndarray
    populations: np.ndarray  # shape (len(times), N+1); column 0 is |in>
    steps: int

    @property
    def final(self) -> np.ndarray:
        return self.populations[-1]

    @property
    def norms(self) -> np.ndarray:
        return self.populations.sum(axis=1)

    @property
    def peak(self) -> np.ndarray:
        """Largest recorded population of each level over the run."""
        return self.populations.max(axis=0)


def _rk4(gen, a0, dt, steps, record_every):
    # for constant generator G one RK4 step is the degree-4 Taylor polynomial of exp(dt G)
    z = dt * gen
    eye = np.eye(gen.shape[0], dtype=complex)
    step = eye + z @ (eye + z @ (eye / 2 + z @ (eye / 6 + z / 24)))
    stride = np.linalg.matrix_power(step, record_every)
    a = a0.copy()
    out = [np.abs(a) ** 2]
    for _ in range(steps // record_every):
        a = stride @ a
        out.append(np.abs(a) ** 2)
    return np.array(out)


def integrate_full(
    wp: Wavepacket,
    medium: Medium,
    epsilon: float,
    gamma: float,
    t_final: float,
    steps: int = 1000,
    *,
    tol: float = 1e-6,
    max_steps: int = 2_000_000,
    samples: int = 100,
) -> FullEvolution:
    """Propagate ``(1, 0, ..., 0)`` under the restricted Hamiltonian.

    Fixed-step RK4, doubling the step count until halving the step changes
    the final populations by less than ``tol``.  The frame is rotated by the
    carrier so only detunings set the step size, and the first attempt is
    already inside the RK4 stability region (``dt * ||H||_inf <= 1``).
    """
    h = restricted_hamiltonian(wp, medium, epsilon, gamma)
    h[np.diag_indices_from(h)] -= wp.carrier
    gen = 1j * h
    a0 = np.zeros(h.shape[0], dtype=complex)
    a0[0] = 1.0
    norm_bound = float(np.abs(h).sum(axis=1).max())
    steps = max(int(steps), samples, math.ceil(t_final * norm_bound))
    steps = samples * math.ceil(steps / samples)
    coarse = _rk4(gen, a0, t_final / steps, steps, steps // samples)
    while True:
        fine_steps = 2 * steps
        if fine_steps > max_steps:
            raise NonConvergenceError(
                f"populations not converged to {tol:g} within {max_steps} steps"
            )
        fine = _rk4(gen, a0, t_final / fine_steps, fine_steps, fine_steps // samples)
        if np.all(np.isfinite(fine)) and np.max(np.abs(fine[-1] - coarse[-1])) < tol:
            return FullEvolution(np.linspace(0.0, t_final, samples + 1), fine, fine_steps)
        coarse, steps = fine, fine_steps
