"""Per-trial detection mechanism and deterministic ensembles.

Randomness contract: trial ``i`` draws everything from a generator seeded by
``SeedSequence(master_seed, spawn_key=(0, i))``.  A frozen medium is drawn
once from ``SeedSequence(medium_seed, spawn_key=(1,))``.  No generator is
shared between trials, so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from ..config import RunConfig
from ..dephasing import DiffusionParams, WalkParams, simulate_walk, window_probability
from ..medium import Medium, MediumSpec, resonant_candidates, sample_medium
from ..wavepacket import (
    Dispersion,
    Wavepacket,
    make_gaussian,
    make_grid,
    position_amplitude,
    psi_bound,
    spectral_sample,
    support_interval,
)

__all__ = [
    "SpectralBias",
    "TrialConfig",
    "DetectionEvent",
    "TrialRecord",
    "SpatialHistogram",
    "EnsembleResult",
    "trial_rng",
    "medium_rng",
    "build_trial_config",
    "build_wavepacket",
    "simulate_trial",
    "run_trial",
    "run_ensemble",
]

WALK_STEPS_PER_TAU = 200


@dataclass(frozen=True)
class SpectralBias:
    """Shift ``omega_n`` by ``offset`` for molecules with ``lo <= r < hi``."""

    lo: float
    hi: float
    offset: float

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.where((r >= self.lo) & (r < self.hi), self.offset, 0.0)

    def contains(self, r) -> bool:
        return self.lo <= r < self.hi


@dataclass(frozen=True, eq=False)
class TrialConfig:
    """Everything one trial needs, resolved into runtime objects."""

    wavepacket: Wavepacket
    medium: MediumSpec
    epsilon: float
    gamma: float
    diffusion: DiffusionParams
    n_trials: int = 1
    master_seed: int = 0
    medium_seed: int | None = None
    decision_mode: str = "closed_form"
    medium_mode: str = "fresh_per_trial"
    walk_dt: float | None = None
    step_law: str = "gaussian"
    bins: int = 64
    dissipation_free: bool = False
    bias: SpectralBias | None = None

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.wavepacket.dimension != 1 or self.medium.dimension != 1:
            raise ValueError("trial ensembles are one-dimensional")
        if self.decision_mode not in ("closed_form", "walk"):
            raise ValueError("decision_mode must be 'closed_form' or 'walk'")
        if self.medium_mode not in ("fresh_per_trial", "frozen"):
            raise ValueError("medium_mode must be 'fresh_per_trial' or 'frozen'")

    def replace(self, **changes) -> "TrialConfig":
        return replace(self, **changes)

    @cached_property
    def psi_max(self) -> float:
        return psi_bound(self.wavepacket)

    @cached_property
    def frozen_medium(self) -> Medium:
        seed = self.master_seed if self.medium_seed is None else self.medium_seed
        return self._biased(sample_medium(self.medium, medium_rng(seed)))

    @cached_property
    def edges(self) -> np.ndarray:
        lo, hi = self.medium.extent[0]
        return np.linspace(lo, hi, self.bins + 1)

    def _biased(self, medium: Medium) -> Medium:
        if self.bias is None:
            return medium
        return medium.with_omegas(medium.omegas + self.bias(medium.positions[:, 0]))


@dataclass(frozen=True)
class DetectionEvent:
    trial: int
    molecule: int
    r: float
    omega_n: float
    omega_in: float
    tau_det: float


@dataclass(frozen=True)
class TrialRecord:
    event: DetectionEvent | None
    n_candidates: int


@dataclass(frozen=True, eq=False)
class SpatialHistogram:
    edges: np.ndarray
    counts: np.ndarray
    trials: int
    detections: int

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def rates(self) -> np.ndarray:
        """Detections per trial in each bin."""
        return self.counts / self.trials


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    histogram: SpatialHistogram
    events: list
    n_candidates: np.ndarray = field(repr=False)

    @property
    def detections(self) -> int:
        return len(self.events)


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(0, trial_index)))
    )


def medium_rng(medium_seed: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(medium_seed, spawn_key=(1,)))
    )


def build_wavepacket(cfg: RunConfig, sigma_k=None, span=None) -> Wavepacket:
    w = cfg.wavepacket
    sigma_k = w.sigma_k if sigma_k is None else sigma_k
    span = w.span if span is None else span
    grid = make_grid(w.k0, span, w.grid_points, Dispersion.from_mapping(w.dispersion))
    return make_gaussian(w.k0, sigma_k, grid, x0=w.x0)


def build_trial_config(cfg: RunConfig, wavepacket: Wavepacket | None = None, **overrides) -> TrialConfig:
    """Resolve a :class:`RunConfig` into a :class:`TrialConfig`.

    Unset medium extent defaults to the packet's 99% support and unset
    ``omega_center`` to the packet carrier.
    """
    wp = wavepacket or build_wavepacket(cfg)
    m = cfg.medium
    if m.extent is None:
        extent = (support_interval(wp, 0.99),)
    elif len(m.extent) == 2 and all(isinstance(v, (int, float)) for v in m.extent):
        extent = (tuple(m.extent),)
    else:
        extent = tuple(tuple(e) for e in m.extent)
    medium = MediumSpec(
        density=m.density,
        extent=extent,
        omega_center=wp.carrier if m.omega_center is None else m.omega_center,
        spread=m.spread,
        frequency_law=m.frequency_law,
        count_law=m.count_law,
        count=m.count,
    )
    d = cfg.dephasing
    gamma = cfg.dynamics.gamma
    t = cfg.trials
    tc = TrialConfig(
        wavepacket=wp,
        medium=medium,
        epsilon=cfg.dynamics.epsilon,
        gamma=gamma,
        diffusion=DiffusionParams(
            g=d.g,
            G=gamma if d.G is None else d.G,
            variant=d.diffusion_variant,
            semantics=d.window_semantics,
        ),
        n_trials=t.n_trials,
        master_seed=t.master_seed,
        medium_seed=t.medium_seed,
        decision_mode=t.decision_mode,
        medium_mode=t.medium_mode,
        walk_dt=d.walk_dt,
        step_law=d.step_law,
        bins=t.bins,
    )
    return tc.replace(**overrides) if overrides else tc


def _window_fn(cfg: TrialConfig, medium: Medium):
    def window_of(idx):
        return cfg.epsilon * np.abs(position_amplitude(cfg.wavepacket, medium.positions[idx, 0]))

    return window_of


def _draw(cfg: TrialConfig, trial_index: int):
    rng = trial_rng(cfg.master_seed, trial_index)
    omega_in = spectral_sample(cfg.wavepacket, rng)
    if cfg.medium_mode == "frozen":
        medium = cfg.frozen_medium
    else:
        medium = cfg._biased(sample_medium(cfg.medium, rng))
    return rng, omega_in, medium


def simulate_trial(cfg: TrialConfig, trial_index: int, medium: Medium | None = None) -> TrialRecord:
    """One trial, returning the event (or ``None``) and the candidate count.

    ``medium`` overrides the frozen medium (used for targeted perturbations).
    """
    rng, omega_in, drawn = _draw(cfg, trial_index)
    medium = drawn if medium is None else medium
    cands = resonant_candidates(
        medium, omega_in, _window_fn(cfg, medium), max_window=cfg.epsilon * cfg.psi_max
    )
    if not cands:
        return TrialRecord(None, 0)
    n = cands[0]
    r = float(medium.positions[n, 0])
    cmag = cfg.epsilon * abs(position_amplitude(cfg.wavepacket, r))
    tau = cfg.gamma / cmag**2
    if cfg.dissipation_free:
        detected = True
    elif cfg.decision_mode == "closed_form":
        detected = rng.random() < window_probability(tau, cfg.diffusion)
    else:
        dt = cfg.walk_dt if cfg.walk_dt is not None else tau / WALK_STEPS_PER_TAU
        walk = WalkParams(dt=dt, step_law=cfg.step_law)
        detected = simulate_walk(rng, walk, cfg.diffusion, tau)
    if not detected:
        return TrialRecord(None, len(cands))
    event = DetectionEvent(trial_index, n, r, float(medium.omegas[n]), omega_in, tau)
    return TrialRecord(event, len(cands))


def run_trial(cfg: TrialConfig, trial_index: int) -> DetectionEvent | None:
    """Draw the carrier and medium, pick the closest resonant molecule, decide detection."""
    return simulate_trial(cfg, trial_index).event


def _run_block(cfg, start, stop, medium):
    return [simulate_trial(cfg, i, medium) for i in range(start, stop)]


def run_ensemble(cfg: TrialConfig, threads: int = 1, medium: Medium | None = None) -> EnsembleResult:
    """Run ``cfg.n_trials`` trials and histogram the detection positions.

    The result is identical for any ``threads`` value.
    """
    n = cfg.n_trials
    if cfg.medium_mode == "frozen" and medium is None:
        cfg.frozen_medium  # build once before workers read it
    threads = max(1, int(threads))
    if threads == 1:
        records = _run_block(cfg, 0, n, medium)
    else:
        block = max(1, math.ceil(n / (threads * 8)))
        starts = range(0, n, block)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(lambda s: _run_block(cfg, s, min(s + block, n), medium), starts)
            records = [rec for part in parts for rec in part]
    events = [rec.event for rec in records if rec.event is not None]
    n_cand = np.array([rec.n_candidates for rec in records], dtype=np.int64)
    positions = np.array([e.r for e in events], dtype=float)
    counts, _ = np.histogram(positions, bins=cfg.edges)
    hist = SpatialHistogram(cfg.edges, counts, n, len(events))
    return EnsembleResult(hist, events, n_cand)
