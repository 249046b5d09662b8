"""Monte Carlo detection trials, ensemble fits and deviation experiments."""

from .engine import (
    DetectionEvent,
    EnsembleResult,
    SpatialHistogram,
    SpectralBias,
    TrialConfig,
    TrialRecord,
    build_trial_config,
    build_wavepacket,
    medium_rng,
    run_ensemble,
    run_trial,
    simulate_trial,
    trial_rng,
)
from .experiments import (
    DissipationFreeResult,
    RarifiedResult,
    RepeatabilityReport,
    SpectralBiasResult,
    TransverseScaleResult,
    compare_runs,
    default_bias,
    experiment_dissipation_free,
    experiment_rarified,
    experiment_spectral_bias,
    experiment_transverse_scale,
    repeatability_experiment,
)
from .fitting import BornFit, bin_mean_psi_power, born_fit, fit_through_origin

__all__ = [
    "DetectionEvent",
    "EnsembleResult",
    "SpatialHistogram",
    "SpectralBias",
    "TrialConfig",
    "TrialRecord",
    "build_trial_config",
    "build_wavepacket",
    "medium_rng",
    "run_ensemble",
    "run_trial",
    "simulate_trial",
    "trial_rng",
    "DissipationFreeResult",
    "RarifiedResult",
    "RepeatabilityReport",
    "SpectralBiasResult",
    "TransverseScaleResult",
    "compare_runs",
    "default_bias",
    "experiment_dissipation_free",
    "experiment_rarified",
    "experiment_spectral_bias",
    "experiment_transverse_scale",
    "repeatability_experiment",
    "BornFit",
    "bin_mean_psi_power",
    "born_fit",
    "fit_through_origin",
]
