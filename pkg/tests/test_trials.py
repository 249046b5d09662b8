import math

import numpy as np
import pytest

from borndetect.config import RunConfig
from borndetect.dephasing import DiffusionParams, p_window_at_detection
from borndetect.errors import TooFewBinsError
from borndetect.medium import Medium, MediumSpec
from borndetect.trials import (
    SpatialHistogram,
    born_fit,
    build_trial_config,
    fit_through_origin,
    run_ensemble,
    run_trial,
    simulate_trial,
)
from borndetect.trials.fitting import bin_mean_psi_power
from borndetect.wavepacket import Wavepacket, make_grid, position_amplitude


@pytest.fixture(scope="module")
def base():
    return build_trial_config(RunConfig())


def test_defaults_resolve(base):
    lo, hi = base.medium.extent[0]
    assert lo == pytest.approx(-hi, abs=1e-6) and hi == pytest.approx(2.576, abs=1e-2)
    assert base.medium.omega_center == pytest.approx(base.wavepacket.carrier)
    assert base.diffusion.G == base.gamma


def test_zero_trials_disallowed(base):
    with pytest.raises(ValueError):
        base.replace(n_trials=0)


def test_single_trial_histogram(base):
    res = run_ensemble(base.replace(n_trials=1))
    assert res.histogram.counts.sum() <= 1 and res.histogram.trials == 1


def test_zero_amplitude_never_detects(base):
    res = run_ensemble(base.replace(epsilon=0.0, n_trials=2000))
    assert res.detections == 0 and res.n_candidates.sum() == 0


def test_forced_resonance_detects_at_that_molecule():
    grid = make_grid(5.0, 2.0, 21)
    amps = np.zeros(21)
    amps[10] = 1.0
    wp = Wavepacket.normalized(grid, amps)
    spec = MediumSpec(1.0, ((-1.0, 1.0),), 5.0, 1.0, count_law="fixed", count=1)
    from borndetect.trials import TrialConfig

    cfg = TrialConfig(wp, spec, epsilon=0.1, gamma=1.0, diffusion=DiffusionParams(g=1e-6, G=1e6))
    med = Medium([0.3], [wp.carrier])
    rec = simulate_trial(cfg, 0, medium=med)
    assert rec.event is not None and rec.event.molecule == 0 and rec.event.r == 0.3
    cmag = 0.1 * abs(position_amplitude(wp, 0.3))
    assert rec.event.tau_det == pytest.approx(1.0 / cmag**2)


def test_same_seed_same_histogram(base):
    cfg = base.replace(n_trials=3000)
    a, b = run_ensemble(cfg), run_ensemble(cfg)
    assert np.array_equal(a.histogram.counts, b.histogram.counts) and a.events == b.events


def test_thread_count_does_not_matter(base):
    cfg = base.replace(n_trials=3000)
    assert run_ensemble(cfg, threads=1).events == run_ensemble(cfg, threads=8).events


def test_trial_is_pure_function_of_index(base):
    cfg = base.replace(n_trials=500)
    events = run_ensemble(cfg).events
    assert events, "expected at least one detection"
    e = events[len(events) // 2]
    assert run_trial(cfg, e.trial) == e


def test_walk_mode_agrees_with_closed_form(base):
    # G * P(0, tau) is the narrow-window limit of the walk, so compare where
    # G is small against the diffusion width (window probability ~ 0.09)
    n = 40_000
    narrow = base.replace(n_trials=n, diffusion=DiffusionParams(g=4e-6, G=base.gamma))
    closed = run_ensemble(narrow)
    walk = run_ensemble(narrow.replace(decision_mode="walk"))
    # identical candidate streams; only the window decision differs
    assert np.array_equal(closed.n_candidates, walk.n_candidates)
    se = math.sqrt(closed.detections + walk.detections)
    assert abs(closed.detections - walk.detections) < 4 * se


def test_per_decile_rate_matches_mechanism(base):
    """Detections per |psi| decile against quadrature of (2 eps |psi| / S) p_window."""
    n = 100_000
    cfg = base.replace(n_trials=n)
    res = run_ensemble(cfg, threads=4)
    lo, hi = cfg.medium.extent[0]
    x = np.linspace(lo, hi, 200_001)
    psi = np.abs(position_amplitude(cfg.wavepacket, x))
    edges = np.quantile(psi, np.linspace(0, 1, 11))
    edges[-1] = np.inf
    c = cfg.epsilon * psi
    pw = np.array([p_window_at_detection(ci, cfg.gamma, cfg.diffusion.g) for ci in c])
    per_point = cfg.medium.density * 2 * c / cfg.medium.spread * pw
    dx = x[1] - x[0]
    band = np.digitize(psi, edges) - 1
    expected = n * np.array([per_point[band == k].sum() * dx for k in range(10)])
    ev_psi = np.abs(position_amplitude(cfg.wavepacket, np.array([e.r for e in res.events])))
    observed = np.bincount(np.digitize(ev_psi, edges) - 1, minlength=10)[:10]
    z = (observed - expected) / np.sqrt(expected)
    assert np.all(np.abs(z) < 4), z


def test_frozen_medium_perturbation(base):
    cfg = base.replace(n_trials=20_000, medium_mode="frozen", medium_seed=7)
    res = run_ensemble(cfg)
    hits = np.bincount([e.molecule for e in res.events])
    target = int(np.argmax(hits))
    assert hits[target] > 0
    med = cfg.frozen_medium
    shift = cfg.medium.spread + 10 * cfg.wavepacket.bandwidth
    omegas = med.omegas.copy()
    omegas[target] += shift
    res2 = run_ensemble(cfg, medium=med.with_omegas(omegas))
    assert all(e.molecule != target for e in res2.events)
    assert res2.detections > 0


def test_fit_exact_square_law(base):
    wp = base.wavepacket
    edges = base.edges
    x = bin_mean_psi_power(wp, edges, 2)
    hist = SpatialHistogram(edges, 123.0 * x * 1000, 1000, 0)
    fit = born_fit(hist, wp, power=2)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert np.max(np.abs(fit.residuals)) < 1e-12
    assert fit.slope == pytest.approx(123.0)


def test_fit_distinguishes_linear_law(base):
    wp = base.wavepacket
    edges = base.edges
    linear = bin_mean_psi_power(wp, edges, 1)
    hist = SpatialHistogram(edges, 50.0 * linear * 1000, 1000, 0)
    sq = born_fit(hist, wp, power=2)
    ab = born_fit(hist, wp, power=1)
    assert ab.r_squared == pytest.approx(1.0, abs=1e-12)
    assert sq.r_squared < ab.r_squared - 0.05


def test_fit_needs_ten_bins(base):
    counts = np.zeros(base.bins)
    counts[:9] = 1
    with pytest.raises(TooFewBinsError):
        born_fit(SpatialHistogram(base.edges, counts, 10, 9), base.wavepacket)


def test_centred_r_squared_of_flat_data():
    x = np.linspace(1, 2, 20)
    y = np.full(20, 3.0) + np.random.default_rng(0).normal(0, 0.01, 20)
    _, r2, _ = fit_through_origin(x, y)
    assert r2 < 0.1
