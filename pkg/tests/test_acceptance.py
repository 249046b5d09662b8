"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""

import math
import time

import numpy as np
from scipy.integrate import quad

from borndetect import appendix as ap
from borndetect.born import p_detection, p_resonance
from borndetect.config import RunConfig, load_config, preset_path
from borndetect.dephasing import (
    DiffusionParams,
    WalkParams,
    occupancy_pdf,
    p_window_at_detection,
    simulate_walks,
    window_probability,
)
from borndetect.medium import Medium
from borndetect.trials import (
    born_fit,
    build_trial_config,
    default_bias,
    experiment_dissipation_free,
    experiment_rarified,
    experiment_spectral_bias,
    experiment_transverse_scale,
    repeatability_experiment,
    run_ensemble,
)
from borndetect.twolevel import EffectivePair, exact_eigen, integrate_full, seesaw_approx
from borndetect.wavepacket import position_amplitude

from helpers import closest_match_media, reference_packet


def test_criterion_1_born_rule_emergence(report_criterion):
    cfg = RunConfig()
    assert cfg.trials.n_trials >= 100_000 and cfg.trials.decision_mode == "closed_form"
    t0 = time.perf_counter()
    tc = build_trial_config(cfg)
    result = run_ensemble(tc)
    fit = born_fit(result.histogram, tc.wavepacket, power=2)
    elapsed = time.perf_counter() - t0
    report_criterion(
        1,
        "Born-rule fit on the default configuration",
        fit.r_squared >= 0.98 and elapsed <= 120,
        f"R^2 = {fit.r_squared:.4f} over {tc.n_trials} trials, "
        f"{result.detections} detections, {elapsed:.1f} s",
    )


def test_criterion_2_detection_factorizes(report_criterion):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        eps, psi, gamma, g, omega = 10 ** rng.uniform(-4, 1, 5)
        lhs = p_detection(eps, psi, gamma, g, omega, clamp=False)
        rhs = p_resonance(eps, psi, omega, clamp=False) * p_window_at_detection(
            eps * psi, gamma, g, clamp=False
        )
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    report_criterion(2, "detection = resonance x window", worst <= 1e-12,
                     f"max relative deviation {worst:.2e} over 1000 draws")


def test_criterion_3_seesaw_asymptotics(report_criterion):
    ratios = np.logspace(-5, -2, 31)
    worst = 0.0
    for ratio in ratios:
        pair = EffectivePair(0.0, 0.0, ratio, 1.0)
        _, exact_small = exact_eigen(pair)
        _, approx_small = seesaw_approx(pair)
        err = abs(approx_small - exact_small) / abs(exact_small)
        worst = max(worst, err / (10 * ratio**2))
    report_criterion(3, "seesaw small eigenvalue", worst <= 1.0,
                     f"max error / (10 (|c|/gamma)^2) = {worst:.3f}")


def test_criterion_4_walk_matches_window(report_criterion):
    g, tau = 1.0, 1.0
    p = DiffusionParams(g=g, G=0.05 * math.sqrt(2 * math.pi * g * tau))
    n = 10**6
    hits = simulate_walks(np.random.default_rng(4), WalkParams(dt=tau / 100), p, tau, n)
    want = window_probability(tau, p)
    se = math.sqrt(want * (1 - want) / n)
    z = (hits.mean() - want) / se
    report_criterion(4, "random walk vs window probability", abs(z) < 4,
                     f"rate {hits.mean():.5f} vs {want:.5f}, z = {z:+.2f}")


def test_criterion_5_full_model(report_criterion):
    runs = closest_match_media(n_seeds=100)
    peak_hits = sum(int(np.argmax(evo.peak[1:]) == closest) for closest, evo in runs)
    final_hits = sum(int(np.argmax(evo.final[1:]) == closest) for closest, evo in runs)

    wp = reference_packet()
    eps, r = 0.02, 0.25
    cmag = eps * abs(position_amplitude(wp, r))
    evo = integrate_full(wp, Medium([r], [wp.carrier]), eps, 0.0, 3.0 / cmag, tol=1e-9)
    rabi_err = float(np.max(np.abs(evo.populations[:, 1] - np.sin(cmag * evo.times) ** 2)))

    report_criterion(
        5,
        "closest-in-frequency molecule has the largest excited population",
        peak_hits >= 95 and rabi_err <= 1e-6,
        f"{peak_hits}/100 seeds by peak population over [0, 3/|c|] "
        f"({final_hits}/100 at the final instant); Rabi max error {rabi_err:.1e}",
    )


def test_criterion_6_repeatability(report_criterion):
    cfg = load_config(preset_path("repeatability"))
    tc = build_trial_config(cfg)
    assert tc.medium_mode == "frozen"
    same = repeatability_experiment(tc, threads=(1, 1))
    threaded = repeatability_experiment(tc, threads=(1, 8))
    report_criterion(
        6,
        "frozen medium reproduces the event sequence",
        same.identical and threaded.identical and same.events_first > 0,
        f"{same.events_first} events; repeat identical {same.identical}, "
        f"1 vs 8 threads identical {threaded.identical}",
    )


def test_criterion_7_deviation_suite(report_criterion):
    cfg = RunConfig()
    tc = build_trial_config(cfg)
    ex = cfg.experiments

    free = experiment_dissipation_free(tc.replace(n_trials=ex.dissipation_free.n_trials))
    sub = tc.replace(n_trials=100_000)
    bias = default_bias(sub, ex.spectral_bias.offset_bandwidths, tuple(ex.spectral_bias.region))
    biased = experiment_spectral_bias(sub, bias)
    rar = experiment_rarified(tc, ex.rarified.densities, ex.rarified.n_trials)
    ts = ex.transverse_scale
    trans = experiment_transverse_scale(tc, ts.widths, ts.epsilon, ts.n_trials)

    parts = {
        "a": free.verdict,
        "b": biased.verdict,
        "c": rar.verdict,
        "d": trans.verdict,
    }
    detail = (
        f"a: R^2 |psi| {free.fit_abs.r_squared:.3f} vs |psi|^2 {free.fit_sq.r_squared:.3f}; "
        f"b: {biased.region_count} in region, {biased.outside_count} outside; "
        f"c: monotone {rar.monotone}, past-crossover > 0.5 {rar.exceeds_half_past_crossover}; "
    )
    if trans.crossover is None:
        detail += "d: no crossover found"
    else:
        detail += f"d: crossover {trans.crossover:.3g} vs closed form {trans.analytic_crossover:.3g}"
    report_criterion(7, "deviation-regime suite", all(parts.values()), detail)


def test_criterion_8_appendix(report_criterion):
    t0 = time.perf_counter()
    report = ap.compute_report()
    cmp = ap.comparisons(report)
    elapsed = time.perf_counter() - t0
    outside = [k for k, v in cmp.items() if not v["within"]]
    flagged = sorted(d["quantity"] for d in report.discrepancies)
    ok = (
        not outside
        and flagged == ["bandwidth_hbar_omega_eV", "density"]
        and report.chain.all_pass
        and elapsed <= 1.0
    )
    report_criterion(
        8,
        "neutron-detection estimates",
        ok,
        f"{len(cmp) - len(outside)}/{len(cmp)} printed values within tolerance, "
        f"flagged {flagged}, {elapsed * 1e3:.1f} ms",
    )


def test_criterion_9_diffusion_normalization(report_criterion):
    tau = 1.0
    norm = DiffusionParams(g=0.8, G=1.0, variant="normalized")
    written = DiffusionParams(g=0.8, G=1.0, variant="as_written")
    a, _ = quad(lambda x: occupancy_pdf(x, tau, norm), -np.inf, np.inf, epsabs=1e-13)
    b, _ = quad(lambda x: occupancy_pdf(x, tau, written), -np.inf, np.inf, epsabs=1e-13)
    report_criterion(
        9,
        "occupancy profile normalization",
        abs(a - 1) <= 1e-6 and abs(b - math.sqrt(math.pi)) <= 1e-6,
        f"normalized {a:.9f}, as written {b:.9f} (sqrt(pi) = {math.sqrt(math.pi):.9f})",
    )
