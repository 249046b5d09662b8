"""Command-line interface.

Output files
------------
events.csv     trial, molecule, r, omega_n, omega_in, tau_det (one row per detection)
histogram.csv  bin_lo, bin_hi, count, psi_sq_bin_mean
summary.json   resolved config, detections, fit slope and R^2, experiment verdicts
appendix.json  the neutron-detection report (``appendix`` subcommand)

Floats are written with shortest round-trip formatting, so every output is a
deterministic function of the configuration and seed.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import appendix as appx
from .config import PRESETS, RunConfig, load_config, preset_path
from .errors import BornDetectError, ConfigError
from .trials import (
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
from .trials.fitting import bin_mean_psi_power

log = logging.getLogger("borndetect")

EXPERIMENTS = ("dissipation_free", "spectral_bias", "rarified", "transverse_scale", "repeatability")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def _num(x):
    """JSON/CSV-safe scalar with shortest round-trip float text."""
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    return _num(obj)


def _write_json(path: Path, data):
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=False) + "\n")


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in map(_num, row)])


def _load(args) -> RunConfig:
    if getattr(args, "config", None) and getattr(args, "preset", None):
        raise ConfigError("use either --config or --preset, not both")
    if getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        cfg = load_config(preset_path(getattr(args, "preset", None) or "born_default"))
    trials = cfg.trials
    if getattr(args, "seed", None) is not None:
        if args.seed < 0 or args.seed >= 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer", "trials.master_seed")
        trials = dataclasses.replace(trials, master_seed=args.seed)
    if getattr(args, "trials", None) is not None:
        trials = dataclasses.replace(trials, n_trials=args.trials)
    cfg = cfg.replace(trials=trials)
    if getattr(args, "out", None):
        cfg = cfg.replace(output_dir=args.out)
    return cfg.validate()


def resolved_config(cfg: RunConfig, tc) -> dict:
    """The run config with every defaulted field filled in."""
    data = cfg.to_dict()
    data["wavepacket"]["grid_span"] = cfg.wavepacket.span
    data["medium"]["extent"] = [list(e) for e in tc.medium.extent]
    data["medium"]["omega_center"] = tc.medium.omega_center
    data["dephasing"]["G"] = tc.diffusion.G
    if data["trials"]["medium_seed"] is None:
        data["trials"]["medium_seed"] = cfg.trials.master_seed
    return data


def regime_diagnostics(tc) -> dict:
    """Resonance/width margins and sparse-vs-crowded classification at the packet peak."""
    psi_peak = tc.psi_max
    c_peak = tc.epsilon * psi_peak
    n_expected = tc.medium.expected_count
    spacing = tc.medium.spread / max(n_expected - 1.0, 1.0)
    tau = tc.gamma / c_peak**2 if c_peak > 0 else math.inf
    p_window_peak = tc.diffusion.G / math.sqrt(2 * math.pi * tc.diffusion.g * tau) if c_peak > 0 else 0.0
    sparse_ratio = c_peak / spacing
    return {
        "psi_peak": psi_peak,
        "coupling_peak": c_peak,
        "gamma_over_coupling_peak": tc.gamma / c_peak if c_peak > 0 else math.inf,
        "expected_molecules": n_expected,
        "mean_level_spacing": spacing,
        "coupling_peak_over_spacing": sparse_ratio,
        "classification": "sparse" if sparse_ratio <= 0.1 else "crowded",
        "p_window_peak_unclamped": p_window_peak,
        "carrier": tc.wavepacket.carrier,
        "bandwidth": tc.wavepacket.bandwidth,
    }


def regime_warnings(tc, cfg: RunConfig, diag: dict) -> list:
    out = []
    m_width = cfg.dynamics.margins[1]
    if diag["coupling_peak"] * m_width > tc.gamma:
        out.append(
            f"regime: gamma = {tc.gamma:g} is not >> eps|psi|_peak = {diag['coupling_peak']:.3g} "
            f"at margin {m_width:g} (large-width inequality fails)"
        )
    if diag["classification"] != "sparse":
        out.append(
            f"regime: eps|psi|_peak / delta = {diag['coupling_peak_over_spacing']:.3g} > 0.1 "
            "(crowded medium; closest-match selection distorts the density)"
        )
    if diag["p_window_peak_unclamped"] > 1:
        out.append(
            f"regime: window probability at the peak is {diag['p_window_peak_unclamped']:.3g} > 1 "
            "and will be clamped"
        )
    if tc.wavepacket.bandwidth >= tc.medium.spread:
        out.append("regime: packet bandwidth exceeds the level spread S")
    return out


def _fit_block(fit):
    return {"slope": fit.slope, "r_squared": fit.r_squared, "power": fit.power}


def _write_ensemble(out: Path, tc, result):
    _write_csv(
        out / "events.csv",
        ["trial", "molecule", "r", "omega_n", "omega_in", "tau_det"],
        ([e.trial, e.molecule, e.r, e.omega_n, e.omega_in, e.tau_det] for e in result.events),
    )
    hist = result.histogram
    psi_sq = bin_mean_psi_power(tc.wavepacket, hist.edges, 2)
    _write_csv(
        out / "histogram.csv",
        ["bin_lo", "bin_hi", "count", "psi_sq_bin_mean"],
        zip(hist.edges[:-1], hist.edges[1:], hist.counts, psi_sq),
    )


def _try_fit(hist, wp, power):
    try:
        return _fit_block(born_fit(hist, wp, power))
    except BornDetectError as exc:
        return {"error": str(exc)}


def cmd_simulate(args) -> int:
    cfg = _load(args)
    tc = build_trial_config(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %d trials (seed %d)", tc.n_trials, tc.master_seed)
    result = run_ensemble(tc, threads=args.threads)
    _write_ensemble(out, tc, result)
    summary = {
        "command": "simulate",
        "config": resolved_config(cfg, tc),
        "trials": tc.n_trials,
        "detections": result.detections,
        "mean_candidates": float(result.n_candidates.mean()),
        "fit": _try_fit(result.histogram, tc.wavepacket, 2),
        "fit_abs_psi": _try_fit(result.histogram, tc.wavepacket, 1),
        "regime": regime_diagnostics(tc),
    }
    _write_json(out / "summary.json", summary)
    fit = summary["fit"]
    print(f"detections: {result.detections} / {tc.n_trials}")
    if "r_squared" in fit:
        print(f"fit vs |psi|^2: slope {fit['slope']:.4g}, R^2 {fit['r_squared']:.4f}")
    print(f"wrote {out / 'events.csv'}, {out / 'histogram.csv'}, {out / 'summary.json'}")
    return EXIT_OK


def _experiment(name, cfg: RunConfig, tc, threads, n_override):
    ex = cfg.experiments
    tables = {}
    if name == "repeatability":
        n = n_override or ex.repeatability.n_trials
        sub = tc.replace(medium_mode="frozen", n_trials=n)
        report = repeatability_experiment(sub, threads=(1, threads))
        verdict = {
            "verdict": report.identical,
            "events_first": report.events_first,
            "events_second": report.events_second,
            "first_difference": report.first_difference,
            "threads": [1, threads],
        }
    elif name == "dissipation_free":
        n = n_override or ex.dissipation_free.n_trials
        res = experiment_dissipation_free(tc.replace(n_trials=n), threads=threads)
        verdict = {
            "verdict": res.verdict,
            "detections": res.histogram.detections,
            "fit_abs_psi": _fit_block(res.fit_abs),
            "fit_psi_sq": _fit_block(res.fit_sq),
        }
        tables["histogram.csv"] = _hist_table(tc, res.histogram)
    elif name == "spectral_bias":
        sb = ex.spectral_bias
        n = n_override or sb.n_trials
        sub = tc.replace(n_trials=n)
        bias = default_bias(sub, sb.offset_bandwidths, tuple(sb.region))
        res = experiment_spectral_bias(sub, bias, threads=threads)
        verdict = {
            "verdict": res.verdict,
            "region": [bias.lo, bias.hi],
            "offset": bias.offset,
            "region_detections": res.region_count,
            "outside_detections": res.outside_count,
        }
        tables["histogram.csv"] = _hist_table(tc, res.histogram)
    elif name == "rarified":
        n = n_override or ex.rarified.n_trials
        res = experiment_rarified(tc, ex.rarified.densities, n)
        verdict = {
            "verdict": res.verdict,
            "monotone": res.monotone,
            "exceeds_half_past_crossover": res.exceeds_half_past_crossover,
        }
        tables["rarified.csv"] = (list(res.rows[0]), [list(r.values()) for r in res.rows])
    else:
        ts = ex.transverse_scale
        n = n_override or ts.n_trials
        res = experiment_transverse_scale(tc, ts.widths, ts.epsilon, n)
        verdict = {
            "verdict": res.verdict,
            "crossover_width": res.crossover,
            "analytic_crossover_width": res.analytic_crossover,
            "ratio": res.ratio,
        }
        tables["transverse_scale.csv"] = (list(res.rows[0]), [list(r.values()) for r in res.rows])
    return verdict, tables


def _hist_table(tc, hist):
    psi_sq = bin_mean_psi_power(tc.wavepacket, hist.edges, 2)
    return (
        ["bin_lo", "bin_hi", "count", "psi_sq_bin_mean"],
        list(zip(hist.edges[:-1], hist.edges[1:], hist.counts, psi_sq)),
    )


def cmd_experiment(args) -> int:
    if args.name not in EXPERIMENTS:
        print(
            f"error: unknown experiment {args.name!r}; valid names: {', '.join(EXPERIMENTS)}",
            file=sys.stderr,
        )
        return EXIT_CONFIG
    n_override = args.trials
    args.trials = None
    cfg = _load(args)
    tc = build_trial_config(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    verdict, tables = _experiment(args.name, cfg, tc, args.threads, n_override)
    for fname, (header, rows) in tables.items():
        _write_csv(out / fname, header, rows)
    summary = {
        "command": "experiment",
        "experiment": args.name,
        "config": resolved_config(cfg, tc),
        "verdicts": {args.name: verdict},
    }
    _write_json(out / "summary.json", summary)
    print(f"{args.name}: verdict {'PASS' if verdict['verdict'] else 'FAIL'}")
    return EXIT_OK


APPENDIX_FLAGS = {
    "cross_section": "reaction cross section (m^2)",
    "wavelength": "neutron wavelength (m)",
    "bandwidth_fraction": "fractional wavenumber bandwidth dk/k",
    "density": "molecular number density (m^-3)",
    "temperature": "gas temperature (K)",
    "width": "transverse packet width (m)",
}


def cmd_appendix(args) -> int:
    overrides = {k: getattr(args, k) for k in APPENDIX_FLAGS if getattr(args, k) is not None}
    inputs = appx.NeutronExperimentInputs(**overrides)
    report = appx.compute_report(inputs)
    print(appx.format_table(report))
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    data = {"inputs": dataclasses.asdict(inputs), **report.to_dict()}
    _write_json(out / "appendix.json", data)
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    tc = build_trial_config(cfg)
    diag = regime_diagnostics(tc)
    print("config OK")
    for key, val in diag.items():
        print(f"  {key}: {val:.6g}" if isinstance(val, float) else f"  {key}: {val}")
    for w in regime_warnings(tc, cfg, diag):
        print(f"WARNING: {w}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="borndetect",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_run=True):
        p.add_argument("--config", metavar="PATH", help="JSON run config")
        p.add_argument("--preset", choices=PRESETS, help="bundled config (default born_default)")
        if with_run:
            p.add_argument("--seed", type=int, metavar="U64", help="master seed override")
            p.add_argument("--out", metavar="DIR", help="output directory override")
            p.add_argument("--threads", type=int, default=1, metavar="N",
                           help="worker threads; results do not depend on it")
            p.add_argument("--trials", type=int, metavar="N", help="trial count override")

    p = sub.add_parser("simulate", help="run the detection ensemble and Born-rule fit",
                       description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run one deviation-regime experiment")
    p.add_argument("name", help=f"one of: {', '.join(EXPERIMENTS)}")
    common(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("appendix", help="neutron-detection parameter estimates")
    p.add_argument("--out", metavar="DIR", help="directory for appendix.json")
    for name, help_text in APPENDIX_FLAGS.items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, help=help_text)
    p.set_defaults(func=cmd_appendix)

    p = sub.add_parser("validate", help="check a config and print regime diagnostics")
    common(p, with_run=False)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BornDetectError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
