"""Least-squares fit of binned detection rates against powers of ``|psi|``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import TooFewBinsError
from ..wavepacket import Wavepacket, position_amplitude

__all__ = ["BornFit", "bin_mean_psi_power", "fit_through_origin", "born_fit"]

MIN_NONEMPTY_BINS = 10


@dataclass(frozen=True, eq=False)
class BornFit:
    slope: float
    r_squared: float
    residuals: np.ndarray
    predictor: np.ndarray
    rates: np.ndarray
    power: int


def bin_mean_psi_power(wp: Wavepacket, edges, power=2, subsamples=32) -> np.ndarray:
    """Average of ``|psi(r)|**power`` over each bin (midpoint subsampling)."""
    edges = np.asarray(edges, dtype=float)
    frac = (np.arange(subsamples) + 0.5) / subsamples
    pts = edges[:-1, None] + np.diff(edges)[:, None] * frac[None, :]
    vals = np.abs(position_amplitude(wp, pts.ravel())) ** power
    return vals.reshape(pts.shape).mean(axis=1)


def fit_through_origin(x, y):
    """Slope, R^2 and residuals of ``y ~ slope * x``.

    R^2 is measured against the mean of ``y`` (centred), so a flat response
    scores near zero even though the fit has no intercept.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope = float(np.dot(x, y) / np.dot(x, x))
    resid = y - slope * x
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return slope, r2, resid


def born_fit(hist, wp: Wavepacket, power=2) -> BornFit:
    """Fit per-trial bin detection rate against bin-averaged ``|psi|**power``."""
    nonempty = int(np.count_nonzero(hist.counts))
    if nonempty < MIN_NONEMPTY_BINS:
        raise TooFewBinsError(
            f"{nonempty} nonempty bins; the fit needs at least {MIN_NONEMPTY_BINS}"
        )
    x = bin_mean_psi_power(wp, hist.edges, power)
    y = hist.counts / hist.trials
    slope, r2, resid = fit_through_origin(x, y)
    return BornFit(slope, r2, resid, x, y, power)
