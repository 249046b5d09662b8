"""Shared setups for the test modules."""

import numpy as np

from borndetect.medium import MediumSpec, sample_medium
from borndetect.twolevel import integrate_full
from borndetect.wavepacket import make_gaussian, make_grid, position_amplitude, psi_bound

# Peak coupling as a fraction of the mean level spacing in the closest-match media.
SPARSE_RATIO = 0.01


def reference_packet():
    return make_gaussian(10.0, 0.5, make_grid(10.0, 8.0, 257))


def closest_match_media(n_seeds=100, n_molecules=100, spread=1.0, half_extent=0.5):
    """Run the full restricted dynamics on seeded sparse media.

    Returns one ``(closest, evolution)`` pair per seed, where ``closest``
    indexes the molecule with the smallest ``|omega_in - omega_n|``.
    """
    wp = reference_packet()
    spec = MediumSpec(
        density=n_molecules / (2 * half_extent),
        extent=((-half_extent, half_extent),),
        omega_center=wp.carrier,
        spread=spread,
        count_law="fixed",
        count=n_molecules,
    )
    delta = spread / (n_molecules - 1)
    eps = SPARSE_RATIO * delta / psi_bound(wp)
    out = []
    for seed in range(n_seeds):
        med = sample_medium(spec, np.random.default_rng(seed))
        c = eps * np.abs(position_amplitude(wp, med.positions[:, 0]))
        closest = int(np.argmin(np.abs(med.omegas - wp.carrier)))
        evo = integrate_full(wp, med, eps, 0.0, 3.0 / c[closest], samples=400)
        out.append((closest, evo))
    return out
