import math

import numpy as np
import pytest

from borndetect.born import BornParams, efficiency_factorization, p_detection, p_resonance
from borndetect.dephasing import p_window_at_detection


def test_resonance_examples():
    assert p_resonance(0.3, 0.0, 1.0) == 0.0
    assert p_resonance(1.0, 0.25, 1.0) == pytest.approx(0.5)
    assert p_resonance(1.0, 2.0, 1.0) == 1.0
    assert p_resonance(1.0, 2.0, 1.0, clamp=False) == pytest.approx(4.0)


def test_resonance_overlap_monte_carlo():
    # carrier and level both uniform over a band of width Omega; a hit is
    # |w_in - w_n| < eps |psi|.  Levels are wrapped on the band so edge
    # effects do not bias the comparison.
    rng = np.random.default_rng(17)
    n, omega, half = 10**6, 1.0, 0.004
    w_in = rng.uniform(0, omega, n)
    w_n = rng.uniform(0, omega, n)
    d = np.abs(w_in - w_n)
    d = np.minimum(d, omega - d)
    rate = np.mean(d < half)
    want = p_resonance(half, 1.0, omega)
    assert abs(rate - want) < 4 * math.sqrt(want * (1 - want) / n)


def test_detection_examples():
    assert p_detection(1.0, 0.0, 1.0, 1.0, 1.0) == 0.0
    assert p_detection(1.0, 1e-2, 1.0, 1.0, 1.0) == pytest.approx(7.979e-5, rel=1e-4)
    assert p_detection(1.0, 1e-2, 1.0, 1.0, 1.0) == pytest.approx(1e-4 * math.sqrt(2 / math.pi), rel=1e-15)


def test_detection_is_resonance_times_window():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        eps, psi, gamma, g, omega = 10 ** rng.uniform(-4, 1, 5)
        lhs = p_detection(eps, psi, gamma, g, omega, clamp=False)
        rhs = p_resonance(eps, psi, omega, clamp=False) * p_window_at_detection(
            eps * psi, gamma, g, clamp=False
        )
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)


def test_factorization_product():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        eps, gamma, g, omega, w_in, psi = 10 ** rng.uniform(-3, 2, 6)
        parts = efficiency_factorization(BornParams(eps, gamma, g, omega, w_in), psi)
        want = p_detection(eps, psi, gamma, g, omega, clamp=False)
        assert abs(np.prod(parts) - want) <= 1e-12 * want


def test_interaction_volume_dimensions():
    # SI exponents (metre, second): eps ~ s^-1 m^(d/2), omega ~ s^-1
    for d in (1, 3):
        eps = np.array([d / 2, -1.0])
        omega = np.array([0.0, -1.0])
        assert np.array_equal(2 * eps - 2 * omega, [d, 0.0])


def test_epsilon_scaling():
    base = efficiency_factorization(BornParams(0.1, 1.0, 0.2, 0.5, 3.0), 0.7)
    doubled = efficiency_factorization(BornParams(0.2, 1.0, 0.2, 0.5, 3.0), 0.7)
    assert doubled[1] == pytest.approx(4 * base[1], rel=1e-15)
    assert doubled[2] == base[2] and doubled[0] == base[0]


def test_invalid_parameters():
    with pytest.raises(ValueError):
        BornParams(0.1, 0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        p_resonance(0.1, 1.0, 0.0)
