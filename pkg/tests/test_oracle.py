import math

import numpy as np
import pytest
from scipy.special import roots_legendre

from picardlab import harmonics as ha
from picardlab import montecarlo as mc
from picardlab import oracle as orc


def test_pair_moment_hand_values():
    assert orc.pair_moment(1, 1, 1) == pytest.approx(4.0 / 15.0, rel=1e-14)
    assert orc.pair_moment(4, 2, 3) == pytest.approx(0.2949050949050922, rel=1e-12)


def test_pair_moment_window_and_parity_zeros():
    # outside |n0 - n1| <= 2 n2 the projection is empty
    assert abs(orc.pair_moment(6, 1, 2)) <= 1e-12
    # odd total degree integrates to zero on symmetric nodes
    assert abs(orc.pair_moment(3, 2, 1)) <= 1e-12


def test_pair_moment_nonnegative_on_sweep():
    for n0 in range(9):
        for n1 in range(9):
            for n2 in range(4):
                assert orc.pair_moment(n0, n1, n2) >= -1e-12


def test_pair_moment_node_floor_and_domain():
    floor = 2 * (4 + 2 + 2 * 3) + 2
    with pytest.raises(ValueError):
        orc.pair_moment(4, 2, 3, quad_nodes=floor - 1)
    assert orc.pair_moment(4, 2, 3, quad_nodes=floor + 40) == pytest.approx(
        orc.pair_moment(4, 2, 3), rel=1e-13
    )
    with pytest.raises(ValueError):
        orc.pair_moment(-1, 2, 3)


def test_pair_moment_against_monte_carlo():
    est = mc.pair_moment_mc(7, 4000, 1, 1, 1)
    assert abs(est.mean - 4.0 / 15.0) <= 4.0 * est.stderr
    est = mc.pair_moment_mc(7, 3000, 3, 2, 1)
    assert abs(est.mean) <= 4.0 * est.stderr + 1e-12


def test_expected_ii_sq_time_zero_and_monotonic_truncation():
    assert orc.expected_II_sq(0.0, 1.0, 8) == 0.0
    vals = [orc.expected_II_sq(0.1, 1.0, 4, n2_max=cap) for cap in (0, 1, 2, None)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_expected_ii_sq_grows_with_band():
    series = orc.expected_II_series(0.1, 1.0, [2, 4, 8, 16])
    assert np.all(np.diff(series) > 0)
    # shared-table series agrees with independent per-band calls
    singles = [orc.expected_II_sq(0.1, 1.0, b) for b in (2, 4, 8, 16)]
    assert np.allclose(series, singles, rtol=1e-10, atol=0.0)


def test_expected_ii_sq_resonant_part_scales_exactly_as_t_squared():
    a = orc.expected_II_sq(0.05, 1.0, 4, resonant_only=True) / 0.05**2
    b = orc.expected_II_sq(0.1, 1.0, 4, resonant_only=True) / 0.1**2
    assert abs(a - b) <= 1e-10 * abs(b)


def test_expected_ii_sq_against_monte_carlo_small_band():
    sq = mc.second_norm_samples(11, range(2000), 1.0, 0.1, 2)
    mean = float(sq.mean())
    se = float(sq.std(ddof=1) / math.sqrt(len(sq)))
    assert abs(mean - orc.expected_II_sq(0.1, 1.0, 2)) <= 4.0 * se


def test_polar_mass_hand_values():
    assert orc.polar_mass((1, 0)) == pytest.approx(0.6, rel=1e-14)
    assert orc.polar_mass((1, 1)) == pytest.approx(0.2, rel=1e-14)


def test_polar_mass_sectoral_closed_form():
    # A_{n,n} = 1/(2n+3): beta-moment of the sectoral profile
    for n in (1, 2, 5, 20, 300):
        assert orc.polar_mass((n, n)) == pytest.approx(1.0 / (2 * n + 3), rel=1e-12)


def test_sectoral_diagnostic_term_stays_order_one():
    a = orc.polar_mass((300, 300))
    term = 1.5 * (a - 1.0 / 3.0) ** 2
    assert term >= 0.1
    assert abs(term - 1.0 / 6.0) <= 0.01


def test_longitude_average_identity_and_closure():
    # route 1: closed form through the polar mass
    n, k = 5, 2
    a = orc.polar_mass((n, k))
    closed = 1.5 * (a - 1.0 / 3.0) ** 2

    # route 2: full quadrature of the degree-one Wick covariance paired
    # against |Y_{n,k}|^2 in both arguments
    nodes, weights = roots_legendre(16)
    sin = np.sqrt(1.0 - nodes * nodes)
    v = ha.assoc_column(k, n, nodes, sin)[n - k]
    deltas = 2.0 * np.pi * np.arange(8) / 8.0
    inner = (
        nodes[:, None, None] * nodes[None, :, None]
        + sin[:, None, None] * sin[None, :, None] * np.cos(deltas)[None, None, :]
    )
    avg = (inner**2).mean(axis=2)
    analytic = (
        nodes[:, None] ** 2 * nodes[None, :] ** 2
        + 0.5 * sin[:, None] ** 2 * sin[None, :] ** 2
    )
    assert np.max(np.abs(avg - analytic)) <= 1e-14
    wv = weights * v * v
    direct = 0.25 * float(wv @ (avg - 1.0 / 3.0) @ wv)
    assert direct == pytest.approx(closed, rel=1e-11, abs=1e-13)


def test_equatorial_series_nonnegative_and_growing():
    series = orc.equatorial_series([2, 4, 8, 16, 32])
    assert np.all(series >= 0.0)
    assert np.all(np.diff(series) >= 0.0)
    assert np.all(np.diff(series) > 0.0)
    assert series[-1] == pytest.approx(orc.equatorial_diagnostic(32), rel=1e-12)


def test_equatorial_diagnostic_brute_force_small_band():
    cutoff = ha.cluster_cutoff(4)
    total = 0.0
    for n in range(2, cutoff + 1):
        for k in range(-n, n + 1):
            total += 1.5 * (orc.polar_mass((n, k)) - 1.0 / 3.0) ** 2 / (n * n)
    assert orc.equatorial_diagnostic(4) == pytest.approx(total, rel=1e-12)
