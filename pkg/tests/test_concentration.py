import math

import numpy as np
import pytest
from scipy.special import roots_legendre

from picardlab import concentration as cn
from picardlab import harmonics as ha


def test_band_mass_small_delta_captures_everything():
    for idx in ((5, 3), (12, 12), (9, 0)):
        assert cn.band_mass(idx, 1e-12) == pytest.approx(1.0, abs=1e-10)


def test_band_mass_hand_value_degree_one():
    assert cn.band_mass((1, 1), 0.5) == pytest.approx(0.3125, rel=1e-14)


def test_band_mass_monotone_in_delta_and_k_parity():
    deltas = np.linspace(0.05, 0.95, 10)
    masses = [cn.band_mass((7, 4), d) for d in deltas]
    assert all(b <= a + 1e-15 for a, b in zip(masses, masses[1:]))
    assert cn.band_mass((7, -4), 0.3) == cn.band_mass((7, 4), 0.3)


def test_band_and_interior_masses_sum_to_one():
    # independent rule on [0, delta] complements the band integral
    for n, k, delta in ((6, 3, 0.4), (11, 11, 0.25), (9, 0, 0.7)):
        nodes, weights = roots_legendre(n + 2)
        c = 0.5 * delta * (nodes + 1.0)
        s = np.sqrt(1.0 - c * c)
        v = ha.assoc_column(abs(k), n, c, s)[n - abs(k)]
        interior = 0.5 * delta * float(np.dot(weights, v * v))
        assert interior + cn.band_mass((n, k), delta) == pytest.approx(
            1.0, abs=1e-10
        )


def test_band_mass_domain_errors():
    with pytest.raises(ValueError):
        cn.band_mass((3, 1), 0.0)
    with pytest.raises(ValueError):
        cn.band_mass((3, 1), 1.0)


def test_window_edge_order_formula():
    assert cn.k_edge(11, 0.3) == 11
    assert cn.k_edge(100, 0.3) == math.ceil(math.sqrt(100 * 101 * 0.91))


def test_window_edge_mass_scales_like_inverse_square():
    delta = 0.3
    scaled = []
    for n in (16, 32, 64, 128):
        ke = cn.k_edge(n, delta)
        scaled.append(n * n * cn.band_mass((n, ke), 2.0 * delta))
    assert max(scaled) <= 10.0 * scaled[0]
    assert min(scaled) > 0.0


def test_concentration_scan_orders_and_decay():
    scan = cn.concentration_scan(0.3, [16, 32, 64, 128])
    assert scan.edge_orders == tuple(cn.k_edge(n, 0.3) for n in (16, 32, 64, 128))
    assert np.all(scan.sectoral_mass <= scan.edge_mass)
    assert scan.sectoral_slope <= scan.edge_slope
    assert scan.edge_slope < -1.0
    assert scan.edge_r_squared > 0.9
    assert np.all(scan.edge_mass > 0.0)
    assert np.all(np.diff(scan.edge_mass) < 0.0)


def test_concentration_scan_rejects_bad_windows():
    with pytest.raises(ValueError):
        cn.concentration_scan(0.6, [32, 64])
    with pytest.raises(ValueError):
        cn.concentration_scan(0.3, [10])


def test_lp_norm_p_two_is_unit():
    for idx in ((3, 1), (20, 20), (14, 0)):
        assert cn.lp_norm(idx, 2) == pytest.approx(1.0, rel=1e-13)


def test_lp_norm_hand_value_zonal_fourth_power():
    assert cn.lp_norm((1, 0), 4) == pytest.approx(
        (9.0 / 5.0) ** 0.25, rel=1e-14
    )
    assert cn.lp_norm((1, 0), 4) == pytest.approx(1.1582921852882693, rel=1e-13)


def test_lp_norm_odd_exponent_matches_dense_quadrature():
    val = cn.lp_norm((6, 2), 3)
    nodes, weights = roots_legendre(500)
    s = np.sqrt(1.0 - nodes * nodes)
    v = ha.assoc_column(2, 6, nodes, s)[4]
    dense = (0.5 * float(np.dot(weights, np.abs(v) ** 3))) ** (1.0 / 3.0)
    assert val == pytest.approx(dense, rel=1e-5)


def test_lp_norm_rejects_small_p():
    with pytest.raises(ValueError):
        cn.lp_norm((3, 1), 1.5)


def test_lp_growth_stays_under_spectral_envelope():
    # L^4 <= 3 lambda^{1/8} and L^6 <= 3 lambda^{1/6} across orders
    for n in (4, 16, 64, 256):
        lam = math.sqrt(ha.eigenvalue_sq(n))
        for k in (0, n // 2, n):
            r4 = cn.lp_norm((n, k), 4) / lam ** 0.125
            r6 = cn.lp_norm((n, k), 6) / lam ** (1.0 / 6.0)
            assert 0.2 <= r4 <= 3.0
            assert 0.2 <= r6 <= 3.0
