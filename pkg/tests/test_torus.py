import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from picardlab import torus as to

BETA = to.DEFAULT_BETA


def test_quadratic_form_hand_values():
    assert to.q_form(BETA, (1, 0)) == 1.0
    assert to.q_form(BETA, (1, 1)) == pytest.approx(1.0 + math.sqrt(2.0), rel=1e-14)
    assert to.q_form(BETA, (2, -1), (1, 3)) == pytest.approx(
        2.0 - 3.0 * math.sqrt(2.0), rel=1e-14
    )


def test_resonance_function_examples_and_symmetry():
    assert to.phi_resonance(BETA, (3, 1), (3, 1), (9, -2)) == 0.0
    assert to.phi_resonance(BETA, (2, 2), (1, 1), (0, 0)) == pytest.approx(
        2.0 * (1.0 + math.sqrt(2.0)), rel=1e-14
    )
    assert to.phi_resonance(BETA, (5, -1), (2, 3), (-4, 0)) == pytest.approx(
        to.phi_resonance(BETA, (-4, 0), (2, 3), (5, -1)), rel=1e-14
    )


@given(st.lists(st.integers(-20, 20), min_size=6, max_size=6))
def test_resonance_matches_frequency_identity(v):
    n1, n2, n3 = (v[0], v[1]), (v[2], v[3]), (v[4], v[5])
    out = (n1[0] - n2[0] + n3[0], n1[1] - n2[1] + n3[1])
    identity = (
        to.q_form(BETA, n1)
        - to.q_form(BETA, n2)
        + to.q_form(BETA, n3)
        - to.q_form(BETA, out)
    )
    assert to.phi_resonance(BETA, n1, n2, n3) == pytest.approx(identity, abs=1e-9)


def test_mode_enumeration_smallest_truncation():
    modes = to.enumerate_modes(BETA, 1)
    assert modes.shape == (3, 2)
    assert sorted(map(tuple, modes)) == [(-1, 0), (0, 0), (1, 0)]


def test_triple_sum_matches_brute_force():
    for n in (1, 2):
        for kernel in ("exact-time", "surrogate"):
            cfg = to.TorusConfig(N=n)
            fast = to.expected_iterate_sq_torus(cfg, kernel_mode=kernel)
            slow = to.brute_force_iterate_sq(cfg, kernel_mode=kernel)
            assert fast == pytest.approx(slow, rel=1e-12)


def test_triple_sum_matches_independent_loop():
    # independent route: resonance through the frequency identity,
    # kernel through cmath, plain nested loops
    s, t, n_top = 0.45, 0.1, 2
    bsq = math.sqrt(2.0)
    modes = []
    for k in range(-n_top, n_top + 1):
        for m in range(-n_top, n_top + 1):
            if k * k + bsq * m * m <= n_top * n_top + 1e-12:
                modes.append((k, m))
    q = {n: n[0] ** 2 + bsq * n[1] ** 2 for n in modes}
    exact = surrogate = 0.0
    for n1 in modes:
        for n2 in modes:
            if n2 == n1:
                continue
            for n3 in modes:
                if n3 == n2:
                    continue
                out = (n1[0] - n2[0] + n3[0], n1[1] - n2[1] + n3[1])
                q_out = out[0] ** 2 + bsq * out[1] ** 2
                phi = q[n1] - q[n2] + q[n3] - q_out
                if abs(phi) < 1e-9:
                    w = t * t
                else:
                    w = abs((1.0 - cmath.exp(1j * t * phi)) / phi) ** 2
                base = (1.0 + q_out) ** s / (
                    (1.0 + q[n1]) * (1.0 + q[n2]) * (1.0 + q[n3])
                )
                exact += base * w
                surrogate += base / (1.0 + phi * phi)
    cfg = to.TorusConfig(N=n_top)
    assert to.expected_iterate_sq_torus(cfg) == pytest.approx(exact, rel=1e-10)
    assert to.expected_iterate_sq_torus(cfg, kernel_mode="surrogate") == pytest.approx(
        surrogate, rel=1e-10
    )


def test_series_monotone_and_consistent_with_single_calls():
    cfg = to.TorusConfig()
    for kernel in ("exact-time", "surrogate"):
        series = to.iterate_sq_series(cfg, [2, 4, 6], kernel_mode=kernel)
        assert np.all(np.diff(series) > 0.0)
        singles = [
            to.expected_iterate_sq_torus(to.TorusConfig(N=n), kernel_mode=kernel)
            for n in (2, 4, 6)
        ]
        assert np.allclose(series, singles, rtol=1e-10, atol=0.0)


def test_exact_kernel_elementary_bounds():
    for t in (0.05, 0.1, 1.0, 3.0):
        phi = np.concatenate(
            [np.linspace(-80.0, 80.0, 4001), [math.pi / t, 1e-12, -1e-12]]
        )
        w = to._kernel_weights(phi, t, "exact-time")
        cap = np.minimum(t * t, 4.0 / np.maximum(phi * phi, 1e-300))
        assert np.all(w <= cap + 1e-12)


def test_kernel_ratio_against_surrogate():
    t = 0.1
    phi = np.concatenate([np.linspace(-200.0, 200.0, 8001), [math.pi / t]])
    exact = to._kernel_weights(phi, t, "exact-time")
    surrogate = to._kernel_weights(phi, t, "surrogate")
    bound = 4.0 * max(1.0, 2.0 * t * t) + 0.01
    assert np.all(exact <= bound * surrogate)


def test_unknown_kernel_mode_rejected():
    with pytest.raises(ValueError):
        to.expected_iterate_sq_torus(to.TorusConfig(N=2), kernel_mode="resonant")


def test_config_and_truncation_validation():
    with pytest.raises(ValueError):
        to.TorusConfig(beta=0.0)
    with pytest.raises(ValueError):
        to.TorusConfig(N=0)
    with pytest.raises(ValueError):
        to.expected_iterate_sq_torus(to.TorusConfig(N=to.DESK_BOUND + 1))
    with pytest.raises(ValueError):
        to.iterate_sq_series(to.TorusConfig(), [4, 2])
    with pytest.raises(ValueError):
        to.iterate_sq_series(to.TorusConfig(), [8, 32])


def test_lattice_count_column_direction_density():
    count = to.lattice_count(128, (1, 0), 0.0, 0.2)
    assert 1.4 <= count / 128 <= 2.2


def test_lattice_count_linear_bound_all_directions():
    for n1 in (64, 128):
        for m0 in ((1, 0), (1, 1), (2, 3)):
            for l in (0.0, 37.3):
                assert to.lattice_count(n1, m0, l, 0.2) <= 8 * n1


def test_lattice_count_irrational_line_misses_integers():
    assert to.lattice_count(16, (1, 1), 1.0, 0.0) == 0


def test_lattice_count_width_domain():
    with pytest.raises(ValueError):
        to.lattice_count(16, (1, 0), 0.0, 0.25)
    with pytest.raises(ValueError):
        to.lattice_count(16, (1, 0), 0.0, -0.1)


def test_gap_scan_axis_window_and_positivity():
    for n2 in (16, 32):
        scan = to.case2_gap_scan(BETA, n2, 400)
        assert scan.axis_ratio_low >= 2.0
        assert scan.axis_ratio_high < 8.0
        assert scan.min_ratio >= 0.5
        assert scan.max_ratio < 20.0
