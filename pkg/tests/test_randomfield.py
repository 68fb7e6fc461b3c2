import math

import numpy as np
import pytest

from picardlab import harmonics as ha
from picardlab import randomfield as rf
from picardlab import transform as tr


def test_draws_are_bit_reproducible():
    a = rf.gaussian_block(123, 7, 5)
    b = rf.gaussian_block(123, 7, 5)
    assert np.array_equal(a, b)
    c = rf.gaussian_block(123, 8, 5)
    assert not np.array_equal(a, c)
    d = rf.gaussian_block(124, 7, 5)
    assert not np.array_equal(a, d)


def test_matrix_rows_match_individual_blocks_any_order():
    ids = [9, 2, 5]
    mat = rf.gaussian_matrix(31, ids, 4)
    for row, sid in zip(mat, ids):
        assert np.array_equal(row, rf.gaussian_block(31, sid, 4))


def test_distinct_clusters_use_distinct_streams():
    a = rf.gaussian_block(5, 0, 3)
    b = rf.gaussian_block(5, 0, 4)
    assert not np.array_equal(a[:7], b[:7])


def test_unit_variance_complex_normalization():
    g = rf.gaussian_matrix(0, range(4000), 8)
    # E|g|^2 = 1 with Var(|g|^2) = 1: gate at 4 standard errors
    mean = np.abs(g) ** 2
    se = mean.std(ddof=1) / math.sqrt(mean.size)
    assert abs(mean.mean() - 1.0) <= 4.0 * se


def test_cluster_field_mass_is_one_on_average():
    n = 6
    g = rf.gaussian_matrix(3, range(3000), n) / math.sqrt(2 * n + 1)
    mass = np.einsum("bk,bk->b", g, g.conj()).real
    se = mass.std(ddof=1) / math.sqrt(mass.size)
    assert abs(mass.mean() - 1.0) <= 4.0 * se


def test_cluster_functionals_uncorrelated_across_degrees():
    ids = range(4000)
    m2 = np.einsum("bk,bk->b", *(2 * [rf.gaussian_matrix(1, ids, 2)])).real
    m5 = np.einsum("bk,bk->b", *(2 * [rf.gaussian_matrix(1, ids, 5)])).real
    prod = (m2 - m2.mean()) * (m5 - m5.mean())
    se = prod.std(ddof=1) / math.sqrt(prod.size)
    assert abs(prod.mean()) <= 4.0 * se


def test_sample_phi_expected_mass_closed_form():
    # alpha=2, band 2: E||phi||^2 = sum lam_n^(-4)(2n+1) = 1 + 1/3
    vals = []
    for sid in range(3000):
        field = rf.sample_phi(17, sid, 2.0, 2)
        vals.append(field.l2_norm() ** 2)
    vals = np.array(vals)
    se = vals.std(ddof=1) / math.sqrt(vals.size)
    assert abs(vals.mean() - 4.0 / 3.0) <= 4.0 * se


def test_critical_sobolev_mass_grows_like_log():
    # closed form E||P_N phi_alpha||^2_{H^(alpha-1)} = sum (2n+1)/lam_n^2
    def closed(band):
        c = ha.cluster_cutoff(band)
        n = np.arange(c + 1)
        return float(np.sum((2 * n + 1) / (n * n + n + 1.0)))

    totals = [closed(b) for b in (16, 64, 256, 1024)]
    inc = np.diff(totals)
    assert np.all(np.diff(totals) > 0)
    # quadrupling the band adds ~2 ln 4 each time
    assert np.max(np.abs(inc - inc.mean())) <= 0.1 * inc.mean()


def test_large_alpha_concentrates_on_degree_zero():
    field = rf.sample_phi(2, 0, 40.0, 8)
    head = abs(field.coeffs[0])
    tail = np.linalg.norm(field.coeffs[1:])
    assert tail <= 1e-8 * head


def test_linear_flow_identity_and_unitarity():
    field = rf.sample_phi(9, 1, 1.0, 6)
    frozen = rf.linear_flow(field, 0.0)
    assert np.array_equal(frozen.coeffs, field.coeffs)
    moved = rf.linear_flow(field, 0.37)
    for s in (0.0, 0.8, -1.0):
        assert tr.sobolev_norm(moved, s) == pytest.approx(
            tr.sobolev_norm(field, s), rel=1e-12
        )


def test_linear_flow_degree_one_phase():
    field = tr.SpectralField.zeros(1)
    field.coeffs[tr.flat_index(1, 0)] = 1.0
    moved = rf.linear_flow(field, math.pi / 3.0)  # e^{-i pi} = -1 on lambda^2 = 3
    assert moved[1, 0] == pytest.approx(-1.0, abs=1e-12)


def test_flow_phases_match_eigenvalues():
    phases = rf.flow_phases(4, 0.21)
    for n in (0, 2, 4):
        expected = np.exp(-1j * 0.21 * ha.eigenvalue_sq(n))
        block = phases[n * n : (n + 1) * (n + 1)]
        assert np.max(np.abs(block - expected)) < 1e-14


def test_moment_suite_small_cluster():
    rep = rf.moment_suite(21, 1, (2, 4), 800)
    assert rep.samples == 800
    assert abs(rep.variance.value - 1.0) <= 4.0 * rep.variance.stderr
    assert abs(rep.third_point.value) <= 4.0 * rep.third_point.stderr
    assert abs(rep.third_mass.value) <= 4.0 * rep.third_mass.stderr
    for p in (2, 4):
        norm, _, ratio = rep.lp_ratio[p]
        assert norm > 0
        assert ratio <= 3.0


def test_l4_statistics_invariant_under_cluster_rotation():
    # rotating the coefficient vector by a fixed unitary preserves the law
    n, count = 4, 2500
    rng = np.random.default_rng(77)
    raw = rng.normal(size=(2 * n + 1, 2 * n + 1)) + 1j * rng.normal(
        size=(2 * n + 1, 2 * n + 1)
    )
    unitary, _ = np.linalg.qr(raw)
    g = rf.gaussian_matrix(13, range(count), n) / math.sqrt(2 * n + 1)
    grid = tr.SphereGrid(n)

    def l4_fourth(blocks):
        pad = np.zeros((count, tr.field_size(n)), dtype=np.complex128)
        pad[:, n * n :] = blocks
        vals = grid.synth_block(pad, n)
        return grid.quad(np.abs(vals) ** 4)

    base = l4_fourth(g)
    spun = l4_fourth(g @ unitary.T)
    diff = base.mean() - spun.mean()
    se = math.sqrt(
        base.var(ddof=1) / count + spun.var(ddof=1) / count
    )
    assert abs(diff) <= 4.0 * se
