"""Closed-form Gaussian expectations for the singular second-iterate term.

Sampling-free evaluation of E ||II_N||^2 and of the equatorial pairing
diagnostic, both reduced to one-dimensional Legendre integrals by the
Wick theorem and the addition formula

    sum_k Y_{n,k}(x) conj(Y_{n,k}(y)) = (2n+1) P_n(<x,y>),

so that every covariance is a polynomial in the inner product <x,y> and
double sphere integrals collapse to (1/2) int_{-1}^{1} ... dc.  This is
what lets the divergence be measured at frequencies far beyond direct
sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import harmonics as ha


def _required_nodes(n0: int, n1: int, n2: int) -> int:
    return 2 * (n0 + n1 + 2 * n2) + 2


@dataclass(frozen=True)
class PairMoment:
    """T(n0,n1,n2) = E ||pi_{n0}(e_{n1} W_{n2})||^2 for independent
    clusters; zero outside the window |n0 - n1| <= 2 n2."""

    n0: int
    n1: int
    n2: int
    value: float


def pair_moment(n0: int, n1: int, n2: int, quad_nodes: int | None = None) -> float:
    """(1/2) int (2 n0 + 1) P_{n0} P_{n1} [P_{n2}^2 - 1/(2 n2 + 1)] dc.

    Parameters
    ----------
    quad_nodes : int, optional
        Gauss-Legendre node count; defaults to the floor
        2 (n0 + n1 + 2 n2) + 2 and values below it are rejected.
    """
    for n in (n0, n1, n2):
        if n < 0:
            raise ValueError("degrees must be nonnegative")
    floor = _required_nodes(n0, n1, n2)
    if quad_nodes is None:
        quad_nodes = floor
    if quad_nodes < floor:
        raise ValueError(f"insufficient quadrature nodes: {quad_nodes} < required {floor}")
    nodes, weights = roots_legendre(quad_nodes)
    table = ha.legendre_table(max(n0, n1, n2), nodes)
    wick = table[n2] ** 2 - 1.0 / (2.0 * n2 + 1.0)
    return 0.5 * (2.0 * n0 + 1.0) * float(np.dot(weights, table[n0] * table[n1] * wick))


def _pair_tables(n1_max: int, n2_cap: int):
    """R[n2][n0, n1] = T(n0,n1,n2) for n0 <= n1_max + 2 n2_cap,
    n1 <= n1_max, from one shared node set; entries outside the
    window or with n0 + n1 odd are zeroed exactly."""
    n0_max = n1_max + 2 * n2_cap
    quad_nodes = _required_nodes(n0_max, n1_max, n2_cap)
    nodes, weights = roots_legendre(quad_nodes)
    table = ha.legendre_table(n0_max, nodes)
    rows = np.arange(n0_max + 1)
    cols = np.arange(n1_max + 1)
    inside = np.abs(rows[:, None] - cols[None, :])
    parity = (rows[:, None] + cols[None, :]) % 2 == 0
    scale = 0.5 * (2.0 * rows[:, None] + 1.0)
    out = []
    left = table[: n0_max + 1]
    right = table[: n1_max + 1]
    for n2 in range(n2_cap + 1):
        wick = weights * (table[n2] ** 2 - 1.0 / (2.0 * n2 + 1.0))
        r = scale * ((left * wick) @ right.T)
        r[~((inside <= 2 * n2) & parity)] = 0.0
        out.append(r)
    return out


def _ii_core(t, alpha, cutoff, n2_cap, tables, resonant_only):
    n0_max = tables[0].shape[0] - 1
    n0 = np.arange(n0_max + 1)
    n1 = np.arange(cutoff + 1)
    eig0 = n0 * n0 + n0 + 1
    eig1 = n1 * n1 + n1 + 1
    w0 = eig0.astype(float) ** (alpha - 1.0)
    w1 = 4.0 * eig1.astype(float) ** (-(alpha - 0.5))
    if resonant_only:
        chi_sq = np.zeros((n0_max + 1, cutoff + 1))
        res = eig0[:, None] == eig1[None, :]
        chi_sq[res] = t * t
    else:
        omega = eig0[:, None] - eig1[None, :]
        chi_sq = np.abs(1.0 - np.exp(1j * t * omega.astype(float))) ** 2
        nz = omega != 0
        chi_sq[nz] /= omega[nz].astype(float) ** 2
        chi_sq[~nz] = t * t
    kernel = w0[:, None] * chi_sq * w1[None, :]
    total = 0.0
    for n2 in range(min(n2_cap, cutoff) + 1):
        w2 = float(ha.lam_pow(n2, -2.0 * (2.0 * alpha - 1.0)))
        block = kernel * tables[n2][:, : cutoff + 1]
        block[:, n2] = 0.0
        total += w2 * float(block.sum())
    return total


def expected_II_sq(
    t: float, alpha: float, band, n2_max: int | None = None, resonant_only: bool = False
) -> float:
    """E ||II_N||^2 in H^{alpha-1}, exact Gaussian expectation.

    The paired-cluster sum runs over n2 <= min(n2_max, cutoff); every
    summand is nonnegative, so a truncation is a certified lower bound.
    With resonant_only=True only the fully resonant quartets (n0 = n1)
    are kept, whose kernel is exactly t^2.
    """
    cutoff = ha.cluster_cutoff(band)
    cap = cutoff if n2_max is None else min(int(n2_max), cutoff)
    tables = _pair_tables(cutoff, cap)
    return _ii_core(t, alpha, cutoff, cap, tables, resonant_only)


def expected_II_series(
    t: float, alpha: float, bands, n2_max: int | None = None, resonant_only: bool = False
) -> np.ndarray:
    """expected_II_sq over an ascending band list, sharing one table build."""
    bands = list(bands)
    cutoffs = [ha.cluster_cutoff(b) for b in bands]
    top = max(cutoffs)
    cap = top if n2_max is None else min(int(n2_max), top)
    tables = _pair_tables(top, cap)
    out = []
    for c in cutoffs:
        sub = [r[: c + 2 * cap + 1] for r in tables]
        out.append(_ii_core(t, alpha, c, cap, sub, resonant_only))
    return np.array(out)


# -- equatorial pairing diagnostic ------------------------------------------


def polar_mass(idx) -> float:
    """A_{n,k} = int cos^2(theta) |Y_{n,k}|^2 dsigma = (1/2) int c^2 v^2 dc,
    Gauss quadrature with n + 2 nodes (exact)."""
    idx = ha.check_index(idx)
    nodes, weights = roots_legendre(idx.n + 2)
    sin = np.sqrt(1.0 - nodes * nodes)
    v = ha.assoc_column(abs(idx.k), idx.n, nodes, sin)[idx.n - abs(idx.k)]
    return 0.5 * float(np.dot(weights * nodes * nodes, v * v))


def _diagnostic_degree_terms(n_top: int) -> np.ndarray:
    """s[n] = n^{-2} sum_{|k|<=n} (3/2)(A_{n,k} - 1/3)^2 for 2 <= n <= n_top.

    The Wick covariance of the degree-one square is E[W_1(x) W_1(y)] =
    <x,y>^2 - 1/3, whose longitude average is cos^2 cos^2' +
    (1/2) sin^2 sin^2'; pairing against |Y_{n,k}|^2 then closes as
    (3/2)(A_{n,k} - 1/3)^2 per harmonic.
    """
    out = np.zeros(n_top + 1)
    if n_top < 2:
        return out
    nodes, weights = roots_legendre(n_top + 2)
    sin = np.sqrt(np.maximum(0.0, 1.0 - nodes * nodes))
    wc2 = weights * nodes * nodes
    for k in range(n_top + 1):
        rows = ha.assoc_column(k, n_top, nodes, sin)
        mass = 0.5 * (rows * rows) @ wc2
        mult = 1.0 if k == 0 else 2.0
        for i, n in enumerate(range(max(k, 2), n_top + 1)):
            a = mass[i + (2 - k if k < 2 else 0)]
            out[n] += mult * 1.5 * (a - 1.0 / 3.0) ** 2 / (n * n)
    return out


def equatorial_diagnostic(band) -> float:
    """D_N = sum_{2 <= n <= cutoff} n^{-2} sum_{|k|<=n} (3/2)(A_{n,k}-1/3)^2."""
    return float(_diagnostic_degree_terms(ha.cluster_cutoff(band))[2:].sum())


def equatorial_series(bands) -> np.ndarray:
    """D_N over a band list from one pass over the harmonic table."""
    bands = list(bands)
    cutoffs = [ha.cluster_cutoff(b) for b in bands]
    terms = _diagnostic_degree_terms(max(cutoffs))
    prefix = np.cumsum(terms)
    return np.array([prefix[c] for c in cutoffs])
