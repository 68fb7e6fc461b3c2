"""Equatorial concentration and L^p growth of single harmonics.

High-weight harmonics (k near the window n(n+1)(1-delta^2) <= k^2) put
only O(n^-2) of their squared mass outside the equatorial band
|cos theta| <= delta; the sectoral L^4 norm grows like n^{1/8}.  Both
statements reduce to one-dimensional integrals of v_{n,k}(arccos c)^2
in c, which Gauss quadrature evaluates exactly for polynomial degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import harmonics as ha


def _column_value(n: int, k: int, c: np.ndarray) -> np.ndarray:
    s = np.sqrt(np.maximum(0.0, 1.0 - c * c))
    return ha.assoc_column(abs(k), n, c, s)[n - abs(k)]


def band_mass(idx, delta: float) -> float:
    """Squared mass of Y_{n,k} outside the band |cos theta| <= delta.

    Equals int_delta^1 v_{n,k}^2 dc by evenness of v^2; Gauss quadrature
    on [delta, 1] with n + 1 nodes is exact for the degree-2n integrand.
    """
    idx = ha.check_index(idx)
    if not 0.0 < delta < 1.0:
        raise ValueError("band parameter must lie in (0, 1)")
    nodes, weights = roots_legendre(idx.n + 1)
    half = 0.5 * (1.0 - delta)
    c = delta + half * (nodes + 1.0)
    v = _column_value(idx.n, idx.k, c)
    return half * float(np.dot(weights, v * v))


def k_edge(n: int, delta: float) -> int:
    """Smallest order in the concentration window, ceil(sqrt(n(n+1)(1-delta^2)))."""
    return math.ceil(math.sqrt(n * (n + 1) * (1.0 - delta * delta)))


def _loglog_fit(x, y):
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    design = np.vstack([np.ones_like(lx), lx]).T
    coef, residual, *_ = np.linalg.lstsq(design, ly, rcond=None)
    ss = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - (float(residual[0]) / ss if residual.size and ss > 0 else 0.0)
    return float(coef[1]), float(coef[0]), r2


@dataclass(frozen=True)
class ConcentrationScan:
    delta: float
    n_list: tuple
    edge_orders: tuple
    edge_mass: np.ndarray
    sectoral_mass: np.ndarray
    edge_slope: float
    edge_r_squared: float
    sectoral_slope: float
    sectoral_r_squared: float


def concentration_scan(delta: float, n_list) -> ConcentrationScan:
    """Mass escaping the doubled band for window-edge and sectoral orders.

    For each n the order k_edge(n, delta) sits at the edge of the
    concentration window; the reported masses are band_mass(., 2 delta)
    there and at k = n, with log-log fits of mass against n.  Requires
    delta < 1/2 so the doubled band is proper.
    """
    if not 0.0 < delta < 0.5:
        raise ValueError("window parameter must lie in (0, 1/2)")
    n_list = [int(n) for n in n_list]
    edges = []
    for n in n_list:
        ke = k_edge(n, delta)
        if ke > n:
            raise ValueError(f"empty window at n={n}, delta={delta}")
        edges.append(ke)
    edge_mass = np.array([band_mass((n, ke), 2.0 * delta) for n, ke in zip(n_list, edges)])
    sect_mass = np.array([band_mass((n, n), 2.0 * delta) for n in n_list])
    es, _, er2 = _loglog_fit(n_list, edge_mass)
    ss, _, sr2 = _loglog_fit(n_list, sect_mass)
    return ConcentrationScan(
        delta=delta,
        n_list=tuple(n_list),
        edge_orders=tuple(edges),
        edge_mass=edge_mass,
        sectoral_mass=sect_mass,
        edge_slope=es,
        edge_r_squared=er2,
        sectoral_slope=ss,
        sectoral_r_squared=sr2,
    )


def lp_norm(idx, p: float) -> float:
    """L^p(sigma) norm of Y_{n,k}: ((1/2) int |v|^p dc)^{1/p}.

    Even integer p is a single exact Gauss rule for the degree-pn
    integrand; otherwise the node count doubles until two consecutive
    values agree to 1e-6 relative.
    """
    idx = ha.check_index(idx)
    if p < 2:
        raise ValueError("p must be at least 2")
    even = float(p).is_integer() and int(p) % 2 == 0
    if even:
        q = int(p) * idx.n // 2 + 1
        nodes, weights = roots_legendre(max(q, 1))
        v = _column_value(idx.n, idx.k, nodes)
        return float(0.5 * np.dot(weights, np.abs(v) ** p)) ** (1.0 / p)
    q = 2 * idx.n + 8
    prev = None
    for _ in range(24):
        nodes, weights = roots_legendre(q)
        v = _column_value(idx.n, idx.k, nodes)
        val = float(0.5 * np.dot(weights, np.abs(v) ** p)) ** (1.0 / p)
        if prev is not None and abs(val - prev) <= 1e-6 * abs(val):
            return val
        prev = val
        q *= 2
    raise RuntimeError("L^p quadrature did not stabilize")
