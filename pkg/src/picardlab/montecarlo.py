"""Sample-based estimators for the second-iterate statistics.

Every driver maps a keyed sample id to a deterministic per-sample value
(the RNG is counter-based, so values do not depend on evaluation order
or thread count), stores the values in an indexed buffer, and reduces
in ascending id order.  Standard errors are sample standard deviations
of the per-sample values divided by sqrt(count).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import harmonics as ha
from .picard import assemble_i_block, assemble_ii_block, assemble_iii_block
from .randomfield import gaussian_matrix
from .transform import SphereGrid, field_size

_CHUNK = 32


def _chunks(ids, size=_CHUNK):
    ids = list(ids)
    return [ids[i : i + size] for i in range(0, len(ids), size)]


def _run_chunks(worker, chunks, threads):
    """Evaluate worker over chunks, results concatenated in chunk order."""
    if threads <= 1 or len(chunks) <= 1:
        parts = [worker(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(worker, chunks))
    return parts


def _stack_g(seed, sample_ids, cutoff):
    """Raw Gaussian blocks for clusters 0..cutoff, shape (B, (cutoff+1)^2)."""
    out = np.empty((len(sample_ids), field_size(cutoff)), dtype=np.complex128)
    for n in range(cutoff + 1):
        out[:, n * n : (n + 1) * (n + 1)] = gaussian_matrix(seed, sample_ids, n)
    return out


def sobolev_weights(n_max: int, s: float) -> np.ndarray:
    degs = np.repeat(np.arange(n_max + 1), 2 * np.arange(n_max + 1) + 1)
    eig = degs * degs + degs + 1
    return eig.astype(float) ** s


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    stderr: float
    samples: int


def _reduce(values: np.ndarray) -> MeanEstimate:
    values = np.asarray(values, dtype=float)
    se = values.std(ddof=1) / np.sqrt(len(values)) if len(values) > 1 else 0.0
    return MeanEstimate(float(values.mean()), float(se), len(values))


def second_norm_samples(
    seed: int, sample_ids, alpha: float, t: float, band, s: float | None = None, threads: int = 1
) -> np.ndarray:
    """Per-sample squared H^s norms of the singular term (s defaults to
    alpha - 1, the critical pairing space)."""
    cutoff = ha.cluster_cutoff(band)
    grid = SphereGrid(3 * cutoff)
    weights = sobolev_weights(3 * cutoff, alpha - 1.0 if s is None else s)

    def worker(ids):
        g = _stack_g(seed, ids, cutoff)
        coeffs = assemble_ii_block(g, t, alpha, cutoff, grid)
        return (np.abs(coeffs) ** 2 @ weights).real

    parts = _run_chunks(worker, _chunks(sample_ids), threads)
    return np.concatenate(parts)


def third_norm_series(
    seed: int, sample_count: int, alpha: float, t: float, bands, threads: int = 1
):
    """Per-sample squared L^2 norms of the diagonal term at nested
    frequency caps, sharing one Gaussian draw per sample (common random
    numbers make the increments directly comparable).

    Returns an array of shape (len(bands), sample_count).
    """
    bands = list(bands)
    if sorted(bands) != bands:
        raise ValueError("band list must be ascending")
    cutoff = ha.cluster_cutoff(max(bands))
    grid = SphereGrid(3 * cutoff)

    def worker(ids):
        g = _stack_g(seed, ids, cutoff)
        _, snaps = assemble_iii_block(g, t, alpha, cutoff, grid, band_snapshots=bands)
        return np.stack(snaps, axis=0)

    parts = _run_chunks(worker, _chunks(range(sample_count), 8), threads)
    return np.concatenate(parts, axis=1)


def orthogonality_samples(
    seed: int, sample_count: int, alpha: float, t: float, band, threads: int = 1
) -> np.ndarray:
    """Per-sample inner products <I, II + III> in L^2 (complex array)."""
    cutoff = ha.cluster_cutoff(band)
    grid = SphereGrid(3 * cutoff)

    def worker(ids):
        g = _stack_g(seed, ids, cutoff)
        one = assemble_i_block(g, t, alpha, cutoff, grid)
        rest = assemble_ii_block(g, t, alpha, cutoff, grid)
        rest += assemble_iii_block(g, t, alpha, cutoff, grid)
        return np.einsum("bk,bk->b", one, rest.conj())

    parts = _run_chunks(worker, _chunks(range(sample_count)), threads)
    return np.concatenate(parts)


def complex_mean_gate(values: np.ndarray):
    """|mean| and the standard error of the complex mean (components
    pooled), for |E z| <= k * SE gates."""
    values = np.asarray(values)
    mean = complex(values.mean())
    var = values.real.var(ddof=1) + values.imag.var(ddof=1)
    se = float(np.sqrt(var / len(values)))
    return abs(mean), se


def wick_covariance_mc(seed: int, sample_count: int, n: int, point_pairs, threads: int = 1):
    """MC estimate of E[W_n(x) W_n(y)] at the given (x, y) pairs versus
    the closed form P_n(<x,y>)^2 - 1/(2n+1).

    Returns (estimates, stderrs, exact) arrays over the pairs.
    """
    from .randomfield import _harmonic_row

    rows = []
    exact = []
    for (x, y) in point_pairs:
        rows.append((_harmonic_row(n, *x), _harmonic_row(n, *y)))
        cos_d = np.cos(x[0]) * np.cos(y[0]) + np.sin(x[0]) * np.sin(y[0]) * np.cos(
            x[1] - y[1]
        )
        exact.append(float(ha.legendre_poly(n, cos_d) ** 2 - 1.0 / (2.0 * n + 1.0)))

    def worker(ids):
        g = gaussian_matrix(seed, ids, n) / np.sqrt(2.0 * n + 1.0)
        mass = np.einsum("bk,bk->b", g, g.conj()).real
        out = np.empty((len(ids), len(rows)))
        for j, (rx, ry) in enumerate(rows):
            wx = np.abs(g @ rx) ** 2 - mass
            wy = np.abs(g @ ry) ** 2 - mass
            out[:, j] = wx * wy
        return out

    parts = _run_chunks(worker, _chunks(range(sample_count), 4096), threads)
    prods = np.concatenate(parts, axis=0)
    means = prods.mean(axis=0)
    ses = prods.std(axis=0, ddof=1) / np.sqrt(sample_count)
    return means, ses, np.array(exact)


def pair_moment_mc(
    seed: int, sample_count: int, n0: int, n1: int, n2: int, threads: int = 1
) -> MeanEstimate:
    """MC estimate of E ||pi_{n0}(e_{n1} W_{n2})||^2 with independent
    clusters (independent even when n1 = n2, matching the closed form)."""
    grid = SphereGrid(max(n0, n1 + 2 * n2))

    def worker(ids):
        ids = list(ids)
        g1 = gaussian_matrix(seed, ids, n1)
        pad1 = np.zeros((len(ids), field_size(n1)), dtype=np.complex128)
        pad1[:, n1 * n1 :] = g1 / np.sqrt(2.0 * n1 + 1.0)
        e1 = grid.synth_block(pad1, n1)
        alt = [i + sample_count for i in ids]
        g2 = gaussian_matrix(seed, alt, n2)
        pad2 = np.zeros((len(ids), field_size(n2)), dtype=np.complex128)
        pad2[:, n2 * n2 :] = g2 / np.sqrt(2.0 * n2 + 1.0)
        e2 = grid.synth_block(pad2, n2)
        wick = np.abs(e2) ** 2 - grid.l2_norm_sq(e2)[:, None, None]
        coeffs = grid.analyze_block(e1 * wick, n0)
        block = coeffs[:, n0 * n0 : (n0 + 1) * (n0 + 1)]
        return np.einsum("bk,bk->b", block, block.conj()).real

    parts = _run_chunks(worker, _chunks(range(sample_count), 512), threads)
    return _reduce(np.concatenate(parts))
