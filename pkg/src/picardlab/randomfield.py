"""Gaussian random fields built from cluster-uniform coefficients.

Coefficient draws are keyed, not sequential: the block for
(seed, sample_id, n) comes from a Philox stream whose key is a
SplitMix64 chain over those three integers, with normals produced by
inverse CDF from 64-bit raws in a fixed (k ascending, real/imag
interleaved) layout.  The same triple therefore yields the same block
regardless of draw order, thread count, or what else was sampled,
which is what the reproducibility gates check.

Cluster fields are e_n = (2n+1)^{-1/2} sum_k g[n,k] Y[n,k]; their
pointwise variance is 1 at every point.  Full Gaussian data is
phi_alpha = sum_n lambda_n^{-alpha} sum_k g[n,k] Y[n,k].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from . import harmonics as ha
from .transform import SpectralField, SphereGrid, field_size

_MASK64 = (1 << 64) - 1


def _splitmix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def stream_key(*path: int) -> np.ndarray:
    """Two Philox key words from a chain over the integer path."""
    h = 0x243F6A8885A308D3
    for item in path:
        h = _splitmix(h ^ (int(item) & _MASK64))
    return np.array([h, _splitmix(h)], dtype=np.uint64)


def _standard_normals(key: np.ndarray, count: int) -> np.ndarray:
    raws = np.random.Philox(key=key).random_raw(count)
    u = (raws >> np.uint64(11)) * 2.0**-53 + 2.0**-54
    return ndtri(u)


def gaussian_block(seed: int, sample_id: int, n: int) -> np.ndarray:
    """Raw coefficients g[n,k], k = -n..n, standard complex (E|g|^2 = 1)."""
    z = _standard_normals(stream_key(seed, sample_id, n), 2 * (2 * n + 1))
    z = z.reshape(2 * n + 1, 2)
    return (z[:, 0] + 1j * z[:, 1]) / np.sqrt(2.0)


def gaussian_matrix(seed: int, sample_ids, n: int) -> np.ndarray:
    """Stacked raw blocks for many samples, shape (len(ids), 2n+1)."""
    return np.stack([gaussian_block(seed, s, n) for s in sample_ids])


@dataclass
class ClusterField:
    """Normalized single-cluster field e_n; coeffs are g / sqrt(2n+1)."""

    n: int
    coeffs: np.ndarray

    def l2_norm_sq(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)


@dataclass
class GaussianSample:
    """One draw of the full coefficient table, plus its provenance."""

    seed: int
    sample_id: int
    alpha: float
    n_max: int
    g: np.ndarray  # raw coefficients, flat layout, length (n_max+1)^2

    def raw_cluster(self, n: int) -> np.ndarray:
        return self.g[n * n : (n + 1) * (n + 1)]

    def cluster(self, n: int) -> ClusterField:
        return ClusterField(n, self.raw_cluster(n) / np.sqrt(2.0 * n + 1.0))


def draw_sample(seed: int, sample_id: int, alpha: float, band) -> GaussianSample:
    n_max = ha.cluster_cutoff(band)
    g = np.empty(field_size(n_max), dtype=np.complex128)
    for n in range(n_max + 1):
        g[n * n : (n + 1) * (n + 1)] = gaussian_block(seed, sample_id, n)
    return GaussianSample(seed, sample_id, alpha, n_max, g)


def sample_cluster(seed: int, sample_id: int, n: int) -> ClusterField:
    return ClusterField(n, gaussian_block(seed, sample_id, n) / np.sqrt(2.0 * n + 1.0))


def sample_phi(seed: int, sample_id: int, alpha: float, band) -> SpectralField:
    """Truncated Gaussian data with per-mode weights lambda_n^(-alpha)."""
    sample = draw_sample(seed, sample_id, alpha, band)
    out = SpectralField.zeros(sample.n_max)
    for n in range(sample.n_max + 1):
        out.cluster(n)[:] = ha.lam_pow(n, -alpha) * sample.raw_cluster(n)
    return out


def degree_of_index(n_max: int) -> np.ndarray:
    """Cluster degree of every flat coefficient slot."""
    out = np.empty(field_size(n_max), dtype=np.int64)
    for n in range(n_max + 1):
        out[n * n : (n + 1) * (n + 1)] = n
    return out


def flow_phases(n_max: int, t: float) -> np.ndarray:
    """Per-slot phases exp(-i t lambda_n^2) of the linear propagator."""
    degs = degree_of_index(n_max)
    lam_sq = degs * degs + degs + 1
    return np.exp(-1j * t * lam_sq)


def linear_flow(field: SpectralField, t: float) -> SpectralField:
    """exp(it(Delta - 1)) acting on the field: cluster n picks up
    exp(-i t lambda_n^2)."""
    return SpectralField(field.n_max, field.coeffs * flow_phases(field.n_max, t))


# -- moment diagnostics ---------------------------------------------------

# fixed evaluation points for pointwise statistics
_POINT_A = (1.1, 0.4)
_POINT_B = (2.3, 3.9)


def _harmonic_row(n: int, theta: float, phi: float) -> np.ndarray:
    ks = np.arange(-n, n + 1)
    vs = np.empty(2 * n + 1)
    col = ha.assoc_column(0, n, np.array([np.cos(theta)]), np.array([np.sin(theta)]))
    vs[n] = col[n, 0]
    for k in range(1, n + 1):
        val = ha.assoc_column(k, n, np.array([np.cos(theta)]), np.array([np.sin(theta)]))[n - k, 0]
        vs[n + k] = val
        vs[n - k] = -val if k % 2 else val
    return vs * np.exp(1j * ks * phi)


@dataclass
class MomentEstimate:
    value: complex
    stderr: float


@dataclass
class MomentReport:
    n: int
    samples: int
    variance: MomentEstimate          # E |e_n(x)|^2, target 1
    third_point: MomentEstimate       # E e_n(x) |e_n(y)|^2, target 0
    third_mass: MomentEstimate        # E e_n(x) ||e_n||^2, target 0
    lp_ratio: dict                    # p -> (norm, stderr, norm / sqrt(p))


def _complex_se(values: np.ndarray) -> float:
    s = values.size
    return float(np.sqrt((values.real.var() + values.imag.var()) / s))


def moment_suite(seed: int, n: int, p_list, sample_count: int) -> MomentReport:
    """Monte Carlo checks of the cluster-field moment identities."""
    ids = range(sample_count)
    g = gaussian_matrix(seed, ids, n) / np.sqrt(2.0 * n + 1.0)

    row_a = _harmonic_row(n, *_POINT_A)
    row_b = _harmonic_row(n, *_POINT_B)
    e_a = g @ row_a
    e_b = g @ row_b
    mass = np.einsum("sk,sk->s", g, g.conj()).real

    sq_a = np.abs(e_a) ** 2
    variance = MomentEstimate(float(sq_a.mean()), float(sq_a.std() / np.sqrt(sample_count)))
    tp = e_a * np.abs(e_b) ** 2
    third_point = MomentEstimate(complex(tp.mean()), _complex_se(tp))
    tm = e_a * mass
    third_mass = MomentEstimate(complex(tm.mean()), _complex_se(tm))

    lp = {}
    if p_list:
        grid = SphereGrid(max(1, -(-max(p_list) * n // 4)))
        pad = np.zeros((sample_count, field_size(n)), dtype=np.complex128)
        pad[:, n * n : (n + 1) * (n + 1)] = g
        chunk = max(1, 2**22 // (grid.shape[0] * grid.shape[1]))
        abs_sq = np.empty((sample_count,) + grid.shape)
        for lo in range(0, sample_count, chunk):
            vals = grid.synth_block(pad[lo : lo + chunk], n)
            abs_sq[lo : lo + chunk] = np.abs(vals) ** 2
        for p in p_list:
            if p % 2 == 0:
                per = grid.quad(abs_sq ** (p // 2))
            else:
                per = grid.quad(abs_sq ** (p / 2.0))
            mean_p = float(per.mean())
            se_p = float(per.std() / np.sqrt(sample_count))
            norm = mean_p ** (1.0 / p)
            norm_se = norm * se_p / (p * mean_p)
            lp[p] = (norm, norm_se, norm / np.sqrt(p))
    return MomentReport(n, sample_count, variance, third_point, third_mass, lp)
