"""Second-iterate assembly for the Wick-ordered cubic flow on the sphere.

With data u0 = sum_n lambda_n^(-(alpha-1/2)) e_n and free evolution
u(t') = exp(it'(Delta-1)) u0, the first nontrivial Duhamel correction

    -i int_0^t exp(i(t-t')(Delta-1)) [ |u|^2 u - 2||u||^2 u ](t') dt'

splits over quartets (n0; n1, n2, n3) by how the conjugate index pairs:

    I   : n2 not in {n1, n3}        (no pairing)
    II  : n2 paired with exactly one neighbor; carries weight 2 and the
          Wick square W_n = |e_n|^2 - ||e_n||^2 of the paired cluster
    III : n1 = n2 = n3, including the mass subtraction -2||e_n||^2 e_n

Every term carries the kernel exp(-it lambda_{n0}^2) chi_t(Omega) with
Omega = lambda_{n0}^2 - lambda_{n1}^2 + lambda_{n2}^2 - lambda_{n3}^2 and

    chi_t(Omega) = (1 - exp(it Omega)) / Omega,   chi_t(0) = -it,

which is exactly what the time integral of the phases produces; the
resonant branch is exact, not a small-Omega limit.  `duhamel_oracle`
evaluates the same correction by raw time quadrature of the Wick cubic
and serves as the independent reference for every constant and phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import harmonics as ha
from .randomfield import GaussianSample, degree_of_index, flow_phases
from .transform import SpectralField, SphereGrid, field_size

_ASSEMBLE_I_CUTOFF = 8


def resonance(n0: int, n1: int, n2: int, n3: int) -> int:
    """Omega(n0; n1,n2,n3), exact integer arithmetic."""
    return (
        ha.eigenvalue_sq(n0)
        - ha.eigenvalue_sq(n1)
        + ha.eigenvalue_sq(n2)
        - ha.eigenvalue_sq(n3)
    )


def time_factor(t: float, omega) -> complex:
    """chi_t(omega) = (1 - e^{it omega})/omega, with chi_t(0) = -it."""
    if omega == 0:
        return complex(0.0, -t)
    return (1.0 - np.exp(1j * t * omega)) / omega


def _time_factor_arr(t: float, omega: np.ndarray) -> np.ndarray:
    omega = np.asarray(omega)
    out = np.empty(omega.shape, dtype=np.complex128)
    zero = omega == 0
    nz = ~zero
    out[zero] = -1j * t
    out[nz] = (1.0 - np.exp(1j * t * omega[nz])) / omega[nz]
    return out


def classify_quartet(n1: int, n2: int, n3: int) -> str:
    """Pairing class of the conjugate index: nonpaired, singular
    (exactly one pairing, either ordering), or diagonal."""
    if n1 == n2 == n3:
        return "diagonal"
    if (n2 == n1) != (n2 == n3):
        return "singular"
    if n2 != n1 and n2 != n3:
        return "nonpaired"
    raise ValueError("n2 paired with both neighbors but not diagonal is impossible")


@dataclass(frozen=True)
class ResonanceQuartet:
    n0: int
    n1: int
    n2: int
    n3: int

    @property
    def omega(self) -> int:
        return resonance(self.n0, self.n1, self.n2, self.n3)

    @property
    def kind(self) -> str:
        return classify_quartet(self.n1, self.n2, self.n3)


def initial_field(sample: GaussianSample, alpha: float) -> SpectralField:
    """Assembly-side data sum_n lambda_n^(-(alpha-1/2)) e_n."""
    out = SpectralField.zeros(sample.n_max)
    for n in range(sample.n_max + 1):
        out.cluster(n)[:] = (
            ha.lam_pow(n, -(alpha - 0.5)) / np.sqrt(2.0 * n + 1.0)
        ) * sample.raw_cluster(n)
    return out


def wick_cubic(values: np.ndarray, mass, grid: SphereGrid) -> np.ndarray:
    """(|u|^2 - 2 mass) u on the grid; mass must equal the grid
    quadrature of |u|^2 to 1e-8 relative."""
    actual = grid.l2_norm_sq(values)
    mass_arr = np.asarray(mass, dtype=np.float64)
    scale = np.maximum(np.abs(actual), 1e-300)
    if np.any(np.abs(actual - mass_arr) > 1e-8 * scale):
        raise ValueError("mass does not match the grid quadrature of |u|^2")
    shaped = mass_arr[..., None, None] if mass_arr.ndim else mass_arr
    return (np.abs(values) ** 2 - 2.0 * shaped) * values


def wick_square(cluster, grid: SphereGrid) -> np.ndarray:
    """W_n = |e_n|^2 - ||e_n||^2 on the grid; grid mean vanishes to
    rounding because the quadrature mass is subtracted."""
    pad = np.zeros(field_size(cluster.n), dtype=np.complex128)
    pad[cluster.n * cluster.n :] = cluster.coeffs
    values = grid.synth_block(pad, cluster.n)
    return np.abs(values) ** 2 - grid.l2_norm_sq(values)


# -- batched assembly cores ------------------------------------------------


def _cluster_values(g: np.ndarray, n: int, grid: SphereGrid) -> np.ndarray:
    """Synthesize e_n from raw blocks g[..., 2n+1]."""
    batch = g.shape[:-1]
    pad = np.zeros(batch + (field_size(n),), dtype=np.complex128)
    pad[..., n * n :] = g / np.sqrt(2.0 * n + 1.0)
    return grid.synth_block(pad, n)


def _degree_phase(t: float, n_max: int) -> np.ndarray:
    return flow_phases(n_max, t)


def assemble_ii_block(
    g: np.ndarray, t: float, alpha: float, cutoff: int, grid: SphereGrid, s_weight=None
) -> np.ndarray:
    """Batched singular term; g has shape (B, (cutoff+1)^2) raw blocks.

    Returns coefficients of shape (B, (3*cutoff+1)^2).
    """
    out_deg = 3 * cutoff
    out = np.zeros(g.shape[:-1] + (field_size(out_deg),), dtype=np.complex128)
    if cutoff < 1:
        return out
    m, p = grid.shape
    w2 = np.array([ha.lam_pow(n, -(2.0 * alpha - 1.0)) for n in range(cutoff + 1)])

    wick_sum = np.zeros(g.shape[:-1] + (m, p))
    for n in range(cutoff + 1):
        vals = _cluster_values(g[..., n * n : (n + 1) * (n + 1)], n, grid)
        wick = np.abs(vals) ** 2 - grid.l2_norm_sq(vals)[..., None, None]
        wick_sum += w2[n] * wick

    degs = degree_of_index(out_deg)
    eig_out = degs * degs + degs + 1
    phase_out = np.exp(-1j * t * eig_out)
    for n1 in range(cutoff + 1):
        vals = _cluster_values(g[..., n1 * n1 : (n1 + 1) * (n1 + 1)], n1, grid)
        wick = np.abs(vals) ** 2 - grid.l2_norm_sq(vals)[..., None, None]
        prod = vals * (wick_sum - w2[n1] * wick)
        coeffs = grid.analyze_block(prod, out_deg)
        factor = (
            2.0
            * ha.lam_pow(n1, -(alpha - 0.5))
            * phase_out
            * _time_factor_arr(t, eig_out - ha.eigenvalue_sq(n1))
        )
        out += coeffs * factor
    return out


def assemble_iii_block(
    g: np.ndarray, t: float, alpha: float, cutoff: int, grid: SphereGrid, band_snapshots=None
):
    """Batched diagonal term.  With band_snapshots (ascending frequency
    caps), also returns per-sample squared L^2 norms of the partial sums
    at each cap; clusters enter in ascending n, so cap j sees exactly
    the clusters with lambda_n <= band_snapshots[j].
    """
    out_deg = 3 * cutoff
    out = np.zeros(g.shape[:-1] + (field_size(out_deg),), dtype=np.complex128)
    snaps = []
    cuts = [ha.cluster_cutoff(b) for b in band_snapshots] if band_snapshots else []
    degs = degree_of_index(out_deg)
    eig_out = degs * degs + degs + 1
    phase_out = np.exp(-1j * t * eig_out)
    for n in range(cutoff + 1):
        block = g[..., n * n : (n + 1) * (n + 1)]
        vals = _cluster_values(block, n, grid)
        mass = grid.l2_norm_sq(vals)
        cubic = np.abs(vals) ** 2 * vals
        deg3 = min(3 * n, out_deg) if n > 0 else 0
        coeffs = grid.analyze_block(cubic, deg3)
        w3 = ha.lam_pow(n, -3.0 * (alpha - 0.5))
        sl = field_size(deg3)
        factor = w3 * phase_out[:sl] * _time_factor_arr(t, eig_out[:sl] - ha.eigenvalue_sq(n))
        out[..., :sl] += coeffs * factor
        # mass subtraction sits on the resonant quartet (n,n,n,n)
        mass_factor = (
            2j * t * w3 * np.exp(-1j * t * ha.eigenvalue_sq(n))
        )  # -2 * chi_t(0) * phase = +2it * phase
        out[..., n * n : (n + 1) * (n + 1)] += (
            mass_factor * mass[..., None] * block / np.sqrt(2.0 * n + 1.0)
        )
        while len(snaps) < len(cuts) and cuts[len(snaps)] == n:
            snaps.append(np.einsum("...k,...k->...", out, out.conj()).real.copy())
    if band_snapshots is not None:
        while len(snaps) < len(cuts):
            snaps.append(np.einsum("...k,...k->...", out, out.conj()).real.copy())
        return out, snaps
    return out


def assemble_i_block(
    g: np.ndarray, t: float, alpha: float, cutoff: int, grid: SphereGrid
) -> np.ndarray:
    """Batched nonpaired term by explicit triple enumeration."""
    out_deg = 3 * cutoff
    out = np.zeros(g.shape[:-1] + (field_size(out_deg),), dtype=np.complex128)
    fields = [
        _cluster_values(g[..., n * n : (n + 1) * (n + 1)], n, grid) for n in range(cutoff + 1)
    ]
    w1 = np.array([ha.lam_pow(n, -(alpha - 0.5)) for n in range(cutoff + 1)])
    degs = degree_of_index(out_deg)
    eig_out = degs * degs + degs + 1
    phase_out = np.exp(-1j * t * eig_out)
    for n1 in range(cutoff + 1):
        for n2 in range(cutoff + 1):
            if n2 == n1:
                continue
            partial = fields[n1] * fields[n2].conj()
            for n3 in range(cutoff + 1):
                if n3 == n2:
                    continue
                deg = min(n1 + n2 + n3, out_deg)
                sl = field_size(deg)
                coeffs = grid.analyze_block(partial * fields[n3], deg)
                omega = eig_out[:sl] - (
                    ha.eigenvalue_sq(n1) - ha.eigenvalue_sq(n2) + ha.eigenvalue_sq(n3)
                )
                factor = (
                    w1[n1] * w1[n2] * w1[n3] * phase_out[:sl] * _time_factor_arr(t, omega)
                )
                out[..., :sl] += coeffs * factor
    return out


# -- public single-sample assemblers ---------------------------------------


def _prepare(sample: GaussianSample, band, grid):
    cutoff = ha.cluster_cutoff(band)
    if cutoff > sample.n_max:
        raise ValueError("sample was drawn with fewer clusters than the requested cap")
    if grid is None:
        grid = SphereGrid(3 * cutoff)
    elif grid.n_max < 3 * cutoff:
        raise ValueError("grid too small for the cubic output degrees")
    return cutoff, grid


def assemble_I(sample: GaussianSample, t: float, alpha: float, band, grid=None) -> SpectralField:
    """Nonpaired term; brute-force enumeration, capped at cutoff 8."""
    cutoff, grid = _prepare(sample, band, grid)
    if cutoff > _ASSEMBLE_I_CUTOFF:
        raise ValueError(
            f"nonpaired assembly enumerates cutoff^3 triples; cutoff {cutoff} > {_ASSEMBLE_I_CUTOFF}"
        )
    g = sample.g[None, : field_size(cutoff)]
    return SpectralField(3 * cutoff, assemble_i_block(g, t, alpha, cutoff, grid)[0])


def assemble_II(sample: GaussianSample, t: float, alpha: float, band, grid=None) -> SpectralField:
    """Singular term (paired conjugate index, weight 2)."""
    cutoff, grid = _prepare(sample, band, grid)
    g = sample.g[None, : field_size(cutoff)]
    return SpectralField(3 * cutoff, assemble_ii_block(g, t, alpha, cutoff, grid)[0])


def assemble_III(sample: GaussianSample, t: float, alpha: float, band, grid=None) -> SpectralField:
    """Diagonal term with the mass subtraction."""
    cutoff, grid = _prepare(sample, band, grid)
    g = sample.g[None, : field_size(cutoff)]
    return SpectralField(3 * cutoff, assemble_iii_block(g, t, alpha, cutoff, grid)[0])


def picard_terms(sample: GaussianSample, t: float, alpha: float, band):
    """All three terms on a shared grid."""
    cutoff, grid = _prepare(sample, band, None)
    g = sample.g[None, : field_size(cutoff)]
    return (
        SpectralField(3 * cutoff, assemble_i_block(g, t, alpha, cutoff, grid)[0]),
        SpectralField(3 * cutoff, assemble_ii_block(g, t, alpha, cutoff, grid)[0]),
        SpectralField(3 * cutoff, assemble_iii_block(g, t, alpha, cutoff, grid)[0]),
    )


# -- independent time-quadrature oracle -------------------------------------


def required_time_nodes(t: float, band) -> int:
    """Node floor 50 * (1 + t * lambda_max^2) with lambda_max at triple degree."""
    cutoff = ha.cluster_cutoff(band)
    return math.ceil(50.0 * (1.0 + t * ha.eigenvalue_sq(3 * cutoff)))


def _duhamel_raw(sample, t, band, points, grid, alpha):
    cutoff = ha.cluster_cutoff(band)
    out_deg = 3 * cutoff
    u0 = initial_field(sample, alpha)
    u0_coeffs = u0.coeffs[: field_size(cutoff)]
    degs_in = degree_of_index(cutoff)
    eig_in = degs_in * degs_in + degs_in + 1
    degs_out = degree_of_index(out_deg)
    eig_out = degs_out * degs_out + degs_out + 1

    if points % 2 == 0:
        points += 1
    nodes = np.linspace(0.0, t, points)
    h = nodes[1] - nodes[0] if points > 1 else 0.0
    weights = np.full(points, 2.0 * h / 3.0)
    weights[1::2] = 4.0 * h / 3.0
    weights[0] = weights[-1] = h / 3.0

    acc = np.zeros(field_size(out_deg), dtype=np.complex128)
    for tq, wq in zip(nodes, weights):
        uq = u0_coeffs * np.exp(-1j * tq * eig_in)
        vals = grid.synth_block(uq, cutoff)
        mass = grid.l2_norm_sq(vals)
        cubic = (np.abs(vals) ** 2 - 2.0 * mass) * vals
        coeffs = grid.analyze_block(cubic, out_deg)
        acc += wq * np.exp(-1j * (t - tq) * eig_out) * coeffs
    return SpectralField(out_deg, -1j * acc)


def duhamel_oracle(
    sample: GaussianSample,
    t: float,
    band,
    time_nodes: int | None = None,
    grid=None,
    check: bool = True,
    conv_tol: float = 1e-6,
) -> SpectralField:
    """Time quadrature of -i int_0^t e^{i(t-t')(Delta-1)} N(u(t')) dt'
    with N the Wick cubic of the free evolution of sample data.

    Composite Simpson over the requested node count (floor enforced by
    the fastest phase present).  With check=True the quadrature is
    repeated at half resolution and a relative drift above conv_tol is
    rejected.
    """
    cutoff, grid = _prepare(sample, band, grid)
    floor = required_time_nodes(t, band)
    if time_nodes is None:
        time_nodes = floor
    if time_nodes < floor:
        raise ValueError(f"insufficient time nodes: {time_nodes} < required {floor}")
    fine = _duhamel_raw(sample, t, band, time_nodes, grid, sample.alpha)
    if check:
        coarse = _duhamel_raw(sample, t, band, max(3, time_nodes // 2), grid, sample.alpha)
        scale = max(fine.l2_norm(), 1e-300)
        drift = np.linalg.norm(fine.coeffs - coarse.coeffs) / scale
        if drift > conv_tol:
            raise ValueError(f"time quadrature not converged: step-halving drift {drift:.3e}")
    return fine
