"""Quadrature grids and forward/backward transforms on the sphere.

A grid pairs Gauss-Legendre colatitude nodes with a uniform longitude
grid.  Sizing rule: 2*n_max + 2 colatitude nodes (exact through
polynomial degree 4*n_max + 3 in cos theta) and an even, FFT-friendly
longitude count >= 4*n_max + 2, so every product of up to four
harmonics of degree <= n_max integrates exactly to rounding.

Coefficient layout: flat complex vector of length (n_max+1)^2 with
index(n, k) = n^2 + n + k, clusters stored contiguously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from . import harmonics as ha


def field_size(n_max: int) -> int:
    return (n_max + 1) * (n_max + 1)


def flat_index(n: int, k: int) -> int:
    if abs(k) > n:
        raise ValueError(f"order {k} out of range for degree {n}")
    return n * n + n + k


@dataclass
class SpectralField:
    """Harmonic coefficients of a field, clusters flat-packed."""

    n_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        expected = field_size(self.n_max)
        if self.coeffs.shape != (expected,):
            raise ValueError(f"coefficient vector must have length {expected}")

    @classmethod
    def zeros(cls, n_max: int) -> "SpectralField":
        return cls(n_max, np.zeros(field_size(n_max), dtype=np.complex128))

    def __getitem__(self, idx) -> complex:
        n, k = idx
        return self.coeffs[flat_index(n, k)]

    def cluster(self, n: int) -> np.ndarray:
        """View of the degree-n coefficient block, orders -n..n."""
        return self.coeffs[n * n : (n + 1) * (n + 1)]

    def l2_norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


def sobolev_norm(field: SpectralField, s: float) -> float:
    """Norm with cluster weights lambda_n^(2s) = (n^2+n+1)^s."""
    total = 0.0
    for n in range(field.n_max + 1):
        block = field.cluster(n)
        total += ha.eigenvalue_sq(n) ** s * float(np.vdot(block, block).real)
    return np.sqrt(total)


def project_cluster(field: SpectralField, n: int) -> SpectralField:
    """Zero every cluster except degree n."""
    if n > field.n_max:
        raise ValueError("cluster degree exceeds field resolution")
    out = SpectralField.zeros(field.n_max)
    out.cluster(n)[:] = field.cluster(n)
    return out


def truncate(field: SpectralField, band) -> SpectralField:
    """Drop clusters with lambda_n > band."""
    cutoff = ha.cluster_cutoff(band)
    out = SpectralField(field.n_max, field.coeffs.copy())
    out.coeffs[field_size(min(cutoff, field.n_max)) :] = 0.0
    return out


def _fft_friendly_even(target: int) -> int:
    m = target if target % 2 == 0 else target + 1
    while True:
        r = m
        for p in (2, 3, 5, 7):
            while r % p == 0:
                r //= p
        if r == 1:
            return m
        m += 2


class SphereGrid:
    """Quadrature nodes, weights, and basis tables for one resolution."""

    def __init__(self, n_max: int):
        if n_max < 0:
            raise ValueError("n_max must be nonnegative")
        self.n_max = n_max
        x, w = roots_legendre(2 * n_max + 2)
        self.cos_theta = x
        self.sin_theta = np.sqrt(1.0 - x * x)
        self.theta = np.arccos(x)
        self.weights = w  # sums to 2; colatitude measure is w/2
        self.phi_count = _fft_friendly_even(4 * n_max + 2)
        self.phi = 2.0 * np.pi * np.arange(self.phi_count) / self.phi_count
        self.tables = ha.assoc_table(n_max, x, self.sin_theta)
        self._row_index = [
            np.array([n * n + n + k for n in range(k, n_max + 1)]) for k in range(n_max + 1)
        ]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.cos_theta.size, self.phi_count)

    def quad(self, values: np.ndarray):
        """Integral against the unit-mass measure; batched over leading axes."""
        return values.mean(axis=-1) @ (0.5 * self.weights)

    def l2_norm_sq(self, values: np.ndarray):
        return self.quad(np.abs(values) ** 2).real

    # -- batched raw transforms ------------------------------------------

    def synth_block(self, coeffs: np.ndarray, n_max_in: int | None = None) -> np.ndarray:
        """Grid values of coefficient rows, shape (..., n_theta, n_phi)."""
        if n_max_in is None:
            n_max_in = int(round(np.sqrt(coeffs.shape[-1]))) - 1
        if n_max_in > self.n_max:
            raise ValueError("field degree exceeds grid tables")
        batch = coeffs.shape[:-1]
        m, p = self.shape
        spec = np.zeros(batch + (m, p), dtype=np.complex128)
        for k in range(n_max_in + 1):
            rows = self._row_index[k]
            rows = rows[rows < coeffs.shape[-1]]
            table = self.tables[k][: rows.size]
            spec[..., :, k] = coeffs[..., rows] @ table
            if k > 0:
                sign = -1.0 if k % 2 else 1.0
                spec[..., :, p - k] = sign * (coeffs[..., rows - 2 * k] @ table)
        return np.fft.ifft(spec, axis=-1) * p

    def analyze_block(self, values: np.ndarray, n_max_out: int) -> np.ndarray:
        """Coefficients <values, Y[n,k]> through degree n_max_out."""
        if n_max_out > self.n_max:
            raise ValueError(
                f"requested degree {n_max_out} exceeds grid tables (n_max={self.n_max})"
            )
        m, p = self.shape
        if values.shape[-2:] != (m, p):
            raise ValueError("values do not match grid shape")
        spec = np.fft.fft(values, axis=-1) / p
        batch = values.shape[:-2]
        out = np.zeros(batch + (field_size(n_max_out),), dtype=np.complex128)
        half_w = 0.5 * self.weights
        for k in range(n_max_out + 1):
            rows = self._row_index[k]
            rows = rows[rows < out.shape[-1]]
            table = self.tables[k][: rows.size]  # (n_rows, m)
            out[..., rows] = (spec[..., :, k] * half_w) @ table.T
            if k > 0:
                sign = -1.0 if k % 2 else 1.0
                out[..., rows - 2 * k] = sign * ((spec[..., :, p - k] * half_w) @ table.T)
        return out


def build_grid(n_max: int) -> SphereGrid:
    return SphereGrid(n_max)


def synthesize(field: SpectralField, grid: SphereGrid) -> np.ndarray:
    """Point values of the field on the grid, shape (n_theta, n_phi)."""
    return grid.synth_block(field.coeffs, field.n_max)


def analyze(values: np.ndarray, grid: SphereGrid, n_max_out: int) -> SpectralField:
    """Project grid values onto harmonics through degree n_max_out.

    Exact (to rounding) whenever the values are samples of a field whose
    total degree together with n_max_out stays within the quadrature
    exactness envelope of the grid.
    """
    return SpectralField(n_max_out, grid.analyze_block(values, n_max_out))
