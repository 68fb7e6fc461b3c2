"""Spherical harmonic basis on the unit sphere.

Conventions used throughout the package:

- surface measure dsigma = (4 pi)^-1 sin(theta) dtheta dphi, total mass 1
- Y[n,k](theta, phi) = exp(i k phi) v[n,k](theta) with v real, and the
  family orthonormal in L^2(dsigma); v[n,k] = c[n,k] L[n,k](cos theta)
  with the Condon-Shortley sign folded into L, so
  Y[1,1] = -sqrt(3/2) sin(theta) exp(i phi)
- negative orders: Y[n,-k] = (-1)^k conj(Y[n,k]), i.e.
  v[n,-k] = (-1)^k v[n,k]
- spectral weight lambda_n = sqrt(n^2 + n + 1), the eigenvalue of
  sqrt(1 - Delta) on degree-n harmonics (multiplicity 2n + 1)

Degree-n values are computed column-wise (fixed order k, ascending n)
with the normalized three-term recurrence.  Columns carry a per-point
binary exponent that is rescaled on the fly, so sectoral seeds far
below the double underflow threshold still propagate correctly up to
degree a few thousand.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

# Rescaling thresholds for the column recurrence.  Values are bounded by
# sqrt(2n+1) once they leave the exponentially small regime, so only
# growth from tiny seeds needs tracking.
_BIG = 2.0 ** 500
_SHIFT = 512


class HarmonicIndex(NamedTuple):
    """Degree/order pair with |k| <= n."""

    n: int
    k: int


def check_index(idx) -> HarmonicIndex:
    n, k = idx
    if n < 0 or abs(k) > n:
        raise ValueError(f"invalid harmonic index (n={n}, k={k})")
    return HarmonicIndex(int(n), int(k))


def eigenvalue_sq(n: int) -> int:
    """Eigenvalue of 1 - Delta on degree-n harmonics, exactly n^2+n+1."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    return n * n + n + 1


def lam(n) -> float:
    """lambda_n = sqrt(n^2 + n + 1), vectorized over n."""
    n = np.asarray(n, dtype=np.float64)
    return np.sqrt(n * n + n + 1.0)


def lam_pow(n, exponent: float):
    """lambda_n ** exponent, computed as (n^2+n+1)^(exponent/2)."""
    n = np.asarray(n, dtype=np.float64)
    return (n * n + n + 1.0) ** (0.5 * exponent)


def cluster_cutoff(band) -> int:
    """Largest degree n with lambda_n <= band.

    Exact for integer band; for float band the comparison is done in
    floating point after an integer-safe first guess.
    """
    if band < 1:
        raise ValueError("frequency cap must be at least 1 (the lowest eigenvalue)")
    if isinstance(band, (int, np.integer)):
        # n^2 + n + 1 <= band^2 over the integers
        b2 = int(band) * int(band)
        n = (math.isqrt(4 * b2 - 3) - 1) // 2
        while n * n + n + 1 > b2:
            n -= 1
        return n
    b2 = float(band) * float(band)
    n = max(0, int((math.sqrt(4.0 * b2 - 3.0) - 1.0) // 2))
    while (n + 1) ** 2 + (n + 1) + 1 <= b2:
        n += 1
    while n > 0 and n * n + n + 1 > b2:
        n -= 1
    return n


def norm_constant(n: int, k: int) -> float:
    """c[n,k] = sqrt((2n+1) (n-k)! / (n+k)!), in log space for large n."""
    n, k = check_index((n, k))
    k = abs(k)
    return math.exp(
        0.5 * (math.log(2 * n + 1) + math.lgamma(n - k + 1) - math.lgamma(n + k + 1))
    )


def legendre_table(n_max: int, x) -> np.ndarray:
    """Legendre polynomials P_0..P_n_max at x, shape (n_max+1, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty((n_max + 1, x.size))
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre_poly(n: int, x):
    """Legendre polynomial P_n(x)."""
    scalar = np.isscalar(x)
    val = legendre_table(n, x)[n]
    return float(val[0]) if scalar else val


def projector_kernel(n: int, cos_angle):
    """Reproducing kernel of the degree-n cluster: (2n+1) P_n(<x,y>).

    Under the unit-mass measure, integrating the kernel against a field
    projects onto the degree-n eigenspace; on the diagonal it equals the
    cluster dimension 2n+1.
    """
    return (2 * n + 1) * legendre_poly(n, cos_angle)


def _log_seed_norm(k: int) -> float:
    # log sqrt((2k+1)!! / (2k)!!)
    return 0.5 * sum(math.log((2 * j + 1) / (2 * j)) for j in range(1, k + 1))


def assoc_column(k: int, n_max: int, cos_theta, sin_theta=None) -> np.ndarray:
    """Normalized v[n,k] for n = k..n_max at the given points.

    Returns shape (n_max - k + 1, npts).  Uses the sectoral seed
    v[k,k] = (-1)^k sqrt((2k+1)!!/(2k)!!) sin^k(theta) and the
    normalized three-term degree recurrence, with per-point exponent
    rescaling so seeds below the underflow threshold survive.
    """
    if k < 0 or n_max < k:
        raise ValueError("need 0 <= k <= n_max")
    x = np.atleast_1d(np.asarray(cos_theta, dtype=np.float64))
    if sin_theta is None:
        s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
    else:
        s = np.atleast_1d(np.asarray(sin_theta, dtype=np.float64))
    npts = x.size
    out = np.empty((n_max - k + 1, npts))

    expo = np.zeros(npts, dtype=np.int64)
    if k == 0:
        y = np.ones(npts)
    else:
        with np.errstate(divide="ignore"):
            log_seed = _log_seed_norm(k) + k * np.log(s)
        y = np.zeros(npts)
        pos = s > 0.0
        expo[pos] = np.floor(log_seed[pos] / math.log(2.0)).astype(np.int64)
        y[pos] = np.exp(log_seed[pos] - expo[pos] * math.log(2.0))
        if k % 2:
            y = -y
    out[0] = np.ldexp(y, _clip_exp(expo))

    if n_max == k:
        return out

    y_prev = y
    y = math.sqrt(2 * k + 3) * x * y_prev
    out[1] = np.ldexp(y, _clip_exp(expo))

    a_prev = math.sqrt(2 * k + 3.0)  # a(k+1, k)
    for n in range(k + 2, n_max + 1):
        a = math.sqrt((4 * n * n - 1) / (n * n - k * k))
        y, y_prev = a * (x * y - y_prev / a_prev), y
        a_prev = a
        big = np.abs(y) > _BIG
        if big.any():
            y[big] = np.ldexp(y[big], -_SHIFT)
            y_prev = y_prev.copy()
            y_prev[big] = np.ldexp(y_prev[big], -_SHIFT)
            expo[big] += _SHIFT
        out[n - k] = np.ldexp(y, _clip_exp(expo))
    return out


def _clip_exp(expo: np.ndarray) -> np.ndarray:
    # ldexp wants int32; anything past +-2^30 has long since over/underflowed
    return np.clip(expo, -(2**30), 2**30).astype(np.int32)


def assoc_table(n_max: int, cos_theta, sin_theta=None) -> list[np.ndarray]:
    """All columns k = 0..n_max; entry [k] has shape (n_max-k+1, npts)."""
    return [assoc_column(k, n_max, cos_theta, sin_theta) for k in range(n_max + 1)]


def eval_v(n: int, k: int, theta) -> np.ndarray:
    """v[n,k](theta) for signed k, vectorized over theta."""
    n, k = check_index((n, k))
    th = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    col = assoc_column(abs(k), n, np.cos(th), np.sin(th))
    val = col[n - abs(k)]
    if k < 0 and k % 2:
        val = -val
    return val


def eval_harmonic(idx, theta, phi):
    """Y[n,k](theta, phi) = exp(i k phi) v[n,k](theta)."""
    n, k = check_index(idx)
    th = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    ph = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    val = eval_v(n, k, th) * np.exp(1j * k * ph)
    if val.size == 1:
        return complex(val[0])
    return val


def weyl_sum(n: int, theta) -> np.ndarray:
    """sum_k |Y[n,k](x)|^2, equal to 2n+1 at every point.

    Computed from the columns, not from the closed form, so it can be
    compared against the projector kernel on the diagonal.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    x, s = np.cos(th), np.sin(th)
    total = assoc_column(0, n, x, s)[n] ** 2
    for k in range(1, n + 1):
        total = total + 2.0 * assoc_column(k, n, x, s)[n - k] ** 2
    return total


def _ladder_coeff(n: int, k: int, up: bool) -> float:
    # coefficient of v[n,k+1] (up) or v[n,k-1] (down) in d v[n,k] / d theta,
    # valid for signed k; vanishes when the target order leaves |k| <= n
    if up:
        c = (n - k) * (n + k + 1)
    else:
        c = (n + k) * (n - k + 1)
    return math.sqrt(c) if c > 0 else 0.0


def legendre_ode_residual(idx, theta, margin: float = 0.05) -> np.ndarray:
    """Relative residual of the colatitude ODE satisfied by v[n,k]:

        -(sin th d/dth)^2 v + (k^2 - n(n+1) sin^2 th) v = 0

    Derivatives come from the order-ladder identity
    dv[n,k]/dth = (sp(k) v[n,k+1] - sm(k) v[n,k-1]) / 2, applied twice.
    The residual is normalized by the largest of the three summand
    magnitudes.  Points closer than `margin` to a pole are rejected.
    """
    n, k = check_index(idx)
    k = abs(k)
    th = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if np.any(th < margin) or np.any(th > math.pi - margin):
        raise ValueError(f"theta must stay within [{margin}, pi - {margin}] of the poles")
    x, s = np.cos(th), np.sin(th)

    cols = assoc_table(n, x, s)

    def v(order: int) -> np.ndarray:
        if abs(order) > n:
            return np.zeros_like(x)
        col = cols[abs(order)][n - abs(order)]
        if order < 0 and order % 2:
            return -col
        return col

    def dv(order: int) -> np.ndarray:
        return 0.5 * (
            _ladder_coeff(n, order, True) * v(order + 1)
            - _ladder_coeff(n, order, False) * v(order - 1)
        )

    vk = v(k)
    d1 = dv(k)
    d2 = 0.5 * (_ladder_coeff(n, k, True) * dv(k + 1) - _ladder_coeff(n, k, False) * dv(k - 1))

    t1 = s * (x * d1 + s * d2)  # (sin th d/dth)^2 v
    t2 = float(k * k) * vk
    t3 = n * (n + 1.0) * s * s * vk
    scale = np.maximum(np.maximum(np.abs(t1), np.abs(t2)), np.abs(t3))
    scale = np.maximum(scale, np.finfo(np.float64).tiny)
    return np.abs(-t1 + t2 - t3) / scale
