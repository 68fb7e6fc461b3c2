"""Second-moment bookkeeping for the second iterate on an irrational torus.

Frequencies are integer pairs n = (k, m) with quadratic form
Q(n) = k^2 + beta^2 m^2 and Japanese bracket <n>^2 = 1 + Q(n).  The
resonance function of a triple is Phi = 2 Q(n1 - n2, n2 - n3), and the
expected squared H^s size of the iterate truncated to Q(n) <= N^2 is

    V(N) = sum_Gamma <n1 - n2 + n3>^{2s} W(Phi) / (<n1>^2 <n2>^2 <n3>^2)

over the constraint set Gamma = {n2 != n1, n2 != n3}, with W either the
exact time kernel |chi_t(Phi)|^2 or the time-independent bracket
surrogate <Phi>^{-2}.  For beta^2 = sqrt(2) the form is irrational and Phi
vanishes only structurally, so the series stays bounded for s < 1/2;
this module measures that at desk scale, plus the shell counting bound
behind it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DESK_BOUND = 16
DEFAULT_BETA = 2.0 ** 0.25
_RESONANT_TOL = 1e-9


@dataclass(frozen=True)
class TorusConfig:
    beta: float = DEFAULT_BETA
    s: float = 0.45
    t: float = 0.1
    N: int = 8

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("metric parameter beta must be positive")
        if self.N < 1:
            raise ValueError("truncation must be at least 1")


def q_form(beta: float, n, n_prime=None) -> float:
    """Bilinear form Q(n, n') = k k' + beta^2 m m'; Q(n) = Q(n, n)."""
    k, m = n
    if n_prime is None:
        kp, mp = k, m
    else:
        kp, mp = n_prime
    return float(k * kp + beta * beta * m * mp)


def phi_resonance(beta: float, n1, n2, n3) -> float:
    """Phi = 2 Q(n1 - n2, n2 - n3)."""
    d1 = (n1[0] - n2[0], n1[1] - n2[1])
    d2 = (n2[0] - n3[0], n2[1] - n3[1])
    return 2.0 * q_form(beta, d1, d2)


def enumerate_modes(beta: float, N: int) -> np.ndarray:
    """Integer pairs with Q(n) <= N^2, ordered by (Q, k, m)."""
    k_max = N
    m_max = int(math.floor(N / beta))
    k = np.arange(-k_max, k_max + 1)
    m = np.arange(-m_max, m_max + 1)
    kk, mm = np.meshgrid(k, m, indexing="ij")
    q = kk.astype(float) ** 2 + beta * beta * mm.astype(float) ** 2
    keep = q <= N * N + 1e-12
    modes = np.stack([kk[keep], mm[keep]], axis=1)
    qv = q[keep]
    order = np.lexsort((modes[:, 1], modes[:, 0], qv))
    return modes[order]


def _kernel_weights(phi: np.ndarray, t: float, mode: str) -> np.ndarray:
    if mode == "surrogate":
        return 1.0 / (1.0 + phi * phi)
    if mode != "exact-time":
        raise ValueError(f"unknown kernel mode: {mode}")
    out = np.empty_like(phi)
    res = np.abs(phi) < _RESONANT_TOL
    nz = ~res
    out[res] = t * t
    p = phi[nz]
    out[nz] = np.abs(1.0 - np.exp(1j * t * p)) ** 2 / (p * p)
    return out


def _triple_sum_binned(beta, s, t, modes, q, thresholds, kernel_mode):
    """One pass over all triples, binned by max(Q(n1),Q(n2),Q(n3)).

    thresholds are ascending squared truncations; returns per-bin sums
    whose cumulative partial sums are V at each truncation.
    """
    bsq = beta * beta
    kcol = modes[:, 0].astype(float)
    mcol = modes[:, 1].astype(float)
    inv_bracket = 1.0 / (1.0 + q)
    thresholds = np.asarray(thresholds, dtype=float)
    bins = np.zeros(len(thresholds) + 1)
    count = len(modes)
    for i2 in range(count):
        k2, m2 = kcol[i2], mcol[i2]
        dk1 = kcol - k2
        dm1 = mcol - m2
        dk2 = k2 - kcol
        dm2 = m2 - mcol
        phi = 2.0 * (np.outer(dk1, dk2) + bsq * np.outer(dm1, dm2))
        w = _kernel_weights(phi, t, kernel_mode)
        k_out = dk1[:, None] + kcol[None, :]
        m_out = dm1[:, None] + mcol[None, :]
        q_out = k_out * k_out + bsq * m_out * m_out
        term = (1.0 + q_out) ** s * w
        term *= inv_bracket[:, None] * (inv_bracket[i2] * inv_bracket[None, :])
        term[i2, :] = 0.0
        term[:, i2] = 0.0
        qmax = np.maximum(np.maximum(q[:, None], q[None, :]), q[i2])
        idx = np.searchsorted(thresholds, qmax.ravel() - 1e-12, side="left")
        bins += np.bincount(idx, weights=term.ravel(), minlength=len(thresholds) + 1)
    return bins[: len(thresholds)]


def expected_iterate_sq_torus(config: TorusConfig, kernel_mode: str = "exact-time") -> float:
    """V(N) by exact triple enumeration; N capped at the desk bound."""
    if config.N > DESK_BOUND:
        raise ValueError(f"truncation {config.N} above desk bound {DESK_BOUND}")
    modes = enumerate_modes(config.beta, config.N)
    q = np.array([q_form(config.beta, n) for n in modes])
    bins = _triple_sum_binned(
        config.beta, config.s, config.t, modes, q, [config.N * config.N], kernel_mode
    )
    return float(bins[0])


def iterate_sq_series(config: TorusConfig, n_list, kernel_mode: str = "exact-time") -> np.ndarray:
    """V(N) over ascending truncations from a single binned pass."""
    n_list = [int(n) for n in n_list]
    if any(n > DESK_BOUND for n in n_list):
        raise ValueError(f"truncation above desk bound {DESK_BOUND}")
    if sorted(n_list) != n_list:
        raise ValueError("truncation list must be ascending")
    top = max(n_list)
    modes = enumerate_modes(config.beta, top)
    q = np.array([q_form(config.beta, n) for n in modes])
    thresholds = [n * n for n in n_list]
    bins = _triple_sum_binned(config.beta, config.s, config.t, modes, q, thresholds, kernel_mode)
    return np.cumsum(bins)


def brute_force_iterate_sq(config: TorusConfig, kernel_mode: str = "exact-time") -> float:
    """Reference triple loop with no vectorization or pruning."""
    modes = [tuple(n) for n in enumerate_modes(config.beta, config.N)]
    total = 0.0
    for n1 in modes:
        for n2 in modes:
            if n2 == n1:
                continue
            for n3 in modes:
                if n2 == n3:
                    continue
                phi = phi_resonance(config.beta, n1, n2, n3)
                if kernel_mode == "surrogate":
                    w = 1.0 / (1.0 + phi * phi)
                elif abs(phi) < _RESONANT_TOL:
                    w = config.t * config.t
                else:
                    w = abs((1.0 - np.exp(1j * config.t * phi)) / phi) ** 2
                out = (n1[0] - n2[0] + n3[0], n1[1] - n2[1] + n3[1])
                num = (1.0 + q_form(config.beta, out)) ** config.s
                den = (
                    (1.0 + q_form(config.beta, n1))
                    * (1.0 + q_form(config.beta, n2))
                    * (1.0 + q_form(config.beta, n3))
                )
                total += num * w / den
    return total


def lattice_count(N1: int, m0, l: float, delta: float, beta: float = DEFAULT_BETA) -> int:
    """#{m1 : Q(m1)^{1/2} in [N1, 2 N1), |Q(m1, m0) - l| <= delta}."""
    if not 0.0 <= delta < 0.25:
        raise ValueError("width must satisfy 0 <= delta < 1/4")
    bsq = beta * beta
    k_max = 2 * N1
    m_max = int(math.floor(2 * N1 / beta))
    k = np.arange(-k_max, k_max + 1, dtype=float)
    m = np.arange(-m_max, m_max + 1, dtype=float)
    kk, mm = np.meshgrid(k, m, indexing="ij")
    q = kk * kk + bsq * mm * mm
    shell = (q >= N1 * N1) & (q < 4.0 * N1 * N1)
    pairing = kk * m0[0] + bsq * mm * m0[1]
    return int(np.count_nonzero(shell & (np.abs(pairing - l) <= delta)))


@dataclass(frozen=True)
class GapScan:
    beta: float
    N2: int
    samples: int
    min_ratio: float
    max_ratio: float
    axis_ratio_low: float
    axis_ratio_high: float


def case2_gap_scan(beta: float, N2: int, samples: int, seed: int = 0) -> GapScan:
    """Minimum of |Phi| / N2^2 over sampled triples with the dominant
    mode on the shell Q(n2)^{1/2} in [N2, 2 N2) and 16x frequency
    separation from n1, n3."""
    rng = np.random.default_rng(seed)
    small = max(1, N2 // 16)
    shell = enumerate_modes(beta, 2 * N2)
    q = np.array([q_form(beta, n) for n in shell])
    on_shell = shell[(q >= N2 * N2) & (q < 4.0 * N2 * N2)]
    if len(on_shell) == 0:
        raise ValueError("empty shell")
    low = enumerate_modes(beta, small)
    ratios = []
    for _ in range(samples):
        n2 = on_shell[rng.integers(len(on_shell))]
        n1 = low[rng.integers(len(low))]
        n3 = low[rng.integers(len(low))]
        ratios.append(abs(phi_resonance(beta, n1, n2, n3)) / (N2 * N2))
    ratios = np.array(ratios)
    axis = np.array(
        [abs(phi_resonance(beta, (0, 0), n2, (0, 0))) / (N2 * N2) for n2 in on_shell]
    )
    return GapScan(
        beta=beta,
        N2=N2,
        samples=samples,
        min_ratio=float(ratios.min()),
        max_ratio=float(ratios.max()),
        axis_ratio_low=float(axis.min()),
        axis_ratio_high=float(axis.max()),
    )
