"""Experiment harness: configuration, dispatch, log fits, persistence.

Every experiment produces one ExperimentRecord holding a config echo, a
series of (N, value, stderr) rows, an optional affine-in-ln-N fit, and
named boolean gates.  Records serialize to ``record.json`` (stable key
order) plus ``series.csv``; the wall-clock and version fields are
excluded from determinism comparisons.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import concentration as conc
from . import harmonics as ha
from . import montecarlo as mcarlo
from . import oracle
from . import randomfield as rf
from . import torus


class ConfigError(ValueError):
    """Invalid experiment name, config key, or parameter domain."""


# ---------------------------------------------------------------------------
# regression fit


@dataclass(frozen=True)
class FitResult:
    intercept: float
    slope: float
    r_squared: float


def fit_log_growth(points) -> FitResult:
    """Ordinary least squares fit v = a + b ln N.

    Parameters
    ----------
    points : iterable of (N, value)
        At least three distinct positive truncations.

    Returns
    -------
    FitResult
        Intercept a, slope b, and r_squared (defined as 1 for a
        zero-variance target, so exact constants fit perfectly).
    """
    pts = [(float(n), float(v)) for n, v in points]
    xs = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if len(set(xs.tolist())) < 3:
        raise ValueError("log fit needs at least 3 distinct N")
    if np.any(xs <= 0):
        raise ValueError("truncations must be positive")
    design = np.column_stack([np.ones_like(xs), np.log(xs)])
    coef, _, _, _ = np.linalg.lstsq(design, vs, rcond=None)
    resid = vs - design @ coef
    sst = float(np.sum((vs - vs.mean()) ** 2))
    ssr = float(np.sum(resid**2))
    r2 = 1.0 if sst == 0.0 else 1.0 - ssr / sst
    return FitResult(float(coef[0]), float(coef[1]), float(min(1.0, max(0.0, r2))))


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat parameter set shared by all experiments.

    Fields left as None resolve to the owning experiment's defaults at
    run time; each experiment validates the fields it consumes.
    """

    experiment: str
    alpha: float = 1.0
    t: float = 0.1
    s: float = 0.45
    beta: float = torus.DEFAULT_BETA
    N_list: tuple | None = None
    samples: int | None = None
    seed: int = 0
    delta: float | None = None
    n2_max: object = None  # int, "full", or None for the experiment default
    output_path: str | None = None


_FLOAT_KEYS = ("alpha", "t", "s", "beta", "delta")
_INT_KEYS = ("samples", "seed")
_STR_KEYS = ("experiment", "output_path")

# experiments whose estimates carry Monte Carlo error (need sample variance)
_MC_EXPERIMENTS = frozenset(
    ["moments", "orthogonality", "third-term", "oracle-vs-mc", "small-n-oracle"]
)


def _convert(key: str, value: str):
    try:
        if key in _STR_KEYS:
            return value
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
        if key == "N_list":
            return tuple(int(tok) for tok in value.replace(" ", "").split(",") if tok)
        if key == "n2_max":
            return "full" if value.strip().lower() == "full" else int(value)
    except ValueError:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from None
    raise ConfigError(f"unknown key {key!r}")


def parse_config(text: str, experiment: str | None = None) -> ExperimentConfig:
    """Parse a flat key=value config file.

    Parameters
    ----------
    text : str
        UTF-8 config body; blank lines and '#' comments ignored.
    experiment : str, optional
        Experiment name from the command line; a conflicting
        ``experiment=`` key in the file is an error.

    Returns
    -------
    ExperimentConfig
    """
    data = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in ExperimentConfig.__dataclass_fields__:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in data:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        data[key] = _convert(key, value.strip())
    if experiment is not None:
        named = data.get("experiment")
        if named is not None and named != experiment:
            raise ConfigError(
                f"config names experiment {named!r} but {experiment!r} was requested"
            )
        data["experiment"] = experiment
    if "experiment" not in data:
        raise ConfigError("missing key 'experiment'")
    return ExperimentConfig(**data)


def _resolved(config: ExperimentConfig) -> ExperimentConfig:
    """Fill per-experiment defaults and validate parameter domains."""
    spec = EXPERIMENTS.get(config.experiment)
    if spec is None:
        known = ", ".join(sorted(EXPERIMENTS))
        raise ConfigError(f"unknown experiment {config.experiment!r} (known: {known})")
    fills = {k: v for k, v in spec.defaults.items() if getattr(config, k) is None}
    config = replace(config, **fills)
    _validate(config)
    return config


def _validate(cfg: ExperimentConfig) -> None:
    if not isinstance(cfg.seed, int) or not 0 <= cfg.seed < 2**64:
        raise ConfigError("seed must be an integer in [0, 2^64)")
    if cfg.t < 0:
        raise ConfigError("time t must be nonnegative")
    if cfg.beta <= 0:
        raise ConfigError("metric parameter beta must be positive")
    if cfg.N_list is not None:
        ns = list(cfg.N_list)
        if not ns or any(int(n) != n or n < 1 for n in ns):
            raise ConfigError("N_list must be nonempty positive integers")
        if sorted(set(ns)) != ns:
            raise ConfigError("N_list must be strictly ascending")
    if cfg.samples is not None:
        floor = 2 if cfg.experiment in _MC_EXPERIMENTS else 1
        if cfg.samples < floor:
            raise ConfigError(f"samples must be at least {floor}")
    if cfg.n2_max is not None and cfg.n2_max != "full":
        if not isinstance(cfg.n2_max, int) or cfg.n2_max < 0:
            raise ConfigError("n2_max must be a nonnegative integer or 'full'")
    if cfg.experiment == "sphere-divergence":
        if cfg.alpha <= 0.5:
            raise ConfigError(
                "sphere-divergence requires alpha > 1/2 (hypothesis: fix t >= 0 "
                f"and alpha > 1/2), got alpha={cfg.alpha}"
            )
        if cfg.t == 0:
            raise ConfigError("sphere-divergence requires t > 0")
    if cfg.experiment == "concentration" and not 0 < cfg.delta < 0.5:
        raise ConfigError("band parameter delta must lie in (0, 1/2)")
    if cfg.experiment == "lattice-count" and not 0 <= cfg.delta < 0.25:
        raise ConfigError("target width delta must lie in [0, 1/4)")
    if cfg.experiment == "torus-bounded" and max(cfg.N_list) > torus.DESK_BOUND:
        raise ConfigError(f"torus truncation above desk bound {torus.DESK_BOUND}")


# ---------------------------------------------------------------------------
# records


_VOLATILE_KEYS = ("wall_clock_seconds", "version")


@dataclass
class ExperimentRecord:
    experiment: str
    config: dict
    series: list
    fit: FitResult | None
    gates: dict
    gates_passed: bool
    extras: dict
    wall_clock_seconds: float
    version: str

    def to_payload(self) -> dict:
        payload = {
            "experiment": self.experiment,
            "config": self.config,
            "series": self.series,
            "fit": None if self.fit is None else vars(self.fit).copy(),
            "gates": self.gates,
            "gates_passed": self.gates_passed,
            "extras": self.extras,
            "wall_clock_seconds": self.wall_clock_seconds,
            "version": self.version,
        }
        return payload

    def to_json(self) -> str:
        return json.dumps(self.to_payload(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_payload(cls, payload: dict) -> "ExperimentRecord":
        fit = payload.get("fit")
        return cls(
            experiment=payload["experiment"],
            config=payload["config"],
            series=payload["series"],
            fit=None if fit is None else FitResult(**fit),
            gates=payload["gates"],
            gates_passed=payload["gates_passed"],
            extras=payload["extras"],
            wall_clock_seconds=payload["wall_clock_seconds"],
            version=payload["version"],
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentRecord":
        return cls.from_payload(json.loads(text))


def record_fingerprint(record) -> bytes:
    """Canonical bytes of a record with volatile fields removed.

    Parameters
    ----------
    record : ExperimentRecord, dict, or str
        A record object, its payload dict, or its JSON text.

    Returns
    -------
    bytes
        Equal across reruns with the same config and seed regardless of
        thread count.
    """
    if isinstance(record, ExperimentRecord):
        payload = record.to_payload()
    elif isinstance(record, str):
        payload = json.loads(record)
    else:
        payload = dict(record)
    stripped = {k: v for k, v in payload.items() if k not in _VOLATILE_KEYS}
    return json.dumps(stripped, sort_keys=True, separators=(",", ":")).encode()


def write_record(record: ExperimentRecord, out_dir) -> tuple:
    """Write record.json and series.csv under out_dir; returns both paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    record_path = out / "record.json"
    record_path.write_text(record.to_json(), encoding="utf-8")
    csv_path = out / "series.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["N", "value", "stderr"])
        for row in record.series:
            writer.writerow([row["N"], repr(row["value"]), repr(row["stderr"])])
    return record_path, csv_path


def _config_echo(cfg: ExperimentConfig) -> dict:
    return {
        "experiment": cfg.experiment,
        "alpha": cfg.alpha,
        "t": cfg.t,
        "s": cfg.s,
        "beta": cfg.beta,
        "N_list": [int(n) for n in cfg.N_list] if cfg.N_list is not None else None,
        "samples": cfg.samples,
        "seed": cfg.seed,
        "delta": cfg.delta,
        "n2_max": cfg.n2_max,
        "output_path": cfg.output_path,
    }


def _series(rows) -> list:
    return [
        {"N": int(n), "value": float(v), "stderr": float(e)} for n, v, e in rows
    ]


def _oracle_cap(cfg: ExperimentConfig):
    return None if cfg.n2_max in (None, "full") else int(cfg.n2_max)


# ---------------------------------------------------------------------------
# experiment runners


def _run_weyl(cfg: ExperimentConfig, threads: int):
    rng = np.random.default_rng(cfg.seed)
    theta = np.arccos(rng.uniform(-1.0, 1.0, cfg.samples))
    rows = []
    worst = 0.0
    for n in cfg.N_list:
        dev = float(np.max(np.abs(ha.weyl_sum(n, theta) / (2.0 * n + 1.0) - 1.0)))
        worst = max(worst, dev)
        rows.append((n, dev, 0.0))
    gates = {"max_deviation_at_most_1e-9": worst <= 1e-9}
    return _series(rows), None, gates, {"max_deviation": worst, "points": cfg.samples}


def _run_concentration(cfg: ExperimentConfig, threads: int):
    scan = conc.concentration_scan(cfg.delta, cfg.N_list)
    mass = np.asarray(scan.edge_mass)
    ns = np.asarray(scan.n_list, dtype=float)
    scaled = ns * ns * mass
    rows = list(zip(scan.n_list, mass, np.zeros_like(mass)))
    fit = fit_log_growth(zip(ns, np.log(mass)))
    gates = {
        "scaled_mass_bounded": bool(np.all(scaled <= 10.0 * scaled[0])),
        "edge_slope_at_most_-1.7": scan.edge_slope <= -1.7,
    }
    extras = {
        "delta": cfg.delta,
        "edge_orders": [int(k) for k in scan.edge_orders],
        "scaled_mass": [float(v) for v in scaled],
        "sectoral_slope": scan.sectoral_slope,
        "sectoral_r_squared": scan.sectoral_r_squared,
    }
    return _series(rows), fit, gates, extras


def _run_l4(cfg: ExperimentConfig, threads: int):
    norms = [conc.lp_norm((n, n), 4.0) for n in cfg.N_list]
    rows = [(n, v, 0.0) for n, v in zip(cfg.N_list, norms)]
    fit = fit_log_growth(zip(cfg.N_list, np.log(norms)))
    gates = {"exponent_in_[0.10,0.15]": 0.10 <= fit.slope <= 0.15}
    return _series(rows), fit, gates, {"exponent": fit.slope}


def _run_moments(cfg: ExperimentConfig, threads: int):
    p_list = (2, 4, 6)
    rows = []
    table = []
    var_ok = third_ok = ratio_ok = True
    for n in cfg.N_list:
        rep = rf.moment_suite(cfg.seed, n, p_list, cfg.samples)
        rows.append((n, rep.variance.value, rep.variance.stderr))
        var_ok &= abs(rep.variance.value - 1.0) <= 4.0 * rep.variance.stderr
        for est in (rep.third_point, rep.third_mass):
            third_ok &= abs(est.value) <= 4.0 * est.stderr
        ratio_ok &= all(rep.lp_ratio[p][2] <= 3.0 for p in p_list)
        table.append(
            {
                "n": n,
                "variance": [rep.variance.value, rep.variance.stderr],
                "third_point": [
                    rep.third_point.value.real,
                    rep.third_point.value.imag,
                    rep.third_point.stderr,
                ],
                "third_mass": [
                    rep.third_mass.value.real,
                    rep.third_mass.value.imag,
                    rep.third_mass.stderr,
                ],
                "lp_ratio": {str(p): list(rep.lp_ratio[p]) for p in p_list},
            }
        )
    gates = {
        "variance_within_4se_of_1": bool(var_ok),
        "third_moments_within_4se_of_0": bool(third_ok),
        "lp_ratio_at_most_3": bool(ratio_ok),
    }
    return _series(rows), None, gates, {"moments": table}


def _run_orthogonality(cfg: ExperimentConfig, threads: int):
    rows = []
    table = []
    ok = True
    for band in cfg.N_list:
        vals = mcarlo.orthogonality_samples(
            cfg.seed, cfg.samples, cfg.alpha, cfg.t, band, threads=threads
        )
        amean, se = mcarlo.complex_mean_gate(vals)
        ok &= amean <= 4.0 * se
        rows.append((band, amean, se))
        mean = complex(vals.mean())
        table.append(
            {
                "band": int(band),
                "cutoff": ha.cluster_cutoff(band),
                "mean": [mean.real, mean.imag],
                "stderr": se,
            }
        )
    gates = {"mean_inner_product_within_4se_of_0": bool(ok)}
    return _series(rows), None, gates, {"inner_products": table}


def _run_sphere_divergence(cfg: ExperimentConfig, threads: int):
    cap = _oracle_cap(cfg)
    values = oracle.expected_II_series(cfg.t, cfg.alpha, cfg.N_list, n2_max=cap)
    resonant = oracle.expected_II_series(
        cfg.t, cfg.alpha, cfg.N_list, n2_max=cap, resonant_only=True
    )
    rows = [(n, v, 0.0) for n, v in zip(cfg.N_list, values)]
    fit = fit_log_growth(zip(cfg.N_list, values))
    gates = {
        "strictly_increasing": bool(np.all(np.diff(values) > 0)),
        "slope_positive": fit.slope > 0,
        "r_squared_at_least_0.98": fit.r_squared >= 0.98,
    }
    extras = {
        "n2_max": "full" if cap is None else cap,
        "resonant_over_t_sq": [float(v) for v in resonant / (cfg.t * cfg.t)],
    }
    return _series(rows), fit, gates, extras


def _run_diagnostic(cfg: ExperimentConfig, threads: int):
    values = oracle.equatorial_series(cfg.N_list)
    rows = [(n, v, 0.0) for n, v in zip(cfg.N_list, values)]
    fit = fit_log_growth(zip(cfg.N_list, values))
    gates = {
        "slope_positive": fit.slope > 0,
        "r_squared_at_least_0.99": fit.r_squared >= 0.99,
    }
    return _series(rows), fit, gates, {}


def _run_third_term(cfg: ExperimentConfig, threads: int):
    snaps = mcarlo.third_norm_series(
        cfg.seed, cfg.samples, cfg.alpha, cfg.t, cfg.N_list, threads=threads
    )
    means = snaps.mean(axis=1)
    ses = snaps.std(axis=1, ddof=1) / math.sqrt(cfg.samples)
    rows = list(zip(cfg.N_list, means, ses))
    increments = np.diff(np.concatenate([[0.0], means]))
    gates = {
        "increments_strictly_decreasing": bool(np.all(np.diff(increments) < 0)),
        "final_increment_at_most_25_percent": increments[-1] <= 0.25 * means[-1],
    }
    extras = {"increments": [float(v) for v in increments]}
    return _series(rows), None, gates, extras


def _run_torus_bounded(cfg: ExperimentConfig, threads: int):
    tc = torus.TorusConfig(beta=cfg.beta, s=cfg.s, t=cfg.t, N=max(cfg.N_list))
    values = torus.iterate_sq_series(tc, cfg.N_list, kernel_mode="exact-time")
    rows = [(n, v, 0.0) for n, v in zip(cfg.N_list, values)]
    ns = np.asarray(cfg.N_list, dtype=float)
    per_unit = np.diff(values) / np.diff(ns)
    gates = {"increments_decay": bool(np.all(np.diff(per_unit) < 0))}
    extras = {
        "kernel": "exact-time",
        "per_unit_increments": [float(v) for v in per_unit],
    }
    last = cfg.N_list[-1]
    if last % 2 == 0 and last // 2 in cfg.N_list:
        half = values[list(cfg.N_list).index(last // 2)]
        ratio = float(values[-1] / half)
        gates["growth_ratio_at_most_1.2"] = ratio <= 1.2
        extras["growth_ratio"] = ratio
    return _series(rows), None, gates, extras


_LATTICE_DIRECTIONS = ((1, 0), (1, 1), (2, 3))


def _run_lattice_count(cfg: ExperimentConfig, threads: int):
    rng = np.random.default_rng(cfg.seed)
    rows = []
    table = []
    sup_all = 0.0
    for N1 in cfg.N_list:
        sup_n1 = 0.0
        for m0 in _LATTICE_DIRECTIONS:
            targets = np.concatenate(
                [[0.0], rng.uniform(-2.0 * N1, 2.0 * N1, cfg.samples - 1)]
            )
            counts = [
                torus.lattice_count(N1, m0, float(l), cfg.delta, cfg.beta)
                for l in targets
            ]
            ratio = max(counts) / N1
            table.append({"N1": int(N1), "m0": list(m0), "sup_ratio": float(ratio)})
            sup_n1 = max(sup_n1, ratio)
        sup_all = max(sup_all, sup_n1)
        rows.append((N1, sup_n1, 0.0))
    gates = {"sup_count_over_N1_at_most_8": sup_all <= 8.0}
    extras = {"delta": cfg.delta, "targets": cfg.samples, "by_direction": table}
    return _series(rows), None, gates, extras


def _run_oracle_vs_mc(cfg: ExperimentConfig, threads: int):
    cap = _oracle_cap(cfg)
    rows = []
    oracle_vals = []
    z_scores = []
    ok = True
    for band in cfg.N_list:
        vals = mcarlo.second_norm_samples(
            cfg.seed, range(cfg.samples), cfg.alpha, cfg.t, band, threads=threads
        )
        mean = float(vals.mean())
        se = float(vals.std(ddof=1) / math.sqrt(cfg.samples))
        exact = oracle.expected_II_sq(cfg.t, cfg.alpha, band, n2_max=cap)
        ok &= abs(mean - exact) <= 4.0 * se
        rows.append((band, mean, se))
        oracle_vals.append(float(exact))
        z_scores.append(float((mean - exact) / se) if se > 0 else 0.0)
    gates = {"mc_within_4se_of_oracle": bool(ok)}
    extras = {
        "n2_max": "full" if cap is None else cap,
        "oracle": oracle_vals,
        "z_scores": z_scores,
    }
    return _series(rows), None, gates, extras


_COVARIANCE_PAIRS = (
    ((0.70, 0.30), (0.70, 0.30)),
    ((0.70, 0.30), (0.95, 0.80)),
    ((1.20, 0.00), (1.20, math.pi)),
    ((0.70, 0.30), (2.40, 3.50)),
    ((1.57, 1.00), (1.57, 3.00)),
)

_ORACLE_TRIPLES = ((1, 1, 1), (3, 2, 1), (4, 2, 3))


def _run_small_n_oracle(cfg: ExperimentConfig, threads: int):
    n = cfg.N_list[0]
    means, ses, exact = mcarlo.wick_covariance_mc(
        cfg.seed, cfg.samples, n, _COVARIANCE_PAIRS, threads=threads
    )
    cov_ok = bool(np.all(np.abs(means - exact) <= 4.0 * ses + 1e-12))
    cov_table = [
        {
            "x": list(x),
            "y": list(y),
            "mc": float(m),
            "stderr": float(s),
            "exact": float(e),
        }
        for (x, y), m, s, e in zip(_COVARIANCE_PAIRS, means, ses, exact)
    ]

    triple_samples = max(1000, cfg.samples // 10)
    rows = []
    triple_table = []
    triple_ok = True
    for n0, n1, n2 in _ORACLE_TRIPLES:
        est = mcarlo.pair_moment_mc(cfg.seed, triple_samples, n0, n1, n2, threads=threads)
        closed = oracle.pair_moment(n0, n1, n2)
        triple_ok &= abs(est.mean - closed) <= 4.0 * est.stderr + 1e-12
        rows.append((n0, est.mean, est.stderr))
        triple_table.append(
            {
                "triple": [n0, n1, n2],
                "mc": est.mean,
                "stderr": est.stderr,
                "exact": float(closed),
                "samples": est.samples,
            }
        )
    gates = {
        "wick_covariance_within_4se": cov_ok,
        "pair_moments_within_4se": bool(triple_ok),
    }
    extras = {"covariance_degree": int(n), "covariance": cov_table, "pair_moments": triple_table}
    return _series(rows), None, gates, extras


# ---------------------------------------------------------------------------
# registry and dispatch


@dataclass(frozen=True)
class _ExperimentSpec:
    runner: object
    description: str
    defaults: dict


EXPERIMENTS = {
    "weyl-check": _ExperimentSpec(
        _run_weyl,
        "pointwise cluster-sum identity at random points",
        {"N_list": tuple(range(1, 49)), "samples": 32},
    ),
    "concentration": _ExperimentSpec(
        _run_concentration,
        "band-mass decay of edge-order harmonics outside the doubled band",
        {"N_list": (32, 64, 128, 256, 512), "delta": 0.3},
    ),
    "l4-growth": _ExperimentSpec(
        _run_l4,
        "L^4 norm growth exponent of highest-weight harmonics",
        {"N_list": (16, 32, 64, 128, 256, 512)},
    ),
    "moments": _ExperimentSpec(
        _run_moments,
        "Monte Carlo checks of cluster-field Gaussian moment identities",
        {"N_list": (1, 4, 16), "samples": 10_000},
    ),
    "orthogonality": _ExperimentSpec(
        _run_orthogonality,
        "mean inner product of the nonpaired term against the paired terms",
        {"N_list": (4,), "samples": 2_000},
    ),
    "sphere-divergence": _ExperimentSpec(
        _run_sphere_divergence,
        "log growth of the expected squared singular term (closed form)",
        {"N_list": (32, 64, 128, 256, 512), "n2_max": 8},
    ),
    "diagnostic": _ExperimentSpec(
        _run_diagnostic,
        "equatorial concentration diagnostic versus ln N",
        {"N_list": (32, 64, 128, 256, 512)},
    ),
    "third-term": _ExperimentSpec(
        _run_third_term,
        "Monte Carlo saturation of the diagonal-term squared L^2 norm",
        {"N_list": (8, 16, 32, 64), "samples": 500},
    ),
    "torus-bounded": _ExperimentSpec(
        _run_torus_bounded,
        "weighted triple sum of the torus iterate over ascending truncations",
        {"N_list": (4, 6, 8, 10, 12, 16)},
    ),
    "lattice-count": _ExperimentSpec(
        _run_lattice_count,
        "shell lattice counts near bilinear-form targets",
        {"N_list": (64, 128, 256), "delta": 0.2, "samples": 64},
    ),
    "oracle-vs-mc": _ExperimentSpec(
        _run_oracle_vs_mc,
        "closed-form expected squared singular term against Monte Carlo",
        {"N_list": (8, 16), "samples": 10_000},
    ),
    "small-n-oracle": _ExperimentSpec(
        _run_small_n_oracle,
        "Monte Carlo validation of small-degree closed forms",
        {"N_list": (3,), "samples": 100_000},
    ),
}


def run_experiment(config: ExperimentConfig, threads: int = 1) -> ExperimentRecord:
    """Run the named experiment and return its record.

    Parameters
    ----------
    config : ExperimentConfig
        Experiment name plus parameters; None fields take the
        experiment's defaults.
    threads : int
        Worker threads for Monte Carlo sample batches.  Results are
        byte-identical for every thread count.

    Returns
    -------
    ExperimentRecord
        Written to ``config.output_path`` when that is set.
    """
    cfg = _resolved(config)
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    start = time.perf_counter()
    try:
        series, fit, gates, extras = EXPERIMENTS[cfg.experiment].runner(cfg, threads)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    record = ExperimentRecord(
        experiment=cfg.experiment,
        config=_config_echo(cfg),
        series=series,
        fit=fit,
        gates={k: bool(v) for k, v in gates.items()},
        gates_passed=bool(all(gates.values())),
        extras=extras,
        wall_clock_seconds=time.perf_counter() - start,
        version=__version__,
    )
    if cfg.output_path:
        write_record(record, cfg.output_path)
    return record
