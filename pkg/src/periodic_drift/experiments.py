"""
Monte Carlo experiments: local-time LLN, fluctuation scaling, posterior
contraction and credible-set coverage.

Each experiment runs ``replicates`` independent paths for every horizon in
``T_grid``.  Replicate ``r`` at horizon index ``i`` owns the random stream
``(seed, i, r)``, so results do not depend on execution order or on the
number of workers.  Rates are OLS slopes of ``log median`` against ``log T``.
"""
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__, io, spectral
from . import local_time as lt_mod
from .posterior import covariance_trace, posterior, sample_posterior
from .prior import PriorSpec
from .sde import DriftSpec, simulate, winding_times

log = logging.getLogger(__name__)

KINDS = ("contraction", "lln", "fluctuation", "coverage")
COVERAGE_DRAWS = 500
BAND_POINTS = np.arange(8) / 8


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    drift: object = "sin"
    prior: dict = field(default_factory=lambda: PriorSpec().to_dict())
    T_grid: list = field(default_factory=lambda: [250.0, 1000.0, 4000.0])
    dt: float = 1e-3
    M: int = 256
    replicates: int = 50
    seed: int = 0
    output_dir: str = "results"

    def __post_init__(self):
        try:
            self.drift_spec = DriftSpec.from_descriptor(self.drift)
            self.prior_spec = PriorSpec(**self.prior)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        self.T_grid = [float(T) for T in self.T_grid]
        if not self.T_grid or any(not T > 0 for T in self.T_grid):
            raise ConfigError("T_grid must be a non-empty list of positive horizons")
        if any(b <= a for a, b in zip(self.T_grid, self.T_grid[1:])):
            raise ConfigError("T_grid must be strictly increasing")
        if not (isinstance(self.replicates, int) and self.replicates >= 1):
            raise ConfigError("replicates must be an integer >= 1")
        if not (float(self.dt) > 0 and self.dt <= self.T_grid[0]):
            raise ConfigError("dt must be positive and not exceed the smallest horizon")
        self.dt = float(self.dt)
        M = self.M
        if not (isinstance(M, int) and M >= 4 and M & (M - 1) == 0):
            raise ConfigError("M must be a power of two >= 4")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError("seed must be a non-negative integer")

    @classmethod
    def from_dict(cls, doc):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_file(cls, filename):
        try:
            doc = json.loads(Path(filename).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {filename}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(doc)

    def to_dict(self):
        return {
            "drift": self.drift_spec.descriptor(),
            "prior": self.prior_spec.to_dict(),
            "T_grid": list(self.T_grid),
            "dt": self.dt,
            "M": self.M,
            "replicates": self.replicates,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
        }

    def require_galerkin_grid(self):
        if self.M < 2 * self.prior_spec.N + 2:
            raise ConfigError(f"M={self.M} too coarse for N={self.prior_spec.N} (need M >= 2N + 2)")


@dataclass
class RateReport:
    """Per-row results plus per-metric medians and log-log slopes."""
    kind: str
    config: ExperimentConfig
    columns: list
    rows: list
    metrics: list
    summary: dict = field(default_factory=dict)

    @property
    def failures(self):
        return sum(1 for r in self.rows if r.get("status") != "ok")

    def ok_rows(self):
        return [r for r in self.rows if r.get("status") == "ok"]

    def medians(self, metric):
        out = []
        for T in self.config.T_grid:
            vals = [r[metric] for r in self.ok_rows() if r["T"] == T]
            out.append(float(np.median(vals)) if vals else float("nan"))
        return np.array(out)

    def slope(self, metric):
        """OLS slope (and standard error) of log median versus log T."""
        med = self.medians(metric)
        T = np.asarray(self.config.T_grid)
        ok = np.isfinite(med) & (med > 0)
        if ok.sum() < 2:
            return float("nan"), float("nan")
        if ok.sum() == 2:
            s = np.diff(np.log(med[ok]))[0] / np.diff(np.log(T[ok]))[0]
            return float(s), float("nan")
        fit = stats.linregress(np.log(T[ok]), np.log(med[ok]))
        return float(fit.slope), float(fit.stderr)

    def summary_doc(self):
        doc = {
            "kind": self.kind,
            "version": __version__,
            "config": self.config.to_dict(),
            "rows": len(self.rows),
            "failures": self.failures,
            "T_grid": list(self.config.T_grid),
            "medians": {m: [_clean(v) for v in self.medians(m)] for m in self.metrics},
            "slopes": {},
        }
        for m in self.metrics:
            s, se = self.slope(m)
            doc["slopes"][m] = {"slope": _clean(s), "stderr": _clean(se)}
        doc.update(self.summary)
        return doc

    def write(self, out_dir, timing=False):
        """Write ``<kind>.csv`` and ``summary.json`` (plus ``timing.csv`` on request)."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        io.write_rows_csv(self.columns, self.rows, out / f"{self.kind}.csv")
        (out / "summary.json").write_text(json.dumps(self.summary_doc(), indent=2, sort_keys=True) + "\n")
        if timing:
            io.write_rows_csv(["T", "replicate", "wall_time"], self.rows, out / "timing.csv")
        return out


def _clean(v):
    v = float(v)
    return v if np.isfinite(v) else None


def _path_seed(cfg_seed, t_idx, rep, stream=0):
    return np.random.SeedSequence(cfg_seed, spawn_key=(t_idx, rep, stream))


def _row(task):
    kind, cfg_doc, t_idx, rep = task
    cfg = ExperimentConfig.from_dict(cfg_doc)
    T = cfg.T_grid[t_idx]
    row = {"T": T, "replicate": rep}
    start = time.perf_counter()
    try:
        row.update(_ROW_FUNCS[kind](cfg, t_idx, rep))
        row["status"] = "ok"
    except Exception as exc:  # recorded per row; never aborts the experiment
        log.warning("%s row T=%g rep=%d failed: %s", kind, T, rep, exc)
        row["status"] = f"failed: {type(exc).__name__}: {exc}"
    row["wall_time"] = time.perf_counter() - start
    return row


def _fields(cfg, t_idx, rep):
    path = simulate(cfg.drift_spec, cfg.T_grid[t_idx], cfg.dt, seed=_path_seed(cfg.seed, t_idx, rep))
    return path, lt_mod.estimate_local_time(path, cfg.M), lt_mod.chi_field(path, cfg.M)


def _contraction_row(cfg, t_idx, rep):
    spec = cfg.prior_spec
    _, lt, chi = _fields(cfg, t_idx, rep)
    post = posterior(spec, lt, chi)
    err = post.mean - cfg.drift_spec.padded(spec.N)
    return {
        "l2_error": float(spectral.sobolev_norm(err, 0)),
        "hp_error": float(spectral.sobolev_norm(err, spec.p)),
        "trace": covariance_trace(post),
    }


def _lln_row(cfg, t_idx, rep):
    path, lt, _ = _fields(cfg, t_idx, rep)
    law = lt_mod.stationary_density(cfg.drift_spec, cfg.M)
    tau = winding_times(path)
    return {
        "sup_error": lt_mod.sup_error(lt, law),
        "n_windings": int(tau.size),
        "tau_mean": float(tau[-1] / tau.size) if tau.size else None,
        "xT_scaled": path.xT / np.sqrt(path.T),
    }


def _fluctuation_row(cfg, t_idx, rep):
    _, lt, _ = _fields(cfg, t_idx, rep)
    law = lt_mod.stationary_density(cfg.drift_spec, cfg.M)
    norms = lt_mod.fluctuation_norms(lt, law)
    return {f"norm_s{s:g}": v for s, v in norms.items()}


def _coverage_row(cfg, t_idx, rep):
    spec = cfg.prior_spec
    _, lt, chi = _fields(cfg, t_idx, rep)
    post = posterior(spec, lt, chi)
    draws = sample_posterior(post, _path_seed(cfg.seed, t_idx, rep, 1), cfg.M, size=COVERAGE_DRAWS)
    mean = spectral.synthesize(post.mean, cfg.M)
    truth = spectral.synthesize(cfg.drift_spec.padded(spec.N), cfg.M)
    radii = np.sqrt(np.mean((draws - mean) ** 2, axis=1))
    radius95 = float(np.quantile(radii, 0.95))
    dist = float(np.sqrt(np.mean((truth - mean) ** 2)))
    idx = lt_mod.grid_index(BAND_POINTS, cfg.M)
    lo, hi = np.quantile(draws[:, idx], [0.025, 0.975], axis=0)
    hits = int(np.sum((truth[idx] >= lo) & (truth[idx] <= hi)))
    return {
        "l2_distance": dist,
        "radius95": radius95,
        "ball_covered": dist <= radius95,
        "band_hits": hits,
        "band_width": float(np.mean(hi - lo)),
    }


_ROW_FUNCS = {
    "contraction": _contraction_row,
    "lln": _lln_row,
    "fluctuation": _fluctuation_row,
    "coverage": _coverage_row,
}

_COLUMNS = {
    "contraction": ["l2_error", "hp_error", "trace"],
    "lln": ["sup_error", "n_windings", "tau_mean", "xT_scaled"],
    "fluctuation": [f"norm_s{s:g}" for s in lt_mod.FLUCTUATION_ORDERS],
    "coverage": ["l2_distance", "radius95", "ball_covered", "band_hits", "band_width"],
}

_METRICS = {
    "contraction": ["l2_error", "hp_error", "trace"],
    "lln": ["sup_error"],
    "fluctuation": [f"norm_s{s:g}" for s in lt_mod.FLUCTUATION_ORDERS],
    "coverage": ["l2_distance", "radius95", "band_width"],
}


def _run(kind, cfg, workers=1):
    if kind in ("contraction", "coverage"):
        cfg.require_galerkin_grid()
        cfg.drift_spec.padded(cfg.prior_spec.N)  # truth must lie in the Galerkin space
    doc = cfg.to_dict()
    tasks = [(kind, doc, i, r) for i in range(len(cfg.T_grid)) for r in range(cfg.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_row, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        rows = [_row(t) for t in tasks]
    columns = ["T", "replicate"] + _COLUMNS[kind] + ["status"]
    return RateReport(kind, cfg, columns, rows, _METRICS[kind])


def run_contraction(cfg, workers=1):
    """Posterior-mean L2/H^p error and posterior spread versus T."""
    try:
        cfg.drift_spec.padded(cfg.prior_spec.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = _run("contraction", cfg, workers)
    p = cfg.prior_spec.p
    report.summary["target_slopes"] = {"l2_error": -(p - 0.5) / (2 * p), "trace": (1 - 2 * p) / (2 * p)}
    return report


def run_lln(cfg, workers=1):
    """Uniform distance between L/T and rho, with winding diagnostics."""
    report = _run("lln", cfg, workers)
    med = report.medians("sup_error")
    law = lt_mod.stationary_density(cfg.drift_spec, cfg.M)
    report.summary["monotone_decrease"] = bool(np.all(np.diff(med) < 0))
    report.summary["m_mass"] = law.m_mass
    ok = report.ok_rows()
    n = sum(r["n_windings"] for r in ok)
    total = sum(r["tau_mean"] * r["n_windings"] for r in ok if r["n_windings"])
    report.summary["pooled_tau_mean"] = _clean(total / n) if n else None
    report.summary["xT_scaled_sd"] = [
        _clean(np.std([r["xT_scaled"] for r in ok if r["T"] == T], ddof=1)) if sum(r["T"] == T for r in ok) > 1 else None
        for T in cfg.T_grid
    ]
    report.law = law
    return report


def run_fluctuation(cfg, workers=1):
    """H^s norms of L/T - rho; the target slope is -1/2 for every s < 1/2."""
    report = _run("fluctuation", cfg, workers)
    report.summary["target_slope"] = -0.5
    report.summary["scaled_slopes"] = {
        m: _clean(report.slope(m)[0] + 0.5) for m in report.metrics
    }
    report.law = lt_mod.stationary_density(cfg.drift_spec, cfg.M)
    return report


def run_coverage(cfg, workers=1):
    """Credible-ball and pointwise-band coverage frequencies (diagnostic only)."""
    try:
        cfg.drift_spec.padded(cfg.prior_spec.N)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    report = _run("coverage", cfg, workers)
    freq = {}
    for T in cfg.T_grid:
        rows = [r for r in report.ok_rows() if r["T"] == T]
        if rows:
            freq[f"{T:g}"] = {
                "ball": float(np.mean([r["ball_covered"] for r in rows])),
                "band": float(np.mean([r["band_hits"] for r in rows]) / BAND_POINTS.size),
            }
    report.summary["coverage"] = freq
    return report


RUNNERS = {
    "contraction": run_contraction,
    "lln": run_lln,
    "fluctuation": run_fluctuation,
    "coverage": run_coverage,
}


def run_experiment(kind, cfg, out_dir=None, workers=1, timing=False):
    """Run one experiment and write its outputs; returns the report."""
    if kind not in RUNNERS:
        raise ConfigError(f"unknown experiment {kind!r}; choose from {KINDS}")
    report = RUNNERS[kind](cfg, workers)
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    report.write(out, timing=timing)
    law = getattr(report, "law", None)
    if law is not None:
        io.write_law_csv(law, out / "stationary_law.csv")
    return report
