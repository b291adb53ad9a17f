"""Monte Carlo replication, ESD pooling and comparison against the solved LSD."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import kstest

from .config import config_from_dict, figure1_lambda
from .errors import InvalidConfig, NumericalError
from .io import write_density_csv, write_histogram_csv, write_json
from .lsd import DEFAULT_EPS_SCHEDULE, DensityCurve, EquationContext, density
from .model import Dimensions, Mode, ModelConfig, validate
from .sampling import draw_sample
from .spectra import canonical_correlations

log = logging.getLogger(__name__)

REFERENCE_DIMS = Dimensions(1000, 3000, 8000)
DESK_SCALE = 0.125
FIGURE1_CASES = ("rank5", "half-rank", "full-rank")
GAP_THRESHOLD = 1e-3
GAP_MIN_RUN = 5
SUPPORT_LEVEL = 1e-2
_QUANTILES = (0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0)


def default_grid(points: int = 501) -> np.ndarray:
    return np.linspace(0.0, 1.0, points)


@dataclass(frozen=True, eq=False)
class ExperimentSpec:
    config: ModelConfig
    replicates: int = 20
    density_grid: np.ndarray = field(default_factory=default_grid)
    comparison: str = "both"
    eps_schedule: tuple[float, ...] = DEFAULT_EPS_SCHEDULE
    mode: Mode = Mode.FINITE
    threads: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        g = np.asarray(self.density_grid, dtype=float)
        if g.size < 2 or g.min() < 0 or g.max() > 1:
            raise ValueError("density grid must have >= 2 points within [0, 1]")
        if self.comparison not in ("KS", "W1", "both"):
            raise ValueError(f"unknown comparison {self.comparison!r}")


@dataclass(eq=False)
class ComparisonReport:
    ks: float
    w1: float | None
    esd_summary: dict
    lsd_mass: float
    runtime_ms: int
    dims: Dimensions
    replicates: int
    failed_replicates: int = 0
    gap: dict = field(default_factory=dict)
    interior_minimum: dict | None = None
    notes: list[str] = field(default_factory=list)
    case: str = ""
    pooled: np.ndarray | None = None
    curve: DensityCurve | None = None

    def to_dict(self, include_runtime: bool = True) -> dict:
        out = {
            "case": self.case,
            "dims": {"p": self.dims.p, "q": self.dims.q, "n": self.dims.n},
            "replicates": self.replicates,
            "failed_replicates": self.failed_replicates,
            "ks": self.ks,
            "w1": self.w1,
            "esd_summary": self.esd_summary,
            "lsd_mass": self.lsd_mass,
            "lsd_atom_zero": self.curve.atom_zero if self.curve is not None else 0.0,
            "gap": self.gap,
            "interior_minimum": self.interior_minimum,
            "notes": self.notes,
        }
        if include_runtime:
            out["runtime_ms"] = self.runtime_ms
        return out


def _replicate_eigs(config: ModelConfig, r: int) -> np.ndarray | None:
    try:
        return canonical_correlations(draw_sample(config, r)).eigenvalues()
    except NumericalError as exc:
        log.warning("replicate %d failed: %s", r, exc)
        return None


def pooled_esd(config: ModelConfig, replicates: int, threads: int = 1) -> tuple[np.ndarray, int]:
    """Sorted squared canonical correlations pooled over replicates, and the failure count."""
    report = validate(config)
    if not report.ok:
        raise InvalidConfig(report.summary(), report)
    ids = range(replicates)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: _replicate_eigs(config, r), ids))
    else:
        parts = [_replicate_eigs(config, r) for r in ids]
    good = [p for p in parts if p is not None]
    if not good:
        raise NumericalError("all replicates failed")
    return np.sort(np.concatenate(good)), replicates - len(good)


def ks_distance(samples: np.ndarray, curve: DensityCurve) -> float:
    return float(kstest(samples, curve.cdf).statistic)


def w1_distance(samples: np.ndarray, curve: DensityCurve, points: int = 20001) -> float:
    """Integral of |F_n - F| over the curve's range."""
    xs = np.linspace(curve.xs[0], curve.xs[-1], points)
    s = np.sort(samples)
    Fn = np.searchsorted(s, xs, side="right") / s.size
    return float(trapezoid(np.abs(Fn - curve.cdf(xs)), xs))


def esd_summary(samples: np.ndarray) -> dict:
    qs = np.quantile(samples, _QUANTILES)
    return {"count": int(samples.size), **{f"q{int(100 * a):02d}": float(v) for a, v in zip(_QUANTILES, qs)}}


def support_hull(curve: DensityCurve, level: float = SUPPORT_LEVEL) -> tuple[float, float] | None:
    idx = np.flatnonzero(curve.fs > level)
    if idx.size == 0:
        return None
    return float(curve.xs[idx[0]]), float(curve.xs[idx[-1]])


def detect_gap(curve: DensityCurve, threshold: float = GAP_THRESHOLD, min_run: int = GAP_MIN_RUN) -> dict:
    """Runs of >= ``min_run`` grid points with f < threshold strictly inside the support hull."""
    idx = np.flatnonzero(curve.fs > SUPPORT_LEVEL)
    runs = []
    if idx.size:
        lo, hi = idx[0], idx[-1]
        low = curve.fs[lo + 1 : hi] < threshold
        start = None
        for k, flag in enumerate(np.append(low, False)):
            if flag and start is None:
                start = k
            elif not flag and start is not None:
                if k - start >= min_run:
                    runs.append((float(curve.xs[lo + 1 + start]), float(curve.xs[lo + k])))
                start = None
    return {"found": bool(runs), "intervals": runs, "threshold": threshold, "min_run": min_run}


def interior_minimum(curve: DensityCurve) -> dict | None:
    """Deepest interior local minimum of the density relative to the smaller flanking maximum."""
    hull = support_hull(curve)
    if hull is None:
        return None
    inside = np.flatnonzero((curve.xs > hull[0]) & (curve.xs < hull[1]))
    f = curve.fs
    best = None
    for i in inside[1:-1]:
        if f[i] < f[i - 1] and f[i] <= f[i + 1]:
            left, right = f[inside[0] : i].max(), f[i + 1 : inside[-1] + 1].max()
            ratio = f[i] / min(left, right)
            if ratio < 0.999 and (best is None or ratio < best["ratio"]):
                best = {"x": float(curve.xs[i]), "f": float(f[i]), "ratio": float(ratio)}
    return best


def run_experiment(spec: ExperimentSpec, case: str = "") -> ComparisonReport:
    t0 = time.perf_counter()
    pooled, failed = pooled_esd(spec.config, spec.replicates, spec.threads)
    ctx = EquationContext.from_config(spec.config, spec.mode)
    curve = density(ctx, spec.density_grid, spec.eps_schedule, threads=spec.threads)
    ks = ks_distance(pooled, curve)
    w1 = w1_distance(pooled, curve) if spec.comparison in ("W1", "both") else None
    if spec.comparison == "W1":
        ks = float("nan")
    notes = []
    if curve.flagged.any():
        notes.append(f"{int(curve.flagged.sum())} density grid points failed to converge")
    if failed:
        notes.append(f"{failed} replicates failed")
    return ComparisonReport(
        ks=ks,
        w1=w1,
        esd_summary=esd_summary(pooled),
        lsd_mass=curve.total_mass,
        runtime_ms=int(round(1000 * (time.perf_counter() - t0))),
        dims=spec.config.dims,
        replicates=spec.replicates,
        failed_replicates=failed,
        gap=detect_gap(curve),
        interior_minimum=interior_minimum(curve),
        notes=notes,
        case=case,
        pooled=pooled,
        curve=curve,
    )


def figure1_config(case: str, scale: float = DESK_SCALE, dist: str = "gamma42", seed: int = 0) -> ModelConfig:
    d = REFERENCE_DIMS.scaled(scale)
    return config_from_dict({
        "schema_version": 1,
        "p": d.p, "q": d.q, "n": d.n,
        "lambda": figure1_lambda(case),
        "dist": dist,
        "seed": seed,
    })


def write_case(out_dir: str | Path, report: ComparisonReport, bins: int = 50, include_runtime: bool = True) -> Path:
    d = Path(out_dir) / report.case if report.case else Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    if report.pooled is not None:
        write_histogram_csv(d / "esd.csv", report.pooled, bins)
    if report.curve is not None:
        write_density_csv(d / "lsd.csv", report.curve)
    write_json(d / "report.json", report.to_dict(include_runtime))
    return d


def figure1_suite(
    scale: float = DESK_SCALE,
    dist: str = "gamma42",
    replicates: int = 20,
    seed: int = 0,
    out_dir: str | Path | None = None,
    threads: int = 1,
    bins: int = 50,
    grid: np.ndarray | None = None,
    eps_schedule: tuple[float, ...] = DEFAULT_EPS_SCHEDULE,
    include_runtime: bool = True,
) -> list[ComparisonReport]:
    """The three Lambda configurations (rank 5, rank p/2, full rank) at scaled reference dims."""
    if not 0 < scale <= 1:
        raise ValueError("scale must lie in (0, 1]")
    reports = []
    for case in FIGURE1_CASES:
        config = figure1_config(case, scale, dist, seed)
        spec = ExperimentSpec(
            config, replicates, default_grid() if grid is None else grid,
            eps_schedule=eps_schedule, threads=threads)
        report = run_experiment(spec, case)
        if scale > 0.5:
            report.notes.append(f"scale {scale:g}: full-size dimensions, expect long runtimes")
        reports.append(report)
        if out_dir is not None:
            write_case(out_dir, report, bins, include_runtime)
    return reports
