"""Model configuration, the singular-value measure H and assumption checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AtomOutOfRange

DEFAULT_DELTA_GUARD = 1e-3
_WEIGHT_TOL = 1e-12


class Mode(str, enum.Enum):
    FINITE = "finite-n"
    LIMIT = "limit"


@dataclass(frozen=True)
class Distribution:
    """A standardized entry law: mean 0, variance 1, finite fourth moment."""

    name: str
    mean: float
    variance: float
    fourth_moment: float


# gamma42 is Gamma(shape=4, scale=2) shifted by 8 and divided by 4; excess
# kurtosis of Gamma(k) is 6/k, so E z^4 = 3 + 6/4.
DISTRIBUTIONS: dict[str, Distribution] = {
    "gaussian": Distribution("gaussian", 0.0, 1.0, 3.0),
    "gamma42": Distribution("gamma42", 0.0, 1.0, 4.5),
    "rademacher": Distribution("rademacher", 0.0, 1.0, 1.0),
    "uniform": Distribution("uniform", 0.0, 1.0, 1.8),
}


@dataclass(frozen=True)
class Dimensions:
    p: int
    q: int
    n: int

    @property
    def c1(self) -> float:
        return self.p / self.n

    @property
    def c2(self) -> float:
        return self.q / self.n

    @property
    def c3(self) -> float:
        return self.p / self.q

    @property
    def n_minus_q(self) -> int:
        return self.n - self.q

    def scaled(self, scale: float) -> "Dimensions":
        return Dimensions(*(max(1, round(scale * v)) for v in (self.p, self.q, self.n)))


@dataclass(frozen=True)
class RatioParams:
    """Dimension ratios used by the LSD equations.

    In finite-n mode every derived ratio is built from the exact integer
    dimensions; in limit mode from ``c1`` and ``c2`` alone.
    """

    c1: float
    c2: float
    mode: Mode = Mode.LIMIT
    dims: Dimensions | None = None

    def __post_init__(self):
        if not (0 < self.c1 < 1 and 0 < self.c2 < 1):
            raise ValueError(f"ratios must lie in (0, 1), got c1={self.c1}, c2={self.c2}")
        if self.c1 + self.c2 >= 1:
            raise ValueError("c1 + c2 must be < 1")
        if self.c1 >= self.c2:
            raise ValueError("c1 / c2 must be < 1")
        if self.mode is Mode.FINITE and self.dims is None:
            raise ValueError("finite-n mode needs dimensions")

    @classmethod
    def finite(cls, dims: Dimensions) -> "RatioParams":
        return cls(dims.c1, dims.c2, Mode.FINITE, dims)

    @classmethod
    def limit(cls, c1: float, c2: float) -> "RatioParams":
        return cls(c1, c2, Mode.LIMIT, None)

    # Derived ratios. Finite mode uses integer arithmetic where the formulas do.
    @property
    def p_over_n(self) -> float:
        return self.dims.p / self.dims.n if self.mode is Mode.FINITE else self.c1

    @property
    def n_over_q(self) -> float:
        return self.dims.n / self.dims.q if self.mode is Mode.FINITE else 1.0 / self.c2

    @property
    def p_over_q(self) -> float:
        return self.dims.p / self.dims.q if self.mode is Mode.FINITE else self.c1 / self.c2

    @property
    def p_over_nq(self) -> float:
        """p / (n - q)."""
        if self.mode is Mode.FINITE:
            return self.dims.p / self.dims.n_minus_q
        return self.c1 / (1.0 - self.c2)

    @property
    def q_over_nq(self) -> float:
        """q / (n - q)."""
        if self.mode is Mode.FINITE:
            return self.dims.q / self.dims.n_minus_q
        return self.c2 / (1.0 - self.c2)


@dataclass(frozen=True)
class SingularMeasure:
    """Discrete probability measure on [0, 1) of the singular values of Lambda."""

    atoms: tuple[float, ...]
    weights: tuple[float, ...]
    delta_guard: float = DEFAULT_DELTA_GUARD

    def __post_init__(self):
        if len(self.atoms) != len(self.weights) or not self.atoms:
            raise ValueError("atoms and weights must be non-empty and of equal length")
        for i, x in enumerate(self.atoms):
            if not (0.0 <= x < 1.0) or not math.isfinite(x):
                raise AtomOutOfRange(f"atom {i} = {x!r} outside [0, 1)")
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        if abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        if not self.delta_guard > 0:
            raise ValueError("delta_guard must be positive")

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.atoms, dtype=float)

    @property
    def w(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def within_guard(self) -> bool:
        return max(self.atoms) < 1.0 - self.delta_guard

    @classmethod
    def point_mass(cls, x: float = 0.0) -> "SingularMeasure":
        return cls((float(x),), (1.0,))


def realize_H(lambda_values: Sequence[float], delta_guard: float = DEFAULT_DELTA_GUARD) -> SingularMeasure:
    """Uniform-weight measure over ``lambda_values`` with duplicates merged."""
    vals = np.asarray(lambda_values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("need at least one singular value")
    bad = np.flatnonzero((vals < 0) | (vals >= 1) | ~np.isfinite(vals))
    if bad.size:
        raise AtomOutOfRange(f"singular value {vals[bad[0]]!r} at index {bad[0]} outside [0, 1)")
    atoms, counts = np.unique(vals, return_counts=True)
    weights = counts / vals.size
    # absorb rounding so the weights sum to one to machine precision
    weights[np.argmax(weights)] += 1.0 - weights.sum()
    return SingularMeasure(tuple(atoms.tolist()), tuple(weights.tolist()), delta_guard)


@dataclass(frozen=True)
class ModelConfig:
    dims: Dimensions
    lambdas: tuple[float, ...]
    dist: str = "gaussian"
    seed: int = 0
    rotate: bool = False
    delta_guard: float = DEFAULT_DELTA_GUARD

    @property
    def H(self) -> SingularMeasure:
        return realize_H(self.lambdas, self.delta_guard)

    @property
    def lambda_array(self) -> np.ndarray:
        return np.asarray(self.lambdas, dtype=float)

    def with_dims(self, dims: Dimensions, lambdas: Sequence[float]) -> "ModelConfig":
        return ModelConfig(dims, tuple(lambdas), self.dist, self.seed, self.rotate, self.delta_guard)


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str
    value: float | str | None = None


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[AssumptionCheck, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[AssumptionCheck]:
        return [c for c in self.checks if not c.passed]

    def summary(self) -> str:
        if self.ok:
            return "all assumptions satisfied"
        return "; ".join(f"{c.name}: {c.detail}" for c in self.failures)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail, "value": c.value}
                for c in self.checks
            ],
        }


def validate(config: ModelConfig) -> ValidationReport:
    """Check every modelling assumption; never raises."""
    d = config.dims
    checks = []
    positive = all(isinstance(v, (int, np.integer)) and v > 0 for v in (d.p, d.q, d.n))
    checks.append(AssumptionCheck("dims-positive", positive, f"(p, q, n) = ({d.p}, {d.q}, {d.n})"))
    if positive:
        checks.append(AssumptionCheck(
            "dimension-ratio-pq", d.p < d.q,
            f"p/q = {d.p}/{d.q} must be < 1", d.p / d.q))
        checks.append(AssumptionCheck(
            "dimension-sum", d.p + d.q < d.n,
            f"p + q = {d.p + d.q} must be < n = {d.n}", (d.p + d.q) / d.n))

    dist = DISTRIBUTIONS.get(config.dist)
    if dist is None:
        checks.append(AssumptionCheck(
            "entry-moments", False, f"unknown distribution {config.dist!r}", config.dist))
    else:
        ok = (dist.mean == 0.0 and dist.variance == 1.0 and math.isfinite(dist.fourth_moment))
        checks.append(AssumptionCheck(
            "entry-moments", ok,
            f"{dist.name}: mean {dist.mean}, variance {dist.variance}, E|z|^4 = {dist.fourth_moment}",
            dist.fourth_moment))

    lam = np.asarray(config.lambdas, dtype=float)
    n_ok = lam.ndim == 1 and lam.size == d.p
    checks.append(AssumptionCheck(
        "lambda-count", bool(n_ok), f"{lam.size} singular values for p = {d.p}", int(lam.size)))
    if lam.size:
        top = float(np.max(lam))
        in_range = bool(np.all(np.isfinite(lam)) and np.min(lam) >= 0.0)
        guard = 1.0 - config.delta_guard
        checks.append(AssumptionCheck(
            "lambda-norm", in_range and top < guard,
            f"singular values must lie in [0, {guard:g}); max = {top:g}, min = {float(np.min(lam)):g}",
            top))
    return ValidationReport(tuple(checks))
