"""Density recovery by Stieltjes inversion, and the Fisher-route residual."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from ..errors import NumericalError
from .equations import EquationContext, fisher_pair, xi_residual
from .solver import DEFAULT_TOL, m_xi_solve, solve_grid, solve_m

DEFAULT_EPS_SCHEDULE = (1e-2, 5e-3, 2.5e-3)
ATOM_PROBE = 1e-7
ATOM_THRESHOLD = 1e-3


@dataclass(frozen=True, eq=False)
class DensityCurve:
    xs: np.ndarray
    fs: np.ndarray
    eps_schedule: tuple[float, ...]
    mass: float
    atom_zero: float = 0.0
    flagged: np.ndarray = field(default=None)  # type: ignore[assignment]
    min_raw: float = 0.0

    def __post_init__(self):
        if self.flagged is None:
            object.__setattr__(self, "flagged", np.zeros(self.xs.size, dtype=bool))

    @property
    def total_mass(self) -> float:
        return self.mass + self.atom_zero

    def cdf(self, x) -> np.ndarray:
        """Atom at zero plus the trapezoid-integrated continuous part."""
        F = self.atom_zero + cumulative_trapezoid(self.fs, self.xs, initial=0.0)
        x = np.asarray(x, dtype=float)
        out = np.interp(x, self.xs, F, left=0.0, right=F[-1])
        if self.atom_zero:
            out = np.where(x < 0, 0.0, out)
        return out


def _richardson(eps: Sequence[float], values: np.ndarray) -> np.ndarray:
    """Intercept of the least-squares line in eps, per column of ``values``."""
    e = np.asarray(eps, dtype=float)
    if e.size == 1:
        return values[0]
    A = np.column_stack([np.ones_like(e), e])
    coef, *_ = np.linalg.lstsq(A, values, rcond=None)
    return coef[0]


def _fill_flagged(xs: np.ndarray, fs: np.ndarray, flagged: np.ndarray) -> np.ndarray:
    good = ~flagged
    if good.all() or not good.any():
        return np.where(flagged, 0.0, fs)
    return np.where(flagged, np.interp(xs, xs[good], fs[good]), fs)


def atom_at_zero(solver: Callable[..., complex], ctx: EquationContext, probe: float = ATOM_PROBE) -> float:
    """Mass at the origin estimated as y Im m(iy) for small y."""
    try:
        m = solver(1j * probe, ctx)
    except NumericalError:
        return 0.0
    w = probe * m.imag
    return float(w) if w > ATOM_THRESHOLD else 0.0


def invert(
    ctx: EquationContext,
    xs: Sequence[float],
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE,
    solver: Callable[..., complex] = solve_m,
    residual=None,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> DensityCurve:
    """f(x) = lim (1/pi) Im m(x + i eps), extrapolated linearly in eps."""
    xs = np.asarray(xs, dtype=float)
    eps_schedule = tuple(float(e) for e in eps_schedule)
    kw = {"solver": solver, "tol": tol}
    if residual is not None:
        kw["residual"] = residual

    def run(eps: float):
        return solve_grid(xs + 1j * eps, ctx, **kw)

    if threads > 1 and len(eps_schedule) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sols = list(pool.map(run, eps_schedule))
    else:
        sols = [run(e) for e in eps_schedule]

    raw = np.vstack([np.where(s.converged, s.m.imag, np.nan) / np.pi for s in sols])
    flagged = ~np.all(np.vstack([s.converged for s in sols]), axis=0)
    raw = np.nan_to_num(raw, nan=0.0)
    atom = atom_at_zero(solver, ctx) if xs.size and xs[0] <= 0.0 else 0.0
    if atom:
        # remove the smeared point mass so only the continuous part is extrapolated
        for k, e in enumerate(eps_schedule):
            raw[k] -= atom * e / (np.pi * (xs**2 + e**2))
    f = _richardson(eps_schedule, raw)
    f = _fill_flagged(xs, f, flagged)
    min_raw = float(np.min(f)) if f.size else 0.0
    f = np.clip(f, 0.0, None)
    mass = float(trapezoid(f, xs))
    return DensityCurve(xs, f, eps_schedule, mass, atom, flagged, min_raw)


def density(
    ctx: EquationContext,
    xs: Sequence[float],
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE,
    tol: float = DEFAULT_TOL,
    threads: int = 1,
) -> DensityCurve:
    """Density of the SCC limiting law on ``xs`` (a grid in [0, 1])."""
    xs = np.asarray(xs, dtype=float)
    if xs.size and (xs.min() < 0 or xs.max() > 1):
        raise ValueError("density grid must lie in [0, 1]")
    return invert(ctx, xs, eps_schedule, tol=tol, threads=threads)


def xi_support_bound(ctx: EquationContext) -> float:
    c = ctx.ratios.p_over_n
    return float(np.max(ctx.t_atoms)) * (1 + np.sqrt(c)) ** 2


def xi_density(
    ctx: EquationContext,
    ts: Sequence[float] | None = None,
    eps_schedule: Sequence[float] = DEFAULT_EPS_SCHEDULE,
    points: int = 2001,
) -> DensityCurve:
    """Limiting law of the noncentrality matrix, over t >= 0."""
    if ts is None:
        ts = np.linspace(0.0, 1.25 * xi_support_bound(ctx) + 1e-3, points)
    return invert(ctx, ts, eps_schedule, solver=m_xi_solve, residual=xi_residual)


def mF_residual(zF: complex, mF: complex, hxi: DensityCurve, ctx: EquationContext) -> complex:
    """Residual of the noncentral-Fisher equation integrated against ``hxi``.

    Each bracket equals (t - a) / K with a from :func:`fisher_pair` and
    K = 1 + (p/q + p zF/(n-q)) mF.
    """
    r = ctx.ratios
    zF, mF = complex(zF), complex(mF)
    K = 1 + (r.p_over_q + r.p_over_nq * zF) * mF
    L = 1 + r.p_over_nq * zF * mF
    fisher_pair(zF, mF, ctx)  # raises on vanishing denominators

    def bracket(t):
        return t / K + (1 - r.p_over_q) / L - zF * K / L

    total = 0j
    if hxi.atom_zero:
        total += hxi.atom_zero / bracket(0.0)
    if hxi.mass:
        total += trapezoid(hxi.fs / bracket(hxi.xs), hxi.xs)
    return mF - total
