"""Damped Newton root finding for the Stieltjes-transform equations."""

from __future__ import annotations

import cmath
import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import NoConvergence, NumericalError, WrongBranch
from .equations import EquationContext, equation_residual, mb_from_m, xi_residual

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
_MIN_DAMPING = 2.0**-40
_POLISH = 2
_DESCENT_TOP = 10.0
_DESCENT_STEPS = 40


@dataclass(frozen=True)
class NewtonResult:
    m: complex
    residual: float
    iterations: int


def damped_newton(
    f: Callable[[complex], complex],
    m0: complex,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NewtonResult:
    """Newton on a complex-analytic residual with step halving.

    The derivative is a central finite difference with step
    1e-7 max(|m|, 1e-6), so it stays relative when |m| is small (large |z|).
    A step is accepted once it lowers |f|.  After |f| < tol, at most
    ``_POLISH`` undamped steps push the root towards rounding level.
    """

    def newton_step(m):
        h = 1e-7 * max(abs(m), 1e-6)
        d = (f(m + h) - f(m - h)) / (2.0 * h)
        return None if d == 0 or not cmath.isfinite(d) else r / d

    def trial_residual(m):
        try:
            return f(m)
        except NumericalError:
            return complex("inf")

    m = complex(m0)
    r = f(m)
    it = 0
    for it in range(1, max_iter + 1):
        if abs(r) < tol:
            break
        step = newton_step(m)
        if step is None:
            break
        lam = 1.0
        while lam >= _MIN_DAMPING:
            trial = m - lam * step
            rt = trial_residual(trial)
            if cmath.isfinite(rt) and abs(rt) < abs(r):
                m, r = trial, rt
                break
            lam *= 0.5
        else:
            break
    if cmath.isfinite(r) and abs(r) < tol:
        for _ in range(_POLISH):
            step = newton_step(m)
            if step is None or r == 0:
                break
            rt = trial_residual(m - step)
            if not (cmath.isfinite(rt) and abs(rt) < abs(r)):
                break
            m, r = m - step, rt
    if not cmath.isfinite(r) or abs(r) >= tol:
        raise NoConvergence(f"residual {abs(r):.3g} after {it} iterations from m0 = {m0!r}")
    return NewtonResult(m, abs(r), it)


def is_admissible(z: complex, m: complex, upper_edge: float | None = 1.0) -> bool:
    """Whether m can be the Stieltjes transform at z of a probability measure
    supported in [0, upper_edge] (``None`` for [0, inf)).

    Such transforms satisfy Im m > 0, Im(z m) >= 0 and
    Im((z - upper_edge) m) <= 0 whenever Im z > 0.
    """
    if not m.imag > 0:
        return False
    slack = 1e-12 * (1.0 + abs(z * m))
    if (z * m).imag < -slack:
        return False
    if upper_edge is not None and ((z - upper_edge) * m).imag > slack:
        return False
    return True


def _descend(f_at, z: complex, tol: float, max_iter: int) -> NewtonResult:
    """Continue from the -1/z asymptote far above z straight down to z."""
    top = max(_DESCENT_TOP, 10.0 * z.imag)
    m = None
    res = None
    for y in np.geomspace(top, z.imag, _DESCENT_STEPS):
        zz = complex(z.real, y)
        res = damped_newton(f_at(zz), -1.0 / zz if m is None else m, tol, max_iter)
        m = res.m
    return res


def _solve_herglotz(
    f_at: Callable[[complex], Callable[[complex], complex]],
    z: complex,
    init: complex | None,
    tol: float,
    max_iter: int,
    upper_edge: float | None = 1.0,
) -> NewtonResult:
    """Solve f_at(z)(m) = 0 for the admissible (Herglotz) root."""
    z = complex(z)
    if not z.imag > 0:
        raise ValueError(f"need Im z > 0, got z = {z!r}")
    f = f_at(z)
    if init is None and z.imag >= _DESCENT_TOP:
        init = -1.0 / z

    rejected = None
    if init is not None:
        try:
            res = damped_newton(f, complex(init), tol, max_iter)
            if is_admissible(z, res.m, upper_edge):
                return res
            rejected = res
            if res.m.imag <= 0:
                # lower half-plane: restart from the reflected point
                res = damped_newton(f, res.m.conjugate(), tol, max_iter)
                if is_admissible(z, res.m, upper_edge):
                    return res
                rejected = res
        except NoConvergence:
            pass

    try:
        res = _descend(f_at, z, tol, max_iter)
    except NoConvergence:
        if rejected is not None:
            raise WrongBranch(f"only root found at z = {z!r} is m = {rejected.m!r}") from None
        raise NoConvergence(f"no root found at z = {z!r}") from None
    if is_admissible(z, res.m, upper_edge):
        return res
    raise WrongBranch(f"only root found at z = {z!r} is m = {res.m!r}")


def solve_m(
    z: complex,
    ctx: EquationContext,
    init: complex | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> complex:
    """Stieltjes transform m(z) of the SCC limiting law, Im z > 0."""
    return _solve_herglotz(lambda zz: lambda m: equation_residual(zz, m, ctx), z, init, tol, max_iter).m


def solve_conj(z: complex, ctx: EquationContext, init: complex | None = None, **kw) -> complex:
    """m(z) for any non-real z, using m(conj z) = conj m(z)."""
    z = complex(z)
    if z.imag > 0:
        return solve_m(z, ctx, init, **kw)
    if z.imag < 0:
        return solve_m(z.conjugate(), ctx, None if init is None else complex(init).conjugate(), **kw).conjugate()
    raise ValueError("z must be off the real axis")


def m_xi_solve(
    z: complex,
    ctx: EquationContext,
    init: complex | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> complex:
    """Stieltjes transform of the noncentrality matrix's limiting law."""
    return _solve_herglotz(lambda zz: lambda m: xi_residual(zz, m, ctx), z, init, tol, max_iter, None).m


def solve_mb(z: complex, ctx: EquationContext, **kw) -> complex:
    """Block-matrix Stieltjes transform m_b(z) via m at (1 - z)^2."""
    w = (1 - complex(z)) ** 2
    return mb_from_m(z, solve_conj(w, ctx, **kw), ctx)


@dataclass(frozen=True, eq=False)
class StieltjesSolution:
    grid: np.ndarray
    m: np.ndarray
    residual: np.ndarray
    converged: np.ndarray

    def __len__(self) -> int:
        return int(self.grid.size)

    @property
    def all_converged(self) -> bool:
        return bool(np.all(self.converged))


def solve_grid(
    grid: Sequence[complex],
    ctx: EquationContext,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    solver: Callable[..., complex] = solve_m,
    residual: Callable[[complex, complex, EquationContext], complex] = equation_residual,
) -> StieltjesSolution:
    """Solve along ``grid`` warm-starting each point from its predecessor.

    Failures are flagged per point; the grid is never aborted.
    """
    zs = np.asarray(grid, dtype=complex)
    ms = np.full(zs.size, np.nan + 1j * np.nan)
    res = np.full(zs.size, np.inf)
    ok = np.zeros(zs.size, dtype=bool)
    prev = None
    for i, z in enumerate(zs):
        try:
            m = solver(complex(z), ctx, init=prev, tol=tol, max_iter=max_iter)
        except (NumericalError, ValueError) as exc:
            log.debug("grid point %d (z=%r) failed: %s", i, z, exc)
            prev = None
            continue
        ms[i] = m
        res[i] = abs(residual(complex(z), m, ctx))
        ok[i] = True
        prev = m
    return StieltjesSolution(zs, ms, res, ok)
