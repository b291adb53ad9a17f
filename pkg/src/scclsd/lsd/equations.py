"""The equation set for the Stieltjes transform of the SCC limiting law.

Notation: ``M = (1 - z) m - 1``.  ``g1``/``g2`` are the two auxiliary
functions of (z, m); the main equation reads

    G1 * b(z, m) = sum_k w_k / (t(x_k) - G2 / G1)

with ``b = (q/(n-q)) (1-z) M / (1 + (p/(n-q)) M)`` and
``t(x) = (n/q) x^2 / (1 - x^2)``.  Finite-n mode writes G1 and G2 through
the (a, b) pair of the noncentral-Fisher route; limit mode uses the closed
forms in c1, c2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import AtomOutOfRange, BracketSingular, DenominatorVanishes
from ..model import Dimensions, Mode, ModelConfig, RatioParams, SingularMeasure

_TINY = 1e-14


def _nz(value: complex, factor: str) -> complex:
    if not abs(value) > _TINY:
        raise DenominatorVanishes(factor, value)
    return value


@dataclass(frozen=True)
class EquationContext:
    ratios: RatioParams
    H: SingularMeasure

    @classmethod
    def from_config(cls, config: ModelConfig, mode: Mode = Mode.FINITE) -> "EquationContext":
        d = config.dims
        ratios = RatioParams.finite(d) if mode is Mode.FINITE else RatioParams.limit(d.c1, d.c2)
        return cls(ratios, config.H)

    @classmethod
    def limit(cls, c1: float, c2: float, H: SingularMeasure | None = None) -> "EquationContext":
        return cls(RatioParams.limit(c1, c2), H or SingularMeasure.point_mass(0.0))

    @classmethod
    def finite(cls, dims: Dimensions, H: SingularMeasure | None = None) -> "EquationContext":
        return cls(RatioParams.finite(dims), H or SingularMeasure.point_mass(0.0))

    @property
    def mode(self) -> Mode:
        return self.ratios.mode

    @property
    def dims(self) -> Dimensions | None:
        return self.ratios.dims

    @property
    def c1(self) -> float:
        return self.ratios.c1

    @property
    def c2(self) -> float:
        return self.ratios.c2

    @property
    def t_atoms(self) -> np.ndarray:
        """Atoms of H pushed forward to the noncentrality scale."""
        x = self.H.x
        return self.ratios.n_over_q * x**2 / (1.0 - x**2)


def pushforward_t(x: float, ctx: EquationContext) -> float:
    """t = (n/q) x^2 / (1 - x^2)."""
    if not 0.0 <= x < 1.0:
        raise AtomOutOfRange(f"x = {x!r} outside [0, 1)")
    return ctx.ratios.n_over_q * x * x / (1.0 - x * x)


def pullback_x(t: float, ctx: EquationContext) -> float:
    """Inverse of :func:`pushforward_t`: x = sqrt((q/n) t / (1 + (q/n) t))."""
    if t < 0:
        raise ValueError(f"t = {t!r} must be nonnegative")
    s = t / ctx.ratios.n_over_q
    return math.sqrt(s / (1.0 + s))


def _M(z: complex, m: complex) -> complex:
    return (1 - z) * m - 1


def pair_ab(z: complex, m: complex, ctx: EquationContext) -> tuple[complex, complex]:
    """Map (z, m) to the (a, b) pair that solves the noncentrality equation."""
    r = ctx.ratios
    M = _M(z, m)
    one_minus_z = _nz(1 - z, "1-z")
    den_z = _nz(1 + r.p_over_nq * z * M, "1+pzM/(n-q)")
    den = _nz(1 + r.p_over_nq * M, "1+pM/(n-q)")
    zF = z / (r.q_over_nq * one_minus_z)
    a = den / den_z * (zF * den - (1 - r.p_over_q))
    b = r.q_over_nq * one_minus_z * M / den
    return a, b


def _g1_limit(z: complex, m: complex, c1: float, c2: float) -> complex:
    M = _M(z, m)
    den = _nz(1 - c2 + c1 * z * M, "1-c2+c1zM")
    return 1 - c1 - c1 * M + c1 * (1 - c1) * (1 - z) * M / den


def _g2_limit(z: complex, m: complex, c1: float, c2: float) -> complex:
    one_minus_z = _nz(1 - z, "1-z")
    inner = _nz(1 - c2 - c1 * z + c1 * z * m * one_minus_z, "1-c2-c1z+c1zm(1-z)")
    lead = (1 - c1 - c2 + c1 * one_minus_z * m) / (c2 * one_minus_z)
    return lead * (1 - one_minus_z * (1 - c1) / inner)


def g1(z: complex, m: complex, ctx: EquationContext) -> complex:
    z, m = complex(z), complex(m)
    if ctx.mode is Mode.LIMIT:
        return _g1_limit(z, m, ctx.c1, ctx.c2)
    a, b = pair_ab(z, m, ctx)
    c = ctx.ratios.p_over_n
    return 1 - c - c * a * b


def g2(z: complex, m: complex, ctx: EquationContext) -> complex:
    z, m = complex(z), complex(m)
    if ctx.mode is Mode.LIMIT:
        return _g2_limit(z, m, ctx.c1, ctx.c2)
    return pair_ab(z, m, ctx)[0]


def equation_lhs_factor(z: complex, m: complex, ctx: EquationContext) -> complex:
    """(q/(n-q)) (1-z) M / (1 + (p/(n-q)) M); equals b of the pair."""
    r = ctx.ratios
    M = _M(z, m)
    return r.q_over_nq * (1 - z) * M / _nz(1 + r.p_over_nq * M, "1+pM/(n-q)")


def equation_residual(z: complex, m: complex, ctx: EquationContext) -> complex:
    """Left side minus right side of the main equation at (z, m)."""
    z, m = complex(z), complex(m)
    G1 = _nz(g1(z, m, ctx), "G1")
    ratio = g2(z, m, ctx) / G1
    bracket = ctx.t_atoms - ratio
    hit = np.flatnonzero(np.abs(bracket) <= _TINY)
    if hit.size:
        raise BracketSingular(int(hit[0]))
    rhs = complex(np.sum(ctx.H.w / bracket))
    return G1 * equation_lhs_factor(z, m, ctx) - rhs


def pair_residual(a: complex, b: complex, ctx: EquationContext) -> complex:
    """b - sum_k w_k / (t_k (1 - p/n - (p/n) a b) - a)."""
    c = ctx.ratios.p_over_n
    bracket = ctx.t_atoms * (1 - c - c * a * b) - a
    hit = np.flatnonzero(np.abs(bracket) <= _TINY)
    if hit.size:
        raise BracketSingular(int(hit[0]))
    return complex(b - np.sum(ctx.H.w / bracket))


def xi_residual(z: complex, m_xi: complex, ctx: EquationContext) -> complex:
    """Marchenko-Pastur type equation for the noncentrality matrix."""
    c = ctx.ratios.p_over_n
    bracket = ctx.t_atoms * (1 - c - c * z * m_xi) - z
    hit = np.flatnonzero(np.abs(bracket) <= _TINY)
    if hit.size:
        raise BracketSingular(int(hit[0]))
    return complex(m_xi - np.sum(ctx.H.w / bracket))


def mF_from_m(z: complex, m: complex, ctx: EquationContext) -> tuple[complex, complex]:
    """SCC transform -> noncentral Fisher transform at the mapped point."""
    r = ctx.ratios
    one_minus_z = _nz(1 - complex(z), "1-z")
    k = r.q_over_nq  # q / (n - q)
    zF = z / (k * one_minus_z)
    mF = k * one_minus_z**2 * m - k * one_minus_z
    return zF, mF


def m_from_mF(z: complex, mF: complex, ctx: EquationContext) -> complex:
    """Inverse of :func:`mF_from_m` (z is the SCC-side argument)."""
    one_minus_z = _nz(1 - complex(z), "1-z")
    k = ctx.ratios.q_over_nq
    return 1 / one_minus_z + mF / (k * one_minus_z**2)


def fisher_pair(zF: complex, mF: complex, ctx: EquationContext) -> tuple[complex, complex]:
    """(a, b) written through the Fisher-side quantities (zF, mF)."""
    r = ctx.ratios
    K = 1 + (r.p_over_q + r.p_over_nq * zF) * mF
    L = _nz(1 + r.p_over_nq * zF * mF, "1+p zF mF/(n-q)")
    a = zF * K**2 / L - (1 - r.p_over_q) * K / L
    b = mF / _nz(K, "1+(p/q+p zF/(n-q)) mF")
    return a, b


def _m_from_mb(z: complex, mb: complex, c1: float, c2: float) -> tuple[complex, complex]:
    if c1 <= 0:
        raise ValueError("c1 must be positive")
    zm1 = _nz(complex(z) - 1, "z-1")
    m = ((c1 + c2) * mb + (c1 - c2) / (1 - z)) / (2 * c1 * zm1)
    return zm1**2, m


def _mb_from_m(z: complex, m: complex, c1: float, c2: float) -> complex:
    zm1 = _nz(complex(z) - 1, "z-1")
    return (2 * c1 * zm1 * m - (c1 - c2) / (1 - z)) / (c1 + c2)


def _c12(ctx: EquationContext) -> tuple[float, float]:
    r = ctx.ratios
    if r.mode is Mode.FINITE:
        return r.dims.p / r.dims.n, r.dims.q / r.dims.n
    return r.c1, r.c2


def m_from_mb(z: complex, mb: complex, ctx: EquationContext) -> tuple[complex, complex]:
    """Block-matrix transform m_b(z) -> (w, m(w)) with w = (1 - z)^2."""
    return _m_from_mb(z, mb, *_c12(ctx))


def mb_from_m(z: complex, m_at_w: complex, ctx: EquationContext) -> complex:
    """Inverse of :func:`m_from_mb`: m_b(z) from m evaluated at (1 - z)^2."""
    return _mb_from_m(z, m_at_w, *_c12(ctx))
