"""Limiting spectral distribution of the SCC matrix."""

from .density import (
    DEFAULT_EPS_SCHEDULE,
    DensityCurve,
    density,
    invert,
    mF_residual,
    xi_density,
)
from .equations import (
    EquationContext,
    equation_residual,
    fisher_pair,
    g1,
    g2,
    m_from_mb,
    m_from_mF,
    mb_from_m,
    mF_from_m,
    pair_ab,
    pair_residual,
    pullback_x,
    pushforward_t,
    xi_residual,
)
from .solver import (
    StieltjesSolution,
    damped_newton,
    m_xi_solve,
    solve_conj,
    solve_grid,
    solve_m,
    solve_mb,
)

__all__ = [
    "DEFAULT_EPS_SCHEDULE",
    "DensityCurve",
    "EquationContext",
    "StieltjesSolution",
    "damped_newton",
    "density",
    "equation_residual",
    "fisher_pair",
    "g1",
    "g2",
    "invert",
    "m_from_mF",
    "m_from_mb",
    "m_xi_solve",
    "mF_from_m",
    "mF_residual",
    "mb_from_m",
    "pair_ab",
    "pair_residual",
    "pullback_x",
    "pushforward_t",
    "solve_conj",
    "solve_grid",
    "solve_m",
    "solve_mb",
    "xi_density",
    "xi_residual",
]
