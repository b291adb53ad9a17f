import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scclsd.errors import PoleHit, RankDeficient
from scclsd.model import Dimensions
from scclsd.sampling import SamplePair, draw_sample
from scclsd.spectra import (
    EmpiricalSpectrum,
    Source,
    block_matrix,
    block_matrix_eigenvalues,
    canonical_correlations,
    green_trace,
    multiset_distance,
    predicted_block_spectrum,
    projection_sum_eigenvalues,
    trace_identity_rhs,
    verify_identities,
    zero_count,
)

from conftest import make_config


def _inv_sqrt(S):
    w, V = np.linalg.eigh(S)
    return (V / np.sqrt(w)) @ V.T


def scc_matrix_oracle(X, Y):
    """S_xx^{-1/2} S_xy S_yy^{-1} S_yx S_xx^{-1/2}, formed densely."""
    n = X.shape[1]
    Sxx, Syy, Sxy = X @ X.T / n, Y @ Y.T / n, X @ Y.T / n
    R = _inv_sqrt(Sxx)
    return R @ Sxy @ np.linalg.inv(Syy) @ Sxy.T @ R


def _pair(rng, p, q, n):
    return SamplePair(rng.standard_normal((p, n)), rng.standard_normal((q, n)))


def test_identical_rows_give_unit_correlation():
    s = SamplePair(np.array([[1.0, 2.0, 3.0]]), np.array([[1.0, 2.0, 3.0]]))
    assert canonical_correlations(s).values == pytest.approx([1.0], abs=1e-15)


def test_orthogonal_rows_give_zero():
    s = SamplePair(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))
    assert canonical_correlations(s).values == pytest.approx([0.0], abs=1e-15)


def test_scc_matches_dense_oracle(rng):
    s = _pair(rng, 4, 6, 20)
    l2 = np.sort(canonical_correlations(s).eigenvalues())
    oracle = np.sort(np.linalg.eigvalsh(scc_matrix_oracle(s.X, s.Y)))
    assert np.max(np.abs(l2 - oracle)) < 1e-10


def test_rank_deficient():
    X = np.ones((2, 10))
    with pytest.raises(RankDeficient):
        canonical_correlations(SamplePair(X, np.eye(3, 10)))
    with pytest.raises(RankDeficient):
        block_matrix_eigenvalues(SamplePair(X, np.eye(3, 10)))


def test_block_two_by_two():
    s = SamplePair(np.array([[1.0, 0.0]]), np.array([[0.5, np.sqrt(0.75)]]))
    B = block_matrix(s)
    assert B[0, 1] == pytest.approx(0.5)
    assert block_matrix_eigenvalues(s).values == pytest.approx([1.5, 0.5])


def test_block_identity_for_orthogonal_row_spaces():
    X = np.eye(6)[:2]
    Y = np.eye(6)[2:5]
    assert np.allclose(block_matrix_eigenvalues(SamplePair(X, Y)).values, 1.0, atol=1e-14)


@pytest.mark.parametrize("lam, dist, rotate", [
    ([0.0] * 7, "gaussian", False),
    ([0.9, 0.7, 0.5, 0.3, 0.2, 0.1, 0.0], "gamma42", True),
    ([0.5] * 7, "rademacher", False),
])
def test_block_spectrum_is_one_plus_minus_l(lam, dist, rotate):
    s = draw_sample(make_config(7, 11, 40, lam, dist, seed=4, rotate=rotate), 0)
    l = canonical_correlations(s).values
    b = block_matrix_eigenvalues(s).values
    assert multiset_distance(b, predicted_block_spectrum(l, 7, 11)) < 1e-8


def test_projection_sum_matches_block(rng):
    s = _pair(rng, 5, 8, 30)
    h = projection_sum_eigenvalues(s)
    b = block_matrix_eigenvalues(s)
    # oracle: dense eigen-decompositions of both matrices formed from inverses
    Px = s.X.T @ np.linalg.solve(s.X @ s.X.T, s.X)
    Py = s.Y.T @ np.linalg.solve(s.Y @ s.Y.T, s.Y)
    h_dense = np.sort(np.linalg.eigvalsh(Px + Py))[::-1]
    assert multiset_distance(h.values, h_dense) < 1e-8
    assert multiset_distance(h.values[:13], b.values) < 1e-8
    assert zero_count(h) == 30 - 5 - 8
    assert h.values.sum() == pytest.approx(13, abs=1e-8)


def test_green_trace_single_atom():
    spec = EmpiricalSpectrum(np.array([0.5]), Source.BLOCK_B, Dimensions(1, 1, 3))
    g = green_trace(spec, 1j)
    assert g.value == pytest.approx(0.4 + 0.8j, abs=1e-15)
    assert g.normalization == "per-(p+q)"


def test_green_trace_asymptote(rng):
    spec = canonical_correlations(_pair(rng, 4, 6, 20))
    z = 1e6j
    assert abs(green_trace(spec, z).value - (-1 / z)) < 1e-5 * abs(1 / z)


def test_green_trace_pole():
    spec = EmpiricalSpectrum(np.array([0.5]), Source.BLOCK_B, Dimensions(1, 1, 3))
    with pytest.raises(PoleHit):
        green_trace(spec, 0.5)


def test_green_trace_uses_squared_correlations():
    spec = EmpiricalSpectrum(np.array([0.5]), Source.SCC, Dimensions(1, 2, 5))
    assert green_trace(spec, 1j).value == pytest.approx(1 / (0.25 - 1j))


def test_trace_identity_against_dense_resolvent(rng):
    s = _pair(rng, 5, 9, 30)
    scc = canonical_correlations(s)
    B = block_matrix(s)
    for z in (0.3 + 0.2j, 1.7 + 0.05j, -0.4 + 2j):
        lhs = np.trace(np.linalg.inv(B - z * np.eye(14))) / 14
        assert abs(lhs - trace_identity_rhs(scc, z)) < 1e-10 * abs(lhs)


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(1e-3, 5), st.integers(0, 2**32 - 1))
def test_herglotz(x, y, seed):
    r = np.random.default_rng(seed)
    s = _pair(r, 3, 5, 15)
    for spec in (canonical_correlations(s), block_matrix_eigenvalues(s), projection_sum_eigenvalues(s)):
        assert green_trace(spec, complex(x, y)).value.imag > 0


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.integers(0, 2**32 - 1))
def test_scale_invariance(a, b, seed):
    r = np.random.default_rng(seed)
    s = _pair(r, 4, 6, 20)
    base = canonical_correlations(s).values
    scaled = canonical_correlations(SamplePair(a * s.X, b * s.Y)).values
    assert np.max(np.abs(base - scaled)) < 1e-12


def test_swap_symmetry(rng):
    s = _pair(rng, 4, 7, 25)
    xy = canonical_correlations(s).values
    yx = canonical_correlations(SamplePair(s.Y, s.X)).values
    assert yx.size == 7
    assert np.max(np.abs(xy - yx[:4])) < 1e-12
    assert np.allclose(yx[4:], 0.0)


@pytest.mark.parametrize("lam, dist", [
    ([0.0] * 7, "gaussian"),
    ([0.6] * 7, "gamma42"),
    ([0.95, 0.1, 0.1, 0.3, 0.0, 0.0, 0.5], "uniform"),
])
def test_verify_identities(lam, dist):
    for seed in range(3):
        rep = verify_identities(draw_sample(make_config(7, 11, 40, lam, dist, seed=seed), 0), 0.4 + 0.3j)
        assert rep.passed(1e-8), rep
        assert rep.expected_zero_count == 22
