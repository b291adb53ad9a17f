import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scclsd.errors import AtomOutOfRange, InvalidConfig, NumericalError
from scclsd.lsd import EquationContext
from scclsd.model import (
    DISTRIBUTIONS,
    Dimensions,
    Mode,
    RatioParams,
    SingularMeasure,
    realize_H,
    validate,
)
from scclsd.sampling import draw_sample
from scclsd.spectra import canonical_correlations

from conftest import make_config


def test_validate_scaled_down_half_identity_passes():
    cfg = make_config(100, 300, 800, [math.sqrt(0.5)] * 100)
    assert validate(cfg).ok


def test_validate_p_not_below_q():
    report = validate(make_config(300, 100, 800, [0.0] * 300))
    assert not report.ok
    assert [c.name for c in report.failures] == ["dimension-ratio-pq"]


def test_validate_p_plus_q_not_below_n():
    report = validate(make_config(400, 500, 800, [0.0] * 400))
    assert [c.name for c in report.failures] == ["dimension-sum"]


@pytest.mark.parametrize("lam, name", [
    ([0.9995] * 7, "lambda-norm"),
    ([1.2] * 7, "lambda-norm"),
    ([0.1] * 6, "lambda-count"),
])
def test_validate_lambda_failures(lam, name):
    report = validate(make_config(lambdas=lam))
    assert name in [c.name for c in report.failures]


def test_validate_unknown_distribution():
    report = validate(make_config(dist="cauchy"))
    assert [c.name for c in report.failures] == ["entry-moments"]


def test_distributions_are_standardized():
    for d in DISTRIBUTIONS.values():
        assert d.mean == 0 and d.variance == 1 and math.isfinite(d.fourth_moment)


def test_realize_H_null():
    H = realize_H([0, 0, 0, 0])
    assert H.atoms == (0.0,) and H.weights == (1.0,)


def test_realize_H_rank_five():
    p = 40
    H = realize_H([math.sqrt(0.5)] * 5 + [0.0] * (p - 5))
    assert H.atoms == (0.0, math.sqrt(0.5))
    assert H.weights == pytest.approx(((p - 5) / p, 5 / p), abs=1e-15)


def test_realize_H_half_rank():
    H = realize_H([math.sqrt(0.5)] * 10 + [0.0] * 10)
    assert H.weights == pytest.approx((0.5, 0.5), abs=1e-15)


@pytest.mark.parametrize("bad", [[1.0], [-0.1, 0.2], [0.3, 1.5]])
def test_realize_H_rejects_out_of_range(bad):
    with pytest.raises(AtomOutOfRange):
        realize_H(bad)


@given(st.lists(st.floats(0, 0.99, allow_nan=False), min_size=1, max_size=300))
def test_realize_H_weights_sum_to_one(values):
    H = realize_H(values)
    assert abs(sum(H.weights) - 1.0) <= 1e-12
    assert len(H.atoms) == len(set(values))


def test_singular_measure_validates_weights():
    with pytest.raises(ValueError):
        SingularMeasure((0.0, 0.5), (0.5, 0.6))
    with pytest.raises(AtomOutOfRange):
        SingularMeasure((1.0,), (1.0,))


def test_finite_ratios_are_exact():
    d = Dimensions(125, 375, 1000)
    r = RatioParams.finite(d)
    assert r.c1 == 125 / 1000 and r.c2 == 375 / 1000
    assert r.mode is Mode.FINITE
    assert r.p_over_nq == 125 / 625 and r.q_over_nq == 375 / 625 and r.n_over_q == 1000 / 375


def test_limit_ratios():
    r = RatioParams.limit(0.125, 0.375)
    assert r.p_over_nq == pytest.approx(0.2) and r.n_over_q == pytest.approx(8 / 3)
    with pytest.raises(ValueError):
        RatioParams.limit(0.6, 0.5)


dims_strategy = st.tuples(st.integers(1, 12), st.integers(1, 16), st.integers(1, 40))


@settings(max_examples=60, deadline=None)
@given(dims_strategy,
       st.lists(st.floats(0, 1.05, allow_nan=False), min_size=0, max_size=14),
       st.sampled_from(["gaussian", "gamma42", "rademacher", "uniform", "bogus"]))
def test_validate_iff_downstream_accepts(dims, lam, dist):
    p, q, n = dims
    cfg = make_config(p, q, n, lam, dist)
    report = validate(cfg)
    if report.ok:
        s = draw_sample(cfg, 0)
        try:
            canonical_correlations(s)
        except NumericalError:
            # tiny n with discrete entries can be singular by chance, not by config
            assert dist == "rademacher" or n - p - q < 3
        EquationContext.from_config(cfg)
    else:
        with pytest.raises(InvalidConfig):
            draw_sample(cfg, 0)
