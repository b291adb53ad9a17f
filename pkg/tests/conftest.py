import numpy as np
import pytest

from scclsd.config import config_from_dict, figure1_lambda
from scclsd.model import Dimensions, ModelConfig


def make_config(p=7, q=11, n=40, lambdas=None, dist="gaussian", seed=0, rotate=False):
    if lambdas is None:
        lambdas = [0.0] * p
    return ModelConfig(Dimensions(p, q, n), tuple(float(v) for v in lambdas), dist, seed, rotate)


def figure_config(case, p=125, q=375, n=1000, dist="gamma42", seed=0):
    return config_from_dict({
        "schema_version": 1, "p": p, "q": q, "n": n,
        "lambda": figure1_lambda(case), "dist": dist, "seed": seed,
    })


def wachter_density(x, c1, c2):
    """Closed-form null law of squared canonical correlations (p/n -> c1, q/n -> c2)."""
    lo = (np.sqrt(c2 * (1 - c1)) - np.sqrt(c1 * (1 - c2))) ** 2
    hi = (np.sqrt(c2 * (1 - c1)) + np.sqrt(c1 * (1 - c2))) ** 2
    x = np.asarray(x, dtype=float)
    inside = (x > lo) & (x < hi)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((xi - lo) * (hi - xi)) / (2 * np.pi * c1 * xi * (1 - xi))
    return out, lo, hi


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance reporting: one PASS/FAIL line per criterion in the terminal summary
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    number, label = marker.args
    ACCEPTANCE.setdefault(number, []).append((label, rep.passed, getattr(item, "detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[number]
        ok = all(p for _, p, _ in parts)
        text = "; ".join(f"{label}: {'pass' if p else 'fail'} ({detail})" for label, p, detail in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}")
