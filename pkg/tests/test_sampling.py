import numpy as np
import pytest

from scclsd.errors import AtomOutOfRange, InvalidConfig
from scclsd.model import DISTRIBUTIONS
from scclsd.sampling import (
    _rng,
    build_gamma,
    draw_entries,
    draw_sample,
    dump_matrix,
    dump_sample,
    lambda_factors,
    load_matrix,
)

from conftest import make_config


def test_gamma_null_is_identity():
    assert np.array_equal(build_gamma([0.0] * 4), np.ones(4))


def test_gamma_half():
    assert build_gamma([np.sqrt(0.5)]) == pytest.approx([np.sqrt(0.5)], abs=1e-15)


def test_gamma_pythagorean():
    assert build_gamma([0.6, 0.8]) == pytest.approx([0.8, 0.6], abs=1e-15)


def test_gamma_rejects_unit_norm():
    with pytest.raises(AtomOutOfRange):
        build_gamma([1.0])


@pytest.mark.parametrize("dist", sorted(DISTRIBUTIONS))
def test_entry_moments(dist):
    q, n = 200, 500
    cfg = make_config(100, q, n, [0.3] * 100, dist=dist, seed=5)
    s = draw_sample(cfg, 0)
    assert abs(s.Y.mean()) < 4 / np.sqrt(q * n)
    W = draw_entries(dist, (100, n), _rng(5, 0, "W"))
    kurt = DISTRIBUTIONS[dist].fourth_moment
    assert abs((W**2).mean() - 1) <= 4 * np.sqrt(kurt - 1) / np.sqrt(100 * n)


def test_null_row_covariance_is_identity():
    cfg = make_config(2, 3, 100_000, [0.0, 0.0], seed=11)
    s = draw_sample(cfg, 0)
    cov = s.X @ s.X.T / s.n
    assert np.max(np.abs(cov - np.eye(2))) < 0.02


def test_population_identity_diag_and_rotated():
    lam = [0.1, 0.5, 0.7, 0.9]
    for rotate in (False, True):
        L, G = lambda_factors(make_config(4, 6, 20, lam, rotate=rotate, seed=2))
        assert np.allclose(L @ L.T + G @ G.T, np.eye(4), atol=1e-12)
        assert np.allclose(np.sort(np.linalg.svd(L, compute_uv=False)), sorted(lam), atol=1e-12)


def test_determinism():
    cfg = make_config(5, 8, 30, [0.4] * 5, dist="gamma42", seed=99, rotate=True)
    a, b = draw_sample(cfg, 3), draw_sample(cfg, 3)
    assert np.array_equal(a.X, b.X) and np.array_equal(a.Y, b.Y)
    assert a.config_hash == b.config_hash and a.replicate_id == 3


def test_replicates_use_distinct_streams():
    cfg = make_config(5, 8, 30, seed=1)
    a, b = draw_sample(cfg, 0), draw_sample(cfg, 1)
    assert not np.allclose(a.Y, b.Y)


def test_stream_keys_do_not_collide():
    states = set()
    for seed in range(4):
        for r in range(50):
            for tag in ("W", "Y", "R"):
                states.add(_rng(seed, r, tag).bit_generator.state["state"]["state"])
    assert len(states) == 4 * 50 * 3


def test_X_is_lambda_Y_plus_gamma_W():
    lam = np.array([0.0, 0.3, 0.8])
    cfg = make_config(3, 5, 12, lam, seed=4)
    s = draw_sample(cfg, 2)
    W = draw_entries("gaussian", (3, 12), _rng(4, 2, "W"))
    assert np.allclose(s.X, lam[:, None] * s.Y[:3] + np.sqrt(1 - lam**2)[:, None] * W, atol=1e-15)


def test_invalid_config_rejected():
    with pytest.raises(InvalidConfig):
        draw_sample(make_config(5, 4, 30, [0.0] * 5), 0)


def test_binary_roundtrip(tmp_path):
    M = np.arange(12.0).reshape(3, 4) / 7
    dump_matrix(tmp_path / "m.bin", M)
    raw = (tmp_path / "m.bin").read_bytes()
    assert int.from_bytes(raw[:8], "little") == 3 and int.from_bytes(raw[8:16], "little") == 4
    assert np.array_equal(load_matrix(tmp_path / "m.bin"), M)
    s = draw_sample(make_config(seed=3), 1)
    px, py = dump_sample(tmp_path, s)
    assert np.array_equal(load_matrix(px), s.X) and np.array_equal(load_matrix(py), s.Y)
