"""Data generation X = Lambda Y + Gamma W with reproducible per-replicate streams."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import config_hash
from .errors import AtomOutOfRange, InvalidConfig
from .model import ModelConfig, validate

# substream tags; the rotation stream is shared by all replicates so that
# Lambda itself is fixed for a given config
_TAGS = {"W": 0, "Y": 1, "R": 2}
_CLAMP = 1e-12


def _rng(seed: int, replicate_id: int, tag: str) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate_id), _TAGS[tag]))
    return np.random.Generator(np.random.PCG64(ss))


def draw_entries(dist: str, shape: tuple[int, int], rng: np.random.Generator) -> np.ndarray:
    """Standardized i.i.d. entries."""
    if dist == "gaussian":
        return rng.standard_normal(shape)
    if dist == "gamma42":
        return (rng.gamma(4.0, 2.0, size=shape) - 8.0) / 4.0
    if dist == "rademacher":
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    if dist == "uniform":
        s = np.sqrt(3.0)
        return rng.uniform(-s, s, size=shape)
    raise InvalidConfig(f"unknown distribution {dist!r}")


def build_gamma(lambda_values: Sequence[float]) -> np.ndarray:
    """Diagonal of Gamma for the canonical embedding: sqrt(1 - lambda_i^2)."""
    lam = np.asarray(lambda_values, dtype=float)
    if np.any(lam >= 1) or np.any(lam < 0):
        raise AtomOutOfRange("singular values must lie in [0, 1)")
    return np.sqrt(1.0 - lam**2)


def _haar(rng: np.random.Generator, k: int) -> np.ndarray:
    z = rng.standard_normal((k, k))
    Q, R = np.linalg.qr(z)
    return Q * np.sign(np.diag(R))


def lambda_factors(config: ModelConfig) -> tuple[np.ndarray, np.ndarray]:
    """Dense (Lambda, Gamma) for the config; p x q and p x p."""
    p, q = config.dims.p, config.dims.q
    lam = config.lambda_array
    L = np.zeros((p, q))
    L[np.arange(p), np.arange(p)] = lam
    if not config.rotate:
        return L, np.diag(build_gamma(lam))
    rng = _rng(config.seed, 0, "R")
    U, V = _haar(rng, p), _haar(rng, q)
    L = U @ L @ V.T
    evals, evecs = np.linalg.eigh(np.eye(p) - L @ L.T)
    evals = np.where((evals < 0) & (evals > -_CLAMP), 0.0, evals)
    if np.any(evals < 0):
        raise AtomOutOfRange("I - Lambda Lambda' is not positive semidefinite")
    G = (evecs * np.sqrt(evals)) @ evecs.T
    return L, G


@dataclass(frozen=True)
class SamplePair:
    X: np.ndarray
    Y: np.ndarray
    replicate_id: int = 0
    config_hash: str = ""

    @property
    def p(self) -> int:
        return self.X.shape[0]

    @property
    def q(self) -> int:
        return self.Y.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]


def draw_sample(config: ModelConfig, replicate_id: int = 0) -> SamplePair:
    report = validate(config)
    if not report.ok:
        raise InvalidConfig(report.summary(), report)
    p, q, n = config.dims.p, config.dims.q, config.dims.n
    W = draw_entries(config.dist, (p, n), _rng(config.seed, replicate_id, "W"))
    Y = draw_entries(config.dist, (q, n), _rng(config.seed, replicate_id, "Y"))
    if config.rotate:
        L, G = lambda_factors(config)
        X = L @ Y + G @ W
    else:
        lam = config.lambda_array
        X = lam[:, None] * Y[:p] + build_gamma(lam)[:, None] * W
    return SamplePair(X, Y, replicate_id, config_hash(config))


_HEADER = struct.Struct("<QQ")


def dump_matrix(path: str | Path, M: np.ndarray) -> None:
    """Binary container: little-endian uint64 (rows, cols) then row-major float64."""
    M = np.ascontiguousarray(M, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(*M.shape))
        fh.write(M.tobytes(order="C"))


def load_matrix(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    rows, cols = _HEADER.unpack_from(data)
    body = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    if body.size != rows * cols:
        raise ValueError(f"{path}: expected {rows * cols} values, found {body.size}")
    return body.reshape(rows, cols).copy()


def dump_sample(directory: str | Path, s: SamplePair) -> tuple[Path, Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    px, py = d / f"X_{s.replicate_id}.bin", d / f"Y_{s.replicate_id}.bin"
    dump_matrix(px, s.X)
    dump_matrix(py, s.Y)
    return px, py
