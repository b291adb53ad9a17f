"""Finite-sample spectra: canonical correlations, block matrix B, projection sum H."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import PoleHit, RankDeficient
from .model import Dimensions
from .sampling import SamplePair

_SV_CLAMP = 1e-12
ZERO_REL_TOL = 1e-8


class Source(str, enum.Enum):
    SCC = "SCC"
    BLOCK_B = "BlockB"
    PROJECTION_H = "ProjectionH"


_NORMALIZATION = {
    Source.SCC: "per-p",
    Source.BLOCK_B: "per-(p+q)",
    Source.PROJECTION_H: "per-n",
}


@dataclass(frozen=True, eq=False)
class EmpiricalSpectrum:
    """Sorted (descending) spectrum.

    For ``Source.SCC`` the stored values are the canonical correlations l_i;
    :meth:`eigenvalues` returns l_i^2, the eigenvalues of the SCC matrix.
    """

    values: np.ndarray
    source: Source
    dims: Dimensions

    def eigenvalues(self) -> np.ndarray:
        if self.source is Source.SCC:
            return self.values**2
        return self.values

    def cdf(self, x) -> np.ndarray:
        ev = np.sort(self.eigenvalues())
        return np.searchsorted(ev, np.asarray(x, dtype=float), side="right") / ev.size

    def __len__(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class GreenTrace:
    z: complex
    value: complex
    source: Source
    normalization: str


def _rowspace_svd(M: np.ndarray, name: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    n = M.shape[1]
    if s.size == 0 or s[-1] <= n * np.finfo(float).eps * s[0]:
        raise RankDeficient(f"{name}{name}' is numerically singular (smallest singular value {s[-1] if s.size else 0:g})")
    return U, s, Vt


def _orth_rows(M: np.ndarray, name: str) -> np.ndarray:
    """Orthonormal basis (n x k) of the row space of M via QR."""
    Q, R = np.linalg.qr(M.T)
    s = np.linalg.svd(R, compute_uv=False)
    if s[-1] <= M.shape[1] * np.finfo(float).eps * s[0]:
        raise RankDeficient(f"{name}{name}' is numerically singular (smallest singular value {s[-1]:g})")
    return Q


def _dims(s: SamplePair) -> Dimensions:
    return Dimensions(s.p, s.q, s.n)


def canonical_correlations(s: SamplePair) -> EmpiricalSpectrum:
    Qx = _orth_rows(s.X, "X")
    Qy = _orth_rows(s.Y, "Y")
    l = np.linalg.svd(Qx.T @ Qy, compute_uv=False)
    l = np.clip(l, 0.0, None)
    over = l > 1.0
    if np.any(l[over] > 1.0 + _SV_CLAMP):
        raise RankDeficient(f"canonical correlation {l.max()!r} exceeds 1")
    l[over] = 1.0
    # SCC matrix is p x p of rank min(p, q): pad with zeros
    l = np.concatenate([l, np.zeros(s.p - l.size)])
    return EmpiricalSpectrum(np.sort(l)[::-1], Source.SCC, _dims(s))


def block_matrix(s: SamplePair) -> np.ndarray:
    """The symmetric (p+q) x (p+q) block correlation matrix."""
    Ux, _, Vxt = _rowspace_svd(s.X, "X")
    Uy, _, Vyt = _rowspace_svd(s.Y, "Y")
    # (XX')^{-1/2} X = Ux Vx' (polar factor)
    A = Ux @ (Vxt @ Vyt.T) @ Uy.T
    p, q = s.p, s.q
    B = np.eye(p + q)
    B[:p, p:] = A
    B[p:, :p] = A.T
    return B


def block_matrix_eigenvalues(s: SamplePair) -> EmpiricalSpectrum:
    ev = np.linalg.eigvalsh(block_matrix(s))
    return EmpiricalSpectrum(ev[::-1].copy(), Source.BLOCK_B, _dims(s))


def projection_sum(s: SamplePair) -> np.ndarray:
    _, _, Vxt = _rowspace_svd(s.X, "X")
    _, _, Vyt = _rowspace_svd(s.Y, "Y")
    return Vxt.T @ Vxt + Vyt.T @ Vyt


def projection_sum_eigenvalues(s: SamplePair) -> EmpiricalSpectrum:
    ev = np.linalg.eigvalsh(projection_sum(s))
    return EmpiricalSpectrum(ev[::-1].copy(), Source.PROJECTION_H, _dims(s))


def zero_count(spec: EmpiricalSpectrum, rel_tol: float = ZERO_REL_TOL) -> int:
    v = spec.eigenvalues()
    return int(np.sum(np.abs(v) < rel_tol * np.max(np.abs(v))))


def green_trace(spec: EmpiricalSpectrum, z: complex) -> GreenTrace:
    """Normalized trace of the resolvent, (1/N) sum 1/(lambda_i - z)."""
    z = complex(z)
    ev = spec.eigenvalues()
    diff = ev - z
    if np.min(np.abs(diff)) < 1e-14:
        raise PoleHit(f"z = {z!r} coincides with an eigenvalue")
    return GreenTrace(z, complex(np.mean(1.0 / diff)), spec.source, _NORMALIZATION[spec.source])


def multiset_distance(a, b) -> float:
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ValueError(f"multisets differ in size: {a.size} vs {b.size}")
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def predicted_block_spectrum(l: np.ndarray, p: int, q: int) -> np.ndarray:
    k = min(p, q)
    l = np.asarray(l, dtype=float)[:k]
    return np.concatenate([1.0 + l, np.ones(max(p, q) - k), 1.0 - l])


def trace_identity_rhs(scc: EmpiricalSpectrum, z: complex) -> complex:
    """(z-1)[ (q-p)/(p+q) * (-(1-z)^-2) + 2p/(p+q) * (1/p) Tr G_xy((1-z)^2) ]."""
    p, q = scc.dims.p, scc.dims.q
    w = (1 - z) ** 2
    m = green_trace(scc, w).value
    return (z - 1) * ((q - p) / (p + q) * (-1.0 / w) + 2 * p / (p + q) * m)


@dataclass(frozen=True)
class IdentityReport:
    z: complex
    block_distance: float
    trace_residual: float
    h_block_distance: float
    h_zero_count: int
    expected_zero_count: int

    def passed(self, tol: float = 1e-8) -> bool:
        return (
            self.block_distance < tol
            and self.trace_residual < tol
            and self.h_block_distance < tol
            and self.h_zero_count == self.expected_zero_count
        )

    def to_dict(self) -> dict:
        return {
            "z": [self.z.real, self.z.imag],
            "block_distance": self.block_distance,
            "trace_residual": self.trace_residual,
            "h_block_distance": self.h_block_distance,
            "h_zero_count": self.h_zero_count,
            "expected_zero_count": self.expected_zero_count,
        }


def verify_identities(s: SamplePair, z: complex) -> IdentityReport:
    """Check the eigenvalue multiset identity, trace identity, and H/B agreement."""
    z = complex(z)
    scc = canonical_correlations(s)
    bb = block_matrix_eigenvalues(s)
    hh = projection_sum_eigenvalues(s)
    p, q, n = s.p, s.q, s.n

    block_dist = multiset_distance(bb.values, predicted_block_spectrum(scc.values, p, q))

    lhs = green_trace(bb, z).value
    rhs = trace_identity_rhs(scc, z)
    trace_res = abs(lhs - rhs) / abs(lhs)

    top = hh.values[: p + q]
    h_dist = multiset_distance(top, bb.values)
    return IdentityReport(z, block_dist, trace_res, h_dist, zero_count(hh), n - p - q)
