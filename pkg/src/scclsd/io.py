"""CSV and JSON writers. Numbers use 17 significant digits, '.' decimal."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .lsd.density import DensityCurve
from .lsd.solver import StieltjesSolution
from .spectra import EmpiricalSpectrum


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _write_rows(path: str | Path, header: Sequence[str] | None, rows: Iterable[Sequence], comment: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(header)
        w.writerows(rows)
    return path


def write_spectrum_csv(path: str | Path, spec: EmpiricalSpectrum) -> Path:
    d = spec.dims
    comment = f"source={spec.source.value},p={d.p},q={d.q},n={d.n}"
    return _write_rows(path, ["value"], ([fmt(v)] for v in spec.values), comment)


def read_spectrum_csv(path: str | Path) -> tuple[dict, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    meta = dict(kv.split("=", 1) for kv in lines[0].lstrip("# ").split(","))
    return meta, np.array([float(v) for v in lines[2:]])


def write_solution_csv(path: str | Path, sol: StieltjesSolution) -> Path:
    rows = (
        [fmt(z.real), fmt(z.imag), fmt(m.real), fmt(m.imag), fmt(r), int(ok)]
        for z, m, r, ok in zip(sol.grid, sol.m, sol.residual, sol.converged)
    )
    return _write_rows(path, ["re_z", "im_z", "re_m", "im_m", "residual", "converged"], rows)


def write_density_csv(path: str | Path, curve: DensityCurve) -> Path:
    rows = ([fmt(x), fmt(f), int(flag)] for x, f, flag in zip(curve.xs, curve.fs, curve.flagged))
    return _write_rows(path, ["x", "f", "flagged"], rows)


def read_density_csv(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def write_histogram_csv(path: str | Path, values: np.ndarray, bins: int = 50, range_=(0.0, 1.0)) -> Path:
    counts, edges = np.histogram(values, bins=bins, range=range_)
    width = np.diff(edges)
    dens = counts / (max(values.size, 1) * width)
    rows = (
        [fmt(lo), fmt(hi), int(c), fmt(d)]
        for lo, hi, c, d in zip(edges[:-1], edges[1:], counts, dens)
    )
    return _write_rows(path, ["bin_left", "bin_right", "count", "density"], rows)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: str | Path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path
