"""JSON configuration documents (schema in ``config_schema.json``)."""

from __future__ import annotations

import copy
import hashlib
import json
import math
from importlib import resources
from pathlib import Path
from typing import Any, Iterable

import jsonschema

from .errors import ConfigSchemaError
from .model import DEFAULT_DELTA_GUARD, Dimensions, ModelConfig

SCHEMA_VERSION = 1


def load_schema() -> dict:
    text = resources.files("scclsd").joinpath("config_schema.json").read_text()
    return json.loads(text)


def expand_lambda(spec: dict, p: int) -> list[float]:
    """Turn a ``lambda`` block into p singular values (descending blocks kept in order)."""
    kind = spec["kind"]
    if kind == "scaled-identity":
        return [math.sqrt(spec["sq"])] * p
    if kind == "explicit":
        return [float(v) for v in spec["values"]]
    if kind != "block":
        raise ConfigSchemaError(f"unknown lambda kind {kind!r}")

    values: list[float] = []
    rest_at = None
    for i, block in enumerate(spec["blocks"]):
        given = [k for k in ("count", "fraction", "rest") if k in block]
        if len(given) != 1:
            raise ConfigSchemaError(f"block {i} needs exactly one of count/fraction/rest")
        lam = math.sqrt(block["sq"])
        if "count" in block:
            values.extend([lam] * block["count"])
        elif "fraction" in block:
            values.extend([lam] * int(round(block["fraction"] * p)))
        else:
            if rest_at is not None:
                raise ConfigSchemaError("only one block may use 'rest'")
            rest_at = (len(values), lam)
    if rest_at is not None:
        pos, lam = rest_at
        fill = p - len(values)
        if fill < 0:
            raise ConfigSchemaError(f"blocks already hold {len(values)} > p = {p} values")
        values[pos:pos] = [lam] * fill
    return values


def config_from_dict(doc: dict) -> ModelConfig:
    try:
        jsonschema.validate(doc, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise ConfigSchemaError(f"{where}: {exc.message}") from None
    dims = Dimensions(doc["p"], doc["q"], doc["n"])
    return ModelConfig(
        dims=dims,
        lambdas=tuple(expand_lambda(doc["lambda"], dims.p)),
        dist=doc.get("dist", "gaussian"),
        seed=doc.get("seed", 0),
        rotate=doc.get("rotate", False),
        delta_guard=doc.get("delta_guard", DEFAULT_DELTA_GUARD),
    )


def config_to_dict(config: ModelConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "p": config.dims.p,
        "q": config.dims.q,
        "n": config.dims.n,
        "lambda": {"kind": "explicit", "values": [float(v) for v in config.lambdas]},
        "dist": config.dist,
        "seed": config.seed,
        "rotate": config.rotate,
        "delta_guard": config.delta_guard,
    }


def config_hash(config: ModelConfig) -> str:
    blob = json.dumps(config_to_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(doc: dict, overrides: Iterable[str]) -> dict:
    """Apply ``key.sub=value`` overrides; values are parsed as JSON when possible."""
    out = copy.deepcopy(doc)
    for item in overrides:
        if "=" not in item:
            raise ConfigSchemaError(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = out
        for part in parts[:-1]:
            nxt = node.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigSchemaError(f"override {key!r}: {part!r} is not an object")
            node = nxt
        node[parts[-1]] = _parse_value(raw)
    return out


def read_document(path: str | Path, overrides: Iterable[str] = ()) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigSchemaError(f"cannot read config {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigSchemaError("config root must be a JSON object")
    return apply_overrides(doc, overrides)


def figure1_lambda(case: str) -> dict:
    """Lambda blocks for the three comparison cases (rank 5, rank p/2, full rank)."""
    cases = {
        "rank5": {"kind": "block", "blocks": [{"sq": 0.5, "count": 5}, {"sq": 0.0, "rest": True}]},
        "half-rank": {"kind": "block", "blocks": [{"sq": 0.5, "fraction": 0.5}, {"sq": 0.0, "rest": True}]},
        "full-rank": {"kind": "scaled-identity", "sq": 0.5},
    }
    return copy.deepcopy(cases[case])
