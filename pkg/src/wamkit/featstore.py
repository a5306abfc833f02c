"""On-disk formats: raw feature matrices and fitted mixture models.

Feature files use a fixed little-endian binary layout so any language can
produce or consume them:

    bytes 0..3   magic ``FMX1``
    byte  4      dtype code, 0 for float32, 1 for float64
    bytes 5..12  row count, unsigned 64-bit
    bytes 13..20 column count, unsigned 64-bit
    bytes 21..   row-major IEEE754 payload in the declared dtype

Models are JSON documents tagged ``gmm-v1`` with keys written in schema
order, covariances stored as row-major lower triangles, and numbers printed
as shortest round-trippable decimals, so identical fits serialize to
identical bytes.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInput, InvalidModel, Truncated, UnknownFormat
from .gaussian import Gaussian
from .gmm import FitMeta, Gmm, TransformInfo
from .linalg import pack_lower, unpack_lower

__all__ = [
    "FeatureMatrix",
    "read_features",
    "write_features",
    "read_model",
    "write_model",
]

_MAGIC = b"FMX1"
_HEADER = struct.Struct("<4sBQQ")
_DTYPE_CODES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
_CODE_FOR_KIND = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}

_MODEL_FORMAT = "gmm-v1"
_WEIGHT_SUM_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """A 2-D block of features plus a free-form provenance tag."""

    data: np.ndarray
    source_tag: str = ""

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype not in _CODE_FOR_KIND:
            data = data.astype(np.float64)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise InvalidInput(
                f"features must be a nonempty 2-D matrix, got shape {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            flat = np.asarray(data, dtype=np.float64).ravel()
            first = int(np.flatnonzero(~np.isfinite(flat))[0])
            raise InvalidInput(f"non-finite feature entry at flat index {first}")
        object.__setattr__(self, "data", data)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]


def write_features(matrix: FeatureMatrix, path) -> None:
    """Write a feature matrix in the FMX1 binary layout."""
    code = _CODE_FOR_KIND[matrix.data.dtype]
    native = matrix.data.astype(_DTYPE_CODES[code], copy=False)
    header = _HEADER.pack(_MAGIC, code, matrix.n_rows, matrix.n_cols)
    Path(path).write_bytes(header + native.tobytes(order="C"))


def read_features(path) -> FeatureMatrix:
    """Read an FMX1 feature file, validating layout and payload."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        if blob[: min(len(blob), 4)] != _MAGIC[: min(len(blob), 4)]:
            raise UnknownFormat(f"not an FMX1 file: {path}")
        raise Truncated(_HEADER.size, len(blob))
    magic, code, n_rows, n_cols = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise UnknownFormat(f"bad magic {magic!r} in {path}")
    if code not in _DTYPE_CODES:
        raise UnknownFormat(f"unknown dtype code {code} in {path}")
    dtype = _DTYPE_CODES[code]
    expected = _HEADER.size + n_rows * n_cols * dtype.itemsize
    if len(blob) != expected:
        raise Truncated(expected, len(blob))
    data = (
        np.frombuffer(blob, dtype=dtype, count=n_rows * n_cols, offset=_HEADER.size)
        .reshape(n_rows, n_cols)
        .copy()
    )
    return FeatureMatrix(data=data)


def write_model(gmm: Gmm, path) -> None:
    """Serialize a fitted mixture as canonical ``gmm-v1`` JSON."""
    doc = {
        "format": _MODEL_FORMAT,
        "dim": gmm.dim,
        "k": gmm.k,
        "weights": [float(w) for w in gmm.weights],
        "means": [[float(v) for v in c.mean] for c in gmm.components],
        "covariances_lower": [
            [float(v) for v in pack_lower(c.cov)] for c in gmm.components
        ],
        "transform": {
            "log": bool(gmm.meta.transform.log),
            "epsilon": float(gmm.meta.transform.epsilon),
        },
        "fit": {
            "seed": int(gmm.meta.seed),
            "iterations": int(gmm.meta.iterations),
            "loglik": float(gmm.meta.loglik),
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def _field(doc: dict, name: str, kind, where: str = "model"):
    if name not in doc:
        raise InvalidModel(f"missing field '{name}' in {where}")
    value = doc[name]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise InvalidModel(f"field '{name}' must be a number")
        value = float(value)
        if not math.isfinite(value):
            raise InvalidModel(f"field '{name}' must be finite")
    elif kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise InvalidModel(f"field '{name}' must be an integer")
    elif not isinstance(value, kind):
        raise InvalidModel(f"field '{name}' has the wrong type")
    return value


def _finite_vector(raw, length: int, name: str) -> np.ndarray:
    arr = np.asarray(raw, dtype=np.float64)
    if arr.ndim != 1 or arr.size != length:
        raise InvalidModel(f"field '{name}' must hold {length} numbers")
    if not np.all(np.isfinite(arr)):
        raise InvalidModel(f"field '{name}' contains non-finite values")
    return arr


def read_model(path) -> Gmm:
    """Load and validate a ``gmm-v1`` model file."""
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidModel(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise InvalidModel("model document must be a JSON object")
    if doc.get("format") != _MODEL_FORMAT:
        raise UnknownFormat(f"format tag {doc.get('format')!r}, expected '{_MODEL_FORMAT}'")

    dim = _field(doc, "dim", int)
    k = _field(doc, "k", int)
    if dim < 1:
        raise InvalidModel("field 'dim' must be >= 1")
    if k < 1:
        raise InvalidModel("field 'k' must be >= 1")

    weights = _finite_vector(_field(doc, "weights", list), k, "weights")
    if np.any(weights < 0.0):
        raise InvalidModel("field 'weights' must be nonnegative")
    total = float(weights.sum())
    if abs(total - 1.0) > _WEIGHT_SUM_TOL:
        raise InvalidModel(
            f"field 'weights' sums to {total!r}, expected 1 within {_WEIGHT_SUM_TOL}"
        )
    weights = weights / total

    means_raw = _field(doc, "means", list)
    covs_raw = _field(doc, "covariances_lower", list)
    if len(means_raw) != k:
        raise InvalidModel(f"field 'means' must hold {k} vectors")
    if len(covs_raw) != k:
        raise InvalidModel(f"field 'covariances_lower' must hold {k} triangles")
    tri_len = dim * (dim + 1) // 2
    components = []
    for i in range(k):
        mean = _finite_vector(means_raw[i], dim, f"means[{i}]")
        tri = _finite_vector(covs_raw[i], tri_len, f"covariances_lower[{i}]")
        components.append(Gaussian(mean, unpack_lower(tri, dim)))

    transform_doc = _field(doc, "transform", dict)
    log_flag = _field(transform_doc, "log", bool, "transform")
    epsilon = _field(transform_doc, "epsilon", float, "transform")
    if epsilon <= 0.0:
        raise InvalidModel("field 'transform.epsilon' must be positive")

    fit_doc = _field(doc, "fit", dict)
    meta = FitMeta(
        seed=_field(fit_doc, "seed", int, "fit"),
        iterations=_field(fit_doc, "iterations", int, "fit"),
        loglik=_field(fit_doc, "loglik", float, "fit"),
        transform=TransformInfo(log=log_flag, epsilon=epsilon),
    )
    return Gmm(weights=weights, components=tuple(components), meta=meta)
