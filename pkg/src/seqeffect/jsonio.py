"""JSON encoding of matrices, POVMs and reports.

Matrix format (row-major)::

    {"dim": d, "entries": [[[re, im], ...], ...]}
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import MatrixFormatError


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=np.complex128)
    return {
        "dim": int(M.shape[0]),
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in M],
    }


def matrix_from_json(obj) -> np.ndarray:
    """Parse the matrix format; ragged rows, wrong sizes and non-finite values are rejected."""
    if not isinstance(obj, dict) or "dim" not in obj or "entries" not in obj:
        raise MatrixFormatError('matrix JSON must be an object with "dim" and "entries"')
    dim = obj["dim"]
    rows = obj["entries"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MatrixFormatError(f"dim must be a positive integer, got {dim!r}")
    if not isinstance(rows, list) or len(rows) != dim:
        raise MatrixFormatError(f"expected {dim} rows")
    out = np.zeros((dim, dim), dtype=np.complex128)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise MatrixFormatError(f"row {i} is ragged: expected {dim} entries")
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
            ):
                raise MatrixFormatError(f"entry ({i}, {j}) must be a [re, im] pair of numbers")
            re, im = entry
            if not (math.isfinite(re) and math.isfinite(im)):
                raise MatrixFormatError(f"entry ({i}, {j}) is not finite")
            out[i, j] = complex(re, im)
    return out


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"{path}: {exc}") from exc
    return matrix_from_json(obj)


def load_povm(path) -> list:
    """POVM file: ``{"effects": [<matrix>, ...]}`` (a bare list is also accepted)."""
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"{path}: {exc}") from exc
    items = obj.get("effects") if isinstance(obj, dict) else obj
    if not isinstance(items, list) or not items:
        raise MatrixFormatError('POVM JSON must hold a non-empty "effects" list')
    return [matrix_from_json(e) for e in items]


def povm_to_json(effects) -> dict:
    return {"effects": [matrix_to_json(e) for e in effects]}


def to_jsonable(value):
    """Recursively convert numpy values, complex numbers and matrices."""
    if isinstance(value, np.ndarray):
        if value.ndim == 2 and value.shape[0] == value.shape[1]:
            return matrix_to_json(value)
        if value.ndim == 0:
            return to_jsonable(value.item())
        return [to_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        v = float(value)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if hasattr(value, "value") and isinstance(getattr(value, "value"), str):  # enums
        return value.value
    return value


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=False)
