"""JSON interchange for spaces, measures, metrics, and results.

Schema names are versioned ("mmm-space/v1" etc).  The writer emits floats
with 17 significant digits, which round-trips IEEE doubles exactly; the
reader is plain JSON.  Distances travel as the upper triangle in row-major
order.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

import numpy as np

from .core import FiniteMmmSpace, MarkSpace
from .errors import ParameterError

SPACE_SCHEMA = "mmm-space/v1"
METRIC_SCHEMA = "mmm-metric/v1"
MEASURE_SCHEMA = "mmm-measure/v1"
MANIFEST_SCHEMA = "mmm-manifest/v1"


# ---------------------------------------------------------------------------
# low-level writer
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    if x != x:
        raise ParameterError("NaN is not serializable")
    if x in (float("inf"), float("-inf")):
        raise ParameterError("infinity is not serializable")
    s = format(float(x), ".17g")
    return s


def _write(obj: Any, parts: list) -> None:
    if obj is None:
        parts.append("null")
    elif obj is True:
        parts.append("true")
    elif obj is False:
        parts.append("false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        parts.append(json.dumps(obj))
    elif isinstance(obj, dict):
        parts.append("{")
        first = True
        for k, v in obj.items():
            if not first:
                parts.append(", ")
            first = False
            parts.append(json.dumps(str(k)))
            parts.append(": ")
            _write(v, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        parts.append("[")
        first = True
        for v in seq:
            if not first:
                parts.append(", ")
            first = False
            _write(v, parts)
        parts.append("]")
    else:
        raise ParameterError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """Serialize to JSON with float round-trip fidelity (17 sig digits)."""
    parts: list = []
    _write(obj, parts)
    return "".join(parts)


def dump_path(obj: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(obj))
        fh.write("\n")


def load_path(path: str) -> Any:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def sha256_path(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# mark spaces and spaces
# ---------------------------------------------------------------------------

def mark_space_to_obj(ms: MarkSpace) -> dict:
    if ms.kind == "discrete":
        return {"kind": "discrete", "labels": list(ms.labels)}
    return {"kind": "euclidean", "dim": ms.dim}


def mark_space_from_obj(obj: dict) -> MarkSpace:
    kind = obj.get("kind")
    if kind == "discrete":
        return MarkSpace.discrete(tuple(obj["labels"]))
    if kind == "euclidean":
        return MarkSpace.euclidean(int(obj["dim"]))
    raise ParameterError(f"unknown mark space kind {kind!r}")


def upper_triangle(d: np.ndarray) -> list:
    n = d.shape[0]
    return [float(d[i, j]) for i in range(n) for j in range(i + 1, n)]


def from_upper_triangle(vals, n: int) -> np.ndarray:
    need = n * (n - 1) // 2
    vals = list(vals)
    if len(vals) != need:
        raise ParameterError(
            f"upper triangle for {n} points needs {need} entries, got {len(vals)}"
        )
    d = np.zeros((n, n))
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = float(vals[k])
            k += 1
    return d


def space_to_obj(space: FiniteMmmSpace) -> dict:
    marks: list = []
    for m in space.marks:
        marks.append(list(m) if space.mark_space.kind == "euclidean" else m)
    return {
        "schema": SPACE_SCHEMA,
        "label": space.label,
        "mark_space": mark_space_to_obj(space.mark_space),
        "n": space.n,
        "weights": [float(w) for w in space.weights],
        "marks": marks,
        "distances": upper_triangle(space.distances),
    }


def space_from_obj(obj: dict) -> FiniteMmmSpace:
    if obj.get("schema") != SPACE_SCHEMA:
        raise ParameterError(f"expected schema {SPACE_SCHEMA}, got {obj.get('schema')!r}")
    ms = mark_space_from_obj(obj["mark_space"])
    n = int(obj["n"])
    marks = [tuple(m) if ms.kind == "euclidean" else m for m in obj["marks"]]
    return FiniteMmmSpace(
        distances=from_upper_triangle(obj["distances"], n),
        marks=tuple(marks),
        weights=np.asarray(obj["weights"], dtype=float),
        mark_space=ms,
        label=str(obj.get("label", "")),
    )


def save_space(space: FiniteMmmSpace, path: str) -> None:
    dump_path(space_to_obj(space), path)


def load_space(path: str) -> FiniteMmmSpace:
    return space_from_obj(load_path(path))


# ---------------------------------------------------------------------------
# plain metrics and point measures (prohorov CLI inputs)
# ---------------------------------------------------------------------------

def metric_to_obj(d: np.ndarray) -> dict:
    d = np.asarray(d, dtype=float)
    return {"schema": METRIC_SCHEMA, "n": d.shape[0], "matrix": d.tolist()}


def metric_from_obj(obj: dict) -> np.ndarray:
    if obj.get("schema") != METRIC_SCHEMA:
        raise ParameterError(f"expected schema {METRIC_SCHEMA}")
    d = np.asarray(obj["matrix"], dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ParameterError("metric matrix must be square")
    return d


def measure_to_obj(atoms, probs) -> dict:
    return {
        "schema": MEASURE_SCHEMA,
        "atoms": [int(a) for a in atoms],
        "probs": [float(p) for p in probs],
    }


def measure_from_obj(obj: dict):
    if obj.get("schema") != MEASURE_SCHEMA:
        raise ParameterError(f"expected schema {MEASURE_SCHEMA}")
    return (
        np.asarray(obj["atoms"], dtype=int),
        np.asarray(obj["probs"], dtype=float),
    )
