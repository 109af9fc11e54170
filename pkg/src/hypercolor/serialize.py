"""Lossless serialization helpers: JSON/CSV matrices, text hypergraphs.

Doubles are serialized through ``repr`` (shortest round-tripping decimal),
so JSON emitted here reloads bit-exactly.  Exact integers that may exceed
the double range are emitted as strings by callers.
"""

from __future__ import annotations

import copy
import io
import json

import numpy as np

from .polytope import OverlapMatrix

__all__ = [
    "matrix_to_json_dict",
    "matrix_from_json_dict",
    "matrix_to_csv",
    "matrix_from_csv",
    "canonical_json",
    "strip_volatile",
    "hypergraph_to_text",
    "hypergraph_from_text",
    "coloring_to_text",
    "coloring_from_text",
]


def matrix_to_json_dict(a: OverlapMatrix) -> dict:
    """Row-major JSON-ready form: ``{"q": q, "entries": [...]}``."""
    arr = np.asarray(getattr(a, "entries", a), dtype=float)
    return {"q": int(arr.shape[0]), "entries": [float(x) for x in arr.ravel()]}

def matrix_from_json_dict(d: dict, tol: float = 1e-9) -> OverlapMatrix:
    q = int(d["q"])
    entries = np.asarray(d["entries"], dtype=float).reshape(q, q)
    return OverlapMatrix(entries, tol=tol)


def matrix_to_csv(a: OverlapMatrix) -> str:
    """One matrix row per line, comma-separated ``repr`` floats."""
    arr = np.asarray(getattr(a, "entries", a), dtype=float)
    out = io.StringIO()
    for row in arr:
        out.write(",".join(repr(float(x)) for x in row))
        out.write("\n")
    return out.getvalue()

def matrix_from_csv(text: str, tol: float = 1e-9) -> OverlapMatrix:
    rows = [
        [float(cell) for cell in line.split(",")]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    return OverlapMatrix(np.asarray(rows, dtype=float), tol=tol)


def canonical_json(doc: dict) -> str:
    """Canonical rendering: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def strip_volatile(doc: dict) -> dict:
    """Copy of a CLI output document without its ``timestamp`` field (the
    only part that varies between identical runs)."""
    out = copy.deepcopy(doc)
    out.pop("timestamp", None)
    return out


def hypergraph_to_text(h) -> str:
    """Line format: header ``n k m``, then one sorted edge per line."""
    lines = [f"{h.n} {h.k} {len(h.edges)}"]
    for edge in h.edges:
        lines.append(" ".join(str(v) for v in edge))
    return "\n".join(lines) + "\n"


def hypergraph_from_text(text: str):
    from .simulator import Hypergraph

    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty hypergraph text")
    header = lines[0].split()
    if len(header) != 3:
        raise ValueError(f"bad header {lines[0]!r}, expected 'n k m'")
    n, k, m = (int(x) for x in header)
    edges = [tuple(int(v) for v in ln.split()) for ln in lines[1:]]
    if len(edges) != m:
        raise ValueError(f"header declares {m} edges, found {len(edges)}")
    return Hypergraph(n=n, k=k, edges=tuple(edges))


def coloring_to_text(sigma) -> str:
    """Single line of n space-separated colors."""
    return " ".join(str(c) for c in sigma.assignment) + "\n"


def coloring_from_text(text: str, q: int | None = None):
    from .simulator import Coloring

    values = tuple(int(x) for x in text.split())
    if not values:
        raise ValueError("empty coloring text")
    return Coloring(assignment=values, q=q if q is not None else max(values))
