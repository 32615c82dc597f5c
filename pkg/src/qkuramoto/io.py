"""JSON and CSV formats shared by the command-line tools.

Floats are written with 17 significant digits so values round-trip exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .algebra import group_from_tag
from .errors import DimensionError
from .graphs import WeightedGraph, circulant_graph, graph_from_edges
from .solutions import TwistSpec, twist_configuration

TRAJECTORY_HEADER = ("t", "i", "row", "col", "value")
SPECTRUM_HEADER = ("family", "l1", "l2", "m", "re", "im", "multiplicity", "source")


def fmt(x) -> str:
    """Round-trip float formatting; integers and strings pass through."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.17g" % x
    return str(x)


# --------------------------------------------------------------------------
# Graphs and configurations
# --------------------------------------------------------------------------

def graph_from_json(obj: dict) -> WeightedGraph:
    """``{"n": n, "circulant": [g1, ...]}`` or ``{"n": n, "edges": [[i, j, w], ...]}``."""
    if "n" not in obj:
        raise ValueError("graph spec needs 'n'")
    n = int(obj["n"])
    if "circulant" in obj:
        return circulant_graph(n, obj["circulant"])
    if "edges" in obj:
        return graph_from_edges(n, [(int(i), int(j), float(w)) for i, j, w in obj["edges"]])
    raise ValueError("graph spec needs 'circulant' or 'edges'")


def graph_to_json(graph: WeightedGraph) -> dict:
    if graph.is_circulant:
        return {"n": graph.n, "circulant": list(graph.bands)}
    return {"n": graph.n, "edges": [[i, j, w] for i, j, w in graph.edges()]}


def configuration_from_json(obj: dict) -> np.ndarray:
    """Explicit matrices or the twist shorthand ``{"twist": {"n", "d", "l"}}``."""
    if "twist" in obj:
        tw = obj["twist"]
        return twist_configuration(TwistSpec(int(tw["n"]), int(tw["d"]), tuple(tw.get("l", ()))))
    n, d = int(obj["n"]), int(obj["d"])
    group = group_from_tag(obj.get("group", "so"), d)
    X = np.array(obj["matrices"], dtype=group.dtype)
    if X.shape != (n, d, d):
        raise DimensionError(f"expected {n} matrices of size {d}x{d}, got shape {X.shape}")
    return X


def configuration_to_json(X, group: str = "so") -> dict:
    X = np.asarray(X)
    return {"n": int(X.shape[0]), "d": int(X.shape[-1]), "group": group,
            "matrices": np.real(X).tolist()}


# --------------------------------------------------------------------------
# CSV writers
# --------------------------------------------------------------------------

def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def _header_comment(seed) -> str:
    return "" if seed is None else f"# seed={int(seed)}\n"


def trajectory_csv(times, states, seed=None) -> str:
    """Flattened matrices, one block of ``n * d * d`` rows per stored step."""
    buf = io.StringIO()
    buf.write(_header_comment(seed))
    w = _writer(buf)
    w.writerow(TRAJECTORY_HEADER)
    states = np.real(np.asarray(states))
    _, n, d, _ = states.shape
    ii, rr, cc = np.meshgrid(np.arange(n), np.arange(d), np.arange(d), indexing="ij")
    idx = list(zip(ii.ravel(), rr.ravel(), cc.ravel()))
    for t, X in zip(times, states):
        ts = fmt(float(t))
        flat = X.reshape(-1)
        for (i, r, c), v in zip(idx, flat):
            w.writerow((ts, i, r, c, fmt(v)))
    return buf.getvalue()


def spectrum_csv(rows, seed=None) -> str:
    """Rows are dicts with the keys of :data:`SPECTRUM_HEADER`."""
    buf = io.StringIO()
    buf.write(_header_comment(seed))
    w = _writer(buf)
    w.writerow(SPECTRUM_HEADER)
    for r in rows:
        w.writerow([fmt(r.get(k, "")) for k in SPECTRUM_HEADER])
    return buf.getvalue()


def table_csv(header, rows, seed=None) -> str:
    buf = io.StringIO()
    buf.write(_header_comment(seed))
    w = _writer(buf)
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def read_csv(path_or_text) -> list[dict]:
    """Parse a CSV written here (comment lines skipped) into dict rows."""
    text = Path(path_or_text).read_text() if isinstance(path_or_text, Path) else path_or_text
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def write_text(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
