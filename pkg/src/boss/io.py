"""Text formats: edge lists, data CSV, shuffle maps and run manifests.

Edge list::

    p 3
    0 -> 1
    1 -- 2

Directed lines come first, then undirected, each sorted by index pair, so
writing a parsed graph reproduces the file byte for byte.
"""
from __future__ import annotations

import math
import re
from pathlib import Path

import numpy as np

from .graph import Dag, GraphError, Pdag


class DataFormatError(ValueError):
    """Malformed input file."""


_EDGE = re.compile(r"^\s*(\d+)\s*(->|--)\s*(\d+)\s*$")


def format_graph(g: Dag | Pdag) -> str:
    if isinstance(g, Dag):
        directed, undirected = g.edges, ()
    else:
        directed, undirected = g.directed, g.undirected
    lines = [f"p {g.num_vars}"]
    lines += [f"{a} -> {b}" for a, b in sorted(directed)]
    lines += [f"{a} -- {b}" for a, b in sorted(undirected)]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Pdag:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError("empty graph file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "p" or not head[1].isdigit():
        raise DataFormatError(f"bad graph header {lines[0]!r}")
    p = int(head[1])
    directed, undirected = set(), set()
    for ln in lines[1:]:
        m = _EDGE.match(ln)
        if not m:
            raise DataFormatError(f"bad edge line {ln!r}")
        a, kind, b = int(m.group(1)), m.group(2), int(m.group(3))
        (directed if kind == "->" else undirected).add((a, b))
    try:
        return Pdag(p, frozenset(directed), frozenset(undirected))
    except GraphError as exc:
        raise DataFormatError(str(exc)) from exc


def write_graph(path, g: Dag | Pdag) -> None:
    Path(path).write_text(format_graph(g))


def read_graph(path) -> Pdag:
    return parse_graph(Path(path).read_text())


def read_dag(path) -> Dag:
    pd = read_graph(path)
    if pd.undirected:
        raise DataFormatError(f"{path}: expected a DAG but found undirected edges")
    return Dag(pd.num_vars, pd.directed)


def write_data(path, data: np.ndarray, names=None) -> None:
    x = np.asarray(data, dtype=float)
    names = [f"V{j}" for j in range(x.shape[1])] if names is None else list(names)
    rows = [",".join(names)]
    rows += [",".join(repr(float(v)) for v in row) for row in x]
    Path(path).write_text("\n".join(rows) + "\n")


def read_data(path) -> tuple[np.ndarray, list[str]]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise DataFormatError(f"{path}: empty data file")
    names = lines[0].split(",")
    rows = []
    for k, ln in enumerate(lines[1:], start=2):
        if not ln.strip():
            continue
        cells = ln.split(",")
        if len(cells) != len(names):
            raise DataFormatError(f"{path}:{k}: expected {len(names)} cells, got {len(cells)}")
        try:
            vals = [float(c) for c in cells]
        except ValueError:
            raise DataFormatError(f"{path}:{k}: non-numeric cell") from None
        rows.append(vals)
    x = np.array(rows, dtype=float).reshape(len(rows), len(names))
    if not np.all(np.isfinite(x)):
        raise DataFormatError(f"{path}: non-finite value")
    return x, names


def write_shuffle(path, column_of) -> None:
    rows = ["orig_index,shuffled_index"] + [f"{i},{int(j)}" for i, j in enumerate(column_of)]
    Path(path).write_text("\n".join(rows) + "\n")


def read_shuffle(path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if lines and not lines[0][0].isdigit():
        lines = lines[1:]
    pairs = []
    for ln in lines:
        try:
            a, b = (int(c) for c in ln.split(","))
        except ValueError:
            raise DataFormatError(f"{path}: bad shuffle line {ln!r}") from None
        pairs.append((a, b))
    p = len(pairs)
    column_of = np.full(p, -1, dtype=int)
    for a, b in pairs:
        if not (0 <= a < p and 0 <= b < p) or column_of[a] != -1:
            raise DataFormatError(f"{path}: not a permutation")
        column_of[a] = b
    if sorted(column_of) != list(range(p)):
        raise DataFormatError(f"{path}: not a permutation")
    return column_of


def write_manifest(path, entries: dict) -> None:
    """``key=value`` lines in insertion order; values must not contain newlines."""
    rows = []
    for k, v in entries.items():
        if isinstance(v, float) and math.isnan(v):
            v = "NA"
        rows.append(f"{k}={v}")
    Path(path).write_text("\n".join(rows) + "\n")


def read_manifest(path) -> dict:
    out = {}
    for ln in Path(path).read_text().splitlines():
        if ln.strip():
            k, _, v = ln.partition("=")
            out[k] = v
    return out
