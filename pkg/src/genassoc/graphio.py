"""The ``.gag`` graph file format.

Line 1 is ``#genassoc v1``, line 2 ``family=<A|B|D> n=<int> vertices=<int>
edges=<int>``, then one ``V <index> <encoding>`` line per vertex in canonical
order and one ``E <i> <j>`` line per edge (``i < j``, lexicographic).
"""

from __future__ import annotations

import os
import tempfile

from .combinatorics import CanonicalTriangulation, check_size, universe
from .flipgraph import FlipGraph

MAGIC = "#genassoc v1"


class GraphFormatError(ValueError):
    pass


def emit_graph(g: FlipGraph) -> str:
    lines = [MAGIC, f"family={g.family.value} n={g.n} vertices={g.order} edges={g.edge_count}"]
    lines.extend(f"V {i} {enc}" for i, enc in enumerate(g.vertices))
    lines.extend(f"E {u} {v}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_graph(g: FlipGraph, path: str) -> None:
    atomic_write(path, emit_graph(g))


def _header(line: str) -> dict[str, str]:
    fields = {}
    for part in line.split():
        key, sep, value = part.partition("=")
        if not sep:
            raise GraphFormatError(f"malformed header field {part!r}")
        fields[key] = value
    missing = {"family", "n", "vertices", "edges"} - fields.keys()
    if missing:
        raise GraphFormatError(f"header lacks {sorted(missing)}")
    return fields


def parse_graph(text: str) -> FlipGraph:
    """Parse a ``.gag`` document, checking every structural promise it makes."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 2 or lines[0] != MAGIC:
        raise GraphFormatError("missing '#genassoc v1' line")
    head = _header(lines[1])
    try:
        family = check_size(head["family"], int(head["n"]))
        n = int(head["n"])
        nv, ne = int(head["vertices"]), int(head["edges"])
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from exc
    body = lines[2:]
    if len(body) != nv + ne:
        raise GraphFormatError(f"expected {nv + ne} body lines, found {len(body)}")
    uni = universe(family, n)
    masks, seen = [], {}
    for i, row in enumerate(body[:nv]):
        parts = row.split(" ")
        if len(parts) != 3 or parts[0] != "V" or parts[1] != str(i):
            raise GraphFormatError(f"bad vertex line {row!r}")
        try:
            t = CanonicalTriangulation.parse(family, n, parts[2])
            if t.encode() != parts[2] or not t.is_valid():
                raise ValueError("not a canonical triangulation")
            mask = t.mask()
        except (ValueError, KeyError) as exc:
            raise GraphFormatError(f"vertex {i}: {exc}") from exc
        if mask in seen:
            raise GraphFormatError(f"vertex {i} repeats vertex {seen[mask]}")
        seen[mask] = i
        masks.append(mask)
    if [uni.encode_mask(m) for m in masks] != sorted(uni.encode_mask(m) for m in masks):
        raise GraphFormatError("vertices are not in canonical order")
    adjacency: list[list[int]] = [[] for _ in range(nv)]
    prev = None
    for row in body[nv:]:
        parts = row.split(" ")
        if len(parts) != 3 or parts[0] != "E":
            raise GraphFormatError(f"bad edge line {row!r}")
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise GraphFormatError(f"bad edge line {row!r}") from exc
        if not 0 <= u < v < nv:
            raise GraphFormatError(f"edge {row!r} out of range or unordered")
        if prev is not None and (u, v) <= prev:
            raise GraphFormatError("edges are not sorted or repeat")
        prev = (u, v)
        adjacency[u].append(v)
        adjacency[v].append(u)
    g = FlipGraph(family, n, masks, [sorted(a) for a in adjacency])
    g._index = seen
    return g


def read_graph(path: str) -> FlipGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_graph(fh.read())


__all__ = ["GraphFormatError", "MAGIC", "atomic_write", "emit_graph", "parse_graph", "read_graph", "write_graph"]
