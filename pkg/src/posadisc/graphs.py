"""Simple graphs with edges labeled -1 or +1.

Vertices are dense integers ``0..n-1``.  Only present edges carry a label;
a missing pair is a non-edge, never a "label 0".  Adjacency is stored both
as a label map keyed by sorted pairs and as one bitmask per vertex, which
the enumeration and embedding code use for fast set algebra.

Graphs are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import GraphFormatError, InvariantError


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the set bit positions of ``mask`` in ascending order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(vertices: Iterable[int]) -> int:
    """Bitmask with one bit per vertex id."""
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


class ColoredGraph:
    """A simple graph on ``n`` vertices with ±1 edge labels."""

    __slots__ = ("n", "_labels", "_adj")

    def __init__(self, n: int, edges: Iterable[tuple[int, int, int]] = ()):
        if n < 0:
            raise InvariantError(f"vertex count must be nonnegative, got {n}")
        self.n = n
        labels: dict[tuple[int, int], int] = {}
        adj = [0] * n
        for u, v, label in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvariantError(f"vertex out of range in edge ({u}, {v})")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            if label not in (-1, 1):
                raise GraphFormatError(f"label {label!r} on edge ({u}, {v}) is not -1 or +1")
            key = (u, v) if u < v else (v, u)
            if key in labels:
                if labels[key] != label:
                    raise GraphFormatError(f"edge {key} listed twice with conflicting labels")
                raise GraphFormatError(f"edge {key} listed twice")
            labels[key] = label
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self._labels = labels
        self._adj = adj

    # -- queries ---------------------------------------------------------

    def has_edge(self, u: int, v: int) -> bool:
        self._check_vertex(u)
        self._check_vertex(v)
        return bool(self._adj[u] >> v & 1)

    def label(self, u: int, v: int) -> int:
        key = (u, v) if u < v else (v, u)
        try:
            return self._labels[key]
        except KeyError:
            raise InvariantError(f"({u}, {v}) is not an edge") from None

    def degree(self, v: int) -> int:
        self._check_vertex(v)
        return self._adj[v].bit_count()

    def neighbors_mask(self, v: int) -> int:
        self._check_vertex(v)
        return self._adj[v]

    def neighbors(self, v: int) -> list[int]:
        return list(iter_bits(self.neighbors_mask(v)))

    def edges(self) -> Iterator[tuple[int, int, int]]:
        """All edges as (u, v, label) with u < v, in lexicographic order."""
        for (u, v) in sorted(self._labels):
            yield u, v, self._labels[(u, v)]

    def edge_count(self) -> int:
        return len(self._labels)

    def induces_clique(self, vertices: Iterable[int]) -> bool:
        vs = list(vertices)
        for v in vs:
            self._check_vertex(v)
        return all(self._adj[u] >> v & 1 for i, u in enumerate(vs) for v in vs[i + 1:])

    def negated(self) -> "ColoredGraph":
        """The same graph with every edge label flipped."""
        return ColoredGraph(self.n, ((u, v, -l) for (u, v), l in self._labels.items()))

    def _check_vertex(self, v: int) -> None:
        if not (0 <= v < self.n):
            raise InvariantError(f"vertex {v} out of range 0..{self.n - 1}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ColoredGraph):
            return NotImplemented
        return self.n == other.n and self._labels == other._labels

    def __repr__(self) -> str:
        return f"ColoredGraph(n={self.n}, edges={len(self._labels)})"


def complete_graph(n: int, label: int = 1) -> ColoredGraph:
    return ColoredGraph(n, ((u, v, label) for u in range(n) for v in range(u + 1, n)))


# -- JSON I/O ------------------------------------------------------------

_GRAPH_FIELDS = {"n", "edges"}


def graph_from_dict(data: dict) -> ColoredGraph:
    """Build a graph from the JSON object format {"n": ..., "edges": [[u,v,label], ...]}."""
    if not isinstance(data, dict):
        raise GraphFormatError("graph document must be a JSON object")
    unknown = set(data) - _GRAPH_FIELDS
    if unknown:
        raise GraphFormatError(f"unknown fields in graph document: {sorted(unknown)}")
    if "n" not in data or "edges" not in data:
        raise GraphFormatError('graph document needs both "n" and "edges"')
    n = data["n"]
    if not isinstance(n, int) or isinstance(n, bool):
        raise GraphFormatError('"n" must be an integer')
    edges = data["edges"]
    if not isinstance(edges, list):
        raise GraphFormatError('"edges" must be a list')
    triples = []
    for item in edges:
        if (not isinstance(item, list) or len(item) != 3
                or not all(isinstance(x, int) and not isinstance(x, bool) for x in item)):
            raise GraphFormatError(f"edge entry {item!r} is not an [u, v, label] integer triple")
        u, v, label = item
        if u >= v:
            raise GraphFormatError(f"edge [{u}, {v}] must satisfy u < v")
        triples.append((u, v, label))
    return ColoredGraph(n, triples)


def graph_to_dict(g: ColoredGraph) -> dict:
    return {"n": g.n, "edges": [[u, v, label] for u, v, label in g.edges()]}


def load_graph(path) -> ColoredGraph:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{path}: invalid JSON ({exc})") from exc
    return graph_from_dict(data)


def save_graph(g: ColoredGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(graph_to_dict(g), fh)
        fh.write("\n")


# -- degree and neighborhood queries --------------------------------------

def min_degree(g: ColoredGraph) -> int:
    """Minimum degree; 0 for edgeless graphs (including n = 0)."""
    if g.n == 0:
        return 0
    return min(g.degree(v) for v in range(g.n))


def common_neighborhood(g: ColoredGraph, s: Iterable[int]) -> set[int]:
    """Vertices adjacent to every vertex of ``s``; all vertices when s is empty."""
    mask = (1 << g.n) - 1
    for v in s:
        mask &= g.neighbors_mask(v)
    return set(iter_bits(mask))


def check_degree_threshold(g: ColoredGraph, r: int, eta) -> bool:
    """Whether min degree reaches the ceiling of (1 - 1/(r+1) + eta) * n.

    ``eta`` is interpreted exactly: pass a Fraction, an int, or a string
    such as "1/8".  Exact rational arithmetic matters at small n where the
    threshold is tight.  For r = 2 this is the 3/4-threshold test.
    """
    if r < 1:
        raise InvariantError(f"r must be at least 1, got {r}")
    eta = Fraction(eta)
    if not 0 <= eta < Fraction(1, r + 1):
        raise InvariantError(f"eta must lie in [0, 1/(r+1)), got {eta}")
    threshold = (1 - Fraction(1, r + 1) + eta) * g.n
    # ceil of a Fraction
    needed = -((-threshold.numerator) // threshold.denominator)
    return min_degree(g) >= needed
