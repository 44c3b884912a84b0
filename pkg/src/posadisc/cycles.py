"""Powers of cycles as edge multigraphs, and their discrepancies.

A cycle is a cyclic vertex sequence, possibly with repeats.  The r-th
power of a cycle ``C = (v_1, ..., v_m)`` is the multigraph whose edge
multiplicities count index slots:

    mul(xy) = #{ (i, j) : i in [m], j in [r], {v_i, v_{i+j}} = {x, y} }

with indices cyclic.  Every slot joins two *distinct* vertices here: a
cycle that places equal vertices within distance r is rejected, because
its power would carry self-loop slots and could never sit inside a simple
graph.  The power of a simple (r+1)-cycle is an (r+1)-clique with every
edge doubled.

Containment in a host graph ignores multiplicities: the host only needs
one copy of each pair with positive multiplicity.  Discrepancy is the
multiplicity-weighted sum of the host's ±1 edge labels; all arithmetic in
this module is exact integer arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import ContainmentError, DegenerateCycleError, InvariantError
from .graphs import ColoredGraph


@dataclass(frozen=True)
class Cycle:
    """A cyclic vertex sequence; repeats allowed, length at least 3."""

    seq: tuple[int, ...]

    def __init__(self, seq: Sequence[int]):
        object.__setattr__(self, "seq", tuple(seq))
        if len(self.seq) < 3:
            raise InvariantError(f"cycle needs at least 3 vertices, got {len(self.seq)}")

    @property
    def length(self) -> int:
        return len(self.seq)

    def count(self, v: int) -> int:
        """Number of occurrences of ``v`` along the closed walk."""
        return self.seq.count(v)

    def vertices(self) -> set[int]:
        return set(self.seq)

    def is_simple(self) -> bool:
        return len(set(self.seq)) == len(self.seq)


@dataclass(frozen=True)
class PowerMultigraph:
    """Edge multiplicities of the r-th power of one cycle."""

    r: int
    mul: dict[tuple[int, int], int]

    def total_slots(self) -> int:
        return sum(self.mul.values())

    def pairs(self) -> Iterator[tuple[int, int]]:
        return iter(sorted(self.mul))


def slot_pairs(cycle: Cycle, r: int) -> Iterator[tuple[int, int, int, int]]:
    """Yield one (i, j, x, y) per slot, with indices 0-based and x, y the endpoints."""
    seq = cycle.seq
    m = len(seq)
    for i in range(m):
        x = seq[i]
        for j in range(1, r + 1):
            y = seq[(i + j) % m]
            yield i, j, x, y


def power_multiplicities(cycle: Cycle, r: int) -> PowerMultigraph:
    """Exact slot count of each pair in the r-th power of ``cycle``."""
    if r < 1:
        raise InvariantError(f"power order must be at least 1, got {r}")
    m = cycle.length
    if m < r + 1:
        raise InvariantError(f"cycle of length {m} is too short for power {r}")
    mul: dict[tuple[int, int], int] = {}
    for i, j, x, y in slot_pairs(cycle, r):
        if x == y:
            raise DegenerateCycleError(
                f"vertex {x} repeats within distance {j} (positions {i} and {(i + j) % m})"
            )
        key = (x, y) if x < y else (y, x)
        mul[key] = mul.get(key, 0) + 1
    return PowerMultigraph(r=r, mul=mul)


def is_power_subgraph(g: ColoredGraph, cycle: Cycle, r: int) -> bool:
    """True iff every pair with positive multiplicity is an edge of ``g``."""
    for v in cycle.seq:
        if not 0 <= v < g.n:
            raise InvariantError(f"cycle vertex {v} out of range 0..{g.n - 1}")
    pm = power_multiplicities(cycle, r)
    return all(g.has_edge(u, v) for u, v in pm.mul)


def power_discrepancy(g: ColoredGraph, cycle: Cycle, r: int) -> int:
    """Sum of mul(e) * label(e) over the edges of the cycle's r-th power."""
    pm = power_multiplicities(cycle, r)
    total = 0
    for (u, v), k in pm.mul.items():
        if not g.has_edge(u, v):
            raise ContainmentError(f"pair ({u}, {v}) of the power is not an edge of the graph")
        total += k * g.label(u, v)
    return total


def hamilton_power(
    g: ColoredGraph, ordering: Sequence[int], r: int
) -> tuple[PowerMultigraph, int]:
    """Power multigraph and discrepancy of a Hamilton ordering.

    ``ordering`` must be a permutation of all vertices and n must be at
    least 2r+1, the smallest length at which the power of a Hamilton
    cycle is a simple 2r-regular graph (K_n exactly at n = 2r+1).
    """
    ordering = tuple(ordering)
    n = g.n
    if len(ordering) != n or set(ordering) != set(range(n)):
        raise InvariantError("ordering is not a permutation of all vertices")
    if n < 2 * r + 1:
        raise InvariantError(f"need n >= 2r+1 = {2 * r + 1} vertices, got {n}")
    cycle = Cycle(ordering)
    pm = power_multiplicities(cycle, r)
    disc = power_discrepancy(g, cycle, r)
    return pm, disc
