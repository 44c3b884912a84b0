"""Generators for the tightness constructions and their discrepancy bounds.

The first family shows the minimum-degree threshold cannot be weakened:
r+1 balanced independent clusters of even size t, joined completely, plus
an extra cluster of size m joined to everything and internally complete.
Within each ordinary cluster half the vertices are *positive* and half
*negative*; an edge whose higher-cluster endpoint is positive gets +1,
otherwise -1.  Edges touching the extra cluster are labeled from a seeded
RNG, since the discrepancy bound 5r(r+1)m must hold for every such
labeling.  For m = 0 every contained r-th Hamilton power has discrepancy
exactly 0.

The second family is the balanced 4-partite Turán graph with all edges at
one part labeled -1: every contained square of a Hamilton cycle has 4k
minus slot-edges out of 8k, hence discrepancy 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvariantError
from .graphs import ColoredGraph


@dataclass(frozen=True)
class LowerBoundSpec:
    """Parameters of the threshold-tightness construction."""

    r: int
    t: int
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.r < 3:
            raise InvariantError(f"construction needs r >= 3, got {self.r}")
        if self.t < 2 or self.t % 2:
            raise InvariantError(f"cluster size t must be even and >= 2, got {self.t}")
        if not 0 <= self.m <= self.t:
            raise InvariantError(f"extra cluster size m must lie in [0, t], got {self.m}")

    @property
    def n(self) -> int:
        return (self.r + 1) * self.t + self.m


def build_lower_bound(spec: LowerBoundSpec) -> ColoredGraph:
    """Build the construction; min degree comes out as rt + m.

    Layout: clusters V_1..V_{r+1} occupy ids [i*t, (i+1)*t) for
    i = 0..r, the extra cluster the last m ids.  The first t/2 ids of
    each ordinary cluster are its positive vertices.
    """
    r, t, m = spec.r, spec.t, spec.m
    n = spec.n
    base = (r + 1) * t
    edges = []

    def cluster_of(v: int) -> int:
        return v // t if v < base else r + 1  # r+1 tags the extra cluster

    def positive(v: int) -> bool:
        return v % t < t // 2

    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, 0x1B0]))
    for u in range(n):
        for v in range(u + 1, n):
            cu, cv = cluster_of(u), cluster_of(v)
            if cu == cv and cu <= r:
                continue  # ordinary clusters are independent sets
            if cu == r + 1 or cv == r + 1:
                label = 1 if rng.integers(0, 2) else -1
            else:
                # cv > cu here since ids are ordered by cluster
                label = 1 if positive(v) else -1
            edges.append((u, v, label))
    return ColoredGraph(n, edges)


def build_turan_square(k: int) -> ColoredGraph:
    """Balanced 4-partite Turán graph on 4k vertices, part 0 all-minus."""
    if k < 2:
        raise InvariantError(f"part size must be at least 2, got {k}")
    n = 4 * k
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if u // k == v // k:
                continue
            label = -1 if (u < k or v < k) else 1
            edges.append((u, v, label))
    return ColoredGraph(n, edges)


def predicted_bound(r: int, m: int) -> int:
    """The proven two-sided bound 5 r (r+1) m on |f(H^r)| for the construction."""
    if r < 3 or m < 0:
        raise InvariantError(f"need r >= 3 and m >= 0, got r={r}, m={m}")
    return 5 * r * (r + 1) * m
