"""Classification of 2-labeled cliques into the four structured types.

A k-clique with ±1 edge labels is *structured* when it is one of:

  * all-plus clique,
  * all-minus clique,
  * plus-star: the +1 edges induce exactly a star K_{1,k-1} whose root is
    the head (so every other pair is -1),
  * minus-star: symmetric.

For k >= 4 these four types are exactly the cliques satisfying the square
equation f(a,b) + f(c,d) = f(a,c) + f(b,d) on every 4-subset; the two
tests are kept independent so one can be used as an oracle for the other.
All eight triangle labelings are structured (an all-plus triangle counts
as an all-plus clique, never as a degenerate star).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from itertools import combinations
from typing import TYPE_CHECKING, Iterable, Optional

from .errors import InvariantError, UnclassifiableTileError
from .graphs import ColoredGraph

if TYPE_CHECKING:  # avoid a runtime import cycle with templates
    from .templates import Tiling


class CliqueKind(enum.Enum):
    PLUS_CLIQUE = "plus-clique"
    MINUS_CLIQUE = "minus-clique"
    PLUS_STAR = "plus-star"
    MINUS_STAR = "minus-star"


@dataclass(frozen=True)
class CliqueType:
    """One of the four types; ``head`` is set exactly for the star kinds."""

    kind: CliqueKind
    head: Optional[int] = None

    def __post_init__(self):
        is_star = self.kind in (CliqueKind.PLUS_STAR, CliqueKind.MINUS_STAR)
        if is_star and self.head is None:
            raise InvariantError(f"{self.kind.value} needs a head vertex")
        if not is_star and self.head is not None:
            raise InvariantError(f"{self.kind.value} must not carry a head")


@dataclass(frozen=True)
class TypeCensus:
    """Tile counts by type for a clique tiling."""

    plus_cliques: int
    minus_cliques: int
    plus_stars: int
    minus_stars: int

    @property
    def total(self) -> int:
        return self.plus_cliques + self.minus_cliques + self.plus_stars + self.minus_stars

    def as_dict(self) -> dict:
        return {
            "plus_cliques": self.plus_cliques,
            "minus_cliques": self.minus_cliques,
            "plus_stars": self.plus_stars,
            "minus_stars": self.minus_stars,
        }


def _clique_vertices(g: ColoredGraph, s: Iterable[int], minimum: int) -> list[int]:
    vs = sorted(set(s))
    if len(vs) < minimum:
        raise InvariantError(f"need at least {minimum} vertices, got {len(vs)}")
    if not g.induces_clique(vs):
        raise InvariantError(f"{vs} does not induce a clique")
    return vs


def square_equation_holds(g: ColoredGraph, s: Iterable[int]) -> bool:
    """Whether f(a,b) + f(c,d) = f(a,c) + f(b,d) for all distinct a,b,c,d in s.

    Over all ordered choices this reduces to: within each 4-subset, the
    three perfect pairings have equal label sums.
    """
    vs = _clique_vertices(g, s, minimum=4)
    for a, b, c, d in combinations(vs, 4):
        s1 = g.label(a, b) + g.label(c, d)
        s2 = g.label(a, c) + g.label(b, d)
        s3 = g.label(a, d) + g.label(b, c)
        if not (s1 == s2 == s3):
            return False
    return True


def classify_clique(g: ColoredGraph, s: Iterable[int]) -> Optional[CliqueType]:
    """The unique matching type of the labeled clique on ``s``, or None.

    Runs in O(k^2) by testing the four patterns directly.  A star of any
    size has a unique head, so the result is well defined.
    """
    vs = _clique_vertices(g, s, minimum=3)
    k = len(vs)
    plus_deg = {v: 0 for v in vs}
    plus_total = 0
    for u, v in combinations(vs, 2):
        if g.label(u, v) == 1:
            plus_deg[u] += 1
            plus_deg[v] += 1
            plus_total += 1
    all_pairs = k * (k - 1) // 2
    if plus_total == all_pairs:
        return CliqueType(CliqueKind.PLUS_CLIQUE)
    if plus_total == 0:
        return CliqueType(CliqueKind.MINUS_CLIQUE)
    if plus_total == k - 1:
        for v in vs:
            if plus_deg[v] == k - 1:
                return CliqueType(CliqueKind.PLUS_STAR, head=v)
    if plus_total == all_pairs - (k - 1):
        for v in vs:
            if plus_deg[v] == 0:
                return CliqueType(CliqueKind.MINUS_STAR, head=v)
    return None


def census_tiling(g: ColoredGraph, tiling: "Tiling") -> TypeCensus:
    """Classify every (r+1)-clique tile of ``tiling`` and count the types.

    Every tile must be a cycle of length exactly r+1; a tile matching no
    type raises UnclassifiableTileError, which signals that the host graph
    is not structured.
    """
    r = tiling.r
    counts = {kind: 0 for kind in CliqueKind}
    for cycle in tiling.cycles:
        if cycle.length != r + 1:
            raise InvariantError(
                f"census needs (r+1)-clique tiles; tile {cycle.seq} has length {cycle.length}"
            )
        ctype = classify_clique(g, cycle.seq)
        if ctype is None:
            raise UnclassifiableTileError(cycle.seq)
        counts[ctype.kind] += 1
    return TypeCensus(
        plus_cliques=counts[CliqueKind.PLUS_CLIQUE],
        minus_cliques=counts[CliqueKind.MINUS_CLIQUE],
        plus_stars=counts[CliqueKind.PLUS_STAR],
        minus_stars=counts[CliqueKind.MINUS_STAR],
    )
