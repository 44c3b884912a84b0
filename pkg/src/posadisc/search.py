"""Exact search over Hamilton-cycle powers and perfect clique tilings.

Hamilton orderings are enumerated up to dihedral symmetry: the canonical
representative of a cycle class starts at vertex 0 and has its second
vertex smaller than its last, so each class is visited exactly once and in
lexicographic order.  The branch-and-bound maximizer extends orderings
vertex by vertex, requiring each new vertex to be adjacent to the last
min(r, placed) vertices so containment fails as early as possible.  Its
admissible bound is |partial discrepancy| + (slot-edges not yet fixed):
every undetermined slot contributes at most 1 in absolute value, so no
ordering that could still beat the incumbent is ever pruned.  Wrap-around
slots stay undetermined until the cycle closes.

Ties between equal absolute values prefer the positive value, then the
lexicographically least canonical ordering (for tilings: the least sorted
tile list), which keeps golden outputs reproducible.

Parallel runs split the root of the tree into independent subtrees, each
searched with its own local bound and node budget; the deterministic
reduction makes results identical for every worker count.  A node limit
therefore applies per subtree.  Time limits are only enforced in serial
runs and are best-effort.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional

from .errors import BudgetExhaustedError, InvariantError
from .graphs import ColoredGraph, iter_bits

ORACLE_CAP = 10


@dataclass(frozen=True)
class SearchBudget:
    """Limits for an exact search; exceeding one is an explicit outcome."""

    node_limit: Optional[int] = None
    time_limit: Optional[float] = None
    workers: int = 1

    def __post_init__(self):
        if self.node_limit is not None and self.node_limit <= 0:
            raise InvariantError("node limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise InvariantError("time limit must be positive")
        if self.workers < 1:
            raise InvariantError("worker count must be positive")


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a maximization run.

    ``best`` is an ordering (or a tuple of sorted tiles), or None when no
    contained object exists.  ``optimal`` is the proof-of-optimality flag:
    it is set exactly when the search ran to completion, in which case a
    None ``best`` is a definitive "no object" answer.
    """

    best: Optional[tuple]
    value: Optional[int]
    nodes: int
    optimal: bool
    exhausted: bool

    @property
    def abs_value(self) -> Optional[int]:
        return None if self.value is None else abs(self.value)

    @property
    def found(self) -> bool:
        return self.best is not None

    def outcome(self, kind: str = "object") -> str:
        if self.exhausted:
            return "budget-exhausted"
        return "optimal" if self.found else f"no-{kind}"

    def as_dict(self) -> dict:
        best = self.best
        if best is not None and best and isinstance(best[0], tuple):
            best = [list(t) for t in best]
        elif best is not None:
            best = list(best)
        return {
            "best": best,
            "value": self.value,
            "abs_value": self.abs_value,
            "nodes": self.nodes,
            "optimal": self.optimal,
            "exhausted": self.exhausted,
        }


def _graph_data(g: ColoredGraph):
    """Adjacency masks plus a dense label table (0 for non-edges)."""
    n = g.n
    adj = [g.neighbors_mask(v) for v in range(n)]
    val = [[0] * n for _ in range(n)]
    for u, v, label in g.edges():
        val[u][v] = label
        val[v][u] = label
    return n, adj, val


def _check_power_order(n: int, r: int) -> None:
    if r < 1:
        raise InvariantError(f"power order must be at least 1, got {r}")
    if n < 2 * r + 1:
        raise InvariantError(f"need n >= 2r+1 = {2 * r + 1} vertices, got {n}")


def _wrap_slots(path: tuple[int, ...], n: int, r: int, adj, val):
    """Labels of the wrap-around slots, or None if one is a non-edge."""
    disc = 0
    for i in range(n - r, n):
        for j in range(n - i, r + 1):
            u, w = path[i], path[i + j - n]
            if not adj[u] >> w & 1:
                return None
            disc += val[u][w]
    return disc


def enumerate_hamilton_powers(
    g: ColoredGraph, r: int, cap: int = ORACLE_CAP
) -> Iterator[tuple[tuple[int, ...], int]]:
    """Yield every contained Hamilton r-th power once per dihedral class.

    Orderings come out in lexicographic order of their canonical form
    (first vertex 0, second vertex smaller than the last), each with its
    exact discrepancy.  Intended as the brute-force oracle, hence the
    vertex-count cap.
    """
    n, adj, val = _graph_data(g)
    _check_power_order(n, r)
    if n > cap:
        raise InvariantError(f"oracle cap exceeded: n={n} > {cap}")

    full_mask = (1 << n) - 1
    path = [0] * n

    def rec(k: int, used: int, disc: int):
        if k == n:
            if path[1] > path[n - 1]:
                return
            wrap = _wrap_slots(tuple(path), n, r, adj, val)
            if wrap is not None:
                yield tuple(path), disc + wrap
            return
        common = ~used & full_mask
        for j in range(1, min(r, k) + 1):
            common &= adj[path[k - j]]
        for v in iter_bits(common):
            path[k] = v
            step = sum(val[path[k - j]][v] for j in range(1, min(r, k) + 1))
            yield from rec(k + 1, used | (1 << v), disc + step)

    yield from rec(1, 1, 0)


def _power_subtree(n, r, adj, val, v2, node_limit):
    """Branch-and-bound over orderings starting (0, v2); local incumbent.

    Returns (value, ordering, nodes, exhausted).
    """
    total_slots = n * r
    full_mask = (1 << n) - 1
    best_val: Optional[int] = None
    best_ord: Optional[tuple] = None
    best_abs = -1
    nodes = 1  # placing v2
    exhausted = False
    path = [0] * n
    path[1] = v2

    if not adj[0] >> v2 & 1:
        return None, None, nodes, False

    def better(value: int, ordering: tuple) -> bool:
        if best_val is None:
            return True
        if abs(value) != best_abs:
            return abs(value) > best_abs
        if (value > 0) != (best_val > 0):
            return value > 0
        return ordering < best_ord

    def rec(k: int, used: int, disc: int, fixed: int) -> bool:
        # returns False when the node budget ran out
        nonlocal best_val, best_ord, best_abs, nodes, exhausted
        if k == n:
            if path[1] > path[n - 1]:
                return True
            wrap = _wrap_slots(tuple(path), n, r, adj, val)
            if wrap is None:
                return True
            value = disc + wrap
            if better(value, tuple(path)):
                best_val, best_ord, best_abs = value, tuple(path), abs(value)
            return True
        common = ~used & full_mask
        for j in range(1, min(r, k) + 1):
            common &= adj[path[k - j]]
        for v in iter_bits(common):
            if node_limit is not None and nodes >= node_limit:
                exhausted = True
                return False
            nodes += 1
            step = sum(val[path[k - j]][v] for j in range(1, min(r, k) + 1))
            new_disc = disc + step
            new_fixed = fixed + min(r, k)
            bound = abs(new_disc) + (total_slots - new_fixed)
            if bound < best_abs or (bound == best_abs and best_val is not None and best_val > 0):
                continue
            path[k] = v
            if not rec(k + 1, used | (1 << v), new_disc, new_fixed):
                return False
        return True

    rec(2, 1 | (1 << v2), val[0][v2], 1)
    return best_val, best_ord, nodes, exhausted


def _power_subtree_task(args):
    n, r, adj, val, v2, node_limit = args
    return _power_subtree(n, r, adj, val, v2, node_limit)


def max_abs_discrepancy_power(
    g: ColoredGraph, r: int, budget: Optional[SearchBudget] = None
) -> SearchResult:
    """Maximize |discrepancy| over contained Hamilton r-th powers, exactly."""
    budget = budget or SearchBudget()
    n, adj, val = _graph_data(g)
    _check_power_order(n, r)

    tasks = [(n, r, adj, val, v2, budget.node_limit) for v2 in range(1, n)]
    if budget.workers > 1:
        with ProcessPoolExecutor(max_workers=budget.workers) as pool:
            results = list(pool.map(_power_subtree_task, tasks))
    else:
        results = []
        deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit
        for task in tasks:
            if deadline is not None and time.monotonic() > deadline:
                results.append((None, None, 0, True))
                continue
            results.append(_power_subtree_task(task))

    best_val, best_ord = None, None
    nodes = 0
    exhausted = False
    for value, ordering, sub_nodes, sub_exhausted in results:
        nodes += sub_nodes
        exhausted = exhausted or sub_exhausted
        if value is None:
            continue
        if best_val is None:
            best_val, best_ord = value, ordering
            continue
        if abs(value) > abs(best_val):
            best_val, best_ord = value, ordering
        elif abs(value) == abs(best_val):
            if (value > 0) != (best_val > 0):
                if value > 0:
                    best_val, best_ord = value, ordering
            elif ordering < best_ord:
                best_val, best_ord = value, ordering
    return SearchResult(
        best=best_ord, value=best_val, nodes=nodes, optimal=not exhausted, exhausted=exhausted
    )


def exists_hamilton_power(
    g: ColoredGraph, r: int, budget: Optional[SearchBudget] = None
) -> bool:
    """Whether the r-th power of some Hamilton cycle sits inside ``g``.

    Labels are ignored and the search exits on the first witness.  Raises
    BudgetExhaustedError when the budget ran out before a decision.
    """
    budget = budget or SearchBudget()
    n, adj, val = _graph_data(g)
    _check_power_order(n, r)
    full_mask = (1 << n) - 1
    nodes = 0
    deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit
    path = [0] * n

    def rec(k: int, used: int) -> Optional[bool]:
        nonlocal nodes
        if k == n:
            return _wrap_slots(tuple(path), n, r, adj, val) is not None
        common = ~used & full_mask
        for j in range(1, min(r, k) + 1):
            common &= adj[path[k - j]]
        for v in iter_bits(common):
            nodes += 1
            if budget.node_limit is not None and nodes > budget.node_limit:
                raise BudgetExhaustedError("node limit hit before deciding existence")
            if deadline is not None and nodes % 512 == 0 and time.monotonic() > deadline:
                raise BudgetExhaustedError("time limit hit before deciding existence")
            path[k] = v
            found = rec(k + 1, used | (1 << v))
            if found:
                return True
        return False

    return bool(rec(1, 1))


# ---------------------------------------------------------------------------
# perfect clique tilings
# ---------------------------------------------------------------------------


def _cliques_through(v: int, pool: int, size: int, adj) -> Iterator[tuple[int, ...]]:
    """All ``size``-cliques {v} u S with S drawn ascending from ``pool``."""
    clique = [v]

    def extend(candidates: int):
        if len(clique) == size:
            yield tuple(clique)
            return
        for u in iter_bits(candidates):
            clique.append(u)
            yield from extend(candidates & adj[u] & ~((1 << (u + 1)) - 1))
            clique.pop()

    yield from extend(pool & adj[v] & ~((1 << (v + 1)) - 1))


def enumerate_perfect_tilings(
    g: ColoredGraph, r: int, cap: int = 12
) -> Iterator[tuple[tuple[int, ...], ...]]:
    """Every partition of the vertices into (r+1)-cliques, exactly once.

    Tiles are emitted sorted, tilings in lexicographic order; the oracle
    counterpart of the tiling searches below.
    """
    n, adj, _ = _graph_data(g)
    if n > cap:
        raise InvariantError(f"oracle cap exceeded: n={n} > {cap}")
    k = r + 1
    if n % k:
        raise InvariantError(f"{k} does not divide n={n}")
    full_mask = (1 << n) - 1
    tiles: list[tuple[int, ...]] = []

    def rec(uncovered: int):
        if not uncovered:
            yield tuple(tiles)
            return
        v = (uncovered & -uncovered).bit_length() - 1
        for tile in _cliques_through(v, uncovered, k, adj):
            mask = 0
            for u in tile:
                mask |= 1 << u
            tiles.append(tile)
            yield from rec(uncovered & ~mask)
            tiles.pop()

    yield from rec(full_mask)


def perfect_clique_tiling(
    g: ColoredGraph, r: int, budget: Optional[SearchBudget] = None
) -> Optional[tuple[tuple[int, ...], ...]]:
    """First perfect K_{r+1}-tiling in canonical order, or a definitive None.

    Raises BudgetExhaustedError when the budget ran out undecided.
    """
    budget = budget or SearchBudget()
    n, adj, _ = _graph_data(g)
    k = r + 1
    if n % k:
        raise InvariantError(f"{k} does not divide n={n}")
    nodes = 0
    deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit
    tiles: list[tuple[int, ...]] = []

    def rec(uncovered: int) -> bool:
        nonlocal nodes
        if not uncovered:
            return True
        v = (uncovered & -uncovered).bit_length() - 1
        for tile in _cliques_through(v, uncovered, k, adj):
            nodes += 1
            if budget.node_limit is not None and nodes > budget.node_limit:
                raise BudgetExhaustedError("node limit hit before deciding tiling existence")
            if deadline is not None and nodes % 512 == 0 and time.monotonic() > deadline:
                raise BudgetExhaustedError("time limit hit before deciding tiling existence")
            mask = 0
            for u in tile:
                mask |= 1 << u
            tiles.append(tile)
            if rec(uncovered & ~mask):
                return True
            tiles.pop()
        return False

    return tuple(tiles) if rec((1 << n) - 1) else None


def tile_slot_discrepancy(g: ColoredGraph, tile) -> int:
    """Discrepancy of one clique tile: internal labels counted twice.

    A tile is the power of an (r+1)-cycle, which carries two copies of
    each clique edge.
    """
    return 2 * sum(g.label(u, v) for u, v in combinations(sorted(tile), 2))


def _tiling_subtree(n, r, adj, val, first_tile, node_limit):
    """Cover search with the first tile pinned; local incumbent."""
    k = r + 1
    best_val: Optional[int] = None
    best_tiling: Optional[tuple] = None
    best_abs = -1
    nodes = 1
    exhausted = False
    tiles: list[tuple[int, ...]] = [first_tile]

    def tile_disc(tile) -> int:
        return 2 * sum(val[u][v] for u, v in combinations(tile, 2))

    def better(value: int, tiling: tuple) -> bool:
        if best_val is None:
            return True
        if abs(value) != best_abs:
            return abs(value) > best_abs
        if (value > 0) != (best_val > 0):
            return value > 0
        return tiling < best_tiling

    def rec(uncovered: int, disc: int) -> bool:
        nonlocal best_val, best_tiling, best_abs, nodes, exhausted
        if not uncovered:
            value = disc
            tiling = tuple(tiles)
            if better(value, tiling):
                best_val, best_tiling, best_abs = value, tiling, abs(value)
            return True
        bound = abs(disc) + r * uncovered.bit_count()
        if bound < best_abs or (bound == best_abs and best_val is not None and best_val > 0):
            return True
        v = (uncovered & -uncovered).bit_length() - 1
        for tile in _cliques_through(v, uncovered, k, adj):
            if node_limit is not None and nodes >= node_limit:
                exhausted = True
                return False
            nodes += 1
            mask = 0
            for u in tile:
                mask |= 1 << u
            tiles.append(tile)
            ok = rec(uncovered & ~mask, disc + tile_disc(tile))
            tiles.pop()
            if not ok:
                return False
        return True

    mask = 0
    for u in first_tile:
        mask |= 1 << u
    rec(((1 << n) - 1) & ~mask, tile_disc(first_tile))
    return best_val, best_tiling, nodes, exhausted


def _tiling_subtree_task(args):
    return _tiling_subtree(*args)


def max_abs_discrepancy_tiling(
    g: ColoredGraph, r: int, budget: Optional[SearchBudget] = None
) -> SearchResult:
    """Maximize |discrepancy| over perfect K_{r+1}-tilings, exactly.

    Each tile edge counts with multiplicity 2, matching the tile's cycle
    power.  The root of the search splits on the tile covering vertex 0.
    """
    budget = budget or SearchBudget()
    n, adj, val = _graph_data(g)
    k = r + 1
    if n % k:
        raise InvariantError(f"{k} does not divide n={n}")
    if n == 0:
        return SearchResult(best=(), value=0, nodes=0, optimal=True, exhausted=False)

    first_tiles = list(_cliques_through(0, (1 << n) - 1, k, adj))
    tasks = [(n, r, adj, val, tile, budget.node_limit) for tile in first_tiles]
    if budget.workers > 1 and tasks:
        with ProcessPoolExecutor(max_workers=budget.workers) as pool:
            results = list(pool.map(_tiling_subtree_task, tasks))
    else:
        results = []
        deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit
        for task in tasks:
            if deadline is not None and time.monotonic() > deadline:
                results.append((None, None, 0, True))
                continue
            results.append(_tiling_subtree_task(task))

    best_val, best_tiling = None, None
    nodes = 0
    exhausted = False
    for value, tiling, sub_nodes, sub_exhausted in results:
        nodes += sub_nodes
        exhausted = exhausted or sub_exhausted
        if value is None:
            continue
        if best_val is None:
            best_val, best_tiling = value, tiling
            continue
        if abs(value) > abs(best_val):
            best_val, best_tiling = value, tiling
        elif abs(value) == abs(best_val):
            if (value > 0) != (best_val > 0):
                if value > 0:
                    best_val, best_tiling = value, tiling
            elif tiling < best_tiling:
                best_val, best_tiling = value, tiling
    return SearchResult(
        best=best_tiling, value=best_val, nodes=nodes, optimal=not exhausted, exhausted=exhausted
    )
