"""Exact twin-width of small graphs.

``exact_twinwidth`` is a depth-first decision search with memoisation on the
vertex partition (which fully determines the trigraph) and a twin rule.
``exhaustive_twinwidth`` is the reference oracle: plain enumeration of all
contraction orders on bitmasks, sharing no code with the trigraph module.
"""

from __future__ import annotations

from itertools import combinations
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Tuple

import networkx as nx

from .trigraph import ContractionSequence, Trigraph

DEFAULT_CAP = 10
EXHAUSTIVE_CAP = 7


class ExactResult(NamedTuple):
    width: int
    witness: Optional[ContractionSequence]
    exceeds_budget: bool = False


def _twin_pair(tg: Trigraph) -> Optional[Tuple[int, int]]:
    verts = sorted(tg)
    for i, u in enumerate(verts):
        bu, ru = tg.black(u), tg.red(u)
        for v in verts[i + 1:]:
            if bu - {v} == tg.black(v) - {u} and ru - {v} == tg.red(v) - {u}:
                return u, v
    return None


def _decide(tg: Trigraph, d: int, failed: Dict[FrozenSet, int], steps: List) -> bool:
    if len(tg) <= 1:
        return True
    key = frozenset(tg.origin.values())
    if failed.get(key, -1) >= d:
        return False
    twins = _twin_pair(tg)
    if twins is not None:
        # an induced subtrigraph is never harder, so twins are merged greedily
        options = [twins]
    else:
        scored = []
        for u, v in combinations(sorted(tg), 2):
            h = tg.copy()
            h.contract(u, v)
            cost = h.max_red_degree()
            if cost <= d:
                scored.append((cost, u, v))
        scored.sort()
        options = [(u, v) for _, u, v in scored]
    for u, v in options:
        h = tg.copy()
        w = h.contract(u, v)
        if h.max_red_degree() > d:
            continue
        steps.append((u, v, w))
        if _decide(h, d, failed, steps):
            return True
        steps.pop()
    failed[key] = d
    return False


def exact_twinwidth(G: nx.Graph, budget: Optional[int] = None, cap: int = DEFAULT_CAP) -> ExactResult:
    """Twin-width of ``G`` with a witness sequence.

    Graphs above ``cap`` vertices are refused: the search is exponential.
    With ``budget``, the search stops once width ``budget`` is ruled out and
    returns ``ExactResult(budget + 1, None, True)``.
    """
    n = G.number_of_nodes()
    if n > cap:
        raise ValueError(f"graph has {n} vertices, above the exact-solver cap of {cap}")
    tg = Trigraph.from_graph(G)
    failed: Dict[FrozenSet, int] = {}
    limit = max(n - 1, 0) if budget is None else min(budget, max(n - 1, 0))
    for d in range(limit + 1):
        steps: List = []
        if _decide(tg, d, failed, steps):
            return ExactResult(d, ContractionSequence(n, steps, d))
    if budget is not None and budget < max(n - 1, 0):
        return ExactResult(budget + 1, None, True)
    raise AssertionError("no contraction sequence of width n-1 found")  # pragma: no cover


# ---------------------------------------------------------------------------
# exhaustive oracle
# ---------------------------------------------------------------------------


def _merge(black, red, alive, i, j):
    bi = black[i] & ~(1 << j)
    bj = black[j] & ~(1 << i)
    ri = red[i] & ~(1 << j)
    rj = red[j] & ~(1 << i)
    nb = bi & bj
    nr = (ri | rj | (bi ^ bj)) & ~nb
    alive &= ~(1 << j)
    black = list(black)
    red = list(red)
    black[i], red[i] = nb, nr
    black[j] = red[j] = 0
    top = nr.bit_count()
    x_bits = alive & ~(1 << i)
    x = 0
    while x_bits:
        if x_bits & 1:
            bx = black[x] & ~((1 << i) | (1 << j))
            rx = red[x] & ~((1 << i) | (1 << j))
            if nb >> x & 1:
                bx |= 1 << i
            elif nr >> x & 1:
                rx |= 1 << i
            black[x], red[x] = bx, rx
            c = rx.bit_count()
            if c > top:
                top = c
        x_bits >>= 1
        x += 1
    return black, red, alive, top


def _exhaust(black, red, alive) -> int:
    live = [x for x in range(len(black)) if alive >> x & 1]
    if len(live) <= 1:
        return 0
    best = None
    for a, b in combinations(live, 2):
        nb, nr, na, top = _merge(black, red, alive, a, b)
        val = max(top, _exhaust(nb, nr, na))
        if best is None or val < best:
            best = val
    return best


def exhaustive_twinwidth(G: nx.Graph) -> int:
    """Twin-width by trying every contraction order; no pruning, no caching."""
    n = G.number_of_nodes()
    if n > EXHAUSTIVE_CAP:
        raise ValueError(f"exhaustive oracle is limited to {EXHAUSTIVE_CAP} vertices, got {n}")
    index = {v: i for i, v in enumerate(sorted(G.nodes))}
    black = [0] * n
    for u, v in G.edges:
        black[index[u]] |= 1 << index[v]
        black[index[v]] |= 1 << index[u]
    return _exhaust(black, [0] * n, (1 << n) - 1)
