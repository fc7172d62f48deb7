"""Universal bipartite graphs B(n) and their contraction sequences.

Vertex ids: element ``i`` of the ground set is ``i`` (0-based); the subset
with bitmask ``S`` is ``n + S``.  Element ``i`` is adjacent to every subset
containing it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx

from .trigraph import ContractionSequence, ReplayError, Trigraph, replay

MAX_N = 20
# converting the bitmask state to a general trigraph above this many edges is refused
CONVERSION_EDGE_CAP = 4_000_000


def subset_id(n: int, mask: int) -> int:
    return n + mask


def subset_of(n: int, vid: int) -> int:
    return vid - n


def build(n: int) -> nx.Graph:
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}], got {n}")
    G = nx.Graph()
    G.add_nodes_from(range(n + (1 << n)))
    for mask in range(1 << n):
        y = n + mask
        G.add_edges_from((i, y) for i in range(n) if mask >> i & 1)
    return G


def default_k(n: int) -> int:
    return min(n, max(1, math.floor(math.log2(n) - 1)))


def ub_formula(n: int, k: int) -> int:
    return max(2 ** k, n - k, k + 1)


def _lex_subsets(elements: List[int]) -> Iterator[Tuple[int, ...]]:
    """Subsets of a sorted list in lexicographic order of their sorted tuples."""
    yield ()
    for i, e in enumerate(elements):
        for rest in _lex_subsets(elements[i + 1:]):
            yield (e,) + rest


def _mask(t) -> int:
    m = 0
    for e in t:
        m |= 1 << e
    return m


@dataclass
class UpperBoundSchedule:
    sequence: ContractionSequence
    k: int
    phase_ends: List[int] = field(default_factory=list)


def ub_schedule(n: int, k: Optional[int] = None) -> UpperBoundSchedule:
    """Four-phase sequence with A = {0..k-1}.

    1. subsets sharing a trace on A are folded, classes and members in
       lexicographic order, so each class grows from its smallest subset;
    2. the elements outside A are folded together;
    3. the surviving subset vertices are folded;
    4. A is absorbed, and the last two vertices are merged.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}], got {n}")
    if k is None:
        k = default_k(n)
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    nxt = n + (1 << n)
    steps = []

    def merge(u, v):
        nonlocal nxt
        steps.append((u, v, nxt))
        nxt += 1
        return nxt - 1

    ends = []
    outside = list(range(k, n))
    reps = []
    for trace in _lex_subsets(list(range(k))):
        base = _mask(trace)
        cur = None
        for rest in _lex_subsets(outside):
            y = n + (base | _mask(rest))
            cur = y if cur is None else merge(cur, y)
        reps.append(cur)
    ends.append(len(steps))
    xrep = None
    for x in outside:
        xrep = x if xrep is None else merge(xrep, x)
    ends.append(len(steps))
    yrep = reps[0]
    for y in reps[1:]:
        yrep = merge(yrep, y)
    ends.append(len(steps))
    cur = xrep
    for a in range(k):
        cur = a if cur is None else merge(cur, a)
    merge(cur, yrep)
    ends.append(len(steps))
    return UpperBoundSchedule(ContractionSequence(n + (1 << n), steps, ub_formula(n, k)), k, ends)


def ub_sequence(n: int, k: Optional[int] = None) -> ContractionSequence:
    return ub_schedule(n, k).sequence


def lower_bound(n: int) -> int:
    """Largest n-k+1 whose counting inequality rules out an (n-k)-sequence, else 0."""
    if n < 1:
        raise ValueError("n must be positive")
    best = 0
    for k in range(1, n + 1):
        if 2 ** (n - 1) - n * 2 ** (n - k) - 1 > n - k:
            best = max(best, n - k + 1)
    return best


# ---------------------------------------------------------------------------
# bitmask replay
# ---------------------------------------------------------------------------


@dataclass
class BipartiteReplay:
    width: int
    complete: bool
    alive: int
    audited: int = 0
    violations: List[Tuple[int, int, int, int]] = field(default_factory=list)
    final: Optional[Trigraph] = None


def replay_bipartite(n: int, seq: ContractionSequence, audit: bool = False) -> BipartiteReplay:
    """Replay a sequence on B(n) without materialising the graph.

    While only subset vertices are merged, each one is a pair of bitmasks
    over the ground set and every element keeps a count of its red edges.
    The first step touching an element switches to a general trigraph.
    With ``audit``, every merged subset vertex is checked to hold at most
    ``2**d`` original subsets, ``d`` being its red degree; violations are
    ``(step, vertex, originals, red degree)``.
    """
    if not 1 <= n <= MAX_N:
        raise ValueError(f"n must be in [1, {MAX_N}], got {n}")
    N = n + (1 << n)
    if seq.n != N:
        raise ReplayError(0, f"sequence is for {seq.n} vertices, B({n}) has {N}")
    dead = bytearray(N)
    black: Dict[int, int] = {}
    red: Dict[int, int] = {}
    count: Dict[int, int] = {}
    made: Dict[int, Tuple[int, int]] = {}
    rc = [0] * n
    nxt = N
    width = 0
    report = BipartiteReplay(0, False, N)

    def alive(x):
        return (x < N and not dead[x]) or x in black

    def masks(y):
        if y in black:
            return black[y], red[y]
        return y - n, 0

    steps = seq.steps
    i = 0
    for i, (u, v, w) in enumerate(steps):
        if u == v:
            raise ReplayError(i, f"contracts vertex {u} with itself")
        for x in (u, v):
            if not alive(x):
                raise ReplayError(i, f"vertex {x} is not alive")
        if w != nxt:
            raise ReplayError(i, f"fresh id {w} given, expected {nxt}")
        if u < n or v < n:
            break
        bu, ru = masks(u)
        bv, rv = masks(v)
        nb = bu & bv
        nr = ru | rv | (bu ^ bv)
        gained = nr & ~ru & ~rv
        lost = ru & rv
        for bits, delta in ((gained, 1), (lost, -1)):
            while bits:
                low = bits & -bits
                x = low.bit_length() - 1
                rc[x] += delta
                if rc[x] > width:
                    width = rc[x]
                bits ^= low
        d = bin(nr).count("1")
        if d > width:
            width = d
        for x in (u, v):
            if x < N:
                dead[x] = 1
            else:
                del black[x], red[x]
        black[w], red[w] = nb, nr
        count[w] = count.get(u, 1) + count.get(v, 1)
        made[w] = (u, v)
        nxt += 1
        if audit:
            report.audited += 1
            if count[w] > 2 ** d:
                report.violations.append((i, w, count[w], d))
    else:
        i = len(steps)

    alive_y = [y for y in range(n, N) if not dead[y]] + sorted(black)
    alive_x = [x for x in range(n) if not dead[x]]
    report.alive = len(alive_y) + len(alive_x)
    if i == len(steps):
        report.width = width
        report.complete = report.alive <= 1
        return report

    edges = sum(bin(masks(y)[0] | masks(y)[1]).count("1") for y in alive_y)
    if edges > CONVERSION_EDGE_CAP:
        raise ValueError(f"{edges} edges left when the first element is merged; too large to continue")

    def origins(y):
        out = []
        stack = [y]
        while stack:
            z = stack.pop()
            if z in made:
                stack.extend(made[z])
            else:
                out.append(z)
        return out

    be, re_ = [], []
    for y in alive_y:
        b, r = masks(y)
        be.extend((x, y) for x in range(n) if b >> x & 1)
        re_.extend((x, y) for x in range(n) if r >> x & 1)
    tg = Trigraph(alive_x + alive_y, be, re_, {v: origins(v) for v in alive_x + alive_y}, nxt)
    try:
        rest = replay(tg, ContractionSequence(N, steps[i:]), copy=False)
    except ReplayError as exc:
        raise ReplayError(exc.step + i, str(exc).split(": ", 1)[-1]) from exc
    report.width = max(width, rest.width)
    report.alive = len(rest.final)
    report.complete = rest.complete
    report.final = rest.final
    return report


def audit_bipartite(n: int, seq: ContractionSequence) -> BipartiteReplay:
    return replay_bipartite(n, seq, audit=True)
