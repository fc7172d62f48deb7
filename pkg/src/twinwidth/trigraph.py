"""Trigraphs, contractions and contraction-sequence replay.

A trigraph carries black (certain) and red (error) edges.  Contracting two
vertices ``u`` and ``v`` yields a fresh vertex ``w`` whose black
neighbourhood is the intersection of the black neighbourhoods of ``u`` and
``v``; every other inherited adjacency turns red.

Vertex ids are integers.  Fresh ids are handed out monotonically from
``next_id`` and never reused, so a sequence step ``(u, v, w)`` is checkable.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Set, Tuple

import networkx as nx

__all__ = [
    "ContractionError",
    "InvariantError",
    "ReplayError",
    "Trigraph",
    "ContractionSequence",
    "NeighbourhoodClassification",
    "ReplayResult",
    "SequenceBuilder",
    "contract",
    "max_red_degree",
    "replay",
    "neighbourhood_classes",
    "trace_key",
]


class ContractionError(ValueError):
    """Raised for an illegal contraction (unknown vertex or u == v)."""


class InvariantError(AssertionError):
    """A constructor broke one of its own structural invariants (a bug signal)."""


class ReplayError(ValueError):
    """A sequence step cannot be applied.  ``step`` is the 0-based index."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


class Trigraph:
    """Mutable trigraph with O(deg) contraction.

    Besides the adjacency, the object keeps a histogram of red degrees so that
    the current maximum red degree is available in amortised O(1).
    """

    def __init__(
        self,
        vertices: Iterable[int] = (),
        black_edges: Iterable[Tuple[int, int]] = (),
        red_edges: Iterable[Tuple[int, int]] = (),
        origin_map: Optional[Dict[int, Iterable[int]]] = None,
        next_id: Optional[int] = None,
    ):
        self._black: Dict[int, Set[int]] = {}
        self._red: Dict[int, Set[int]] = {}
        for v in vertices:
            self._add_vertex(v)
        for a, b in black_edges:
            self._add_edge(self._black, a, b)
        for a, b in red_edges:
            if b in self._black.get(a, ()):
                raise ValueError(f"edge {a}-{b} is both black and red")
            self._add_edge(self._red, a, b)
        if origin_map is None:
            self.origin = {v: frozenset([v]) for v in self._black}
        else:
            self.origin = {v: frozenset(origin_map[v]) for v in self._black}
        if next_id is None:
            next_id = max(self._black, default=-1) + 1
        self.next_id = next_id
        self._hist: Dict[int, int] = defaultdict(int)
        self._maxd = 0
        for v in self._red:
            d = len(self._red[v])
            self._hist[d] += 1
            self._maxd = max(self._maxd, d)

    def _add_vertex(self, v: int) -> None:
        if not isinstance(v, int):
            raise TypeError(f"vertex ids must be int, got {v!r}")
        self._black.setdefault(v, set())
        self._red.setdefault(v, set())

    def _add_edge(self, table, a, b) -> None:
        if a == b:
            raise ValueError(f"self-loop at {a}")
        if a not in self._black or b not in self._black:
            raise ValueError(f"edge {a}-{b} has an endpoint outside the vertex set")
        table[a].add(b)
        table[b].add(a)

    @classmethod
    def from_graph(cls, G: nx.Graph) -> "Trigraph":
        return cls(G.nodes, G.edges)

    def copy(self) -> "Trigraph":
        other = Trigraph.__new__(Trigraph)
        other._black = {v: set(s) for v, s in self._black.items()}
        other._red = {v: set(s) for v, s in self._red.items()}
        other.origin = dict(self.origin)
        other.next_id = self.next_id
        other._hist = defaultdict(int, self._hist)
        other._maxd = self._maxd
        return other

    # -- read access -----------------------------------------------------

    def __len__(self) -> int:
        return len(self._black)

    def __contains__(self, v) -> bool:
        return v in self._black

    def __iter__(self) -> Iterator[int]:
        return iter(self._black)

    @property
    def vertices(self) -> Set[int]:
        return set(self._black)

    @property
    def black_edges(self) -> Set[Tuple[int, int]]:
        return {(a, b) for a, nb in self._black.items() for b in nb if a < b}

    @property
    def red_edges(self) -> Set[Tuple[int, int]]:
        return {(a, b) for a, nr in self._red.items() for b in nr if a < b}

    def black(self, v: int) -> Set[int]:
        """Black neighbourhood of ``v``; do not mutate the returned set."""
        return self._black[v]

    def red(self, v: int) -> Set[int]:
        """Red neighbourhood of ``v``; do not mutate the returned set."""
        return self._red[v]

    def neighbours(self, v: int) -> Set[int]:
        return self._black[v] | self._red[v]

    def red_degree(self, v: int) -> int:
        return len(self._red[v])

    def max_red_degree(self) -> int:
        return self._maxd

    # -- contraction -----------------------------------------------------

    def contract(self, u: int, v: int) -> int:
        """Contract ``u`` and ``v`` in place and return the fresh vertex id."""
        if u == v:
            raise ContractionError(f"cannot contract vertex {u} with itself")
        for x in (u, v):
            if x not in self._black:
                raise ContractionError(f"unknown vertex {x}")
        black, red, hist = self._black, self._red, self._hist
        bu, bv, ru, rv = black.pop(u), black.pop(v), red.pop(u), red.pop(v)
        hist[len(ru)] -= 1
        hist[len(rv)] -= 1
        bu.discard(v)
        bv.discard(u)
        ru.discard(v)
        rv.discard(u)
        new_black = bu & bv
        new_red = ru | rv | (bu ^ bv)

        w = self.next_id
        self.next_id += 1
        top = len(new_red)
        for x in bu | bv | ru | rv:
            rx = red[x]
            old = len(rx)
            bx = black[x]
            bx.discard(u)
            bx.discard(v)
            rx.discard(u)
            rx.discard(v)
            if x in new_black:
                bx.add(w)
            else:
                rx.add(w)
            d = len(rx)
            if d != old:
                hist[old] -= 1
                hist[d] += 1
            if d > top:
                top = d
        black[w] = new_black
        red[w] = new_red
        hist[len(new_red)] += 1
        self.origin[w] = self.origin.pop(u) | self.origin.pop(v)

        if top > self._maxd:
            self._maxd = top
        else:
            while self._maxd > 0 and hist[self._maxd] <= 0:
                self._maxd -= 1
        return w

    def __repr__(self) -> str:
        return (
            f"Trigraph(n={len(self)}, black={sum(map(len, self._black.values())) // 2}, "
            f"red={sum(map(len, self._red.values())) // 2})"
        )


def contract(G: Trigraph, u: int, v: int) -> Trigraph:
    """Return a copy of ``G`` with ``u`` and ``v`` contracted."""
    H = G.copy()
    H.contract(u, v)
    return H


def max_red_degree(G: Trigraph) -> int:
    return G.max_red_degree()


@dataclass
class ContractionSequence:
    """Ordered merges ``(u, v, w)``; ``w`` is the fresh id of the merged vertex."""

    n: int
    steps: List[Tuple[int, int, int]] = field(default_factory=list)
    claimed_width: Optional[int] = None

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "claimed_width": self.claimed_width,
            "steps": [{"u": u, "v": v, "w": w} for u, v, w in self.steps],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "ContractionSequence":
        try:
            steps = [(int(s["u"]), int(s["v"]), int(s["w"])) for s in data["steps"]]
            n = int(data["n"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed contraction sequence: {exc}") from exc
        cw = data.get("claimed_width")
        return cls(n, steps, None if cw is None else int(cw))

    @classmethod
    def from_json(cls, text: str) -> "ContractionSequence":
        return cls.from_dict(json.loads(text))


@dataclass
class ReplayResult:
    final: Trigraph
    width: int

    def __iter__(self):
        yield self.final
        yield self.width

    @property
    def complete(self) -> bool:
        return len(self.final) <= 1


def replay(G, seq: ContractionSequence, copy: bool = True) -> ReplayResult:
    """Apply ``seq`` to ``G`` and report the maximum red degree seen.

    ``G`` may be a networkx graph or a Trigraph.  The width is the maximum
    over the trigraphs obtained after each step (0 for an empty sequence).
    Each step must name two live vertices and the next fresh id.
    """
    if isinstance(G, Trigraph):
        tg = G.copy() if copy else G
    else:
        tg = Trigraph.from_graph(G)
    width = 0
    for i, (u, v, w) in enumerate(seq.steps):
        if u == v:
            raise ReplayError(i, f"contracts vertex {u} with itself")
        for x in (u, v):
            if x not in tg:
                raise ReplayError(i, f"vertex {x} is not alive")
        if w != tg.next_id:
            raise ReplayError(i, f"fresh id {w} given, expected {tg.next_id}")
        tg.contract(u, v)
        d = tg.max_red_degree()
        if d > width:
            width = d
    return ReplayResult(tg, width)


def trace_key(G: Trigraph, x: int, Y) -> Tuple[FrozenSet[int], FrozenSet[int]]:
    """(black trace, red trace) of ``x`` on the vertex set ``Y``."""
    return frozenset(G.black(x) & Y), frozenset(G.red(x) & Y)


@dataclass
class NeighbourhoodClassification:
    """Partition of X by trace on Y.

    Keys are ``(black trace, red trace)`` pairs; on plain graphs the red part
    is always empty and the key is just N(x) & Y.
    """

    classes: Dict[Tuple[FrozenSet[int], FrozenSet[int]], List[int]]

    def __len__(self) -> int:
        return len(self.classes)

    @property
    def traces(self) -> List[FrozenSet[int]]:
        return [b | r for b, r in self.classes]


def neighbourhood_classes(G, X: Iterable[int], Y: Iterable[int]) -> NeighbourhoodClassification:
    if not isinstance(G, Trigraph):
        G = Trigraph.from_graph(G)
    X = list(X)
    Y = set(Y)
    bad = [v for v in (*X, *Y) if v not in G]
    if bad:
        raise ValueError(f"vertices not in graph: {sorted(set(bad))}")
    classes: Dict[Tuple[FrozenSet[int], FrozenSet[int]], List[int]] = {}
    for x in sorted(X):
        classes.setdefault(trace_key(G, x, Y), []).append(x)
    return NeighbourhoodClassification(classes)


class SequenceBuilder:
    """Contracts vertices of a working trigraph while recording the steps.

    Constructors drive one of these; ``width`` is the running maximum red
    degree, so a finished builder doubles as a first replay.
    """

    def __init__(self, G):
        self.trigraph = G.copy() if isinstance(G, Trigraph) else Trigraph.from_graph(G)
        self.n = len(self.trigraph)
        self.steps: List[Tuple[int, int, int]] = []
        self.width = 0

    def merge(self, u: int, v: int) -> int:
        w = self.trigraph.contract(u, v)
        self.steps.append((u, v, w))
        d = self.trigraph.max_red_degree()
        if d > self.width:
            self.width = d
        return w

    def merge_all(self, members: List[int]) -> int:
        """Fold ``members`` into one vertex, in the given order."""
        rep = members[0]
        for m in members[1:]:
            rep = self.merge(rep, m)
        return rep

    def collapse_classes(self, members: Iterable[int], Y) -> List[int]:
        """Merge members sharing a trace on ``Y``; return the survivors.

        Within a class, members are folded in order of their smallest
        original vertex, so the same class always grows from the same seed.
        Classes are processed in the same order.
        """
        G = self.trigraph
        groups: Dict[Hashable, List[int]] = {}
        for m in sorted(members, key=lambda x: min(G.origin[x])):
            groups.setdefault(trace_key(G, m, Y), []).append(m)
        return [self.merge_all(g) for g in groups.values()]

    def sequence(self, claimed_width: Optional[int] = None) -> ContractionSequence:
        return ContractionSequence(self.n, list(self.steps), claimed_width)
