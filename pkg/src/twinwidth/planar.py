"""Combinatorial plane embeddings.

An embedding is a rotation system: for every vertex, the cyclic order of
its neighbours.  Faces are traced with the rule ``(u, v) -> (v, succ_v(u))``
where ``succ_v(u)`` is the neighbour following ``u`` in the rotation at
``v``.  One dart is marked as lying on the outer face.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx


class EmbeddingError(ValueError):
    pass


Dart = Tuple[int, int]


class RotationSystem:
    def __init__(self, rotation: Dict[int, Sequence[int]], outer: Optional[Dart] = None):
        self.rotation: Dict[int, List[int]] = {v: list(nb) for v, nb in rotation.items()}
        self._pos: Dict[int, Dict[int, int]] = {}
        for v, nb in self.rotation.items():
            self._reindex(v)
            if len(self._pos[v]) != len(nb):
                raise EmbeddingError(f"repeated neighbour in rotation of {v}")
        if outer is None:
            outer = next(((v, nb[0]) for v, nb in sorted(self.rotation.items()) if nb), None)
        self.outer = outer

    def _reindex(self, v: int) -> None:
        self._pos[v] = {u: i for i, u in enumerate(self.rotation[v])}

    def copy(self) -> "RotationSystem":
        return RotationSystem(self.rotation, self.outer)

    def succ(self, v: int, u: int) -> int:
        """Neighbour after ``u`` in the rotation at ``v``."""
        nb = self.rotation[v]
        return nb[(self._pos[v][u] + 1) % len(nb)]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._pos.get(u, ())

    def graph(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.rotation)
        for v, nb in self.rotation.items():
            G.add_edges_from((v, u) for u in nb)
        return G

    def darts(self):
        for v, nb in self.rotation.items():
            for u in nb:
                yield (v, u)

    def face_walks(self) -> List[List[int]]:
        """Every face as its cyclic list of vertices (dart tails)."""
        seen = set()
        walks = []
        for start in self.darts():
            if start in seen:
                continue
            walk = []
            d = start
            while d not in seen:
                seen.add(d)
                walk.append(d[0])
                u, v = d
                d = (v, self.succ(v, u))
            if d != start:
                raise EmbeddingError(f"face walk from dart {start} does not close")
            walks.append(walk)
        return walks

    def dart_faces(self) -> Tuple[List[List[int]], Dict[Dart, int]]:
        walks = self.face_walks()
        where = {}
        for i, w in enumerate(walks):
            for j, a in enumerate(w):
                where[(a, w[(j + 1) % len(w)])] = i
        return walks, where

    def outer_face(self) -> int:
        walks, where = self.dart_faces()
        return where[self.outer]

    def validate(self) -> None:
        """Check symmetry, face closure and Euler's formula per component."""
        for v, nb in self.rotation.items():
            for u in nb:
                if u == v:
                    raise EmbeddingError(f"self-loop at {v}")
                if u not in self._pos or v not in self._pos[u]:
                    raise EmbeddingError(f"edge {v}-{u} missing from rotation of {u}")
        G = self.graph()
        walks = self.face_walks()
        comps = [c for c in nx.connected_components(G) if len(c) > 1]
        isolated = sum(1 for c in nx.connected_components(G) if len(c) == 1)
        n = G.number_of_nodes() - isolated
        m = G.number_of_edges()
        # faces are traced per component, so each component contributes its own outer face
        if n - m + len(walks) != 2 * len(comps):
            raise EmbeddingError(
                f"Euler check failed: n={n} m={m} f={len(walks)} over {len(comps)} component(s)"
            )
        if self.outer is not None and not self.has_edge(*self.outer):
            raise EmbeddingError(f"outer dart {self.outer} is not an edge")

    def insert_after(self, v: int, anchor: int, u: int) -> None:
        """Put ``u`` right after ``anchor`` in the rotation at ``v``."""
        nb = self.rotation[v]
        nb.insert(self._pos[v][anchor] + 1, u)
        self._reindex(v)

    def to_dict(self) -> dict:
        return {
            "rotation": {str(v): list(nb) for v, nb in sorted(self.rotation.items())},
            "outer": None if self.outer is None else list(self.outer),
        }


def faces(R: RotationSystem) -> List[List[int]]:
    return R.face_walks()


def rotation_from_networkx(emb: nx.PlanarEmbedding, outer: Optional[Dart] = None) -> RotationSystem:
    """Convert a networkx planar embedding to our face-tracing convention."""
    rot = {}
    for v in emb.nodes:
        cw = list(emb.neighbors_cw_order(v))
        # networkx steps (u, v) -> (v, ccw_v(u)); counter-clockwise order matches our succ
        rot[v] = cw[::-1]
    return RotationSystem(rot, outer)


# ---------------------------------------------------------------------------
# triangulation
# ---------------------------------------------------------------------------


def _split(R: RotationSystem, walk: List[int], i: int, j: int):
    """Add the chord walk[i]-walk[j] inside the face ``walk``; return both halves."""
    L = len(walk)
    a, b = walk[i], walk[j]
    R.insert_after(a, walk[i - 1], b)
    R.insert_after(b, walk[j - 1], a)
    first = walk[i:j + 1]
    second = walk[j:] + walk[:i + 1]
    assert len(first) + len(second) == L + 2
    return first, second


def _legal(R: RotationSystem, walk, i, j) -> bool:
    L = len(walk)
    if (j - i) % L in (0, 1, L - 1):
        return False
    a, b = walk[i], walk[j]
    return a != b and not R.has_edge(a, b)


def _pick_chord(R: RotationSystem, walk: List[int]) -> Tuple[int, int]:
    L = len(walk)
    counts = {}
    for x in walk:
        counts[x] = counts.get(x, 0) + 1
    # fan from the smallest vertex seen once on the walk, if every fan chord is new
    singles = [x for x in walk if counts[x] == 1]
    if singles and len(counts) == L:
        a = min(singles)
        i = walk.index(a)
        if all(not R.has_edge(a, walk[(i + t) % L]) for t in range(2, L - 1)):
            return i, (i + 2) % L
    for i in range(L):
        if _legal(R, walk, i, (i + 2) % L):
            return i, (i + 2) % L
    best = None
    for i in range(L):
        for j in range(i + 2, L):
            if _legal(R, walk, i, j):
                cand = (min(walk[i], walk[j]), max(walk[i], walk[j]), i, j)
                if best is None or cand < best:
                    best = cand
    if best is None:
        raise EmbeddingError(f"no legal chord in face {walk}")
    return best[2], best[3]


def triangulate(G: nx.Graph, R: RotationSystem) -> Tuple[nx.Graph, RotationSystem]:
    """Add edges until every face is a triangle, never creating multi-edges."""
    if G.number_of_nodes() < 3:
        raise EmbeddingError("triangulation needs at least 3 vertices")
    if not nx.is_connected(G):
        raise EmbeddingError("triangulation needs a connected graph")
    R.validate()
    if {frozenset(e) for e in R.graph().edges} != {frozenset(e) for e in G.edges}:
        raise EmbeddingError("rotation system does not describe the given graph")
    Rp = R.copy()
    work = [w for w in Rp.face_walks() if len(w) > 3]
    while work:
        walk = work.pop()
        i, j = _pick_chord(Rp, walk)
        if i > j:
            i, j = j, i
        for half in _split(Rp, walk, i, j):
            if len(half) > 3:
                work.append(half)
    Gp = Rp.graph()
    Rp.validate()
    return Gp, Rp


# ---------------------------------------------------------------------------
# random triangulations
# ---------------------------------------------------------------------------


def random_planar_triangulation(n: int, seed: int = 0, flips: Optional[int] = None):
    """Random maximal planar graph with its rotation system.

    Vertices are inserted one at a time into a uniformly chosen inner face;
    afterwards ``flips`` random edge flips (default ``2n``) diversify the
    result.  The outer face is the initial triangle ``(0, 2, 1)``.
    """
    if n < 3:
        raise ValueError("a triangulation needs n >= 3")
    rng = random.Random(seed)
    apex: Dict[Dart, int] = {}

    def put(a, b, c):
        apex[(a, b)] = c
        apex[(b, c)] = a
        apex[(c, a)] = b

    put(0, 1, 2)
    put(0, 2, 1)
    outer = {(0, 2), (2, 1), (1, 0)}
    inner = [(0, 1, 2)]
    for x in range(3, n):
        k = rng.randrange(len(inner))
        a, b, c = inner[k]
        inner[k] = (a, b, x)
        inner.append((b, c, x))
        inner.append((c, a, x))
        put(a, b, x)
        put(b, c, x)
        put(c, a, x)

    adj = {v: set() for v in range(n)}
    for a, b in apex:
        adj[a].add(b)
    edges = sorted({(min(a, b), max(a, b)) for a, b in apex})
    for _ in range(2 * n if flips is None else flips):
        k = rng.randrange(len(edges))
        a, b = edges[k]
        if (a, b) in outer or (b, a) in outer:
            continue
        c, d = apex[(a, b)], apex[(b, a)]
        if c == d or d in adj[c]:
            continue
        for dart in ((a, b), (b, c), (c, a), (b, a), (a, d), (d, b)):
            del apex[dart]
        put(a, d, c)
        put(d, b, c)
        adj[a].discard(b)
        adj[b].discard(a)
        adj[c].add(d)
        adj[d].add(c)
        edges[k] = (min(c, d), max(c, d))

    succ: Dict[int, Dict[int, int]] = {v: {} for v in range(n)}
    for (a, b), c in apex.items():
        succ[b][a] = c
    rotation = {}
    for v in range(n):
        start = min(succ[v])
        order = [start]
        nxt = succ[v][start]
        while nxt != start:
            order.append(nxt)
            nxt = succ[v][nxt]
        rotation[v] = order
    R = RotationSystem(rotation, (0, 2))
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_edges_from(edges)
    return G, R


# ---------------------------------------------------------------------------
# BFS layering
# ---------------------------------------------------------------------------


@dataclass
class BfsLayering:
    root: int
    parent: Dict[int, Optional[int]]
    layer: Dict[int, int]

    def path_to_root(self, v: int) -> List[int]:
        out = [v]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    def is_vertical(self, path: Sequence[int]) -> bool:
        """Consecutive vertices are parent and child, all in one direction."""
        if len(path) <= 1:
            return len(path) == 1
        up = self.parent[path[0]] == path[1]
        for a, b in zip(path, path[1:]):
            if (self.parent[a] != b) if up else (self.parent[b] != a):
                return False
        return True


def bfs_layering(G: nx.Graph, R: RotationSystem, root: Optional[int] = None) -> BfsLayering:
    """BFS tree from a root on the outer face, scanning neighbours in rotation order."""
    if root is None:
        root = R.outer[0] if R.outer is not None else min(G.nodes)
    parent: Dict[int, Optional[int]] = {root: None}
    layer = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in R.rotation.get(v, ()):
            if u not in layer and G.has_edge(v, u):
                layer[u] = layer[v] + 1
                parent[u] = v
                queue.append(u)
    return BfsLayering(root, parent, layer)
