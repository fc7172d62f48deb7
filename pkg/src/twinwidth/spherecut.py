"""Contraction sequences from branch decompositions of planar graphs.

A branch decomposition is rooted by subdividing one tree edge and hanging
a root node off the subdivision vertex.  Every tree edge ``e`` below the
root sees the edges of G under it; the vertices touched only from below
(``A_e``) are folded bottom-up, one vertex per neighbourhood class on the
middle set of ``e``.

The module also covers the class-count bound for vertices enclosed by a
noose (``h``, ``tight_example``, ``verify_noose_bound``) and the extension of
a decomposition to graphs with pendant trees.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from .graphio import BranchDecomposition, GraphFormatError, compute_middle_sets, validate_branch_decomposition
from .planar import BfsLayering, EmbeddingError, RotationSystem
from .trigraph import ContractionSequence, InvariantError, SequenceBuilder, neighbourhood_classes

BRUTE_FORCE_EDGE_CAP = 9


def h(k: int) -> int:
    """Most neighbourhood classes on a noose of length ``k`` seen from inside."""
    if k < 1:
        raise ValueError("noose length must be at least 1")
    return 4 * k - 4


def bw_bound(k: int) -> int:
    """Width guaranteed for a sphere-cut decomposition of width ``k``."""
    if k <= 1:
        return 0
    return max(4 * k, math.ceil(9 * k / 2) - 3)


# ---------------------------------------------------------------------------
# class counts inside a noose
# ---------------------------------------------------------------------------


class TightExample(NamedTuple):
    graph: nx.Graph
    noose: List[int]
    embedding: RotationSystem


def tight_example(k: int) -> TightExample:
    """Planar graph whose vertices inside a k-cycle realise 4k-4 classes on it.

    Cycle vertices are ``0..k-1``.  The straight-line drawing places them on
    a regular polygon, fans the polygon from vertex 0 and puts one witness
    per neighbourhood inside the matching triangle; the rotation system is
    read off by sorting neighbours by angle and checked with Euler's formula.
    """
    if k < 3:
        raise ValueError("tight example needs k >= 3")
    pos: Dict[int, Tuple[float, float]] = {}
    for i in range(k):
        a = 2 * math.pi * i / k
        pos[i] = (math.cos(a), math.sin(a))
    G = nx.Graph()
    G.add_nodes_from(range(k))
    G.add_edges_from((i, (i + 1) % k) for i in range(k))
    nxt = [k]

    def add(nbrs, at):
        v = nxt[0]
        nxt[0] += 1
        pos[v] = at
        G.add_edges_from((v, x) for x in nbrs)
        return v

    def mix(*terms):
        return (sum(w * p[0] for w, p in terms), sum(w * p[1] for w, p in terms))

    centre = {}
    for i in range(1, k - 1):
        third = 1.0 / 3
        centre[i] = mix((third, pos[0]), (third, pos[i]), (third, pos[i + 1]))
        add((0, i, i + 1), centre[i])
    for j in range(2, k - 1):
        add((0, j), mix((0.5, pos[0]), (0.5, pos[j])))
    for i in range(k):
        j = (i + 1) % k
        home = centre[min(max(i, 1), k - 2)] if i != k - 1 else centre[k - 2]
        mid = mix((0.5, pos[i]), (0.5, pos[j]))
        p = add((i, j), mix((0.75, mid), (0.25, home)))
        s = add((i,), mix((0.8, pos[i]), (0.1, pos[p]), (0.1, pos[j])))
        if i == 0:
            add((s,), mix((0.7, pos[i]), (0.15, pos[p]), (0.15, pos[j])))

    rotation = {}
    for v in G.nodes:
        x0, y0 = pos[v]
        rotation[v] = sorted(G[v], key=lambda u: math.atan2(pos[u][1] - y0, pos[u][0] - x0))
    R = RotationSystem(rotation)
    R.validate()
    walks, where = R.dart_faces()
    outer = [d for d in ((0, 1), (1, 0)) if sorted(walks[where[d]]) == list(range(k))]
    if not outer:
        raise EmbeddingError("no face of the tight example is bounded by the cycle alone")  # pragma: no cover
    R.outer = outer[0]
    return TightExample(G, list(range(k)), R)


@dataclass
class NooseBoundCertificate:
    k: int
    class_count: int
    bound: int
    inside: FrozenSet[int] = frozenset()

    @property
    def ok(self) -> bool:
        return self.class_count <= self.bound


def _face_positions(walks):
    at = {}
    for f, w in enumerate(walks):
        for i, a in enumerate(w):
            at[(a, w[(i + 1) % len(w)])] = (f, i)
    return at


def noose_sides(R: RotationSystem, noose: Sequence[int], via: Optional[Sequence] = None):
    """Split the non-noose vertices into (inside, outside) of a closed curve.

    The curve visits ``noose`` cyclically.  Between consecutive vertices it
    runs along their edge, or through the face named by ``via[i]`` (any dart
    of that face).  Without ``via`` an edge is used when present and unused,
    otherwise the first common face not visited yet.  "Outside" is the side
    holding the outer dart.
    """
    k = len(noose)
    if k < 2 or len(set(noose)) != k:
        raise EmbeddingError("noose needs at least two distinct vertices")
    walks = R.face_walks()
    at = _face_positions(walks)
    cut_edges = set()
    split: Dict[int, Tuple[int, int]] = {}
    for i in range(k):
        a, b = noose[i], noose[(i + 1) % k]
        choice = via[i] if via is not None else None
        if choice is None and R.has_edge(a, b) and frozenset((a, b)) not in cut_edges:
            cut_edges.add(frozenset((a, b)))
            continue
        if choice is not None:
            faces_ab = [at[tuple(choice)][0]]
        else:
            faces_ab = [f for f, w in enumerate(walks) if a in w and b in w and f not in split]
        if not faces_ab:
            raise EmbeddingError(f"no free face joins noose vertices {a} and {b}")
        f = faces_ab[0]
        if f in split:
            raise EmbeddingError(f"noose visits face {f} twice")
        w = walks[f]
        if a not in w or b not in w:
            raise EmbeddingError(f"face {f} does not contain both {a} and {b}")
        split[f] = (w.index(a), w.index(b))

    def piece(d):
        f, i = at[d]
        if f not in split:
            return (f, 0)
        pa, pb = split[f]
        L = len(walks[f])
        return (f, 1 if (i - pa) % L < (pb - pa) % L else 2)

    dsu = nx.utils.UnionFind()
    for d in at:
        dsu[piece(d)]
        if frozenset(d) not in cut_edges:
            dsu.union(piece(d), piece((d[1], d[0])))
    groups = list(dsu.to_sets())
    if len(groups) != 2:
        raise EmbeddingError(f"noose splits the faces into {len(groups)} parts, expected 2")
    outside_root = dsu[piece(R.outer)]
    on_noose = set(noose)
    inside, outside = set(), set()
    for v, nb in R.rotation.items():
        if v in on_noose or not nb:
            continue
        sides = {dsu[piece((v, u))] == outside_root for u in nb}
        if len(sides) != 1:
            raise EmbeddingError(f"vertex {v} lies on both sides of the noose")
        (outside if sides.pop() else inside).add(v)
    for v in inside:
        for u in R.rotation[v]:
            if u in outside:
                raise EmbeddingError(f"edge {v}-{u} crosses the noose")
    return frozenset(inside), frozenset(outside)


def verify_noose_bound(G: nx.Graph, R: RotationSystem, noose: Sequence[int], via=None) -> NooseBoundCertificate:
    """Count classes of the enclosed vertices on the noose; raise if above h(k)."""
    inside, _ = noose_sides(R, noose, via)
    k = len(noose)
    count = len(neighbourhood_classes(G, inside, noose)) if inside else 0
    cert = NooseBoundCertificate(k, count, h(k), inside)
    if not cert.ok:
        raise InvariantError(f"{count} classes inside a noose of length {k}, above {h(k)}")
    return cert


def fundamental_cycle(layering: BfsLayering, u: int, v: int) -> List[int]:
    """Cycle closed by the non-tree edge u-v through the BFS tree."""
    pu, pv = layering.path_to_root(u), layering.path_to_root(v)
    on_v = set(pv)
    top = next(x for x in pu if x in on_v)
    left = pu[:pu.index(top) + 1]
    right = pv[:pv.index(top)]
    return left + right[::-1]


# ---------------------------------------------------------------------------
# rooted decompositions
# ---------------------------------------------------------------------------


@dataclass
class SphereCutDecomposition:
    """A branch decomposition rooted at a subdivided tree edge."""

    tree: nx.Graph
    leaf_map: Dict[int, Tuple[int, int]]
    middle_set: Dict[FrozenSet[int], FrozenSet[int]]
    root: int
    parent: Dict[int, Optional[int]] = field(default_factory=dict)

    @classmethod
    def from_branch_decomposition(cls, G: nx.Graph, bd: BranchDecomposition, root_edge=None):
        report = validate_branch_decomposition(G, bd)
        if not report.ok:
            raise GraphFormatError("invalid branch decomposition: " + "; ".join(report.violations[:5]))
        T = bd.tree.copy()
        mids = dict(report.middle_sets)
        if root_edge is None:
            first = min(bd.leaf_map, key=lambda x: bd.leaf_map[x])
            root_edge = (first, next(iter(T[first])))
        a, b = root_edge
        if not T.has_edge(a, b):
            raise GraphFormatError(f"root edge {a}-{b} is not a tree edge")
        s = max(T.nodes) + 1
        r = s + 1
        old = mids.pop(frozenset((a, b)))
        T.remove_edge(a, b)
        T.add_edges_from([(a, s), (s, b), (s, r)])
        mids[frozenset((a, s))] = old
        mids[frozenset((s, b))] = old
        mids[frozenset((s, r))] = frozenset()
        parent = {r: None}
        for x, y in nx.bfs_edges(T, r):
            parent[y] = x
        return cls(T, dict(bd.leaf_map), mids, r, parent)

    @property
    def width(self) -> int:
        return max(map(len, self.middle_set.values()), default=0)

    def children(self, x: int) -> List[int]:
        return sorted(y for y in self.tree[x] if self.parent.get(y) == x)

    def mid(self, x: int) -> FrozenSet[int]:
        """Middle set of the edge from ``x`` to its parent."""
        return self.middle_set[frozenset((x, self.parent[x]))]

    def postorder(self) -> List[int]:
        return [x for x in nx.dfs_postorder_nodes(self.tree, self.root) if x != self.root]

    def lower_edges(self, x: int) -> List[Tuple[int, int]]:
        out = []
        stack = [x]
        while stack:
            y = stack.pop()
            if y in self.leaf_map:
                out.append(self.leaf_map[y])
            stack.extend(self.children(y))
        return sorted(out)

    def lower_graph(self, x: int) -> nx.Graph:
        return nx.Graph(self.lower_edges(x))

    def check(self, G: nx.Graph) -> List[str]:
        problems = []
        bd = BranchDecomposition(self.tree.copy(), self.leaf_map)
        bd.tree.remove_node(self.root)
        # the subdivision vertex has degree 2 once the root is dropped; splice it out
        s = next(iter(self.tree[self.root]))
        a, b = [y for y in bd.tree[s]]
        bd.tree.remove_node(s)
        bd.tree.add_edge(a, b)
        fresh = compute_middle_sets(G, bd)
        for e, m in self.middle_set.items():
            if self.root in e or s in e:
                continue
            if fresh.get(e) != m:
                problems.append(f"middle set of tree edge {sorted(e)} is stale")
        if self.middle_set.get(frozenset((self.root, s))):
            problems.append("root edge has a nonempty middle set")
        for x in self.tree:
            if self.tree.degree(x) == 3:
                common = frozenset.intersection(*(self.middle_set[frozenset((x, y))] for y in self.tree[x]))
                if len(common) > 2:
                    problems.append(f"node {x}: {len(common)} vertices common to all three middle sets")
        return problems


def class_count_audit(G: nx.Graph, scd: SphereCutDecomposition) -> List[str]:
    """Tree edges whose lower vertices exceed the noose class bound on their middle set."""
    out = []
    for x in scd.postorder():
        N = scd.mid(x)
        lower = set()
        for e in scd.lower_edges(x):
            lower.update(e)
        A = lower - N
        if not A or not N:
            continue
        # a single middle vertex still separates neighbours from non-neighbours
        cap = max(h(len(N)), 2 ** len(N)) if len(N) <= 2 else h(len(N))
        c = len(neighbourhood_classes(G, A, N))
        if c > cap:
            out.append(f"tree edge below node {x}: {c} classes on {len(N)} middle vertices")
    return out


# ---------------------------------------------------------------------------
# pendant trees
# ---------------------------------------------------------------------------


def _tree_branch(H: nx.Graph, root: int, start: int):
    """Branch decomposition of the tree ``H``; returns (tree, leaf_map, top node).

    The edge above ``top`` (once attached) has middle set at most {root}.
    """
    T = nx.Graph()
    leaf_map = {}
    counter = [start]

    def new():
        counter[0] += 1
        return counter[0] - 1

    def unit(v, c, par):
        leaf = new()
        T.add_node(leaf)
        leaf_map[leaf] = (min(v, c), max(v, c))
        below = build(c, v)
        if below is None:
            return leaf
        j = new()
        T.add_edges_from([(j, leaf), (j, below)])
        return j

    def build(v, par):
        units = [unit(v, c, par) for c in sorted(H[v]) if c != par]
        if not units:
            return None
        top = units[0]
        for u in units[1:]:
            j = new()
            T.add_edges_from([(j, top), (j, u)])
            top = j
        return top

    top = build(root, None)
    return T, leaf_map, top, counter[0]


def extend_for_degree_one(G: nx.Graph, bd: BranchDecomposition) -> BranchDecomposition:
    """Grow a decomposition of the 2-core of ``G`` into one of ``G``.

    Each pendant tree is decomposed on its own (width at most 2) and hung
    from a subdivided tree edge whose middle set holds the tree's root.
    """
    core = nx.k_core(G, 2)
    removed = nx.Graph()
    removed.add_edges_from(e for e in G.edges if not core.has_edge(*e))
    if removed.number_of_edges() == 0:
        return BranchDecomposition(bd.tree.copy(), dict(bd.leaf_map))
    if core.number_of_edges() == 0:
        if not nx.is_tree(G):
            raise ValueError("graph without a 2-core must be a tree")
        root = min(G.nodes)
        T, leaf_map, top, _ = _tree_branch(G, root, 0)
        if T.degree(top) == 2:
            # nothing hangs above the top node, so splice it out
            a, b = T[top]
            T.remove_node(top)
            T.add_edge(a, b)
        return BranchDecomposition(T, leaf_map)

    report = validate_branch_decomposition(core, bd)
    if not report.ok:
        raise GraphFormatError("decomposition does not fit the 2-core: " + "; ".join(report.violations[:5]))
    T = bd.tree.copy()
    leaf_map = dict(bd.leaf_map)
    mids = dict(report.middle_sets)
    nxt = max(T.nodes) + 1
    for comp in sorted(nx.connected_components(removed), key=min):
        roots = [v for v in comp if v in core]
        if len(roots) != 1:
            raise InvariantError(f"pendant tree {sorted(comp)[:5]} meets the 2-core in {len(roots)} vertices")
        r = roots[0]
        edge = next((e for e in sorted(mids, key=sorted) if r in mids[e]), None)
        if edge is None:
            raise GraphFormatError(f"no tree edge has {r} in its middle set")
        a, b = sorted(edge)
        sub, sub_leaves, top, nxt2 = _tree_branch(removed.subgraph(comp), r, nxt + 1)
        s = nxt
        nxt = nxt2
        T.remove_edge(a, b)
        T.add_edges_from([(a, s), (s, b), (s, top)])
        T.add_edges_from(sub.edges)
        T.add_nodes_from(sub.nodes)
        leaf_map.update(sub_leaves)
        m = mids.pop(edge)
        mids[frozenset((a, s))] = m
        mids[frozenset((s, b))] = m
        mids[frozenset((s, top))] = frozenset((r,))
    return BranchDecomposition(T, leaf_map)


# ---------------------------------------------------------------------------
# the constructor
# ---------------------------------------------------------------------------


def _red_closed(b: SequenceBuilder, block) -> bool:
    inside = set(block)
    return all(b.trigraph.red(x) <= inside for x in block)


def _star_sequence(G: nx.Graph) -> ContractionSequence:
    b = SequenceBuilder(G)
    centre = max(G.nodes, key=lambda v: (G.degree(v), -v))
    leaves = sorted(v for v in G.nodes if v != centre)
    if leaves:
        b.merge(b.merge_all(leaves), centre)
    return b.sequence(0)


def is_star(G: nx.Graph) -> bool:
    return nx.is_connected(G) and sum(1 for v in G if G.degree(v) > 1) <= 1


def bw_contraction_sequence(G: nx.Graph, scd, strict: bool = True) -> ContractionSequence:
    """Fold a connected graph bottom-up along a rooted branch decomposition.

    ``scd`` may be a SphereCutDecomposition or a plain BranchDecomposition.
    With ``strict`` the per-node size budgets are asserted; they rely on the
    middle sets lying on nooses and may fail for other decompositions.
    """
    if G.number_of_nodes() == 0:
        return ContractionSequence(0, [], 0)
    if not nx.is_connected(G):
        raise ValueError("graph must be connected")
    if is_star(G):
        return _star_sequence(G)
    if isinstance(scd, BranchDecomposition):
        scd = SphereCutDecomposition.from_branch_decomposition(G, scd)
    k = scd.width
    b = SequenceBuilder(G)
    blocks: Dict[int, List[int]] = {}
    for x in scd.postorder():
        N = scd.mid(x)
        kids = scd.children(x)
        if not kids:
            u, v = scd.leaf_map[x]
            blocks[x] = b.collapse_classes([y for y in (u, v) if y not in N], N)
            continue
        if len(kids) != 2:
            raise GraphFormatError(f"tree node {x} has {len(kids)} children")
        x1, x2 = kids
        N1, N2 = scd.mid(x1), scd.mid(x2)
        I = (N1 & N2) - N
        refined = []
        for xi, Ni in ((x1, N1), (x2, N2)):
            A = blocks.pop(xi)
            if strict and not _red_closed(b, A):
                raise InvariantError(f"red edge leaves the block below node {xi}")
            refined.append(b.collapse_classes(A, Ni - I))
        t1, t2 = len(refined[0]), len(refined[1])
        if strict and k >= 2:
            if t1 + t2 > 4 * k:
                raise InvariantError(f"node {x}: refined blocks hold {t1 + t2} > 4k = {4 * k} vertices")
            if 2 * (t1 + t2 + len(I) - 2) > 9 * k - 6:
                raise InvariantError(f"node {x}: {t1 + t2} refined vertices and |I| = {len(I)} exceed 9k/2 - 3")
        blocks[x] = b.collapse_classes(sorted(I) + refined[0] + refined[1], N)
    if len(b.trigraph) != 1:
        raise InvariantError(f"{len(b.trigraph)} vertices left after the root")  # pragma: no cover
    return b.sequence(bw_bound(k))


# ---------------------------------------------------------------------------
# decompositions we can build
# ---------------------------------------------------------------------------


def caterpillar(edges: Sequence[Tuple[int, int]]) -> BranchDecomposition:
    """Branch decomposition whose leaves hang off a path in the given edge order."""
    edges = [(min(u, v), max(u, v)) for u, v in edges]
    m = len(edges)
    T = nx.Graph()
    leaf_map = {i: e for i, e in enumerate(edges)}
    T.add_nodes_from(range(m))
    if m <= 1:
        return BranchDecomposition(T, leaf_map)
    if m == 2:
        T.add_edge(0, 1)
        return BranchDecomposition(T, leaf_map)
    spine = list(range(m, m + m - 2))
    T.add_edge(0, spine[0])
    for i, s in enumerate(spine):
        T.add_edge(s, i + 1)
    T.add_edges_from(zip(spine, spine[1:]))
    T.add_edge(spine[-1], m - 1)
    return BranchDecomposition(T, leaf_map)


def grid_instance(rows: int, cols: int):
    """``rows x cols`` grid with a column-sweep decomposition of width ``rows``.

    Vertex (c, r) gets id ``c * rows + r``.  The sweep takes the vertical
    edges of a column top to bottom, then its rightward edges row by row;
    every middle set is a frontier that a noose can trace.
    """
    if rows < 2 or cols < 2:
        raise ValueError("grid needs at least 2 rows and 2 columns")
    vid = lambda c, r: c * rows + r
    order = []
    for c in range(cols):
        order += [(vid(c, r), vid(c, r + 1)) for r in range(rows - 1)]
        if c + 1 < cols:
            order += [(vid(c, r), vid(c + 1, r)) for r in range(rows)]
    G = nx.Graph(order)
    return G, caterpillar(order)


def outerplanar_instance(n: int, seed: int = 0):
    """Random maximal outerplanar graph with a width-2 decomposition from its dual tree."""
    if n < 3:
        raise ValueError("need n >= 3")
    rng = random.Random(seed)
    G = nx.cycle_graph(n)
    T = nx.Graph()
    leaf_map: Dict[int, Tuple[int, int]] = {}
    counter = [0]

    def new():
        counter[0] += 1
        return counter[0] - 1

    def leaf(a, b):
        x = new()
        T.add_node(x)
        leaf_map[x] = (a, b)
        return x

    # explicit stack: (i, j, attach) means "polygon between i and j, hang it on attach"
    root_tri = new()
    T.add_edge(root_tri, leaf(0, n - 1))
    stack = [(0, n - 1, root_tri)]
    while stack:
        i, j, node = stack.pop()
        m = rng.randrange(i + 1, j)
        for a, c in ((i, m), (m, j)):
            if c - a == 1:
                T.add_edge(node, leaf(a, c))
                continue
            G.add_edge(a, c)
            chord = new()
            tri = new()
            T.add_edges_from([(node, chord), (chord, leaf(a, c)), (chord, tri)])
            stack.append((a, c, tri))
    return G, BranchDecomposition(T, leaf_map)


def brute_force_branchwidth(G: nx.Graph) -> int:
    """Branchwidth by exhausting edge bipartitions; graphs with at most 9 edges."""
    edges = sorted((min(u, v), max(u, v)) for u, v in G.edges)
    m = len(edges)
    if m > BRUTE_FORCE_EDGE_CAP:
        raise ValueError(f"brute force is limited to {BRUTE_FORCE_EDGE_CAP} edges, got {m}")
    if m <= 1:
        return 0
    full = (1 << m) - 1
    touch = []
    for v in sorted(G.nodes):
        mask = 0
        for i, e in enumerate(edges):
            if v in e:
                mask |= 1 << i
        touch.append(mask)

    def mid(S):
        return sum(1 for t in touch if t & S and t & ~S & full)

    best: Dict[int, int] = {}

    def f(S):
        if S & (S - 1) == 0:
            return 0
        if S in best:
            return best[S]
        low = S & -S
        val = None
        sub = (S - 1) & S
        while sub:
            if sub & low:
                rest = S ^ sub
                cand = max(mid(sub), mid(rest), f(sub), f(rest))
                if val is None or cand < val:
                    val = cand
            sub = (sub - 1) & S
        best[S] = val
        return val

    out = None
    for S in range(1, full):
        if S & 1:
            cand = max(mid(S), f(S), f(full ^ S))
            if out is None or cand < out:
                out = cand
    return out
