"""Contraction sequences from tree decompositions.

The decomposition is first normalised into a *clean* one: a rooted tree on
V(G) in which every edge joins an ancestor and a descendant, and the bag of
a node ``u`` is ``u`` plus exactly the outside neighbours of the subtree
below ``u``.  The sequence is then built bottom-up; a finished subtree is
kept as one vertex per neighbourhood class on its outside neighbours, which
caps red degrees at ``3 * 2**(w - 1)`` for width ``w``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx
from networkx.algorithms.approximation import treewidth_min_degree, treewidth_min_fill_in

from .graphio import GraphFormatError, TreeDecomposition, validate_tree_decomposition
from .trigraph import ContractionSequence, InvariantError, SequenceBuilder, trace_key


def tw_bound(w: int) -> int:
    """Red-degree cap guaranteed for a clean decomposition of width ``w``."""
    return 3 * 2 ** (w - 1) if w >= 1 else 0


@dataclass
class CleanTreeDecomposition:
    parent: Dict[int, Optional[int]]
    fstar: Dict[int, FrozenSet[int]]
    children: Dict[int, List[int]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.children:
            self.children = {v: [] for v in self.parent}
            for v, p in self.parent.items():
                if p is not None:
                    self.children[p].append(v)

    @property
    def roots(self) -> List[int]:
        return sorted(v for v, p in self.parent.items() if p is None)

    @property
    def width(self) -> int:
        return max((len(s) for s in self.fstar.values()), default=0)

    def bag(self, v: int) -> FrozenSet[int]:
        return self.fstar[v] | {v}

    def depth(self) -> Dict[int, int]:
        out = {}
        for r in self.roots:
            out[r] = 0
            stack = [r]
            while stack:
                x = stack.pop()
                for c in self.children[x]:
                    out[c] = out[x] + 1
                    stack.append(c)
        return out

    def postorder(self) -> List[int]:
        """Children before parents; siblings by ascending subtree size, then id."""
        size = {}
        for v in reversed(self._preorder()):
            size[v] = 1 + sum(size[c] for c in self.children[v])
        self._size = size
        out = []
        for r in self.roots:
            stack = [(r, False)]
            while stack:
                x, done = stack.pop()
                if done:
                    out.append(x)
                    continue
                stack.append((x, True))
                kids = sorted(self.children[x], key=lambda c: (size[c], c))
                stack.extend((c, False) for c in reversed(kids))
        return out

    def ordered_children(self, v: int) -> List[int]:
        return sorted(self.children[v], key=lambda c: (self._size[c], c))

    def _preorder(self) -> List[int]:
        out = []
        stack = list(self.roots)
        while stack:
            x = stack.pop()
            out.append(x)
            stack.extend(self.children[x])
        return out

    def as_tree_decomposition(self) -> TreeDecomposition:
        return TreeDecomposition(
            {v: self.bag(v) for v in self.parent},
            [(v, p) for v, p in self.parent.items() if p is not None],
        )


def check_clean(G: nx.Graph, ctd: CleanTreeDecomposition) -> List[str]:
    """List every violated normality / cleanness condition."""
    problems = []
    if set(ctd.parent) != set(G.nodes):
        return ["tree nodes differ from the vertex set"]
    depth = ctd.depth()
    if len(depth) != len(ctd.parent):
        return ["parent map does not form a rooted forest"]
    anc = {}
    for v in ctd._preorder():
        p = ctd.parent[v]
        anc[v] = frozenset() if p is None else anc[p] | {p}
    for u, v in G.edges:
        if u not in anc[v] and v not in anc[u]:
            problems.append(f"edge {u}-{v} joins incomparable nodes")
    below: Dict[int, set] = {}
    for v in reversed(ctd._preorder()):
        s = {v}
        for c in ctd.children[v]:
            s |= below[c]
        below[v] = s
        nbh = set()
        for x in s:
            nbh.update(G[x])
        expected = frozenset(nbh & anc[v])
        if ctd.fstar[v] != expected:
            problems.append(f"node {v}: bag is not the outside neighbourhood of its subtree")
        if not ctd.fstar[v] <= anc[v]:
            problems.append(f"node {v}: bag leaves the ancestor chain")
        p = ctd.parent[v]
        if p is not None and p not in ctd.fstar[v]:
            problems.append(f"node {v}: parent {p} missing from its bag")
    return problems


def elimination_order(td: TreeDecomposition, vertices) -> List[int]:
    """Vertices in the order they are forgotten when peeling leaf bags."""
    vertices = set(vertices)
    T = td.tree()
    bags = {b: set(s) & vertices for b, s in td.bags.items()}
    where: Dict[int, int] = {}
    for b, s in bags.items():
        for v in s:
            where[v] = where.get(v, 0) + 1
    order = []
    leaves = sorted(b for b in T if T.degree(b) <= 1)
    alive = set(T.nodes)
    while alive:
        if not leaves:
            leaves = sorted(alive)
        b = leaves.pop(0)
        if b not in alive:
            continue
        alive.discard(b)
        nbrs = [x for x in T[b] if x in alive]
        keep = set()
        for x in nbrs:
            keep |= bags[x]
        for v in sorted(bags[b] - keep):
            if v in where:
                order.append(v)
                del where[v]
        for x in nbrs:
            T.remove_edge(b, x)
            if T.degree(x) <= 1 and x not in leaves:
                leaves.append(x)
        leaves.sort()
    order.extend(sorted(where))
    return order


def clean_decomposition(G: nx.Graph, td: TreeDecomposition) -> CleanTreeDecomposition:
    """Normalise a tree decomposition of a connected graph into a clean one."""
    if G.number_of_nodes() == 0:
        raise ValueError("empty graph")
    if not nx.is_connected(G):
        raise ValueError("graph is disconnected; split it into components first")
    report = validate_tree_decomposition(G, td)
    if not report.ok:
        raise GraphFormatError("invalid tree decomposition: " + "; ".join(report.violations))
    pos = {v: i for i, v in enumerate(elimination_order(td, G.nodes))}

    parent: Dict[int, Optional[int]] = {}
    stack: List[Tuple[frozenset, Optional[int]]] = [(frozenset(G.nodes), None)]
    while stack:
        comp, p = stack.pop()
        u = max(comp, key=pos.__getitem__)
        parent[u] = p
        rest = comp - {u}
        for part in nx.connected_components(G.subgraph(rest)):
            stack.append((frozenset(part), u))

    children: Dict[int, List[int]] = {v: [] for v in parent}
    for v, p in parent.items():
        if p is not None:
            children[p].append(v)
    depth = {}
    order = []
    roots = [v for v, p in parent.items() if p is None]
    walk = list(roots)
    for r in roots:
        depth[r] = 0
    while walk:
        x = walk.pop()
        order.append(x)
        for c in children[x]:
            depth[c] = depth[x] + 1
            walk.append(c)
    fstar: Dict[int, FrozenSet[int]] = {}
    for v in reversed(order):
        s = {x for x in G[v] if depth[x] < depth[v]}
        for c in children[v]:
            s |= fstar[c]
        s.discard(v)
        fstar[v] = frozenset(s)

    ctd = CleanTreeDecomposition(parent, fstar, children)
    problems = check_clean(G, ctd)
    if problems:
        raise InvariantError("clean decomposition check failed: " + "; ".join(problems[:5]))
    if ctd.width > max(report.width, 0):
        raise InvariantError(f"clean width {ctd.width} exceeds input width {report.width}")
    return ctd


def _red_inside(builder: SequenceBuilder, block, extra=()) -> bool:
    allowed = set(block) | set(extra)
    tg = builder.trigraph
    return all(tg.red(x) <= allowed for x in block)


def tw_contraction_sequence(
    G: nx.Graph,
    ctd: CleanTreeDecomposition,
    builder: Optional[SequenceBuilder] = None,
) -> ContractionSequence:
    """Contract a connected graph bottom-up along a clean decomposition."""
    b = builder if builder is not None else SequenceBuilder(G)
    w = ctd.width
    cap_full = 2 ** w
    cap_half = 2 ** max(w - 1, 0)
    blocks: Dict[int, List[int]] = {}
    for v in ctd.postorder():
        Y = ctd.fstar[v]
        B: List[int] = []
        for u in ctd.ordered_children(v):
            A = blocks.pop(u)
            if len(A) > cap_full:
                raise InvariantError(f"block of node {u} has {len(A)} > 2^{w} vertices")
            if not _red_inside(b, A):
                raise InvariantError(f"red edge leaves the block of node {u}")
            At = b.collapse_classes(A, Y)
            if len(At) > cap_half:
                raise InvariantError(f"refined block of node {u} has {len(At)} > 2^{w - 1} vertices")
            if not _red_inside(b, At, (v,)):
                raise InvariantError(f"refined block of node {u} has red edges outside itself and {v}")
            B = b.collapse_classes(B + At, Y)
            if len(B) > cap_full:
                raise InvariantError(f"running block at node {v} has {len(B)} > 2^{w} vertices")
        C = b.collapse_classes(B + [v], Y)
        tg = b.trigraph
        if len({trace_key(tg, x, Y) for x in C}) != len(C):
            raise InvariantError(f"node {v}: block vertices share a class")
        blocks[v] = C
    if builder is None:
        return b.sequence(tw_bound(w))
    return None


def heuristic_decomposition(G: nx.Graph, method: str = "min-degree") -> TreeDecomposition:
    fn = {"min-degree": treewidth_min_degree, "min-fill": treewidth_min_fill_in}[method]
    _, T = fn(G)
    return TreeDecomposition.from_networkx(T)


def treewidth_sequence(G: nx.Graph, td: Optional[TreeDecomposition] = None) -> Tuple[ContractionSequence, int]:
    """Full contraction sequence of ``G``; returns it with the decomposition width.

    Components are handled one at a time (each ends as one vertex) and the
    leftover single vertices are merged last.
    """
    if td is None:
        td = heuristic_decomposition(G) if G.number_of_edges() else TreeDecomposition(
            {i: frozenset([v]) for i, v in enumerate(sorted(G))},
            [(i, i + 1) for i in range(G.number_of_nodes() - 1)],
        )
    report = validate_tree_decomposition(G, td)
    if not report.ok:
        raise GraphFormatError("invalid tree decomposition: " + "; ".join(report.violations))
    b = SequenceBuilder(G)
    width = 0
    reps = []
    for comp in sorted(nx.connected_components(G), key=min):
        H = G.subgraph(comp)
        ctd = clean_decomposition(H, td.restrict(comp))
        width = max(width, ctd.width)
        tw_contraction_sequence(H, ctd, builder=b)
        reps.append(next(x for x in b.trigraph if b.trigraph.origin[x] <= comp))
    b.merge_all(reps) if reps else None
    return b.sequence(tw_bound(width)), width


def random_partial_ktree(n: int, k: int, seed: int = 0, keep: float = 0.75):
    """Random partial k-tree on ``n`` vertices with a width-``k`` decomposition.

    A k-tree is grown by attaching each new vertex to a random existing
    k-clique; each edge is then kept with probability ``keep``.
    """
    if n < k + 1:
        raise ValueError("need n >= k + 1")
    rng = random.Random(seed)
    G = nx.Graph()
    G.add_nodes_from(range(n))
    base = list(range(k + 1))
    G.add_edges_from((a, b) for i, a in enumerate(base) for b in base[i + 1:])
    bags = {0: frozenset(base)}
    tedges = []
    cliques: List[Tuple[Tuple[int, ...], int]] = []
    for drop in range(k + 1):
        cliques.append((tuple(x for x in base if x != drop), 0))
    for v in range(k + 1, n):
        clique, home = cliques[rng.randrange(len(cliques))]
        G.add_edges_from((v, x) for x in clique)
        bid = len(bags)
        bags[bid] = frozenset(clique) | {v}
        tedges.append((home, bid))
        for drop in clique:
            cliques.append((tuple(sorted(x for x in clique if x != drop)) + (v,), bid))
    H = nx.Graph()
    H.add_nodes_from(range(n))
    H.add_edges_from(e for e in G.edges if rng.random() < keep)
    return H, TreeDecomposition(bags, tedges)
