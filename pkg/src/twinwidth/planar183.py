"""Bounded-width contraction sequences for planar graphs.

The graph is triangulated and a BFS tree is grown from a vertex of the
outer face.  Regions are bounded by cycles made of a few vertical paths of
that tree.  Each region is split at a three-coloured face (colours come
from where the tree path of a vertex first meets the boundary) along the
tree paths leaving that face.  Once the subregions are done, their layer
blocks are refined against the region boundary and merged layer by layer.

Contractions act on the input graph; the triangulation only supplies the
geometry.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from .planar import BfsLayering, EmbeddingError, RotationSystem, bfs_layering, triangulate
from .spherecut import h
from .trigraph import ContractionSequence, InvariantError, SequenceBuilder

log = logging.getLogger(__name__)

PLANAR_BOUND = 183


@dataclass
class Region:
    paths: List[List[int]]
    interior: Set[int]
    faces: Optional[Set[int]] = None
    depth: int = 0
    parent: Optional[int] = None
    children: List[int] = field(default_factory=list)
    sperner: Optional[Tuple[int, int, int]] = None
    q_paths: List[List[int]] = field(default_factory=list)
    layer_blocks: Dict[int, List[int]] = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.paths)

    @property
    def boundary(self) -> List[int]:
        return [v for p in self.paths for v in p]


@dataclass
class SpernerColouring:
    colour: Dict[int, int]
    groups: List[List[int]]


@dataclass
class RegionDecomposition:
    face: Tuple[int, int, int]
    q_paths: List[List[int]]
    subregions: List[Region]


@dataclass
class PlanarRun:
    sequence: ContractionSequence
    regions: List[Region]
    stats: dict

    def trace(self) -> dict:
        out = []
        for i, reg in enumerate(self.regions):
            out.append({
                "id": i,
                "parent": reg.parent,
                "depth": reg.depth,
                "k": reg.k,
                "path_lengths": [len(p) for p in reg.paths],
                "interior": len(reg.interior),
                "sperner_face": list(reg.sperner) if reg.sperner else None,
                "q_lengths": [len(q) for q in reg.q_paths],
                "block_sizes": {str(j): len(b) for j, b in sorted(reg.layer_blocks.items())},
            })
        return {"stats": self.stats, "regions": out}


# ---------------------------------------------------------------------------
# boundaries and colours
# ---------------------------------------------------------------------------


def vertical_split(cycle: Sequence[int], layering: BfsLayering) -> List[List[int]]:
    """Cut a cycle into the fewest contiguous vertical paths, in cycle order."""
    L = len(cycle)
    parent = layering.parent

    def step(a, b):
        if parent.get(a) == b:
            return "up"
        if parent.get(b) == a:
            return "down"
        return None

    kinds = [step(cycle[i], cycle[(i + 1) % L]) for i in range(L)]
    cuts = [i for i, t in enumerate(kinds) if t is None]
    if not cuts:
        raise EmbeddingError("boundary cycle uses only tree edges")  # pragma: no cover
    s = cuts[0]
    order = [cycle[(s + 1 + i) % L] for i in range(L)]
    paths = [[order[0]]]
    way = None
    for i in range(1, L):
        t = kinds[(s + i) % L]
        if t is not None and (way is None or way == t):
            paths[-1].append(order[i])
            way = t
        else:
            paths.append([order[i]])
            way = None
    return paths


def _groups(paths: List[List[int]]) -> List[List[int]]:
    k = len(paths)
    if k == 1:
        P = paths[0]
        if len(P) < 3:
            raise EmbeddingError("a one-path boundary needs at least 3 vertices")
        return [[P[0]], P[1:-1], [P[-1]]]
    if k == 2:
        a = 0 if len(paths[0]) >= len(paths[1]) else 1
        P, other = paths[a], paths[1 - a]
        if len(P) < 2:
            raise EmbeddingError("a two-path boundary needs a path with 2 vertices")
        return [[P[0]], P[1:], list(other)]
    base, extra = divmod(k, 3)
    sizes = [base + (1 if i >= 3 - extra else 0) for i in range(3)]
    out, at = [], 0
    for s in sizes:
        out.append([v for p in paths[at:at + s] for v in p])
        at += s
    return out


def sperner_colouring(region: Region, layering: BfsLayering) -> SpernerColouring:
    """Colour boundary and interior by the group where the tree path first meets the boundary."""
    groups = _groups(region.paths)
    colour: Dict[int, int] = {}
    for i, g in enumerate(groups, start=1):
        for v in g:
            colour[v] = i
    parent = layering.parent
    for v in region.interior:
        walk = []
        x = v
        while x not in colour:
            walk.append(x)
            x = parent[x]
            if x is None:
                raise EmbeddingError(f"tree path from {v} reaches the root without meeting the boundary")
        c = colour[x]
        for y in walk:
            colour[y] = c
    return SpernerColouring(colour, groups)


def sperner_face(faces: Iterable[Sequence[int]], colour: Dict[int, int]) -> Tuple[int, int, int]:
    """First face carrying all three colours, ordered as (colour 1, colour 2, colour 3)."""
    for tri in faces:
        cs = {colour.get(v) for v in tri}
        if cs == {1, 2, 3}:
            by = {colour[v]: v for v in tri}
            return by[1], by[2], by[3]
    raise EmbeddingError("no three-coloured face; the colouring violates the boundary conditions")


# ---------------------------------------------------------------------------
# splitting a region
# ---------------------------------------------------------------------------


class _Geometry:
    def __init__(self, R: RotationSystem, layering: BfsLayering):
        self.walks, self.where = R.dart_faces()
        self.layering = layering

    def boundary_cycle(self, faces: Set[int]) -> List[int]:
        where = self.where
        out: Dict[int, int] = {}
        for f in faces:
            w = self.walks[f]
            for i, a in enumerate(w):
                b = w[(i + 1) % len(w)]
                if where[(b, a)] not in faces:
                    if a in out:
                        raise EmbeddingError(f"region boundary touches itself at {a}")
                    out[a] = b
        start = min(out)
        cycle = [start]
        x = out[start]
        while x != start:
            cycle.append(x)
            x = out[x]
        if len(cycle) != len(out):
            raise EmbeddingError("region boundary is not a single cycle")
        return cycle


def decompose_region(region: Region, geo: _Geometry) -> RegionDecomposition:
    """Split a region at its three-coloured face along the tree paths leaving it."""
    layering = geo.layering
    col = sperner_colouring(region, layering)
    walks, where = geo.walks, geo.where
    face_id = None
    tri = None
    for f in sorted(region.faces):
        cs = {col.colour.get(v) for v in walks[f]}
        if cs == {1, 2, 3}:
            face_id = f
            tri = sperner_face([walks[f]], col.colour)
            break
    if face_id is None:
        raise EmbeddingError("no three-coloured face inside the region")

    X = region.interior
    walls = set()
    cyc = region.boundary
    for i in range(len(cyc)):
        walls.add(frozenset((cyc[i], cyc[(i + 1) % len(cyc)])))
    for i in range(3):
        walls.add(frozenset((tri[i], tri[(i + 1) % 3])))
    q_paths = []
    for v in tri:
        q = []
        x = v
        while x in X:
            q.append(x)
            x = layering.parent[x]
        for a, b in zip(q, q[1:] + [x]):
            walls.add(frozenset((a, b)))
        q_paths.append(q)
    on_q = {v for q in q_paths for v in q}

    pool = set(region.faces)
    pool.discard(face_id)
    comps = []
    while pool:
        seed = min(pool)
        pool.discard(seed)
        comp = {seed}
        stack = [seed]
        while stack:
            f = stack.pop()
            w = walks[f]
            for i, a in enumerate(w):
                b = w[(i + 1) % len(w)]
                if frozenset((a, b)) in walls:
                    continue
                g = where[(b, a)]
                if g in pool:
                    pool.discard(g)
                    comp.add(g)
                    stack.append(g)
        comps.append(comp)

    subregions = []
    covered: Set[int] = set()
    for comp in comps:
        cycle = geo.boundary_cycle(comp)
        rim = set(cycle)
        inner = set()
        for f in comp:
            inner.update(v for v in walks[f] if v not in rim)
        if not inner:
            continue
        if not inner <= X or inner & on_q:
            raise InvariantError("subregion interior leaks outside the region")
        covered |= inner
        subregions.append(Region(vertical_split(cycle, layering), inner, comp, region.depth + 1))
    if covered != X - on_q:
        raise InvariantError("subregion interiors do not partition the region interior")
    return RegionDecomposition(tri, q_paths, subregions)


def build_regions(G_plus: nx.Graph, R_plus: RotationSystem, layering: BfsLayering) -> List[Region]:
    """All regions of the recursion, in preorder; index 0 is the outer region."""
    geo = _Geometry(R_plus, layering)
    outer = geo.where[R_plus.outer]
    tri = geo.walks[outer]
    if len(tri) != 3:
        raise EmbeddingError("outer face is not a triangle")
    faces = set(range(len(geo.walks))) - {outer}
    # face walks run the opposite way to the walk of the outer face, so flip it
    root = Region(vertical_split(tri[::-1], layering), set(G_plus.nodes) - set(tri), faces, 0)
    regions = [root]
    stack = [0]
    while stack:
        i = stack.pop()
        reg = regions[i]
        if reg.interior:
            dec = decompose_region(reg, geo)
            reg.sperner = dec.face
            reg.q_paths = dec.q_paths
            for sub in dec.subregions:
                sub.parent = i
                reg.children.append(len(regions))
                regions.append(sub)
            stack.extend(reversed(reg.children))
        reg.faces = None
    return regions


# ---------------------------------------------------------------------------
# contraction
# ---------------------------------------------------------------------------


def _check_band(b: SequenceBuilder, blocks: Dict[int, List[int]], rid: int) -> None:
    where = {x: j for j, blk in blocks.items() for x in blk}
    for j, blk in blocks.items():
        for x in blk:
            for y in b.trigraph.red(x):
                if y not in where or abs(where[y] - j) > 1:
                    raise InvariantError(f"region {rid}: red edge from layer {j} leaves the three-layer band")


def _process(b: SequenceBuilder, regions: List[Region], layering: BfsLayering, stats: Counter,
             check: bool) -> None:
    layer = layering.layer
    for rid in range(len(regions) - 1, -1, -1):
        reg = regions[rid]
        if not reg.interior:
            continue
        Y = set(reg.boundary)
        kids = [regions[c] for c in reg.children]
        refined: List[Dict[int, List[int]]] = []
        for sub in kids:
            touching = sum(1 for p in sub.paths if Y.intersection(p))
            cap = h(max(9, 3 * touching))
            out = {}
            for j in sorted(sub.layer_blocks):
                At = b.collapse_classes(sub.layer_blocks[j], Y)
                stats["max_refined"] = max(stats["max_refined"], len(At))
                if len(At) > h(9):
                    stats["refined_above_h9"] += 1
                if check and len(At) > cap:
                    raise InvariantError(f"region {rid}: refined block of {len(At)} vertices at layer {j}")
                out[j] = At
            sub.layer_blocks = {}
            refined.append(out)
        by_layer: Dict[int, List[int]] = {}
        for q in reg.q_paths:
            for v in q:
                by_layer.setdefault(layer[v], []).append(v)
        js = set(by_layer)
        for r in refined:
            js.update(r)
        cap = h(3 * reg.k)
        blocks = {}
        for j in sorted(js):
            parts = [r.get(j, []) for r in refined]
            total = sum(map(len, parts))
            stats["max_refined_sum"] = max(stats["max_refined_sum"], total)
            if check and total > cap + 5:
                raise InvariantError(f"region {rid}: {total} refined vertices at layer {j}, above h(3k)+5")
            A = b.collapse_classes([x for p in parts for x in p] + by_layer.get(j, []), Y)
            stats["max_block"] = max(stats["max_block"], len(A))
            if check and len(A) > cap:
                raise InvariantError(f"region {rid}: block of {len(A)} vertices at layer {j}, above h(3k)")
            blocks[j] = A
        if check:
            _check_band(b, blocks, rid)
        reg.layer_blocks = blocks


def _component_run(b: SequenceBuilder, G: nx.Graph, R: RotationSystem, stats: Counter, check: bool):
    if G.number_of_nodes() < 3:
        verts = sorted(G.nodes)
        return b.merge_all(verts), []
    G_plus, R_plus = triangulate(G, R)
    walks, where = R_plus.dart_faces()
    outer = walks[where[R_plus.outer]]
    layering = bfs_layering(G_plus, R_plus, R_plus.outer[0])
    regions = build_regions(G_plus, R_plus, layering)
    stats["regions"] += len(regions)
    stats["max_depth"] = max([stats["max_depth"]] + [r.depth for r in regions])
    for r in regions:
        stats[f"k={r.k}"] += 1
    stats["max_k"] = max([stats["max_k"]] + [r.k for r in regions])
    _process(b, regions, layering, stats, check)
    root = regions[0]
    tops = []
    for j in sorted(root.layer_blocks):
        tops.append(b.merge_all(root.layer_blocks[j]))
    root.layer_blocks = {}
    cur = None
    for t in reversed(tops):
        cur = t if cur is None else b.merge(t, cur)
    r = R_plus.outer[0]
    rest = [v for v in outer if v != r]
    for v in rest + [r]:
        cur = v if cur is None else b.merge(cur, v)
    return cur, regions


def planar_contraction_run(G: nx.Graph, R: RotationSystem, check: bool = True) -> PlanarRun:
    """Contraction sequence for a planar graph with its rotation system, plus diagnostics."""
    R.validate()
    b = SequenceBuilder(G)
    stats: Counter = Counter()
    regions: List[Region] = []
    reps = []
    for comp in sorted(nx.connected_components(G), key=min):
        H = G.subgraph(comp).copy()
        rot = {v: list(R.rotation.get(v, [])) for v in comp}
        outer = R.outer if R.outer is not None and R.outer[0] in comp else None
        Rc = RotationSystem(rot, outer)
        rep, regs = _component_run(b, H, Rc, stats, check)
        regions.extend(regs)
        reps.append(rep)
    if reps:
        b.merge_all(reps)
    stats["width"] = b.width
    summary = {k: v for k, v in sorted(stats.items())}
    log.info("planar run: %s", summary)
    return PlanarRun(b.sequence(PLANAR_BOUND), regions, summary)


def planar_contraction_sequence(G: nx.Graph, R: RotationSystem) -> ContractionSequence:
    return planar_contraction_run(G, R).sequence


def planar_graph_sequence(G: nx.Graph) -> ContractionSequence:
    """Embed with networkx first, then build the sequence."""
    from .planar import rotation_from_networkx

    ok, emb = nx.check_planarity(G)
    if not ok:
        raise EmbeddingError("graph is not planar")
    return planar_contraction_sequence(G, rotation_from_networkx(emb))


def write_trace(run: PlanarRun, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(run.trace(), fh, indent=1)
