"""Graph, decomposition and rotation-system file formats.

Supported graph formats: ``edge-list`` (``n m`` header then one edge per
line, 0-based), ``graph6``, ``pace`` (PACE 2017 ``.gr``, 1-based) and
``json`` (``{"n": .., "edges": [[u, v], ..]}``).  Parsed graphs are simple
networkx graphs on vertices ``0..n-1``.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

import networkx as nx

log = logging.getLogger(__name__)

FORMATS = ("edge-list", "graph6", "pace", "json")


class GraphFormatError(ValueError):
    pass


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


def _as_text(data) -> str:
    if isinstance(data, (bytes, bytearray)):
        return data.decode("ascii")
    return data


def sniff_format(text: str) -> str:
    body = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not body:
        raise GraphFormatError("empty input")
    first = body[0]
    if first.startswith("{"):
        return "json"
    if first.startswith(">>graph6<<"):
        return "graph6"
    if first.startswith(("p ", "c ")) or first == "c":
        return "pace"
    if len(first.split()) == 1 and all(63 <= ord(ch) <= 126 for ch in first):
        return "graph6"
    return "edge-list"


def _build(n: int, edges) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(n))
    seen = set()
    for u, v in edges:
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge {u}-{v} out of range for n={n}")
        if u == v:
            raise GraphFormatError(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            log.warning("duplicate edge %d-%d dropped", *key)
            continue
        seen.add(key)
        G.add_edge(u, v)
    return G


def _ints(line: str, lineno: int) -> List[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise GraphFormatError(f"line {lineno}: expected integers, got {line!r}") from None


def parse_graph(data, fmt: Optional[str] = None) -> nx.Graph:
    text = _as_text(data)
    fmt = fmt or sniff_format(text)
    if fmt == "graph6":
        line = text.strip()
        if line.startswith(">>graph6<<"):
            line = line[len(">>graph6<<"):]
        try:
            G = nx.from_graph6_bytes(line.strip().encode("ascii"))
        except (nx.NetworkXError, ValueError) as exc:
            raise GraphFormatError(f"bad graph6: {exc}") from exc
        return nx.convert_node_labels_to_integers(G)
    if fmt == "json":
        try:
            obj = json.loads(text)
            return _build(int(obj["n"]), [tuple(e) for e in obj["edges"]])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"bad graph json: {exc}") from exc
    if fmt == "pace":
        n = m = None
        edges = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("c"):
                continue
            if line.startswith("p"):
                parts = line.split()
                if len(parts) != 4 or parts[1] != "tw":
                    raise GraphFormatError(f"line {lineno}: malformed header {line!r}")
                n, m = int(parts[2]), int(parts[3])
                continue
            if n is None:
                raise GraphFormatError(f"line {lineno}: edge before 'p tw' header")
            nums = _ints(line, lineno)
            if len(nums) != 2:
                raise GraphFormatError(f"line {lineno}: expected an edge, got {line!r}")
            edges.append((nums[0] - 1, nums[1] - 1))
        if n is None:
            raise GraphFormatError("missing 'p tw' header")
        if len(edges) != m:
            raise GraphFormatError(f"header announces {m} edges, found {len(edges)}")
        return _build(n, edges)
    if fmt == "edge-list":
        lines = [(i, ln.strip()) for i, ln in enumerate(text.splitlines(), 1)]
        lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
        if not lines:
            raise GraphFormatError("empty input")
        header = _ints(lines[0][1], lines[0][0])
        if len(header) != 2:
            raise GraphFormatError(f"malformed header {lines[0][1]!r}, expected 'n m'")
        n, m = header
        edges = []
        for lineno, line in lines[1:]:
            nums = _ints(line, lineno)
            if len(nums) != 2:
                raise GraphFormatError(f"line {lineno}: expected an edge, got {line!r}")
            edges.append(tuple(nums))
        if len(edges) != m:
            raise GraphFormatError(f"header announces {m} edges, found {len(edges)}")
        return _build(n, edges)
    raise GraphFormatError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


def _sorted_edges(G: nx.Graph) -> List[Tuple[int, int]]:
    return sorted((min(u, v), max(u, v)) for u, v in G.edges)


def serialize_graph(G: nx.Graph, fmt: str = "edge-list") -> str:
    n = G.number_of_nodes()
    if sorted(G.nodes) != list(range(n)):
        raise GraphFormatError("serialisation needs vertices 0..n-1")
    edges = _sorted_edges(G)
    if fmt == "graph6":
        return nx.to_graph6_bytes(G, nodes=range(n), header=False).decode("ascii")
    if fmt == "json":
        return json.dumps({"n": n, "edges": [list(e) for e in edges]})
    if fmt == "pace":
        lines = [f"p tw {n} {len(edges)}"] + [f"{u + 1} {v + 1}" for u, v in edges]
        return "\n".join(lines) + "\n"
    if fmt == "edge-list":
        lines = [f"{n} {len(edges)}"] + [f"{u} {v}" for u, v in edges]
        return "\n".join(lines) + "\n"
    raise GraphFormatError(f"unknown format {fmt!r}")


# ---------------------------------------------------------------------------
# tree decompositions
# ---------------------------------------------------------------------------


@dataclass
class TreeDecomposition:
    bags: Dict[int, FrozenSet[int]]
    edges: List[Tuple[int, int]] = field(default_factory=list)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def tree(self) -> nx.Graph:
        T = nx.Graph()
        T.add_nodes_from(self.bags)
        T.add_edges_from(self.edges)
        return T

    def restrict(self, vertices) -> "TreeDecomposition":
        keep = set(vertices)
        return TreeDecomposition({b: frozenset(s & keep) for b, s in self.bags.items()}, list(self.edges))

    @classmethod
    def from_networkx(cls, T: nx.Graph) -> "TreeDecomposition":
        """Wrap a networkx decomposition whose nodes are the bags themselves."""
        index = {bag: i for i, bag in enumerate(T.nodes)}
        return cls({i: frozenset(bag) for bag, i in index.items()},
                   [(index[a], index[b]) for a, b in T.edges])


def parse_td(data) -> TreeDecomposition:
    """Parse a PACE 2017 ``.td`` file (1-based vertices)."""
    text = _as_text(data)
    header = None
    bags: Dict[int, FrozenSet[int]] = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if len(parts) != 5 or parts[1] != "td":
                raise GraphFormatError(f"line {lineno}: malformed solution line {line!r}")
            header = [int(p) for p in parts[2:]]
        elif parts[0] == "b":
            if header is None:
                raise GraphFormatError(f"line {lineno}: bag before 's td' line")
            nums = _ints(" ".join(parts[1:]), lineno)
            if not nums:
                raise GraphFormatError(f"line {lineno}: bag without id")
            bags[nums[0]] = frozenset(v - 1 for v in nums[1:])
        else:
            if header is None:
                raise GraphFormatError(f"line {lineno}: tree edge before 's td' line")
            nums = _ints(line, lineno)
            if len(nums) != 2:
                raise GraphFormatError(f"line {lineno}: expected a tree edge, got {line!r}")
            edges.append((nums[0], nums[1]))
    if header is None:
        raise GraphFormatError("missing 's td' line")
    if header[0] != len(bags):
        raise GraphFormatError(f"header announces {header[0]} bags, found {len(bags)}")
    return TreeDecomposition(bags, edges)


def serialize_td(td: TreeDecomposition, n: int) -> str:
    # PACE wants bag ids 1..N
    ids = {b: i for i, b in enumerate(sorted(td.bags), 1)}
    lines = [f"s td {len(td.bags)} {td.width + 1} {n}"]
    for b in sorted(td.bags):
        lines.append(" ".join(["b", str(ids[b]), *(str(v + 1) for v in sorted(td.bags[b]))]))
    lines += [f"{ids[a]} {ids[b]}" for a, b in td.edges]
    return "\n".join(lines) + "\n"


@dataclass
class DecompositionReport:
    ok: bool
    width: int
    violations: List[str] = field(default_factory=list)
    middle_sets: Dict[FrozenSet[int], FrozenSet[int]] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok


def validate_tree_decomposition(G: nx.Graph, td: TreeDecomposition) -> DecompositionReport:
    problems = []
    T = td.tree()
    if T.number_of_nodes() == 0:
        problems.append("decomposition has no bags")
    elif not nx.is_tree(T):
        problems.append("bags are not connected by a tree")
    for b, bag in td.bags.items():
        stray = [v for v in bag if v not in G]
        if stray:
            problems.append(f"bag {b} contains unknown vertex {stray[0]}")
    where: Dict[int, List[int]] = {v: [] for v in G}
    for b, bag in td.bags.items():
        for v in bag:
            if v in where:
                where[v].append(b)
    for v in sorted(G):
        if not where[v]:
            problems.append(f"vertex {v} is in no bag")
    for u, v in _sorted_edges(G):
        if not any(u in td.bags[b] for b in where[v]):
            problems.append(f"edge {u}-{v} is in no bag")
    if not problems or nx.is_tree(T):
        for v in sorted(G):
            if len(where[v]) > 1 and not nx.is_connected(T.subgraph(where[v])):
                problems.append(f"bags containing vertex {v} are not connected")
    return DecompositionReport(not problems, td.width, problems)


# ---------------------------------------------------------------------------
# branch decompositions
# ---------------------------------------------------------------------------


@dataclass
class BranchDecomposition:
    """Ternary tree whose leaves are in bijection with the edges of a graph.

    ``leaf_map`` maps a leaf node to its graph edge ``(u, v)`` with ``u < v``.
    Middle sets are keyed by ``frozenset({a, b})`` of tree nodes.
    """

    tree: nx.Graph
    leaf_map: Dict[int, Tuple[int, int]]
    declared: Dict[FrozenSet[int], FrozenSet[int]] = field(default_factory=dict)

    def middle_sets(self, G: nx.Graph) -> Dict[FrozenSet[int], FrozenSet[int]]:
        return compute_middle_sets(G, self)

    def width(self, G: nx.Graph) -> int:
        return max(map(len, self.middle_sets(G).values()), default=0)

    def to_dict(self) -> dict:
        out = {
            "nodes": sorted(self.tree.nodes),
            "edges": sorted([min(a, b), max(a, b)] for a, b in self.tree.edges),
            "leaf_map": {str(k): list(v) for k, v in sorted(self.leaf_map.items())},
        }
        if self.declared:
            out["middle_sets"] = [
                {"edge": sorted(e), "set": sorted(s)}
                for e, s in sorted(self.declared.items(), key=lambda kv: sorted(kv[0]))
            ]
        return out


def _edge_key(u, v) -> Tuple[int, int]:
    return (u, v) if u < v else (v, u)


def parse_bd(data) -> BranchDecomposition:
    try:
        obj = json.loads(_as_text(data)) if not isinstance(data, dict) else data
        T = nx.Graph()
        T.add_nodes_from(int(x) for x in obj["nodes"])
        T.add_edges_from((int(a), int(b)) for a, b in obj["edges"])
        leaf_map = {int(k): _edge_key(int(v[0]), int(v[1])) for k, v in obj["leaf_map"].items()}
        declared = {
            frozenset(int(x) for x in item["edge"]): frozenset(int(x) for x in item["set"])
            for item in obj.get("middle_sets", [])
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad branch decomposition json: {exc}") from exc
    return BranchDecomposition(T, leaf_map, declared)


def serialize_bd(bd: BranchDecomposition) -> str:
    return json.dumps(bd.to_dict())


def compute_middle_sets(G: nx.Graph, bd: BranchDecomposition) -> Dict[FrozenSet[int], FrozenSet[int]]:
    """Middle set of every tree edge, recomputed from the leaf bijection."""
    T = bd.tree
    if T.number_of_nodes() == 0:
        return {}
    deg = dict(G.degree)
    root = next(iter(T.nodes))
    order = list(nx.dfs_preorder_nodes(T, root))
    parent = {root: None}
    for a, b in nx.dfs_edges(T, root):
        parent[b] = a
    below: Dict[int, Counter] = {}
    out = {}
    for x in reversed(order):
        cnt = Counter()
        if x in bd.leaf_map:
            cnt.update(bd.leaf_map[x])
        for y in T.neighbors(x):
            if parent.get(y) == x:
                child = below.pop(y)
                if len(child) > len(cnt):
                    cnt, child = child, cnt
                cnt.update(child)
        below[x] = cnt
        if parent[x] is not None:
            out[frozenset((x, parent[x]))] = frozenset(v for v, c in cnt.items() if c < deg[v])
    return out


def validate_branch_decomposition(G: nx.Graph, bd: BranchDecomposition) -> DecompositionReport:
    problems = []
    T = bd.tree
    m = G.number_of_edges()
    if T.number_of_nodes() == 0:
        if m:
            problems.append("empty tree for a graph with edges")
        return DecompositionReport(not problems, 0, problems)
    if not nx.is_tree(T):
        problems.append("decomposition graph is not a tree")
        return DecompositionReport(False, 0, problems)
    leaves = {x for x in T if T.degree(x) <= 1}
    for x in sorted(T):
        if x not in leaves and T.degree(x) != 3:
            problems.append(f"internal node {x} has degree {T.degree(x)}, expected 3")
    if set(bd.leaf_map) != leaves:
        extra = sorted(set(bd.leaf_map) ^ leaves)
        problems.append(f"leaf map does not match the leaves of the tree (node {extra[0]})")
    mapped = Counter(bd.leaf_map.values())
    for e, c in sorted(mapped.items()):
        if c > 1:
            problems.append(f"edge {e[0]}-{e[1]} is mapped from {c} leaves")
        if not G.has_edge(*e):
            problems.append(f"leaf maps to non-edge {e[0]}-{e[1]}")
    for u, v in _sorted_edges(G):
        if (u, v) not in mapped:
            problems.append(f"edge {u}-{v} is not covered by any leaf")
    if problems:
        return DecompositionReport(False, 0, problems)
    mids = compute_middle_sets(G, bd)
    for e, s in bd.declared.items():
        if e not in mids:
            problems.append(f"declared middle set for non-edge {sorted(e)} of the tree")
        elif mids[e] != s:
            problems.append(f"declared middle set of tree edge {sorted(e)} is wrong")
    width = max(map(len, mids.values()), default=0)
    return DecompositionReport(not problems, width, problems, mids)


# ---------------------------------------------------------------------------
# rotation systems
# ---------------------------------------------------------------------------


def parse_rotation(data):
    """``{"rotation": {"v": [cyclic neighbours]}, "outer": [u, v]}``."""
    from .planar import RotationSystem

    try:
        obj = json.loads(_as_text(data)) if not isinstance(data, dict) else data
        rotation = {int(k): [int(x) for x in v] for k, v in obj["rotation"].items()}
        outer = obj.get("outer")
        outer = None if outer is None else (int(outer[0]), int(outer[1]))
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"bad rotation system json: {exc}") from exc
    return RotationSystem(rotation, outer)


def serialize_rotation(R) -> str:
    return json.dumps(R.to_dict())
