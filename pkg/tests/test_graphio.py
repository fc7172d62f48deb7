import json
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_middle_sets, random_graph
from twinwidth.graphio import (
    BranchDecomposition,
    GraphFormatError,
    TreeDecomposition,
    compute_middle_sets,
    parse_bd,
    parse_graph,
    parse_rotation,
    parse_td,
    serialize_bd,
    serialize_graph,
    serialize_rotation,
    serialize_td,
    sniff_format,
    validate_branch_decomposition,
    validate_tree_decomposition,
)
from twinwidth.planar import random_planar_triangulation
from twinwidth.spherecut import caterpillar, grid_instance


def same(G, H):
    return sorted(G.nodes) == sorted(H.nodes) and {frozenset(e) for e in G.edges} == {frozenset(e) for e in H.edges}


@pytest.mark.parametrize("fmt", ["edge-list", "graph6", "pace", "json"])
def test_petersen_round_trip(fmt):
    G = nx.petersen_graph()
    text = serialize_graph(G, fmt)
    assert sniff_format(text) == fmt
    assert same(parse_graph(text), G)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 30), st.floats(0, 1), st.integers(0, 10 ** 6), st.sampled_from(["edge-list", "graph6", "pace", "json"]))
def test_round_trip_random(n, p, seed, fmt):
    G = random_graph(n, p, random.Random(seed))
    assert same(parse_graph(serialize_graph(G, fmt), fmt), G)


def test_graph6_known_string():
    # "B" is n=3, "w" = 56 = 0b111000: all three upper-triangle bits set
    G = parse_graph("Bw")
    assert G.number_of_nodes() == 3
    assert G.number_of_edges() == 3


def test_graph6_header_is_accepted():
    assert parse_graph(">>graph6<<Bw").number_of_edges() == 3


def test_duplicate_edges_are_dropped():
    G = parse_graph("3 3\n0 1\n1 0\n1 2\n")
    assert G.number_of_edges() == 2


@pytest.mark.parametrize("text", [
    "",
    "3 1\n0 0\n",
    "3 1\n0 5\n",
    "3 2\n0 1\n",
    "3\n0 1\n",
    "3 1\n0 x\n",
    "p tw 3 1\n",
    "c only comment\n1 2\n",
    '{"n": 3}',
])
def test_malformed_graphs_raise(text):
    with pytest.raises(GraphFormatError):
        parse_graph(text)


def test_pace_is_one_based():
    G = parse_graph("p tw 3 2\n1 2\n2 3\n")
    assert {frozenset(e) for e in G.edges} == {frozenset((0, 1)), frozenset((1, 2))}


def test_tree_decomposition_round_trip_and_validation():
    G = nx.cycle_graph(5)
    td = TreeDecomposition({1: frozenset({0, 1, 2}), 2: frozenset({0, 2, 3}), 3: frozenset({0, 3, 4})}, [(1, 2), (2, 3)])
    back = parse_td(serialize_td(td, 5))
    assert sorted(map(sorted, back.bags.values())) == sorted(map(sorted, td.bags.values()))
    rep = validate_tree_decomposition(G, back)
    assert rep.ok and rep.width == 2


def test_tree_decomposition_violations_are_reported():
    G = nx.cycle_graph(4)
    bad_edge = TreeDecomposition({0: frozenset({0, 1, 2}), 1: frozenset({2, 3})}, [(0, 1)])
    assert not validate_tree_decomposition(G, bad_edge).ok
    disconnected = TreeDecomposition({0: frozenset({0, 1, 3}), 1: frozenset({1, 2}), 2: frozenset({2, 3, 1})}, [(0, 1), (1, 2)])
    rep = validate_tree_decomposition(G, disconnected)
    assert not rep.ok


def test_parse_td_errors():
    with pytest.raises(GraphFormatError):
        parse_td("b 1 1 2\n")
    with pytest.raises(GraphFormatError):
        parse_td("s td 2 2 3\nb 1 1 2\n")


def test_branch_decomposition_middle_sets_match_brute_force():
    G, bd = grid_instance(3, 4)
    fast = compute_middle_sets(G, bd)
    assert fast == brute_force_middle_sets(G, bd.tree, bd.leaf_map)


@settings(max_examples=40, deadline=None)
@given(st.integers(4, 30), st.integers(0, 10 ** 6))
def test_caterpillar_middle_sets_random(n, seed):
    G, _ = random_planar_triangulation(n, seed)
    order = list(G.edges)
    random.Random(seed).shuffle(order)
    bd = caterpillar(order)
    assert validate_branch_decomposition(G, bd).ok
    assert compute_middle_sets(G, bd) == brute_force_middle_sets(G, bd.tree, bd.leaf_map)


def test_branch_decomposition_json_round_trip():
    G, bd = grid_instance(2, 3)
    rep = validate_branch_decomposition(G, bd)
    bd.declared = rep.middle_sets
    back = parse_bd(serialize_bd(bd))
    assert validate_branch_decomposition(G, back).ok
    assert back.leaf_map == bd.leaf_map


def test_branch_decomposition_rejects_stale_middle_set():
    G, bd = grid_instance(2, 3)
    e = next(iter(bd.tree.edges))
    bd.declared = {frozenset(e): frozenset({99})}
    assert not validate_branch_decomposition(G, bd).ok


def test_branch_decomposition_structure_errors():
    G = nx.path_graph(4)
    T = nx.star_graph(4)  # centre of degree 4
    bd = BranchDecomposition(T, {1: (0, 1), 2: (1, 2), 3: (2, 3), 4: (1, 2)})
    rep = validate_branch_decomposition(G, bd)
    assert not rep.ok
    assert any("degree 4" in v for v in rep.violations)
    assert any("mapped from 2" in v for v in rep.violations)


def test_parse_bd_errors():
    with pytest.raises(GraphFormatError):
        parse_bd('{"nodes": [0]}')


def test_rotation_round_trip():
    G, R = random_planar_triangulation(12, 4)
    back = parse_rotation(serialize_rotation(R))
    assert back.rotation == R.rotation
    assert back.outer == R.outer
    back.validate()


def test_rotation_parse_error():
    with pytest.raises(GraphFormatError):
        parse_rotation(json.dumps({"outer": [0, 1]}))
