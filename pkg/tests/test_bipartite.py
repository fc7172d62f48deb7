import math
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import naive_replay
from twinwidth.bipartite import (
    audit_bipartite,
    build,
    default_k,
    lower_bound,
    replay_bipartite,
    ub_formula,
    ub_schedule,
    ub_sequence,
)
from twinwidth.exact import exact_twinwidth
from twinwidth.trigraph import ContractionSequence, ReplayError, Trigraph, replay


def test_build_small():
    assert sorted(build(1).edges) == [(0, 2)]
    B2 = build(2)
    assert B2.number_of_nodes() == 6
    assert sorted(B2.edges) == [(0, 3), (0, 5), (1, 4), (1, 5)]
    B3 = build(3)
    assert (B3.number_of_nodes(), B3.number_of_edges()) == (11, 12)


@pytest.mark.parametrize("n", [4, 7, 10])
def test_build_degrees(n):
    B = build(n)
    assert all(B.degree(x) == 2 ** (n - 1) for x in range(n))
    assert nx.is_bipartite(B)
    assert B.degree(n) == 0


def test_build_range():
    with pytest.raises(ValueError):
        build(0)
    with pytest.raises(ValueError):
        build(21)


@pytest.mark.parametrize("n,k,cap", [(4, 1, 3), (8, 2, 6), (2, 1, 2)])
def test_upper_bound_examples(n, k, cap):
    seq = ub_sequence(n, k)
    assert ub_formula(n, k) == cap
    width, alive = naive_replay(build(n), seq.steps)
    assert alive == 1 and width <= cap


def test_b2_exact_value():
    assert exact_twinwidth(build(2)).width == 1
    assert lower_bound(2) == 0


def _independent_lower_bound(n):
    # largest d = n - k + 1 whose inequality is strict
    vals = [n - k + 1 for k in range(1, n + 1) if 2 ** (n - 1) - n * 2 ** (n - k) - 1 > n - k]
    return max(vals, default=0)


@pytest.mark.parametrize("n,value", [(1, 0), (2, 0), (16, 11)])
def test_lower_bound_values(n, value):
    assert lower_bound(n) == value == _independent_lower_bound(n)


def test_lower_bound_monotone():
    vals = [lower_bound(n) for n in range(1, 40)]
    assert vals == sorted(vals)


def test_lower_bound_below_upper_bound():
    for n in range(1, 21):
        assert lower_bound(n) <= ub_formula(n, default_k(n))


@pytest.mark.parametrize("n", range(1, 9))
def test_compact_replay_matches_general_replay(n):
    G = build(n)
    for k in range(1, n + 1):
        seq = ub_sequence(n, k)
        fast = replay_bipartite(n, seq)
        slow = replay(G, seq)
        assert fast.complete and slow.complete
        assert fast.width == slow.width <= ub_formula(n, k)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 10 ** 6), st.integers(0, 40))
def test_compact_replay_on_random_sequences(n, seed, ymerges):
    # some subset merges first, then arbitrary merges until one vertex is left
    rng = random.Random(seed)
    N = n + (1 << n)
    ys = list(range(n, N))
    xs = list(range(n))
    nxt = N
    steps = []
    for _ in range(min(ymerges, len(ys) - 1)):
        a, b = rng.sample(ys, 2)
        ys.remove(a)
        ys.remove(b)
        ys.append(nxt)
        steps.append((a, b, nxt))
        nxt += 1
    alive = ys + xs
    while len(alive) > 1:
        a, b = rng.sample(alive, 2)
        alive.remove(a)
        alive.remove(b)
        alive.append(nxt)
        steps.append((a, b, nxt))
        nxt += 1
    seq = ContractionSequence(N, steps)
    fast = replay_bipartite(n, seq)
    assert (fast.width, fast.alive) == naive_replay(build(n), steps)
    assert fast.width == replay(build(n), seq).width


def test_compact_replay_of_a_prefix():
    n = 5
    seq = ub_sequence(n, 2)
    pre = ContractionSequence(seq.n, seq.steps[:10])
    fast = replay_bipartite(n, pre)
    assert not fast.complete
    assert (fast.width, fast.alive) == naive_replay(build(n), pre.steps)


def test_compact_replay_errors():
    n = 3
    N = n + 8
    with pytest.raises(ReplayError, match="step 1"):
        replay_bipartite(n, ContractionSequence(N, [(3, 4, N), (3, 5, N + 1)]))
    with pytest.raises(ReplayError, match="fresh id"):
        replay_bipartite(n, ContractionSequence(N, [(3, 4, N + 2)]))
    with pytest.raises(ReplayError, match="step 0"):
        replay_bipartite(n, ContractionSequence(N + 1, []))
    with pytest.raises(ReplayError, match="step 2"):
        replay_bipartite(n, ContractionSequence(N, [(3, 4, N), (0, 1, N + 1), (0, 2, N + 2)]))


@pytest.mark.parametrize("n,k", [(5, 2), (6, 3), (7, 2)])
def test_phase_structure(n, k):
    sched = ub_schedule(n, k)
    G = build(n)
    steps = sched.sequence.steps
    first = sched.phase_ends[0]
    prefix = replay(G, ContractionSequence(sched.sequence.n, steps[:first]))
    tg = prefix.final
    # after grouping by trace on A, elements of A see no red edge
    assert all(len(tg.red(a)) == 0 for a in range(k))
    ys = [v for v in tg.vertices if v >= n]
    assert len(ys) == 2 ** k
    for x in range(k, n):
        assert len(tg.red(x)) == len(ys)
    assert sched.phase_ends == sorted(sched.phase_ends)
    assert sched.phase_ends[-1] == len(steps) == G.number_of_nodes() - 1


def test_audit_passes_on_schedules():
    for n in range(2, 10):
        for k in range(1, n + 1):
            rep = audit_bipartite(n, ub_sequence(n, k))
            assert rep.violations == []
            assert rep.audited > 0


def test_k_range():
    with pytest.raises(ValueError):
        ub_schedule(4, 0)
    with pytest.raises(ValueError):
        ub_schedule(4, 5)


def test_default_k():
    assert [default_k(n) for n in (1, 2, 4, 8, 16, 20)] == [1, 1, 1, 2, 3, 3]


@pytest.mark.slow
def test_b20_default_schedule():
    n = 20
    k = default_k(n)
    rep = replay_bipartite(n, ub_sequence(n))
    assert rep.complete
    assert rep.width <= ub_formula(n, k)
    assert rep.width <= n - math.floor(math.log2(n)) + 3
