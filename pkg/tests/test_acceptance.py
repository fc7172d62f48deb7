"""End-to-end acceptance sweeps, one test per criterion.

Each test records a PASS/FAIL line through the ``acceptance`` fixture
before asserting, so a failing criterion still shows up in the summary.
"""

import math
import random
import time
from functools import lru_cache

import networkx as nx

from oracles import NaiveReplayError, naive_classes, naive_replay, random_graph
from twinwidth.bipartite import build, default_k, lower_bound, replay_bipartite, ub_formula, ub_schedule
from twinwidth.cli import _check
from twinwidth.exact import exact_twinwidth, exhaustive_twinwidth
from twinwidth.planar import bfs_layering, random_planar_triangulation
from twinwidth.planar183 import PLANAR_BOUND, planar_contraction_run
from twinwidth.spherecut import (
    SphereCutDecomposition,
    bw_bound,
    bw_contraction_sequence,
    fundamental_cycle,
    grid_instance,
    h,
    outerplanar_instance,
    tight_example,
    verify_noose_bound,
)
from twinwidth.treewidth import random_partial_ktree, tw_bound, treewidth_sequence
from twinwidth.trigraph import ContractionSequence, replay


def test_exact_solver_matches_exhaustive_search(acceptance):
    t0 = time.perf_counter()
    graphs = [g for g in nx.graph_atlas_g() if g.number_of_nodes() <= 6]
    rng = random.Random(20240607)
    graphs += [random_graph(7, rng.uniform(0.2, 0.8), rng) for _ in range(200)]
    bad = []
    for G in graphs:
        res = exact_twinwidth(G)
        want = exhaustive_twinwidth(G)
        if res.width != want:
            bad.append((sorted(G.edges), res.width, want))
            continue
        width, alive = naive_replay(G, res.witness.steps)
        if width != want or alive > 1:
            bad.append((sorted(G.edges), "witness", width))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 600
    acceptance(1, ok, f"{len(graphs)} graphs, {len(bad)} disagreements, {elapsed:.0f} s")
    assert ok, bad[:3]


def test_partial_ktree_widths(acceptance):
    worst = {}
    bad = []
    for k in (1, 2, 3, 4):
        worst[k] = 0
        for seed in range(50):
            n = 20 + (seed * 37) % 181
            G, td = random_partial_ktree(n, k, seed)
            seq, w = treewidth_sequence(G, td)
            res = replay(G, seq)
            worst[k] = max(worst[k], res.width)
            if not res.complete or w > k or res.width > tw_bound(k):
                bad.append((k, seed, n, res.width))
    ok = not bad
    acceptance(2, ok, "worst width per k: " + ", ".join(f"k={k}: {worst[k]}/{tw_bound(k)}" for k in worst))
    assert ok, bad[:5]


def test_noose_class_counts(acceptance):
    tight_bad = []
    for k in range(3, 11):
        ex = tight_example(k)
        inside = [v for v in ex.graph if v >= k]
        cert = verify_noose_bound(ex.graph, ex.embedding, ex.noose)
        if not (cert.class_count == 4 * k - 4 == naive_classes(ex.graph, inside, ex.noose)):
            tight_bad.append((k, cert.class_count))
    rng = random.Random(5)
    random_bad = []
    worst = 0.0
    for _ in range(500):
        G, R = random_planar_triangulation(rng.randrange(10, 150), rng.randrange(10 ** 9))
        L = bfs_layering(G, R)
        nontree = sorted(e for e in G.edges if L.parent[e[0]] != e[1] and L.parent[e[1]] != e[0])
        u, v = nontree[rng.randrange(len(nontree))]
        cyc = fundamental_cycle(L, u, v)
        cert = verify_noose_bound(G, R, cyc)
        count = naive_classes(G, cert.inside, cyc)
        if count != cert.class_count or count > h(len(cyc)):
            random_bad.append((len(cyc), count))
        worst = max(worst, count / h(len(cyc)))
    ok = not tight_bad and not random_bad
    acceptance(3, ok, f"tight k=3..10 exact: {not tight_bad}; 500 random nooses, max classes/bound {worst:.2f}")
    assert ok, (tight_bad, random_bad[:5])


def test_branch_decomposition_widths(acceptance):
    rows = []
    bad = []
    instances = []
    for k in range(2, 7):
        for cols in (k, 2 * k, 12):
            instances.append((f"grid {k}x{cols}", *grid_instance(k, cols)))
    for seed in range(20):
        instances.append((f"outerplanar seed {seed}", *outerplanar_instance(15 + 7 * seed, seed)))
    for name, G, bd in instances:
        scd = SphereCutDecomposition.from_branch_decomposition(G, bd)
        k = scd.width
        try:
            seq = bw_contraction_sequence(G, scd, strict=True)
        except AssertionError as exc:
            bad.append((name, f"assertion: {exc}"))
            continue
        res = replay(G, seq)
        rows.append((k, res.width))
        if not res.complete or res.width > bw_bound(k) or not 2 <= k <= 6:
            bad.append((name, k, res.width))
    worst = {}
    for k, w in rows:
        worst[k] = max(worst.get(k, 0), w)
    ok = not bad
    acceptance(4, ok, f"{len(instances)} instances, worst per width "
               + ", ".join(f"k={k}: {worst[k]}/{bw_bound(k)}" for k in sorted(worst)))
    assert ok, bad[:5]


def test_planar_triangulations(acceptance):
    bad = []
    worst = {}
    slowest = 0.0
    for n in (100, 500, 2000):
        worst[n] = 0
        for seed in range(20):
            G, R = random_planar_triangulation(n, seed)
            t0 = time.perf_counter()
            run = planar_contraction_run(G, R)
            res = replay(G, run.sequence)
            elapsed = time.perf_counter() - t0
            if n == 2000:
                slowest = max(slowest, elapsed)
            worst[n] = max(worst[n], res.width)
            if not res.complete or res.width > PLANAR_BOUND or elapsed > 60:
                bad.append((n, seed, res.width, round(elapsed, 1)))
    ok = not bad
    acceptance(5, ok, "max observed width " + ", ".join(f"n={n}: {w}" for n, w in worst.items())
               + f" (bound {PLANAR_BOUND}); slowest n=2000 run {slowest:.1f} s")
    assert ok, bad[:5]


@lru_cache(maxsize=None)
def _default_ub_width(n):
    sched = ub_schedule(n)
    rep = replay_bipartite(n, sched.sequence)
    assert rep.complete
    return rep.width


def test_bipartite_upper_bound(acceptance):
    bad = []
    for n in range(1, 13):
        for k in range(1, n + 1):
            seq = ub_schedule(n, k).sequence
            rep = replay_bipartite(n, seq)
            if not rep.complete or rep.width > ub_formula(n, k):
                bad.append((n, k, rep.width))
    widths = {}
    for n in range(1, 21):
        widths[n] = _default_ub_width(n)
        limit = n - math.floor(math.log2(n)) + 3
        if widths[n] > limit or widths[n] > ub_formula(n, default_k(n)):
            bad.append((n, "default", widths[n], limit))
    ok = not bad
    acceptance(6, ok, f"all k for n<=12 within formula; default-k width at n=20: {widths[20]} "
               f"(limit {20 - 4 + 3})")
    assert ok, bad[:5]


def test_bipartite_sandwich(acceptance):
    bad = []
    if lower_bound(2) > exact_twinwidth(build(2)).width:
        bad.append((2, "exact"))
    for n in range(1, 21):
        if lower_bound(n) > _default_ub_width(n):
            bad.append((n, lower_bound(n), _default_ub_width(n)))
    ok = not bad
    acceptance(7, ok, f"lower <= upper for n<=20; n=20: {lower_bound(20)} <= {_default_ub_width(20)}")
    assert ok, bad


# -- verifier fuzz ---------------------------------------------------------


def _valid_sequence(G, rng):
    alive = list(G.nodes)
    nxt = G.number_of_nodes()
    steps = []
    while len(alive) > 1:
        a, b = rng.sample(alive, 2)
        alive.remove(a)
        alive.remove(b)
        alive.append(nxt)
        steps.append((a, b, nxt))
        nxt += 1
    return steps


def _mutate(steps, n, rng):
    steps = list(steps)
    kind = rng.choice(("swap", "redirect", "truncate"))
    if kind == "swap" and len(steps) >= 2:
        i, j = rng.sample(range(len(steps)), 2)
        steps[i], steps[j] = steps[j], steps[i]
    elif kind == "redirect" and steps:
        i = rng.randrange(len(steps))
        step = list(steps[i])
        step[rng.randrange(3)] = rng.randrange(n + len(steps) + 1)
        steps[i] = tuple(step)
    else:
        steps = steps[:rng.randrange(len(steps) + 1)]
    return kind, steps


def test_verifier_fuzz(acceptance):
    rng = random.Random(99)
    bad = []
    seen = {"rejected": 0, "rescored": 0}
    total = 100_000
    graph_pool = [random_graph(rng.randrange(2, 10), rng.uniform(0.1, 0.9), rng) for _ in range(200)]
    for t in range(total):
        G = graph_pool[t % len(graph_pool)]
        n = G.number_of_nodes()
        base = _valid_sequence(G, rng)
        claimed = naive_replay(G, base)[0]
        kind, steps = _mutate(base, n, rng)
        report, code = _check(G, ContractionSequence(n, steps, claimed))
        try:
            width, alive = naive_replay(G, steps)
        except NaiveReplayError:
            seen["rejected"] += 1
            if code != 1 or "step" not in report:
                bad.append((kind, steps, report))
            continue
        seen["rescored"] += 1
        expect_ok = width <= claimed
        if (report.get("width") != width or report.get("complete") != (alive <= 1)
                or report["ok"] != expect_ok or code != (0 if expect_ok else 1)):
            bad.append((kind, steps, report, width, alive))
    ok = not bad
    acceptance(8, ok, f"{total} mutations: {seen['rejected']} rejected, {seen['rescored']} re-scored, "
               f"{len(bad)} mismatches")
    assert ok, bad[:3]
