import math
from collections import deque

import numpy as np
import pytest

from kgsearch.graph import ParameterError, VIEW_ABOX, VIEW_ROLE
from kgsearch.sketch import (build_sketches, estimate_distance, informativeness,
                             select_landmark)

from conftest import (TEST_CONFIG, bfs_oracle, disjoint_sketch_fixture,
                      misleading_sketch_fixture, random_role_graph)
from kgsearch.graph import GraphBuilder


def test_informativeness_isolated_vertex():
    b = GraphBuilder(TEST_CONFIG)
    b.term("x")
    b.add("a", "p", "b")
    g = b.build()
    assert informativeness(g, g.dictionary.lookup("x")) == 0.0


def test_informativeness_deg3_el3():
    b = GraphBuilder(TEST_CONFIG)
    b.add("v", "p1", "a").add("v", "p2", "b").add("v", "p3", "c")
    g = b.build()
    assert informativeness(g, g.dictionary.lookup("v")) == pytest.approx(4.0)


def test_informativeness_deg7_el1():
    b = GraphBuilder(TEST_CONFIG)
    for i in range(7):
        b.add("v", "p", f"n{i}")
    g = b.build()
    assert informativeness(g, g.dictionary.lookup("v")) == pytest.approx(3.0)


def test_select_landmark_single_candidate():
    rng = np.random.default_rng(0)
    assert select_landmark([7], {7: 0.5}, rng) == 7


def test_select_landmark_heavily_weighted():
    rng = np.random.default_rng(42)
    wins = 0
    for _ in range(10_000):
        if select_landmark([0, 1], {0: 1000.0, 1: 0.001}, rng) == 0:
            wins += 1
    assert wins > 9_900


def test_select_landmark_uniform_within_3_sigma():
    rng = np.random.default_rng(7)
    m, trials = 4, 10_000
    counts = {i: 0 for i in range(m)}
    for _ in range(trials):
        counts[select_landmark(list(range(m)), {i: 2.5 for i in range(m)}, rng)] += 1
    p = 1 / m
    sigma = math.sqrt(trials * p * (1 - p))
    for c in counts.values():
        assert abs(c - trials * p) < 3 * sigma


def test_select_landmark_zero_weights_uniform_fallback():
    rng = np.random.default_rng(3)
    weights = {0: 0.0, 1: 0.0, 2: 5.0}
    hits = {select_landmark([0, 1, 2], weights, rng) for _ in range(200)}
    assert hits == {2}
    zero_only = {select_landmark([0, 1], {0: 0.0, 1: 0.0}, rng) for _ in range(200)}
    assert zero_only == {0, 1}


def test_build_rejects_bad_params():
    g = random_role_graph(10, 2, 2, seed=0)
    with pytest.raises(ParameterError):
        build_sketches(g, r=0, k=1)
    with pytest.raises(ParameterError):
        build_sketches(g, r=2, k=0)


def _replay_round(g, view, idx, rnd):
    """Re-run one round's BFS partition from its recorded landmarks."""
    landmark, parent, dist = idx.rounds[view][rnd]
    n = g.num_terms
    in_view = g._in_view[view]
    covered = {int(v) for v in np.flatnonzero(landmark >= 0)}
    assert covered == {int(v) for v in np.flatnonzero(in_view)}
    by_landmark = {}
    for v in covered:
        by_landmark.setdefault(int(landmark[v]), set()).add(v)
    seen_all = set()
    for lm, members in by_landmark.items():
        assert lm in members
        # distances must equal BFS restricted to this landmark's members
        ref = {lm: 0}
        q = deque([lm])
        while q:
            u = q.popleft()
            for w in g.adjacent_vertices(u, view):
                if w in members and w not in ref:
                    ref[w] = ref[u] + 1
                    q.append(w)
        assert ref.keys() == members
        for v in members:
            assert ref[v] == int(dist[v]) <= idx.r
        assert not (seen_all & members)
        seen_all |= members


def test_round_partitions_and_distances_replay():
    for seed in range(6):
        g = random_role_graph(80, 3, 4, seed=seed, type_share=0.15, attr_share=0.1)
        idx = build_sketches(g, r=2, k=3, seed=seed)
        for view in (0, 1, 2):
            for rnd in range(len(idx.rounds[view])):
                _replay_round(g, view, idx, rnd)


def _replay_build(g, r, k, seed):
    """Independent dict/set reimplementation of the whole construction."""
    rng = np.random.default_rng(seed)
    n = g.num_terms
    out = {}
    for view in (0, 1, 2):
        in_view = {int(v) for v in g.vertices_in_view(view)}
        weights = {}
        for v in in_view:
            el = len({lbl for lbl, _, _ in g.neighbors(v, view)})
            deg = len(g.neighbors(v, view))
            weights[v] = math.log2(1 + el) * math.log2(1 + deg)
        used = set()
        rounds = []
        for _ in range(k):
            uniforms = rng.random(n)
            keys = {}
            for v in range(n):
                w = weights.get(v, 0.0)
                keys[v] = uniforms[v] ** (1.0 / w) if w > 0 else -uniforms[v]
            order = sorted(range(n), key=lambda v: (-keys[v], v))
            unvisited = set(in_view)
            landmark = {}
            parent = {}
            dist = {}
            while unvisited:
                cands = [v for v in order if v in unvisited and v not in used]
                if not cands:
                    cands = [v for v in order if v in unvisited]
                lm = cands[0]
                used.add(lm)
                unvisited.discard(lm)
                landmark[lm], parent[lm], dist[lm] = lm, -1, 0
                frontier = [lm]
                while frontier:
                    nxt = []
                    for u in frontier:
                        if dist[u] >= r:
                            continue
                        for wv in g.adjacent_vertices(u, view):
                            if wv in unvisited:
                                unvisited.discard(wv)
                                landmark[wv], parent[wv], dist[wv] = lm, u, dist[u] + 1
                                nxt.append(wv)
                    frontier = nxt
            rounds.append((landmark, parent, dist))
        out[view] = rounds
    return out


def test_full_build_matches_independent_replay():
    for seed in range(4):
        g = random_role_graph(60, 3, 3, seed=seed, type_share=0.1)
        idx = build_sketches(g, r=2, k=3, seed=seed)
        ref = _replay_build(g, r=2, k=3, seed=seed)
        for view in (0, 1, 2):
            for rnd in range(3):
                landmark, parent, dist = idx.rounds[view][rnd]
                r_lm, r_par, r_dist = ref[view][rnd]
                for v in range(g.num_terms):
                    assert int(landmark[v]) == r_lm.get(v, -1)
                    assert int(parent[v]) == r_par.get(v, -1)
                    assert int(dist[v]) == r_dist.get(v, -1)


def test_landmarks_unique_within_round():
    for seed in range(4):
        g = random_role_graph(60, 3, 3, seed=seed)
        idx = build_sketches(g, r=2, k=3, seed=seed)
        for rnd in range(3):
            landmark, parent, _ = idx.rounds[VIEW_ROLE][rnd]
            roots = [v for v in range(g.num_terms)
                     if landmark[v] == v and parent[v] == -1]
            lms = {int(x) for x in set(landmark.tolist()) if x >= 0}
            assert set(roots) == lms


def test_sketch_paths_are_graph_paths():
    g = random_role_graph(70, 3, 3, seed=9)
    idx = build_sketches(g, r=3, k=3, seed=9)
    for v in range(g.num_terms):
        sk = idx.sketch(v)
        for entry in sk.entries:
            assert entry.path[0] == v
            assert entry.path[-1] == entry.landmark
            assert len(entry.path) - 1 <= idx.r
            for a, b in zip(entry.path, entry.path[1:]):
                assert g.has_any_edge(a, b)
            if len(entry.path) == 1:
                assert entry.landmark == v


def test_estimate_identity():
    g = random_role_graph(20, 3, 2, seed=1)
    idx = build_sketches(g, r=2, k=2, seed=1)
    assert estimate_distance(idx, 5, 5) == (0, (5,))


def test_estimate_never_underestimates():
    rng = np.random.default_rng(0)
    for seed in range(10):
        g = random_role_graph(60, 3, 3, seed=seed)
        idx = build_sketches(g, r=3, k=3, seed=seed)
        verts = g.vertices_in_view(VIEW_ABOX)
        for _ in range(60):
            u = int(verts[rng.integers(len(verts))])
            v = int(verts[rng.integers(len(verts))])
            est = estimate_distance(idx, u, v)
            if est is None:
                continue
            d, path = est
            truth = bfs_oracle(g, u).get(v)
            assert truth is not None
            assert d >= truth
            assert len(path) - 1 == d
            assert path[0] == u and path[-1] == v
            for a, b in zip(path, path[1:]):
                assert g.has_any_edge(a, b)


def test_misleading_meeting_point_overshoots():
    g, idx = misleading_sketch_fixture()
    d = g.dictionary
    v0, v3 = d.lookup("v0"), d.lookup("v3")
    est = estimate_distance(idx, v0, v3)
    assert est is not None
    dist, path = est
    assert dist == 3
    assert path == (v0, d.lookup("v2"), d.lookup("v4"), v3)
    assert bfs_oracle(g, v0)[v3] == 2  # the sketches cannot see the short way


def test_disjoint_sketches_can_arise():
    g = disjoint_sketch_fixture()
    d = g.dictionary
    v1, v5, v6 = d.lookup("v1"), d.lookup("v5"), d.lookup("v6")
    observed = False
    for seed in range(60):
        idx = build_sketches(g, r=1, k=1, seed=seed)
        paths_v1 = set(idx.reach_map(v1))
        paths_v5 = set(idx.reach_map(v5))
        if v6 not in paths_v1 and v6 not in paths_v5 and not (paths_v1 & paths_v5):
            assert estimate_distance(idx, v1, v5) is None
            observed = True
            break
    assert observed, "no seed produced the disjoint-sketch failure mode"


def test_default_round_count_is_log():
    g = random_role_graph(100, 3, 2, seed=2)
    idx = build_sketches(g, r=2, seed=2)
    assert idx.k == math.ceil(math.log2(g.num_vertices(VIEW_ABOX)))


def test_build_is_deterministic():
    g = random_role_graph(50, 3, 3, seed=4)
    a = build_sketches(g, r=2, k=3, seed=99)
    b = build_sketches(g, r=2, k=3, seed=99)
    for view in (0, 1, 2):
        for (l1, p1, d1), (l2, p2, d2) in zip(a.rounds[view], b.rounds[view]):
            assert (l1 == l2).all() and (p1 == p2).all() and (d1 == d2).all()
