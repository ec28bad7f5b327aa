"""Shared fixtures: worked-example graphs, random graphs, independent oracles."""

from collections import defaultdict, deque

import numpy as np
import pytest

from kgsearch.graph import GraphBuilder, KIND_TBOX, PredicateConfig
from kgsearch.sketch import SketchIndex
from kgsearch.steiner import SearchState, SketchGraph

TEST_CONFIG = PredicateConfig(type_pred="type", subclass_pred="subClassOf")


def bfs_oracle(g, src):
    """Independent BFS over the raw assertion list (no CSR, no kernels)."""
    adj = defaultdict(set)
    for s, p, o, kind in g.assertions():
        if kind != KIND_TBOX:
            adj[s].add(o)
            adj[o].add(s)
    dist = {src: 0}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def random_role_graph(n, mean_degree, n_labels, seed, type_share=0.0, attr_share=0.0):
    """Random labeled graph over urn:v{i} vertices; spine keeps it connected."""
    rng = np.random.default_rng(seed)
    b = GraphBuilder(TEST_CONFIG)
    names = [f"v{i}" for i in range(n)]
    labels = [f"p{i}" for i in range(max(1, n_labels))]
    for i in range(1, n):
        j = int(rng.integers(0, i))
        b.add(names[i], labels[int(rng.integers(len(labels)))], names[j])
    extra = max(0, int(n * mean_degree / 2) - (n - 1))
    for _ in range(extra):
        u, v = int(rng.integers(n)), int(rng.integers(n))
        roll = rng.random()
        if roll < type_share:
            b.add(names[u], "type", f"C{v % max(2, n // 10)}")
        elif roll < type_share + attr_share:
            b.add(names[u], labels[int(rng.integers(len(labels)))], f"lit{v}", literal_object=True)
        else:
            b.add(names[u], labels[int(rng.integers(len(labels)))], names[v])
    return b.build()


def scattered_role_graph(n, mean_degree, n_labels, seed):
    """Random graph without the connecting spine; may have many components."""
    rng = np.random.default_rng(seed)
    b = GraphBuilder(TEST_CONFIG)
    for i in range(n):
        b.term(f"v{i}")
    labels = [f"p{i}" for i in range(max(1, n_labels))]
    m = int(n * mean_degree / 2)
    for _ in range(m):
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u == v:
            continue
        b.add(f"v{u}", labels[int(rng.integers(len(labels)))], f"v{v}")
    return b.build()


class ScriptedPaths:
    """Stand-in path provider with the retrieve contract of the hub index."""

    def __init__(self, table):
        self.table = {}
        for (u, v), path in table.items():
            self.table[(u, v)] = path
            self.table[(v, u)] = None if path is None else path[::-1]

    def shortest_path(self, u, v):
        if u == v:
            return [u]
        return self.table.get((u, v))


class PatchupFixture:
    """Three-keyword worked example driving the patch-up and tree tests.

    Keywords t0, t1, t2 sit two hops apart through shared midpoints v6, v7,
    v10, v14; pendant vertices raise the keyword degrees so the search order
    is t0, t2, t1. Vertex v16 hangs off v7 behind the only l0-labeled edge.
    """

    def __init__(self):
        b = GraphBuilder(TEST_CONFIG)
        order = ["t0", "t1", "t2", "v3", "v4", "v6", "v7", "v10", "v14", "v16",
                 "a1", "a2", "a3", "a4", "b1", "b2", "b3"]
        for name in order:
            b.term(name)
        self.ids = {name: b.term(name) for name in order}
        for v in ["v3", "v4", "v6", "v7", "v14"]:
            b.add("t0", "p", v)
        for v in ["v14", "v6", "v10", "a1", "a2", "a3", "a4"]:
            b.add("t1", "p", v)
        for v in ["v6", "v7", "v10", "b1", "b2", "b3"]:
            b.add("t2", "p", v)
        b.add("v7", "l0", "v16")
        self.graph = b.build()
        self.p = self.graph.dictionary.lookup("p")
        self.l0 = self.graph.dictionary.lookup("l0")

    def id(self, name):
        return self.ids[name]

    def make_states(self):
        """Search states seeded with the hand-drawn sketches."""
        g = self.graph
        i = self.ids

        def state(kw, paths):
            gsk = SketchGraph(i[kw])
            for path in paths:
                gsk.add_path([i[x] for x in path])
            return SearchState(i[kw], gsk, g.degree(i[kw]))

        return [
            state("t0", [["t0", "v3"], ["t0", "v4"], ["t0", "v6"], ["t0", "v7"]]),
            state("t1", [["t1", "v14"]]),
            state("t2", [["t2", "v6"]]),
        ]

    def scripted_paths(self):
        i = self.ids
        table = {
            (i["t0"], i["t1"]): [i["t0"], i["v14"], i["t1"]],
            (i["t0"], i["t2"]): [i["t0"], i["v6"], i["t2"]],
            (i["t1"], i["t2"]): [i["t1"], i["v10"], i["t2"]],
            (i["t0"], i["v6"]): [i["t0"], i["v6"]],
            (i["t1"], i["v6"]): [i["t1"], i["v6"]],
            (i["t2"], i["v6"]): [i["t2"], i["v6"]],
            (i["t0"], i["v10"]): None,
            (i["t1"], i["v10"]): [i["t1"], i["v10"]],
            (i["t2"], i["v10"]): [i["t2"], i["v10"]],
            (i["t0"], i["v14"]): [i["t0"], i["v14"]],
            (i["t1"], i["v14"]): [i["t1"], i["v14"]],
            (i["t2"], i["v14"]): None,
        }
        return ScriptedPaths(table)

    def union_edges(self, states):
        out = set()
        for st in states:
            for v, nbrs in st.gsk.adj.items():
                for n in nbrs:
                    out.add((min(v, n), max(v, n)))
        return out

    def union_vertices(self, states):
        out = set()
        for st in states:
            out.update(st.gsk.vertices())
        return out


@pytest.fixture
def patchup_fixture():
    return PatchupFixture()


def misleading_sketch_fixture():
    """Five-vertex graph where sketch meeting points overshoot the distance.

    One landmark round rooted at v4 records (v0,v2,v4) and (v3,v4); the true
    two-hop path v0-v1-v3 stays invisible to the sketches.
    """
    b = GraphBuilder(TEST_CONFIG)
    for name in ["v0", "v1", "v2", "v3", "v4"]:
        b.term(name)
    b.add("v0", "p", "v1")
    b.add("v0", "p", "v2")
    b.add("v2", "p", "v4")
    b.add("v4", "p", "v3")
    b.add("v1", "p", "v3")
    g = b.build()
    idx = SketchIndex(g, r=2, k=1, seed=0)
    n = g.num_terms
    landmark = np.full(n, -1, np.int64)
    parent = np.full(n, -1, np.int64)
    dist = np.full(n, -1, np.int64)
    # one covering round rooted at v4: v4 <- v2 <- v0 and v4 <- v3 <- v1
    for v, (lm, par, d) in {
        4: (4, -1, 0), 2: (4, 4, 1), 3: (4, 4, 1), 0: (4, 2, 2), 1: (4, 3, 2),
    }.items():
        landmark[v] = lm
        parent[v] = par
        dist[v] = d
    from kgsearch.graph import VIEW_ROLE

    idx.rounds[VIEW_ROLE].append((landmark, parent, dist))
    idx.used[VIEW_ROLE] = {4}
    return g, idx


def disjoint_sketch_fixture():
    """Chain a-v1-v6-v5-b whose two sketches miss the middle vertex v6."""
    b = GraphBuilder(TEST_CONFIG)
    for name in ["a", "v1", "v6", "v5", "b", "x1", "x2", "y1", "y2"]:
        b.term(name)
    b.add("a", "p", "v1")
    b.add("v1", "p", "v6")
    b.add("v6", "p", "v5")
    b.add("v5", "p", "b")
    b.add("a", "q1", "x1")
    b.add("a", "q2", "x2")
    b.add("b", "q3", "y1")
    b.add("b", "q4", "y2")
    return b.build()


@pytest.fixture
def reasoning_fixture():
    """Engine ontology scenario: the original query is instance-disconnected."""
    b = GraphBuilder(TEST_CONFIG)
    for t in ["BMW_M43", "BMW_M40", "BMW_M10", "AutomobileEngine", "RocketEngine",
              "Engine", "RD_180"]:
        b.term(t)
    b.add("BMW_M43", "type", "AutomobileEngine")
    b.add("BMW_M40", "successor", "BMW_M43")
    b.add("BMW_M40", "predecessor", "BMW_M10")
    b.add("BMW_M10", "type", "AutomobileEngine")
    b.add("RD_180", "type", "RocketEngine")
    b.add("AutomobileEngine", "subClassOf", "Engine")
    b.add("RocketEngine", "subClassOf", "Engine")
    return b.build()
