"""Exact baselines used by tests and the benchmark harness.

The exact minimum Steiner tree comes from dynamic programming over
(vertex, terminal-subset) states, exponential in the terminal count, so
callers must respect the stated budget. Nothing here is on any query path.
"""

from __future__ import annotations

import heapq

import numpy as np

from . import accel
from .graph import VIEW_ABOX
from .steiner import SteinerTree


class OracleUnavailable(Exception):
    """The instance exceeds the exact-solver budget; callers should skip."""


def bfs_distances(g, src: int, view=VIEW_ABOX, max_depth: int = -1):
    """Unit-weight distances from src over the undirected view; -1 unreachable."""
    indptr, nbrs = g.traversal_csr(view)
    kern = accel.kernels_for(len(nbrs))
    return kern.bfs_distances(indptr, nbrs, src, max_depth)


def connected_components(g, view=VIEW_ABOX):
    """Component id per term; isolated/unknown terms get -1."""
    n = g.num_terms
    comp = np.full(n, -1, dtype=np.int64)
    in_view = g._in_view[view]
    cid = 0
    for v in range(n):
        if not in_view[v] or comp[v] != -1:
            continue
        stack = [v]
        comp[v] = cid
        while stack:
            u = stack.pop()
            for w in g.adjacent_vertices(u, view):
                if comp[w] == -1:
                    comp[w] = cid
                    stack.append(w)
        cid += 1
    return comp


def exact_steiner_tree(g, terminals, max_terminals: int = 8, max_vertices: int = 500):
    """Minimum-edge tree spanning the terminals, or None when disconnected.

    Dijkstra-driven dynamic programming over (vertex, covered-subset) states
    with merge transitions. Budget overruns raise OracleUnavailable so tests
    can skip rather than guess.
    """
    terminals = sorted(set(terminals))
    if len(terminals) > max_terminals:
        raise OracleUnavailable(f"{len(terminals)} terminals exceed budget {max_terminals}")
    if g.num_vertices(VIEW_ABOX) > max_vertices:
        raise OracleUnavailable(f"{g.num_vertices(VIEW_ABOX)} vertices exceed budget {max_vertices}")
    if len(terminals) == 1:
        return SteinerTree({terminals[0]}, set(), set(terminals))

    t_bit = {t: 1 << i for i, t in enumerate(terminals)}
    full = (1 << len(terminals)) - 1
    dp: dict[tuple[int, int], int] = {}
    choice: dict[tuple[int, int], tuple] = {}
    heap: list[tuple[int, int, int]] = []

    for t in terminals:
        state = (t, t_bit[t])
        dp[state] = 0
        choice[state] = ("leaf",)
        heapq.heappush(heap, (0, t, t_bit[t]))

    final = None
    while heap:
        cost, v, mask = heapq.heappop(heap)
        state = (v, mask)
        if dp.get(state, float("inf")) < cost:
            continue
        if mask == full:
            final = state
            break
        for w in g.adjacent_vertices(v, VIEW_ABOX):
            wmask = mask | t_bit.get(w, 0)
            nstate = (w, wmask)
            ncost = cost + 1
            if ncost < dp.get(nstate, float("inf")):
                dp[nstate] = ncost
                choice[nstate] = ("edge", state)
                heapq.heappush(heap, (ncost, w, wmask))
        # merge two subtrees rooted at v
        rest_all = full & ~mask
        other_masks = []
        om = rest_all
        while om:
            other_masks.append(om)
            om = (om - 1) & rest_all
        for om in other_masks:
            other = (v, om)
            if other in dp:
                nstate = (v, mask | om)
                ncost = cost + dp[other]
                if ncost < dp.get(nstate, float("inf")):
                    dp[nstate] = ncost
                    choice[nstate] = ("merge", state, other)
                    heapq.heappush(heap, (ncost, v, mask | om))
    if final is None:
        return None

    edges: set[tuple[int, int]] = set()
    stack = [final]
    while stack:
        state = stack.pop()
        ch = choice[state]
        if ch[0] == "leaf":
            continue
        if ch[0] == "edge":
            prev = ch[1]
            a, b = state[0], prev[0]
            edges.add((min(a, b), max(a, b)))
            stack.append(prev)
        else:
            stack.append(ch[1])
            stack.append(ch[2])
    vertices = set(terminals)
    triples = set()
    for a, b in sorted(edges):
        vertices.add(a)
        vertices.add(b)
        triples.add(g.resolve_edge(a, b))
    return SteinerTree(vertices, triples, set(terminals))


def min_steiner_edges_exhaustive(g, terminals, max_vertices: int = 14):
    """Independent minimum by scanning vertex supersets; tiny graphs only.

    With unit weights the minimum tree over vertex set S has |S|-1 edges, so
    the answer is (size of the smallest connected S containing the
    terminals) - 1. None when no connected superset exists.
    """
    verts = [int(v) for v in g.vertices_in_view(VIEW_ABOX)]
    if len(verts) > max_vertices:
        raise OracleUnavailable(f"{len(verts)} vertices exceed budget {max_vertices}")
    terminals = sorted(set(terminals))
    if any(t not in set(verts) for t in terminals):
        return None
    others = [v for v in verts if v not in terminals]
    best = None
    for extra_mask in range(1 << len(others)):
        chosen = set(terminals)
        for i in range(len(others)):
            if extra_mask >> i & 1:
                chosen.add(others[i])
        if best is not None and len(chosen) - 1 >= best:
            continue
        if _induced_connected(g, chosen):
            best = len(chosen) - 1
    return best


def _induced_connected(g, vertices: set[int]) -> bool:
    start = next(iter(vertices))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in g.adjacent_vertices(u, VIEW_ABOX):
            if w in vertices and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vertices
