"""Offline landmark sketches: per-vertex shortest-path trees to round landmarks.

Construction runs independently on the three assertion views so every vertex
keeps path material of each category. Landmarks are drawn by weighted
reservoir sampling keyed on informativeness, and each round's depth-limited
searches partition the view, so a vertex gains exactly one entry per
completed round per view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import accel
from .graph import ABOX_VIEWS, ParameterError, VIEW_ABOX


def informativeness(g, v, view=VIEW_ABOX) -> float:
    """Smoothed landmark weight: log2(1+|labels(v)|) * log2(1+deg(v)).

    The +1 smoothing keeps degree-1 and single-label vertices at a nonzero
    weight while preserving the ordering of the raw product.
    """
    el = len(g.edge_label_set(v, view))
    deg = g.degree(v, view)
    return math.log2(1 + el) * math.log2(1 + deg)


def _reservoir_keys(weights, uniforms):
    """Reservoir-sampling keys u^(1/w); zero weight maps below every positive key."""
    keys = np.empty(len(weights), dtype=np.float64)
    pos = weights > 0
    keys[pos] = uniforms[pos] ** (1.0 / weights[pos])
    keys[~pos] = -uniforms[~pos]
    return keys


def select_landmark(candidates, weights, rng) -> int:
    """Draw one candidate with probability ordering of weighted reservoir keys.

    ``weights`` maps candidate id to a non-negative weight. Zero-weight
    candidates are only eligible when every candidate has zero weight, in
    which case the choice is uniform.
    """
    cands = sorted(candidates)
    if not cands:
        raise ParameterError("no candidates")
    w = np.array([float(weights[c]) for c in cands])
    u = rng.random(len(cands))
    keys = _reservoir_keys(w, u)
    return cands[int(np.argmax(keys))]


@dataclass(frozen=True)
class SketchEntry:
    landmark: int
    path: tuple[int, ...]  # root first, landmark last
    labels: tuple[int, ...]
    round: int
    view: int


@dataclass(frozen=True)
class Sketch:
    root: int
    entries: tuple[SketchEntry, ...]


class SketchIndex:
    """Per-round landmark/parent/distance arrays for each view.

    ``rounds[view]`` holds one (landmark, parent, dist) triple per round;
    following parent pointers from a vertex walks its shortest path to the
    round's landmark. ``used[view]`` records landmark ids consumed so far.
    """

    def __init__(self, graph, r: int, k: int, seed: int):
        self.graph = graph
        self.r = r
        self.k = k
        self.seed = seed
        self.rounds = {view: [] for view in ABOX_VIEWS}
        self.used = {view: set() for view in ABOX_VIEWS}

    def path_to_landmark(self, view, rnd, v):
        """Vertex path root..landmark for one round, or None if uncovered."""
        landmark, parent, dist = self.rounds[view][rnd]
        if v >= len(landmark) or landmark[v] < 0:
            return None
        path = [v]
        cur = v
        while parent[cur] >= 0:
            cur = int(parent[cur])
            path.append(cur)
        return path

    def sketch(self, v) -> Sketch:
        """Materialize all entries of one vertex, labels included."""
        entries = []
        for view in ABOX_VIEWS:
            for rnd in range(len(self.rounds[view])):
                path = self.path_to_landmark(view, rnd, v)
                if path is None:
                    continue
                labels = tuple(
                    self.graph.resolve_edge(path[i], path[i + 1], view=view)[1]
                    for i in range(len(path) - 1)
                )
                entries.append(
                    SketchEntry(landmark=path[-1], path=tuple(path), labels=labels,
                                round=rnd, view=view)
                )
        return Sketch(root=v, entries=tuple(entries))

    def path_edges(self, v) -> set[tuple[int, int]]:
        """Undirected vertex pairs over all of v's sketch paths."""
        out = set()
        for view in ABOX_VIEWS:
            for rnd in range(len(self.rounds[view])):
                path = self.path_to_landmark(view, rnd, v)
                if not path:
                    continue
                for a, b in zip(path, path[1:]):
                    out.add((min(a, b), max(a, b)))
        return out

    def reach_map(self, v) -> dict[int, int]:
        """Minimum offset from root to every vertex on any sketch path of v."""
        reach: dict[int, int] = {}
        for view in ABOX_VIEWS:
            for rnd in range(len(self.rounds[view])):
                path = self.path_to_landmark(view, rnd, v)
                if not path:
                    continue
                for off, c in enumerate(path):
                    if c not in reach or off < reach[c]:
                        reach[c] = off
        return reach

    def _entry_paths(self, v):
        for view in ABOX_VIEWS:
            for rnd in range(len(self.rounds[view])):
                path = self.path_to_landmark(view, rnd, v)
                if path:
                    yield path


def default_rounds(num_vertices: int) -> int:
    return max(1, math.ceil(math.log2(max(2, num_vertices))))


def build_sketches(g, r: int, k: int | None = None, seed: int = 0) -> SketchIndex:
    """Run k landmark-covering rounds per view and aggregate the results.

    Reservoir keys are drawn once per (vertex, round); within a round the
    next landmark is the best-keyed vertex that is both unvisited this round
    and unused in earlier rounds of the view. Searches expand neighbors in
    ascending id and stop at depth r, so builds replay exactly given a seed.
    """
    if k is None:
        k = default_rounds(g.num_vertices(VIEW_ABOX))
    if r < 1 or k < 1:
        raise ParameterError("radius and rounds must be >= 1")
    idx = SketchIndex(g, r, k, seed)
    rng = np.random.default_rng(seed)
    n = g.num_terms
    ids = np.arange(n)
    for view in ABOX_VIEWS:
        indptr, nbrs = g.traversal_csr(view)
        kern = accel.kernels_for(len(nbrs))
        in_view = g._in_view[view]
        weights = np.zeros(n, dtype=np.float64)
        for v in np.flatnonzero(in_view):
            weights[v] = informativeness(g, int(v), view)
        used = np.zeros(n, dtype=np.bool_)
        for rnd in range(k):
            uniforms = rng.random(n)
            keys = _reservoir_keys(weights, uniforms)
            key_order = np.lexsort((ids, -keys))
            if not in_view.any():
                idx.rounds[view].append(
                    (np.full(n, -1, np.int64), np.full(n, -1, np.int64), np.full(n, -1, np.int64))
                )
                continue
            visited = ~in_view
            landmark = np.full(n, -1, np.int64)
            parent = np.full(n, -1, np.int64)
            dist = np.full(n, -1, np.int64)
            kern.sketch_round(indptr, nbrs, key_order, visited.copy(), used, r,
                              landmark, parent, dist)
            idx.rounds[view].append((landmark, parent, dist))
        idx.used[view] = set(int(x) for x in np.flatnonzero(used))
    return idx


def estimate_distance(idx: SketchIndex, u: int, v: int):
    """Distance estimate through any vertex shared by the two sketches.

    Returns (distance, vertex path) for the best meeting point, or None when
    the sketches share nothing. Estimates never undercut the true distance
    because every sketch path is a real path.
    """
    if u == v:
        return 0, (u,)
    reach_u = idx.reach_map(u)
    if not reach_u:
        return None
    reach_v = idx.reach_map(v)
    best = None
    for c, du in reach_u.items():
        dv = reach_v.get(c)
        if dv is None:
            continue
        total = du + dv
        if best is None or total < best[0] or (total == best[0] and c < best[1]):
            best = (total, c)
    if best is None:
        return None
    total, c = best
    pu = None
    for path in idx._entry_paths(u):
        if c in path and path.index(c) == reach_u[c]:
            pu = path[: reach_u[c] + 1]
            break
    pv = None
    for path in idx._entry_paths(v):
        if c in path and path.index(c) == reach_v[c]:
            pv = path[: reach_v[c] + 1]
            break
    if pu is None or pv is None:  # pragma: no cover - reach maps came from these paths
        return None
    full = tuple(pu) + tuple(reversed(pv[:-1]))
    return total, full
