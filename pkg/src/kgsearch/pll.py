"""Radius-restricted pruned landmark labeling with path reconstruction.

Labels are built by pruned BFS in descending-degree order with depth capped
at r. Queries are exact for any pair whose true distance is at most r and
never underestimate. Each label keeps a predecessor link so one concrete
shortest path can be rebuilt, which plain two-hop labeling cannot do.
"""

from __future__ import annotations

import numpy as np

from . import accel
from .graph import IntegrityError, ParameterError, VIEW_ABOX


class PllIndex:
    """Per-vertex sorted (hub, dist, pred) label arrays in CSR layout."""

    def __init__(self, graph, r, indptr, hubs, dists, preds, order):
        self.graph = graph
        self.r = r
        self.lab_indptr = indptr
        self.lab_hub = hubs
        self.lab_dist = dists
        self.lab_pred = preds
        self.order = order

    def labels(self, v):
        lo, hi = self.lab_indptr[v], self.lab_indptr[v + 1]
        return self.lab_hub[lo:hi], self.lab_dist[lo:hi], self.lab_pred[lo:hi]

    def label_count(self) -> int:
        return int(len(self.lab_hub))

    def _label_for_hub(self, v, hub):
        lo, hi = self.lab_indptr[v], self.lab_indptr[v + 1]
        pos = lo + np.searchsorted(self.lab_hub[lo:hi], hub)
        if pos < hi and self.lab_hub[pos] == hub:
            return int(self.lab_dist[pos]), int(self.lab_pred[pos])
        return None

    def distance(self, u, v):
        return pll_distance(self, u, v)

    def shortest_path(self, u, v):
        return retrieve_shortest_path(self, u, v)


def degree_order(g, view=VIEW_ABOX):
    """Vertex processing order: degree descending, ties by ascending id."""
    n = g.num_terms
    degs = np.array([g.degree(v, view) for v in range(n)], dtype=np.int64)
    return np.lexsort((np.arange(n), -degs))


def build_pll(g, r: int, order=None) -> PllIndex:
    """Build the restricted index over the assertion box (undirected)."""
    if r < 1:
        raise ParameterError("radius must be >= 1")
    if order is None:
        order = degree_order(g)
    order = np.asarray(order, dtype=np.int64)
    indptr, nbrs = g.traversal_csr(VIEW_ABOX)
    kern = accel.kernels_for(len(nbrs))
    hubs, dists, preds, verts, counts = kern.pll_build(indptr, nbrs, order, r)
    n = g.num_terms
    lab_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=lab_indptr[1:])
    # labels arrive in insertion order; re-bucket per vertex sorted by hub
    sort_key = np.lexsort((hubs, verts))
    out_hub = hubs[sort_key]
    out_dist = dists[sort_key]
    out_pred = preds[sort_key]
    return PllIndex(g, r, lab_indptr, out_hub, out_dist, out_pred, order)


def pll_distance(idx: PllIndex, u: int, v: int):
    """Minimum d(u,h)+d(h,v) over common hubs; None without one."""
    n = idx.graph.num_terms
    if not (0 <= u < n and 0 <= v < n):
        return None
    if u == v:
        return 0
    hu, du, _ = idx.labels(u)
    hv, dv, _ = idx.labels(v)
    i = j = 0
    best = None
    while i < len(hu) and j < len(hv):
        if hu[i] == hv[j]:
            total = int(du[i] + dv[j])
            if best is None or total < best:
                best = total
            i += 1
            j += 1
        elif hu[i] < hv[j]:
            i += 1
        else:
            j += 1
    return best


def _chase(idx: PllIndex, v: int, hub: int):
    """Follow predecessor links from v to the hub; vertex list v..hub."""
    path = [v]
    cur = v
    guard = 0
    while cur != hub:
        lab = idx._label_for_hub(cur, hub)
        if lab is None:
            raise IntegrityError(f"missing label ({cur}, hub {hub}) during reconstruction")
        _, pred = lab
        if pred < 0:
            raise IntegrityError(f"label ({cur}, hub {hub}) has no predecessor")
        path.append(pred)
        cur = pred
        guard += 1
        if guard > idx.r + 1:
            raise IntegrityError("predecessor chain exceeds radius")
    return path


def retrieve_shortest_path(idx: PllIndex, u: int, v: int):
    """Reconstruct one shortest path u..v via the best common hub.

    The result is validated edge by edge against the graph; inconsistency
    raises IntegrityError. None when the index cannot connect the pair.
    """
    n = idx.graph.num_terms
    if not (0 <= u < n and 0 <= v < n):
        return None
    if u == v:
        return [u]
    hu, du, _ = idx.labels(u)
    hv, dv, _ = idx.labels(v)
    i = j = 0
    best = None  # (total, hub)
    while i < len(hu) and j < len(hv):
        if hu[i] == hv[j]:
            total = int(du[i] + dv[j])
            if best is None or total < best[0]:
                best = (total, int(hu[i]))
            i += 1
            j += 1
        elif hu[i] < hv[j]:
            i += 1
        else:
            j += 1
    if best is None:
        return None
    total, hub = best
    left = _chase(idx, u, hub)
    right = _chase(idx, v, hub)
    path = left + right[::-1][1:]
    if len(path) - 1 != total:
        raise IntegrityError("reconstructed path length disagrees with label distance")
    for a, b in zip(path, path[1:]):
        if not idx.graph.has_any_edge(a, b):
            raise IntegrityError(f"reconstructed path uses a nonexistent edge ({a},{b})")
    return path
