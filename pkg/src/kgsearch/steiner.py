"""Online tree construction over patched keyword sketches.

A query episode loads one sketch graph per vertex keyword, patches the
graphs with hub-label shortest paths (keyword-keyword first, then central
vertices to keywords), and then runs a greedy level-synchronous search that
discovers candidate paths between keyword pairs and commits one per pair
under union-find cycle rejection.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import VIEW_ABOX


class UnionFind:
    """Disjoint sets over arbitrary hashable ids with path compression."""

    def __init__(self):
        self.parent = {}

    def find(self, x):
        p = self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True

    def connected(self, a, b) -> bool:
        if a not in self.parent or b not in self.parent:
            return False
        return self.find(a) == self.find(b)


class SketchGraph:
    """The growing per-keyword graph G_sk: sketch paths plus patched paths."""

    def __init__(self, root: int):
        self.root = root
        self.adj: dict[int, set[int]] = {root: set()}
        self.version = 0
        self._bfs_cache = None

    def __contains__(self, v) -> bool:
        return v in self.adj

    def vertices(self):
        return self.adj.keys()

    def neighbors(self, v):
        return self.adj.get(v, ())

    def add_path(self, path) -> list[int]:
        """Insert a vertex path; returns vertices new to this graph."""
        new = []
        changed = False
        for v in path:
            if v not in self.adj:
                self.adj[v] = set()
                new.append(v)
                changed = True
        for a, b in zip(path, path[1:]):
            if b not in self.adj[a]:
                self.adj[a].add(b)
                self.adj[b].add(a)
                changed = True
        if changed:
            self.version += 1
        return new

    def _root_bfs(self):
        if self._bfs_cache is not None and self._bfs_cache[0] == self.version:
            return self._bfs_cache[1], self._bfs_cache[2]
        dist = {self.root: 0}
        parent = {self.root: None}
        frontier = [self.root]
        while frontier:
            nxt = []
            for v in frontier:
                for n in sorted(self.adj[v]):
                    if n not in dist:
                        dist[n] = dist[v] + 1
                        parent[n] = v
                        nxt.append(n)
            frontier = nxt
        self._bfs_cache = (self.version, dist, parent)
        return dist, parent

    def path_from_root(self, v):
        """Shortest vertex path root..v inside this graph, or None."""
        dist, parent = self._root_bfs()
        if v not in dist:
            return None
        path = [v]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        path.reverse()
        return path


class SearchState:
    """Per-keyword search bookkeeping: graph, visited set, frontier levels."""

    def __init__(self, keyword: int, gsk: SketchGraph, degree: int):
        self.keyword = keyword
        self.gsk = gsk
        self.degree = degree
        self.visited = {keyword: 0}  # insertion-ordered vertex -> level
        self._level_sets = [[keyword]]
        self.exhausted = False

    @property
    def level(self) -> int:
        return len(self._level_sets) - 1

    def expand_level(self):
        """Advance one whole BFS level; empty result marks exhaustion."""
        cur = self._level_sets[-1]
        nxt = sorted(
            {n for v in cur for n in self.gsk.neighbors(v) if n not in self.visited}
        )
        if not nxt:
            self.exhausted = True
            return []
        lvl = len(self._level_sets)
        for v in nxt:
            self.visited[v] = lvl
        self._level_sets.append(nxt)
        return nxt


class OccurrenceMap:
    """How many keyword sketch graphs currently contain each vertex."""

    def __init__(self, counts=None):
        self.counts: dict[int, int] = dict(counts or {})

    @classmethod
    def from_states(cls, states) -> "OccurrenceMap":
        counts: dict[int, int] = {}
        for st in states:
            for v in st.gsk.vertices():
                counts[v] = counts.get(v, 0) + 1
        return cls(counts)

    def get(self, v) -> int:
        return self.counts.get(v, 0)

    def bump(self, vertices):
        for v in vertices:
            self.counts[v] = self.counts.get(v, 0) + 1

    def max_occurrence_vertices(self, exclude, cap=32):
        """Non-keyword vertices at the maximum count, id-sorted, capped."""
        best = 0
        for v, c in self.counts.items():
            if v in exclude:
                continue
            if c > best:
                best = c
        if best == 0:
            return []
        out = sorted(v for v, c in self.counts.items() if c == best and v not in exclude)
        return out[:cap]


class PathMap:
    """Minimum-length candidate paths per unordered keyword pair."""

    def __init__(self):
        self._store: dict[tuple[int, int], tuple[int, list[tuple[int, ...]]]] = {}

    def offer(self, pair, path) -> str:
        plen = len(path) - 1
        entry = self._store.get(pair)
        if entry is None or plen < entry[0]:
            self._store[pair] = (plen, [path])
            return "new"
        if plen == entry[0]:
            if path in entry[1]:
                return "duplicate"
            entry[1].append(path)
            return "added"
        return "rejected"

    def paths(self, pair):
        entry = self._store.get(pair)
        return list(entry[1]) if entry else []

    def length(self, pair):
        entry = self._store.get(pair)
        return entry[0] if entry else None

    def pairs(self):
        return self._store.keys()

    def snapshot(self):
        return {pair: (ln, list(paths)) for pair, (ln, paths) in self._store.items()}


@dataclass
class SteinerTree:
    """An answer backbone: tree vertices, labeled stored-direction edges."""

    vertices: set[int]
    edges: set[tuple[int, int, int]]
    covered: set[int] = field(default_factory=set)

    @property
    def size(self) -> int:
        return len(self.edges)

    def edge_pairs(self):
        return {(min(s, o), max(s, o)) for s, _, o in self.edges}


class TreeBuilder:
    """Accumulates committed paths; rejects any path that would close a cycle."""

    def __init__(self, graph):
        self.graph = graph
        self.vertices: set[int] = set()
        self.pair_edges: set[tuple[int, int]] = set()
        self.triples: set[tuple[int, int, int]] = set()
        self.uf = UnionFind()

    def connected(self, a, b) -> bool:
        return self.uf.connected(a, b)

    def try_commit_path(self, path, dangling):
        """Commit all edges of a path atomically; None when it would cycle.

        Returns the set of dangling labels the committed edges ended up
        covering. Edges already in the tree are skipped; label choice prefers
        a still-dangling label, then the smallest label id.
        """
        consecutive = list(zip(path, path[1:]))
        virt = {}

        def vfind(x):
            r = self.uf.find(x)
            while r in virt:
                r = virt[r]
            return r

        for a, b in consecutive:
            key = (min(a, b), max(a, b))
            if key in self.pair_edges:
                continue
            ra, rb = vfind(a), vfind(b)
            if ra == rb:
                return None
            virt[ra] = rb
        covered = set()
        for a, b in consecutive:
            key = (min(a, b), max(a, b))
            self.vertices.add(a)
            self.vertices.add(b)
            if key in self.pair_edges:
                continue
            self.uf.union(a, b)
            self.pair_edges.add(key)
            triple = self.graph.resolve_edge(a, b, prefer_labels=dangling)
            if triple is None:
                raise AssertionError(f"committed path edge ({a},{b}) missing from graph")
            self.triples.add(triple)
            if triple[1] in dangling:
                covered.add(triple[1])
        return covered

    def all_connected(self, keywords) -> bool:
        if any(t not in self.vertices for t in keywords):
            return False
        root = self.uf.find(keywords[0])
        return all(self.uf.find(t) == root for t in keywords[1:])

    def to_tree(self, keywords) -> SteinerTree:
        return SteinerTree(set(self.vertices), set(self.triples), set(keywords))


def init_search_states(sketch_index, vertex_keywords):
    """One SearchState per keyword, seeded with the keyword's sketch paths."""
    g = sketch_index.graph
    states = []
    for t in vertex_keywords:
        gsk = SketchGraph(t)
        for a, b in sorted(sketch_index.path_edges(t)):
            gsk.add_path([a, b])
        states.append(SearchState(t, gsk, g.degree(t, VIEW_ABOX)))
    return states


def kk_patchup(states, pll_index):
    """Insert one hub-label shortest path per keyword pair into both sides."""
    for i in range(len(states)):
        for j in range(i + 1, len(states)):
            path = pll_index.shortest_path(states[i].keyword, states[j].keyword)
            if path is None:
                continue
            states[i].gsk.add_path(path)
            states[j].gsk.add_path(path)


def ck_patchup(states, pll_index, occ: OccurrenceMap, max_batch: int = 32,
               max_iterations: int | None = None):
    """Patch paths from the highest-occurrence non-keyword vertices to keywords.

    Iterates until some batch vertex appears in every sketch graph or a full
    iteration leaves every batch vertex's occurrence unchanged. Returns the
    number of iterations executed.
    """
    keywords = {st.keyword for st in states}
    target = len(states)
    vmo = occ.max_occurrence_vertices(keywords, max_batch)
    if not vmo:
        return 0
    if any(occ.get(v) == target for v in vmo):
        return 0
    if max_iterations is None:
        max_iterations = max(1, len(occ.counts))
    prev = dict(occ.counts)
    iterations = 0
    while iterations < max_iterations:
        for v_m in vmo:
            for st in states:
                path = pll_index.shortest_path(st.keyword, v_m)
                if path is None:
                    continue
                occ.bump(st.gsk.add_path(path))
        iterations += 1
        vmo = occ.max_occurrence_vertices(keywords, max_batch)
        if not vmo:
            break
        if any(occ.get(v) == target for v in vmo):
            break
        if all(occ.get(v) == prev.get(v, 0) for v in vmo):
            break
        prev = dict(occ.counts)
    return iterations


def _covered_dangling(graph, path, dangling):
    if not dangling:
        return set()
    out = set()
    for a, b in zip(path, path[1:]):
        for lbl, _ in graph.labels_between(a, b):
            if lbl in dangling:
                out.add(lbl)
    return out


def path_selection(builder: TreeBuilder, mp: PathMap, states, dangling,
                   occ: OccurrenceMap | None = None, pairs=None,
                   use_selection: bool = True, frozen=None):
    """Commit one candidate per pending pair into the tree under construction.

    The kept path maximizes the summed vertex occurrence, with ties broken
    toward covering more still-dangling labels and then by the smallest
    vertex sequence. Pairs whose endpoints are already connected are frozen;
    cyclic candidates are dropped in favor of the next best.
    """
    if occ is None:
        occ = OccurrenceMap.from_states(states)
    if frozen is None:
        frozen = set()
    candidates = sorted(pairs) if pairs is not None else sorted(mp.pairs())
    for pair in candidates:
        if pair in frozen:
            continue
        a, b = pair
        if builder.connected(a, b):
            frozen.add(pair)
            continue
        paths = mp.paths(pair)
        if use_selection:
            paths.sort(
                key=lambda p: (
                    -sum(occ.get(v) for v in p),
                    -len(_covered_dangling(builder.graph, p, dangling)),
                    p,
                )
            )
        for p in paths:
            covered = builder.try_commit_path(p, dangling)
            if covered is not None:
                dangling -= covered
                frozen.add(pair)
                break
    return builder, dangling


def _average_distance(state, states, mp: PathMap):
    total = 0
    n = 0
    for other in states:
        if other is state:
            continue
        pair = (min(state.keyword, other.keyword), max(state.keyword, other.keyword))
        ln = mp.length(pair)
        if ln is not None:
            total += ln
            n += 1
    return total / n if n else float("inf")


def build_st(graph, states, edge_label_keywords=(), use_path_selection: bool = True,
             trace=None):
    """Greedy round-robin tree construction; None when no connection is found.

    Each turn expands one whole level of the scheduled state's sketch graph,
    forms candidate paths to every other keyword through sketch-graph
    membership or an original-graph neighbor already visited by the other
    search, keeps minimum-length candidates per pair, and commits selected
    paths. Scheduling prefers the smallest average known distance, then the
    fewest turns taken, then ascending keyword degree and id.
    """
    keywords = [st.keyword for st in states]
    if len(states) == 1:
        return SteinerTree({keywords[0]}, set(), {keywords[0]})
    occ = OccurrenceMap.from_states(states)
    builder = TreeBuilder(graph)
    mp = PathMap()
    frozen: set[tuple[int, int]] = set()
    dangling = set(edge_label_keywords)
    turns: dict[int, int] = {st.keyword: 0 for st in states}
    by_keyword = sorted(states, key=lambda s: s.keyword)

    while True:
        eligible = [st for st in states if not st.exhausted]
        if not eligible:
            return None
        cur = min(
            eligible,
            key=lambda s: (_average_distance(s, states, mp), turns[s.keyword],
                           s.degree, s.keyword),
        )
        turns[cur.keyword] += 1
        level_vertices = cur.expand_level()
        if not level_vertices:
            continue
        turn_pairs: set[tuple[int, int]] = set()
        for v_j in level_vertices:
            for other in by_keyword:
                if other is cur:
                    continue
                cands = []
                if v_j in other.gsk:
                    pj = cur.gsk.path_from_root(v_j)
                    ph = other.gsk.path_from_root(v_j)
                    if pj is not None and ph is not None:
                        cands.append(pj + ph[::-1][1:])
                for n in graph.adjacent_vertices(v_j, VIEW_ABOX):
                    if n in other.visited:
                        pj = cur.gsk.path_from_root(v_j)
                        ph = other.gsk.path_from_root(n)
                        if pj is None or ph is None:
                            continue
                        spliced = pj + [n] + ph[::-1][1:] if n != v_j else None
                        if spliced:
                            cands.append(spliced)
                for cand in cands:
                    if len(set(cand)) != len(cand):
                        continue  # concatenation repeated a vertex
                    if cand[0] > cand[-1]:
                        cand = cand[::-1]
                    pair = (cand[0], cand[-1])
                    status = mp.offer(pair, tuple(cand))
                    if status in ("new", "added"):
                        turn_pairs.add(pair)
                        occ.bump(cur.gsk.add_path(cand))
                        occ.bump(other.gsk.add_path(cand))
        path_selection(builder, mp, states, dangling, occ=occ, pairs=turn_pairs,
                       use_selection=use_path_selection, frozen=frozen)
        if trace is not None:
            trace.append(mp.snapshot())
        if builder.all_connected(keywords):
            return builder.to_tree(keywords)
