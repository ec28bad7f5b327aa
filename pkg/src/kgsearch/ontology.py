"""Concept hierarchy, Wu-Palmer similarity, and keyword-set refinement.

Subsumption cycles collapse into strongly connected components (equivalent
concepts); a pseudo-root above every root component makes depth total. A
derivative of a keyword set replaces concepts by descendants; derivatives
are scored by Jaccard-combined Wu-Palmer similarity and explored best-first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import KeywordQuery


class ConceptHierarchy:
    """Condensed subsumption DAG with depths and lowest common ancestors."""

    PSEUDO_ROOT = -1

    def __init__(self, concepts, subsumptions):
        """``concepts``: iterable of concept ids; ``subsumptions``: (child, parent)."""
        self._concepts = set(concepts)
        for c, p in subsumptions:
            self._concepts.add(c)
            self._concepts.add(p)
        edges = [(c, p) for c, p in subsumptions if c in self._concepts]
        self.comp_of, self.members = self._condense(sorted(self._concepts), edges)
        self.parents: dict[int, set[int]] = {c: set() for c in self.members}
        self.children: dict[int, set[int]] = {c: set() for c in self.members}
        for c, p in edges:
            cc, cp = self.comp_of[c], self.comp_of[p]
            if cc != cp:
                self.parents[cc].add(cp)
                self.children[cp].add(cc)
        self.depth = self._depths()
        self._ancestors_cache: dict[int, frozenset[int]] = {}
        self._descendants_cache: dict[int, frozenset[int]] = {}

    @classmethod
    def from_graph(cls, g) -> "ConceptHierarchy":
        return cls(g.concepts(), g.tbox_edges)

    @staticmethod
    def _condense(nodes, edges):
        """Iterative Tarjan; components renumbered by smallest member id."""
        adj: dict[int, list[int]] = {v: [] for v in nodes}
        for c, p in edges:
            adj[c].append(p)
        for v in adj:
            adj[v].sort()
        index: dict[int, int] = {}
        low: dict[int, int] = {}
        on_stack: set[int] = set()
        stack: list[int] = []
        comp_raw: dict[int, int] = {}
        counter = [0]
        comp_count = [0]
        for start in nodes:
            if start in index:
                continue
            work = [(start, 0)]
            while work:
                v, pi = work[-1]
                if pi == 0:
                    index[v] = low[v] = counter[0]
                    counter[0] += 1
                    stack.append(v)
                    on_stack.add(v)
                advanced = False
                for i in range(pi, len(adj[v])):
                    w = adj[v][i]
                    if w not in index:
                        work[-1] = (v, i + 1)
                        work.append((w, 0))
                        advanced = True
                        break
                    if w in on_stack:
                        low[v] = min(low[v], index[w])
                if advanced:
                    continue
                work.pop()
                if low[v] == index[v]:
                    cid = comp_count[0]
                    comp_count[0] += 1
                    while True:
                        w = stack.pop()
                        on_stack.discard(w)
                        comp_raw[w] = cid
                        if w == v:
                            break
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[v])
        members_raw: dict[int, list[int]] = {}
        for v, cid in comp_raw.items():
            members_raw.setdefault(cid, []).append(v)
        order = sorted(members_raw, key=lambda cid: min(members_raw[cid]))
        renumber = {old: new for new, old in enumerate(order)}
        comp_of = {v: renumber[cid] for v, cid in comp_raw.items()}
        members = {renumber[cid]: sorted(vs) for cid, vs in members_raw.items()}
        return comp_of, members

    def _depths(self):
        """Longest path from the pseudo-root, so depth is monotone under subsumption."""
        depth = {self.PSEUDO_ROOT: 0}
        indeg = {c: len(self.parents[c]) for c in self.members}
        ready = sorted(c for c, d in indeg.items() if d == 0)
        queue = list(ready)
        for c in queue:
            depth[c] = 1
        head = 0
        while head < len(queue):
            c = queue[head]
            head += 1
            for ch in sorted(self.children[c]):
                cand = depth[c] + 1
                if cand > depth.get(ch, 0):
                    depth[ch] = cand
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    queue.append(ch)
        return depth

    def __contains__(self, concept: int) -> bool:
        return concept in self.comp_of

    def component(self, concept: int) -> int:
        return self.comp_of[concept]

    def depth_of(self, concept: int) -> int:
        return self.depth[self.comp_of[concept]]

    def ancestors(self, comp: int) -> frozenset[int]:
        """Upward closure of a component, pseudo-root included, itself included."""
        cached = self._ancestors_cache.get(comp)
        if cached is not None:
            return cached
        seen = {comp, self.PSEUDO_ROOT}
        stack = [comp]
        while stack:
            c = stack.pop()
            for p in self.parents.get(c, ()):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        out = frozenset(seen)
        self._ancestors_cache[comp] = out
        return out

    def lca(self, c1: int, c2: int) -> int:
        """Deepest common ancestor component; ties broken by smallest id."""
        common = self.ancestors(self.comp_of[c1]) & self.ancestors(self.comp_of[c2])
        return min(common, key=lambda c: (-self.depth[c], c))

    def descendants(self, concept: int) -> list[int]:
        """Strict descendants (equivalent co-members included), id-sorted."""
        comp = self.comp_of[concept]
        cached = self._descendants_cache.get(comp)
        if cached is None:
            comps = {comp}
            stack = [comp]
            while stack:
                c = stack.pop()
                for ch in self.children.get(c, ()):
                    if ch not in comps:
                        comps.add(ch)
                        stack.append(ch)
            ids = set()
            for c in comps:
                ids.update(self.members[c])
            cached = frozenset(ids)
            self._descendants_cache[comp] = cached
        return sorted(x for x in cached if x != concept)


def wu_palmer(h: ConceptHierarchy, c1: int, c2: int) -> float:
    """2*dep(lca)/(dep(c1)+dep(c2)); equivalent concepts score 1."""
    if c1 not in h or c2 not in h:
        raise KeyError(f"unknown concept: {c1 if c1 not in h else c2}")
    if h.component(c1) == h.component(c2):
        return 1.0
    lca = h.lca(c1, c2)
    d1, d2 = h.depth_of(c1), h.depth_of(c2)
    return 2.0 * h.depth[lca] / (d1 + d2)


def combine_similarity(n: int, k: int, wp_values) -> float:
    """Jaccard-combined score ((n-k) + sum(wp)) / (n+k) for k refined slots."""
    return ((n - k) + sum(wp_values)) / (n + k)


@dataclass(frozen=True)
class Derivative:
    """A keyword set with some concepts replaced by descendants."""

    base: KeywordQuery
    vertex_keywords: tuple[int, ...]
    refined_positions: frozenset[int]
    similarity: float

    @property
    def query(self) -> KeywordQuery:
        return KeywordQuery(self.vertex_keywords, self.base.edge_label_keywords)

    @property
    def is_original(self) -> bool:
        return not self.refined_positions


def keyword_set_similarity(h: ConceptHierarchy, w: KeywordQuery,
                           refined_vertices) -> float:
    """Score a refinement of ``w`` against the original keyword set.

    ``refined_vertices`` aligns positionally with ``w.vertex_keywords``; a
    changed position must hold a descendant of the original concept.
    """
    refined_vertices = tuple(refined_vertices)
    if len(refined_vertices) != len(w.vertex_keywords):
        raise ValueError("refined keyword tuple must align with the original")
    n = len(w.vertex_keywords) + len(w.edge_label_keywords)
    wp_values = []
    for orig, new in zip(w.vertex_keywords, refined_vertices):
        if new == orig:
            continue
        if orig not in h or new not in set(h.descendants(orig)):
            raise ValueError(f"{new} is not a descendant of {orig}")
        wp_values.append(wu_palmer(h, orig, new))
    return combine_similarity(n, len(wp_values), wp_values)


def derivatives(w: KeywordQuery, h: ConceptHierarchy, cap: int = 10_000):
    """All derivatives of ``w`` in best-first order; the original comes first.

    Only vertex keywords that are known concepts are refinable. Returns
    (list, truncated); ``truncated`` reports that the enumeration cap cut
    the product off. Order: similarity descending, then fewer refined
    positions, then lexicographic keyword ids.
    """
    options: list[list[int]] = []
    for t in w.vertex_keywords:
        if t in h:
            options.append([t] + h.descendants(t))
        else:
            options.append([t])
    combos: list[tuple[int, ...]] = []
    truncated = False

    def rec(pos, acc):
        nonlocal truncated
        if truncated:
            return
        if pos == len(options):
            combos.append(tuple(acc))
            if len(combos) >= cap:
                truncated = True
            return
        for choice in options[pos]:
            acc.append(choice)
            rec(pos + 1, acc)
            acc.pop()
            if truncated:
                return

    rec(0, [])
    n = len(w.vertex_keywords) + len(w.edge_label_keywords)
    out = []
    for combo in combos:
        if len(set(combo)) != len(combo):
            continue  # refinement collapsed two keywords onto one vertex
        refined = frozenset(
            i for i, (a, b) in enumerate(zip(w.vertex_keywords, combo)) if a != b
        )
        wp_values = [
            wu_palmer(h, w.vertex_keywords[i], combo[i]) for i in sorted(refined)
        ]
        sim = combine_similarity(n, len(refined), wp_values)
        out.append(Derivative(w, combo, refined, sim))
    out.sort(key=lambda d: (-d.similarity, len(d.refined_positions), d.vertex_keywords))
    return out, truncated
