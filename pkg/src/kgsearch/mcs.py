"""Extend a Steiner tree into a minimum connected subgraph.

Edge-label keywords not already on a tree edge ("dangling") are located by a
level-synchronous search fanning out from every tree vertex in round-robin
rotation; the first edge carrying a wanted label pulls its whole path from
the seeding tree vertex into the answer.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .graph import DIR_OUT, VIEW_ABOX
from .steiner import SteinerTree


@dataclass
class Mcs:
    """Answer subgraph: the tree backbone plus dangling-label paths."""

    vertices: set[int]
    edges: set[tuple[int, int, int]]
    backbone: SteinerTree | None
    covered_labels: set[int] = field(default_factory=set)
    residual_labels: set[int] = field(default_factory=set)

    @property
    def complete(self) -> bool:
        return not self.residual_labels

    @property
    def size(self) -> int:
        return len(self.vertices) + len(self.edges)


def covered_labels(tree: SteinerTree, edge_label_keywords) -> set[int]:
    """Which queried labels already appear on tree edges."""
    wanted = set(edge_label_keywords)
    if not wanted:
        return set()
    present = {p for _, p, _ in tree.edges}
    return wanted & present


def build_mcs(tree: SteinerTree, edge_label_keywords, g) -> Mcs:
    """Cover dangling labels by breadth-first search from all tree vertices.

    Seeds rotate in ascending id order, scanning one vertex per turn; each
    graph vertex is scanned by whichever seed search reaches it first. When a
    scanned vertex has an incident edge with a dangling label, the path from
    the owning seed to the far endpoint joins the subgraph. A partial result
    carries whatever labels the exhausted search never found.
    """
    wanted = set(edge_label_keywords)
    mcs = Mcs(
        vertices=set(tree.vertices),
        edges=set(tree.edges),
        backbone=tree,
        covered_labels=covered_labels(tree, wanted),
    )
    dangling = wanted - mcs.covered_labels
    if not dangling:
        return mcs

    seeds = sorted(tree.vertices)
    seed_set = set(seeds)
    queues = {s: deque([s]) for s in seeds}
    parents = {s: {s: None} for s in seeds}
    scanned: set[int] = set()

    def insert_path(seed, v_curr):
        chain = [v_curr]
        while parents[seed][chain[-1]] is not None:
            chain.append(parents[seed][chain[-1]])
        chain.reverse()  # seed .. v_curr
        for a, b in zip(chain, chain[1:]):
            triple = g.resolve_edge(a, b, prefer_labels=dangling)
            mcs.vertices.add(a)
            mcs.vertices.add(b)
            if triple is not None and triple not in mcs.edges:
                mcs.edges.add(triple)
                if triple[1] in dangling:
                    dangling.discard(triple[1])
                    mcs.covered_labels.add(triple[1])

    live = True
    while dangling and live:
        live = False
        for seed in seeds:
            if not dangling:
                break
            q = queues[seed]
            v_curr = None
            while q:
                cand = q.popleft()
                if cand not in scanned:
                    v_curr = cand
                    break
            if v_curr is None:
                continue
            live = True
            scanned.add(v_curr)
            for lbl, nbr, drc in g.neighbors(v_curr, VIEW_ABOX):
                if lbl in dangling:
                    insert_path(seed, v_curr)
                    triple = (v_curr, lbl, nbr) if drc == DIR_OUT else (nbr, lbl, v_curr)
                    mcs.vertices.add(nbr)
                    mcs.edges.add(triple)
                    dangling.discard(lbl)
                    mcs.covered_labels.add(lbl)
                    if not dangling:
                        break
            for nbr in g.adjacent_vertices(v_curr, VIEW_ABOX):
                if nbr in seed_set or nbr in scanned or nbr in parents[seed]:
                    continue
                parents[seed][nbr] = v_curr
                q.append(nbr)
    mcs.residual_labels = dangling
    return mcs


def serialize_edges(mcs: Mcs, dictionary) -> str:
    """Deterministic one-triple-per-line text, sorted, parser round-trippable."""
    lines = []
    for s, p, o in sorted(mcs.edges):
        lines.append(f"{_term(dictionary, s)} {_term(dictionary, p)} {_term(dictionary, o)} .")
    return "\n".join(lines)


def to_dot(mcs: Mcs, dictionary, highlight=()) -> str:
    """DOT digraph of the subgraph; ``highlight`` ids render filled."""
    hl = set(highlight)
    lines = ["digraph answer {"]
    for v in sorted(mcs.vertices):
        name = _dot_escape(dictionary.term(v))
        style = ' style="filled" fillcolor="lightgray"' if v in hl else ""
        lines.append(f'  n{v} [label="{name}"{style}];')
    for s, p, o in sorted(mcs.edges):
        lines.append(f'  n{s} -> n{o} [label="{_dot_escape(dictionary.term(p))}"];')
    lines.append("}")
    return "\n".join(lines)


def _term(dictionary, tid: int) -> str:
    text = dictionary.term(tid)
    if dictionary.is_literal(tid):
        body = text.replace("\\", "\\\\").replace('"', '\\"')
        body = body.replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")
        return f'"{body}"'
    return f"<{text}>"


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
