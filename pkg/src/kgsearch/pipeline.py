"""End-to-end wiring: offline index construction and online query answering.

Offline builds the sketch and hub-label indexes plus the concept hierarchy.
Online tries the query as given; when no connected answer exists and
reasoning is enabled, refinements are attempted best-first, the winner's
pattern is rewritten with UNION branches for its equal-similarity peers, and
the pattern is evaluated against the in-memory graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graph import KeywordQuery, RDF_TYPE, RDFS_SUBCLASS_OF, VIEW_ABOX
from .mcs import Mcs, build_mcs
from .ontology import ConceptHierarchy, Derivative, derivatives
from .pattern import (AnswerSet, GraphPattern, evaluate_pattern, generate_pattern,
                      rewrite_with_union, serialize_sparql)
from .pll import PllIndex, build_pll
from .sketch import SketchIndex, build_sketches, default_rounds
from .steiner import OccurrenceMap, build_st, ck_patchup, init_search_states, kk_patchup

STATUS_FOUND = "found"
STATUS_EMPTY = "empty"
STATUS_REFINED = "refined-found"


@dataclass
class RunConfig:
    """Tunables shared by the CLI and the library entry points."""

    radius: int = 3
    rounds: int | None = None  # None: ceil(log2 |V|)
    seed: int = 0
    type_pred: str = RDF_TYPE
    subclass_pred: str = RDFS_SUBCLASS_OF
    max_occ_batch: int = 32
    derivative_cap: int = 10_000
    row_limit: int = 10_000
    use_reasoning: bool = True
    use_patchup: bool = True
    use_path_selection: bool = True


@dataclass
class Indexes:
    sketches: SketchIndex
    pll: PllIndex
    hierarchy: ConceptHierarchy

    @property
    def rounds(self) -> int:
        return self.sketches.k


def build_indexes(g, config: RunConfig | None = None) -> Indexes:
    config = config or RunConfig()
    k = config.rounds or default_rounds(g.num_vertices(VIEW_ABOX))
    sketches = build_sketches(g, r=config.radius, k=k, seed=config.seed)
    pll = build_pll(g, r=config.radius)
    hierarchy = ConceptHierarchy.from_graph(g)
    return Indexes(sketches, pll, hierarchy)


def compute_st(g, idx: Indexes, query: KeywordQuery, config: RunConfig | None = None,
               trace=None):
    """Patch the keyword sketches and build the answer backbone."""
    config = config or RunConfig()
    states = init_search_states(idx.sketches, query.vertex_keywords)
    if config.use_patchup:
        kk_patchup(states, idx.pll)
        occ = OccurrenceMap.from_states(states)
        ck_patchup(states, idx.pll, occ, max_batch=config.max_occ_batch)
    return build_st(g, states, query.edge_label_keywords,
                    use_path_selection=config.use_path_selection, trace=trace)


def compute_mcs(g, idx: Indexes, query: KeywordQuery, config: RunConfig | None = None):
    """Backbone plus dangling-label completion; (tree, mcs), either may be None."""
    config = config or RunConfig()
    tree = compute_st(g, idx, query, config)
    if tree is None:
        return None, None
    return tree, build_mcs(tree, query.edge_label_keywords, g)


@dataclass
class QueryOutcome:
    status: str
    derivative: Derivative | None = None
    tree: object = None
    mcs: Mcs | None = None
    pattern: GraphPattern | None = None
    sparql: str | None = None
    answers: AnswerSet | None = None
    tried: int = 0
    derivatives_truncated: bool = False

    @property
    def found(self) -> bool:
        return self.status != STATUS_EMPTY


def answer_query(g, idx: Indexes, query: KeywordQuery,
                 config: RunConfig | None = None) -> QueryOutcome:
    """Best-first refinement loop with a first-hit stop condition.

    Refinements are dequeued by descending similarity; the first one whose
    subgraph covers every keyword wins, its pattern gains UNION branches for
    the not-yet-tried refinements of equal similarity, and the evaluated
    bindings are reformatted into one answer subgraph per row.
    """
    config = config or RunConfig()
    if config.use_reasoning:
        derivs, truncated = derivatives(query, idx.hierarchy, cap=config.derivative_cap)
    else:
        derivs, truncated = (
            [Derivative(query, query.vertex_keywords, frozenset(), 1.0)],
            False,
        )
    winner = None
    winner_mcs = None
    winner_tree = None
    tried = 0
    for pos, deriv in enumerate(derivs):
        tried += 1
        tree, mcs = compute_mcs(g, idx, deriv.query, config)
        if tree is not None and mcs is not None and mcs.complete:
            winner = deriv
            winner_mcs = mcs
            winner_tree = tree
            break
    if winner is None:
        return QueryOutcome(status=STATUS_EMPTY, tried=tried,
                            derivatives_truncated=truncated)
    peers = [
        d for d in derivs[pos + 1 :]
        if math.isclose(d.similarity, winner.similarity, rel_tol=0, abs_tol=1e-12)
    ]
    pattern = generate_pattern(winner_mcs, winner.vertex_keywords)
    substitutions = []
    for peer in peers:
        sub = {
            winner.vertex_keywords[i]: peer.vertex_keywords[i]
            for i in range(len(winner.vertex_keywords))
            if winner.vertex_keywords[i] != peer.vertex_keywords[i]
        }
        if sub:
            substitutions.append(sub)
    type_pred = g.type_pred_id if g.type_pred_id is not None else -1
    pattern = rewrite_with_union(pattern, substitutions, type_pred)
    sparql = serialize_sparql(pattern, g.dictionary)
    answers = evaluate_pattern(pattern, g, row_limit=config.row_limit)
    status = STATUS_FOUND if winner.is_original else STATUS_REFINED
    return QueryOutcome(
        status=status,
        derivative=winner,
        tree=winner_tree,
        mcs=winner_mcs,
        pattern=pattern,
        sparql=sparql,
        answers=answers,
        tried=tried,
        derivatives_truncated=truncated,
    )
