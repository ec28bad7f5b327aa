"""Keyword search over edge-labeled knowledge graphs.

Offline, the graph is indexed with per-vertex landmark sketches and a
radius-restricted hub-labeling index. Online, keyword queries are answered
with approximate minimum connected subgraphs; when the keywords cannot be
connected, the query is refined along the concept hierarchy and the best
refinement's answers are returned.
"""

from .graph import (Dictionary, KeywordQuery, KnowledgeGraph, PredicateConfig,
                    parse_triples)
from .pipeline import Indexes, QueryOutcome, RunConfig, answer_query, build_indexes

__version__ = "0.1.0"

__all__ = [
    "Dictionary",
    "KeywordQuery",
    "KnowledgeGraph",
    "PredicateConfig",
    "parse_triples",
    "Indexes",
    "QueryOutcome",
    "RunConfig",
    "answer_query",
    "build_indexes",
    "__version__",
]
