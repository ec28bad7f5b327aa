"""Command-line interface: ingest, query, bench, inspect.

Exit codes for ``query``: 0 answer found as asked, 2 no answer, 3 answer
found after refinement, 1 error.
"""

from __future__ import annotations

import argparse
import difflib
import sys

import numpy as np

from .bench import BenchConfig, generate_queries, run_bench
from .graph import (DEFAULT_PREFIXES, KeywordQuery, ParseError, PredicateConfig,
                    RDF_TYPE, RDFS_SUBCLASS_OF, VIEW_ABOX, VIEW_ATTRIBUTE,
                    VIEW_ROLE, VIEW_TYPE, parse_triples)
from .index_io import IndexFormatError, load_index, store_index
from .mcs import serialize_edges, to_dot
from .pipeline import (RunConfig, STATUS_EMPTY, STATUS_FOUND, STATUS_REFINED,
                       answer_query, build_indexes)

EXIT_FOUND = 0
EXIT_ERROR = 1
EXIT_EMPTY = 2
EXIT_REFINED = 3


def _add_common(p):
    p.add_argument("--radius", "-r", type=int, default=3, help="index BFS radius (default 3)")
    p.add_argument("--rounds", "-k", type=int, default=None,
                   help="sketch rounds per view (default ceil(log2 |V|))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--type-pred", default=RDF_TYPE)
    p.add_argument("--subclass-pred", default=RDFS_SUBCLASS_OF)


def build_parser():
    ap = argparse.ArgumentParser(prog="kgsearch",
                                 description="Keyword search over labeled knowledge graphs")
    sub = ap.add_subparsers(dest="command", required=True)

    p_ing = sub.add_parser("ingest", help="parse triples and build the index file")
    p_ing.add_argument("input", help="triple file (one <s> <p> <o> . per line)")
    p_ing.add_argument("--out", "-o", required=True, help="index file to write")
    p_ing.add_argument("--strict", action="store_true", help="fail on malformed lines")
    _add_common(p_ing)

    p_q = sub.add_parser("query", help="answer a keyword query against an index")
    p_q.add_argument("index", help="index file from ingest")
    p_q.add_argument("keywords", nargs="+", help="IRIs or prefix:name keywords")
    p_q.add_argument("--format", choices=["edges", "dot", "sparql", "bindings"],
                     default=None, help="restrict output to one payload")
    p_q.add_argument("--no-reasoning", action="store_true",
                     help="disable ontology refinement on empty answers")
    p_q.add_argument("--no-patchup", action="store_true")
    p_q.add_argument("--no-path-selection", action="store_true")
    p_q.add_argument("--prefix", action="append", default=[],
                     metavar="NAME=IRI", help="add a prefix mapping (repeatable)")
    p_q.add_argument("--row-limit", type=int, default=10_000)

    p_b = sub.add_parser("bench", help="run the quality/latency harness")
    p_b.add_argument("index")
    p_b.add_argument("--queries", type=int, default=10, help="queries per keyword count")
    p_b.add_argument("--k-values", default="2,4", help="comma list of keyword counts")
    p_b.add_argument("--seed", type=int, default=0)
    p_b.add_argument("--out", "-o", default=None, help="CSV output path")
    p_b.add_argument("--systems", default="full",
                     help="comma list from full,no_patchup,no_pathsel")
    p_b.add_argument("--no-oracle", action="store_true")
    p_b.add_argument("--max-pair-distance", type=int, default=None)
    p_b.add_argument("--stable-output", action="store_true",
                     help="zero the timing column so reruns are byte-identical")

    p_i = sub.add_parser("inspect", help="print index statistics")
    p_i.add_argument("index")
    return ap


def _prefix_map(pairs):
    out = dict(DEFAULT_PREFIXES)
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"bad --prefix {pair!r}, expected NAME=IRI")
        name, iri = pair.split("=", 1)
        out[name] = iri
    return out


def _resolve_keyword(g, raw, prefixes):
    """Map one keyword string to (term id, is_edge_label)."""
    text = raw
    if ":" in raw and not raw.startswith(("http://", "https://", "urn:")):
        name, rest = raw.split(":", 1)
        if name in prefixes:
            text = prefixes[name] + rest
    tid = g.dictionary.lookup(text)
    if tid is None:
        close = difflib.get_close_matches(text, list(g.dictionary.terms()), n=3)
        hint = f"; closest terms: {', '.join(close)}" if close else ""
        raise KeyError(f"keyword {raw!r} not in the dictionary{hint}")
    in_tbox = any(tid == c or tid == p for c, p in g.tbox_edges)
    used_as_vertex = g.in_view(tid, VIEW_ABOX) or in_tbox
    used_as_label = g.is_predicate(tid)
    if used_as_vertex:
        return tid, False
    if used_as_label:
        return tid, True
    return tid, False  # dictionary-only term; treat as vertex keyword


def cmd_ingest(args) -> int:
    config = PredicateConfig(type_pred=args.type_pred, subclass_pred=args.subclass_pred,
                             strict=args.strict)
    try:
        with open(args.input, "rb") as fh:
            g = parse_triples(fh, config)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for line_no, message in g.diagnostics:
        print(f"warning: line {line_no}: {message}", file=sys.stderr)
    run = RunConfig(radius=args.radius, rounds=args.rounds, seed=args.seed,
                    type_pred=args.type_pred, subclass_pred=args.subclass_pred)
    idx = build_indexes(g, run)
    try:
        store_index(args.out, g, idx)
    except OSError as exc:
        print(f"error: cannot write index: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"terms: {len(g.dictionary)}")
    print(f"edges: {g.num_edges} (role {int((g.kind == 0).sum())}, "
          f"type {int((g.kind == 1).sum())}, attribute {int((g.kind == 2).sum())}, "
          f"subsumption {int((g.kind == 3).sum())})")
    print(f"vertices: {g.num_vertices(VIEW_ABOX)}")
    print(f"sketch rounds: {idx.sketches.k} per view, radius {idx.sketches.r}")
    print(f"hub labels: {idx.pll.label_count()}")
    print(f"index written to {args.out}")
    return EXIT_FOUND


def cmd_query(args) -> int:
    try:
        g, idx = load_index(args.index)
    except (OSError, IndexFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        prefixes = _prefix_map(args.prefix)
        vertex_kw = []
        label_kw = []
        for raw in args.keywords:
            tid, is_label = _resolve_keyword(g, raw, prefixes)
            (label_kw if is_label else vertex_kw).append(tid)
        if not vertex_kw:
            raise ValueError("at least one keyword must name a vertex")
        query = KeywordQuery(tuple(vertex_kw), frozenset(label_kw))
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    run = RunConfig(radius=idx.sketches.r, rounds=idx.sketches.k, seed=idx.sketches.seed,
                    use_reasoning=not args.no_reasoning,
                    use_patchup=not args.no_patchup,
                    use_path_selection=not args.no_path_selection,
                    row_limit=args.row_limit,
                    type_pred=g.config.type_pred, subclass_pred=g.config.subclass_pred)
    outcome = answer_query(g, idx, query, run)
    if outcome.status == STATUS_EMPTY:
        if args.format is None:
            print("no answer")
        return EXIT_EMPTY

    keywords = set(outcome.derivative.vertex_keywords)
    if args.format == "edges":
        print(serialize_edges(outcome.mcs, g.dictionary))
    elif args.format == "dot":
        print(to_dot(outcome.mcs, g.dictionary, highlight=keywords))
    elif args.format == "sparql":
        print(outcome.sparql)
    elif args.format == "bindings":
        for row in outcome.answers.rows:
            print("\t".join(g.dictionary.term(v) for v in row))
    else:
        if outcome.status == STATUS_REFINED:
            refined = ", ".join(
                f"{g.dictionary.term(query.vertex_keywords[i])} -> "
                f"{g.dictionary.term(outcome.derivative.vertex_keywords[i])}"
                for i in sorted(outcome.derivative.refined_positions)
            )
            print(f"# refined ({refined}), similarity "
                  f"{outcome.derivative.similarity:.4f}")
        print("# answer subgraph")
        print(serialize_edges(outcome.mcs, g.dictionary))
        print("# query")
        print(outcome.sparql)
        print("# bindings")
        header = "\t".join(f"?{v.name}" for v in outcome.answers.variables)
        if header:
            print(header)
        for row in outcome.answers.rows:
            print("\t".join(g.dictionary.term(v) for v in row))
        if outcome.answers.truncated:
            print("# row limit reached; bindings truncated")
    return EXIT_FOUND if outcome.status == STATUS_FOUND else EXIT_REFINED


def cmd_bench(args) -> int:
    try:
        g, idx = load_index(args.index)
    except (OSError, IndexFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    k_values = tuple(int(x) for x in args.k_values.split(",") if x)
    systems = tuple(s.strip() for s in args.systems.split(",") if s.strip())
    config = BenchConfig(
        queries_per_k=args.queries,
        k_values=k_values,
        seed=args.seed,
        systems=systems,
        with_oracle=not args.no_oracle,
        max_pair_distance=args.max_pair_distance,
        stable_output=args.stable_output,
    )
    rng = np.random.default_rng(args.seed)
    queries = []
    for k in k_values:
        queries.extend(generate_queries(g, args.queries, k, rng,
                                        max_pair_distance=args.max_pair_distance))
    report = run_bench(g, idx, queries, config)
    csv_text = report.to_csv()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
        print(f"wrote {len(report.rows)} rows to {args.out}")
    else:
        print(csv_text, end="")
    print(report.summary())
    return EXIT_FOUND


def cmd_inspect(args) -> int:
    try:
        g, idx = load_index(args.index)
    except (OSError, IndexFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(f"terms: {len(g.dictionary)}")
    print(f"edges: {g.num_edges}")
    for view, name in ((VIEW_ROLE, "role"), (VIEW_TYPE, "type"), (VIEW_ATTRIBUTE, "attribute")):
        print(f"  {name} view: {int((g.kind == view).sum())} edges, "
              f"{g.num_vertices(view)} vertices")
    print(f"subsumption axioms: {len(g.tbox_edges)}")
    print(f"sketches: r={idx.sketches.r} k={idx.sketches.k} seed={idx.sketches.seed}")
    print(f"hub labels: {idx.pll.label_count()} (radius {idx.pll.r})")
    print(f"concepts: {len(idx.hierarchy.comp_of)} in {len(idx.hierarchy.members)} components")
    return EXIT_FOUND


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "ingest": cmd_ingest,
        "query": cmd_query,
        "bench": cmd_bench,
        "inspect": cmd_inspect,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
