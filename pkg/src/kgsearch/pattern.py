"""Conjunctive graph patterns: generation, union rewriting, evaluation, text.

An answer subgraph becomes a basic graph pattern by keeping keyword vertices
as constants and turning every other vertex into a variable. Equally-similar
refinements rewrite into additional UNION branches. The evaluator is a
backtracking join over the in-memory graph, most selective pattern first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import DIR_IN, DIR_OUT, VIEW_ABOX
from .mcs import Mcs, _term


@dataclass(frozen=True, order=True)
class Var:
    index: int

    @property
    def name(self) -> str:
        return f"v{self.index}"


@dataclass(frozen=True)
class GraphPattern:
    """One or more triple-pattern branches sharing a variable projection."""

    branches: tuple[tuple[tuple, ...], ...]
    variables: tuple[Var, ...]
    constants: frozenset[int] = field(default_factory=frozenset)

    @property
    def base(self):
        return self.branches[0]


@dataclass
class AnswerSet:
    """Deduplicated binding rows plus one instantiated subgraph per row."""

    variables: tuple[Var, ...]
    rows: list[tuple[int, ...]]
    mcs_instances: list[Mcs]
    truncated: bool = False


def generate_pattern(mcs: Mcs, keyword_vertices) -> GraphPattern:
    """Turn an answer subgraph into a pattern, constants at keyword vertices.

    Variables are numbered by first appearance over the sorted edge list so
    identical subgraphs always serialize identically.
    """
    keywords = set(keyword_vertices)
    var_of: dict[int, Var] = {}

    def encode(v: int):
        if v in keywords:
            return v
        var = var_of.get(v)
        if var is None:
            var = Var(len(var_of))
            var_of[v] = var
        return var

    patterns = []
    for s, p, o in sorted(mcs.edges):
        patterns.append((encode(s), p, encode(o)))
    return GraphPattern(
        branches=(tuple(patterns),),
        variables=tuple(sorted(var_of.values(), key=lambda v: v.index)),
        constants=frozenset(keywords & mcs.vertices),
    )


def rewrite_with_union(pattern: GraphPattern, substitutions, type_pred: int) -> GraphPattern:
    """Append one branch per substitution map, applied to type constraints.

    Each map sends a winning concept id to a peer concept id; only objects of
    type-predicate patterns are rewritten, so entity constants stay fixed.
    """
    if not substitutions:
        return pattern
    branches = list(pattern.branches)
    for sub in substitutions:
        branch = []
        for s, p, o in pattern.base:
            if p == type_pred and not isinstance(o, Var) and o in sub:
                branch.append((s, p, sub[o]))
            else:
                branch.append((s, p, o))
        branches.append(tuple(branch))
    return GraphPattern(tuple(branches), pattern.variables, pattern.constants)


def _pattern_selectivity(g, tp):
    s, p, o = tp
    rows = g.edges_with_label(p)
    n = 0
    for es, eo in rows:
        if not isinstance(s, Var) and es != s:
            continue
        if not isinstance(o, Var) and eo != o:
            continue
        n += 1
    return n


def _order_branch(g, branch):
    """Most selective first, then grow along shared variables."""
    remaining = list(branch)
    if not remaining:
        return []
    costs = {tp: (_pattern_selectivity(g, tp), branch.index(tp)) for tp in remaining}
    ordered = []
    bound: set[Var] = set()

    def tp_vars(tp):
        return {t for t in (tp[0], tp[2]) if isinstance(t, Var)}

    while remaining:
        connected = [tp for tp in remaining if not tp_vars(tp) or tp_vars(tp) & bound]
        pool = connected if connected else remaining
        nxt = min(pool, key=lambda tp: costs[tp])
        ordered.append(nxt)
        remaining.remove(nxt)
        bound |= tp_vars(nxt)
    return ordered


def _match_one(g, tp, binding):
    """Yield bindings extending ``binding`` to satisfy one triple pattern."""
    s, p, o = tp
    sv = binding.get(s) if isinstance(s, Var) else s
    ov = binding.get(o) if isinstance(o, Var) else o
    if sv is not None and ov is not None:
        if g.has_edge(sv, p, ov):
            yield binding
        return
    if sv is not None:
        for lbl, nbr, drc in g.neighbors(sv, VIEW_ABOX):
            if lbl == p and drc == DIR_OUT:
                nb = dict(binding)
                nb[o] = nbr
                yield nb
        return
    if ov is not None:
        for lbl, nbr, drc in g.neighbors(ov, VIEW_ABOX):
            if lbl == p and drc == DIR_IN:
                nb = dict(binding)
                nb[s] = nbr
                yield nb
        return
    for es, eo in g.edges_with_label(p):
        nb = dict(binding)
        nb[s] = es
        if nb.get(o, eo) != eo:
            continue
        nb[o] = eo
        yield nb


def evaluate_pattern(pattern: GraphPattern, g, row_limit: int = 10_000) -> AnswerSet:
    """Backtracking join of every branch; rows deduplicated and sorted."""
    rows: dict[tuple[int, ...], int] = {}
    truncated = False
    for branch_no, branch in enumerate(pattern.branches):
        ordered = _order_branch(g, branch)

        def join(depth, binding):
            nonlocal truncated
            if truncated:
                return
            if depth == len(ordered):
                row = tuple(binding.get(v, -1) for v in pattern.variables)
                if row not in rows:
                    if len(rows) >= row_limit:
                        truncated = True
                        return
                    rows[row] = branch_no
                return
            for nb in _match_one(g, ordered[depth], binding):
                join(depth + 1, nb)
                if truncated:
                    return

        join(0, {})
    sorted_rows = sorted(rows)
    instances = []
    for row in sorted_rows:
        branch = pattern.branches[rows[row]]
        binding = dict(zip(pattern.variables, row))
        verts = set()
        edges = set()
        for s, p, o in branch:
            vs = binding[s] if isinstance(s, Var) else s
            vo = binding[o] if isinstance(o, Var) else o
            verts.add(vs)
            verts.add(vo)
            edges.add((vs, p, vo))
        verts |= pattern.constants
        instances.append(Mcs(verts, edges, backbone=None))
    return AnswerSet(pattern.variables, sorted_rows, instances, truncated)


def serialize_sparql(pattern: GraphPattern, dictionary) -> str:
    """Deterministic SELECT text with one UNION block per extra branch."""

    def term(t) -> str:
        if isinstance(t, Var):
            return f"?{t.name}"
        return _term(dictionary, t)

    def bgp(branch, indent) -> list[str]:
        pad = " " * indent
        return [f"{pad}{term(s)} {term(p)} {term(o)} ." for s, p, o in branch]

    proj = " ".join(f"?{v.name}" for v in pattern.variables) if pattern.variables else "*"
    lines = [f"SELECT {proj} WHERE {{"]
    if len(pattern.branches) == 1:
        lines.extend(bgp(pattern.base, 2))
    else:
        blocks = []
        for branch in pattern.branches:
            blocks.append("  {\n" + "\n".join(bgp(branch, 4)) + "\n  }")
        lines.append("\n  UNION\n".join(blocks))
    lines.append("}")
    return "\n".join(lines)


class SparqlParseError(Exception):
    pass


def _tokenize_sparql(text: str):
    toks = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c == "<":
            j = text.find(">", i)
            if j < 0:
                raise SparqlParseError("unterminated IRI")
            toks.append(("iri", text[i + 1 : j]))
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n and (text[j] != '"' or text[j - 1] == "\\"):
                j += 1
            if j >= n:
                raise SparqlParseError("unterminated literal")
            raw = text[i + 1 : j]
            out = []
            k = 0
            while k < len(raw):
                if raw[k] == "\\" and k + 1 < len(raw):
                    out.append({"n": "\n", "t": "\t", "r": "\r"}.get(raw[k + 1], raw[k + 1]))
                    k += 2
                else:
                    out.append(raw[k])
                    k += 1
            toks.append(("lit", "".join(out)))
            i = j + 1
        elif c == "?":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(("var", text[i + 1 : j]))
            i = j
        elif c in "{}.":
            toks.append((c, c))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "{}.":
                j += 1
            toks.append(("word", text[i:j]))
            i = j
    return toks


def parse_sparql(text: str, dictionary) -> GraphPattern:
    """Parse text produced by ``serialize_sparql`` back into a pattern."""
    toks = _tokenize_sparql(text)
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(toks):
            raise SparqlParseError("unexpected end of input")
        tok = toks[pos]
        pos += 1
        return tok

    def expect(kind, value=None):
        tok = take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            raise SparqlParseError(f"unexpected token {tok}")
        return tok

    expect("word", "SELECT")
    variables = []
    while pos < len(toks) and toks[pos] != ("word", "WHERE"):
        kind, val = take()
        if kind == "var":
            variables.append(Var(int(val[1:])))
        elif not (kind == "word" and val == "*"):
            raise SparqlParseError(f"unexpected projection token {val}")
    expect("word", "WHERE")
    expect("{")

    def term_of(tok):
        kind, val = tok
        if kind == "var":
            return Var(int(val[1:]))
        if kind in ("iri", "lit"):
            tid = dictionary.lookup(val)
            if tid is None:
                raise SparqlParseError(f"unknown term {val!r}")
            return tid
        raise SparqlParseError(f"unexpected term token {tok}")

    def parse_bgp_until_close():
        patterns = []
        while toks[pos][0] != "}":
            s = term_of(take())
            p = term_of(take())
            o = term_of(take())
            expect(".")
            patterns.append((s, p, o))
        expect("}")
        return tuple(patterns)

    branches = []
    if toks[pos][0] == "{":
        while pos < len(toks) and toks[pos][0] == "{":
            expect("{")
            branches.append(parse_bgp_until_close())
            if pos < len(toks) and toks[pos] == ("word", "UNION"):
                pos += 1
        expect("}")
    else:
        branches.append(parse_bgp_until_close())
    if pos != len(toks):
        raise SparqlParseError("trailing tokens")
    return GraphPattern(tuple(branches), tuple(variables), _collect_constants(branches))


def _collect_constants(branches):
    out = set()
    for branch in branches:
        for s, _, o in branch:
            if not isinstance(s, Var):
                out.add(s)
            if not isinstance(o, Var):
                out.add(o)
    return frozenset(out)
