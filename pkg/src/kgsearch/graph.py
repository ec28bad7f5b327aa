"""Triple ingestion, dictionary encoding, and indexed views of a knowledge graph.

The assertion box splits into three subgraph views (entity-to-entity roles,
entity-to-concept types, entity-to-literal attributes); concept subsumption
axioms form a separate terminology box. All traversal treats assertion edges
as undirected while answers keep the stored orientation and label.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDFS_SUBCLASS_OF = "http://www.w3.org/2000/01/rdf-schema#subClassOf"

DEFAULT_PREFIXES = {
    "rdf": "http://www.w3.org/1999/02/22-rdf-syntax-ns#",
    "rdfs": "http://www.w3.org/2000/01/rdf-schema#",
}

# assertion kinds
KIND_ROLE = 0
KIND_TYPE = 1
KIND_ATTRIBUTE = 2
KIND_TBOX = 3

# subgraph views
VIEW_ROLE = 0
VIEW_TYPE = 1
VIEW_ATTRIBUTE = 2
VIEW_ABOX = 3
ABOX_VIEWS = (VIEW_ROLE, VIEW_TYPE, VIEW_ATTRIBUTE)

DIR_OUT = 0
DIR_IN = 1


class ParseError(Exception):
    """A triple stream could not be parsed in strict mode."""


class IntegrityError(Exception):
    """An index produced data inconsistent with its graph."""


class ParameterError(ValueError):
    """An operation received an out-of-range parameter."""


@dataclass
class PredicateConfig:
    """Which predicate IRIs classify triples into type / subsumption edges."""

    type_pred: str = RDF_TYPE
    subclass_pred: str = RDFS_SUBCLASS_OF
    strict: bool = False


class Dictionary:
    """Bijective term <-> dense id map; ids are assigned in first-seen order."""

    def __init__(self):
        self._terms: list[str] = []
        self._literal: list[bool] = []
        self._index: dict[str, int] = {}

    def __len__(self):
        return len(self._terms)

    def intern(self, term: str, literal: bool = False) -> int:
        tid = self._index.get(term)
        if tid is None:
            tid = len(self._terms)
            self._index[term] = tid
            self._terms.append(term)
            self._literal.append(literal)
        return tid

    def lookup(self, term: str):
        return self._index.get(term)

    def term(self, tid: int) -> str:
        return self._terms[tid]

    def is_literal(self, tid: int) -> bool:
        return self._literal[tid]

    def terms(self):
        return iter(self._terms)


@dataclass(frozen=True)
class KeywordQuery:
    """Vertex keywords (ordered, at least one) plus edge-label keywords."""

    vertex_keywords: tuple[int, ...]
    edge_label_keywords: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if len(self.vertex_keywords) < 1:
            raise ParameterError("a query needs at least one vertex keyword")
        if len(set(self.vertex_keywords)) != len(self.vertex_keywords):
            raise ParameterError("duplicate vertex keywords")


def _parse_term(tok: str):
    """Return (term string, is_literal) for one <iri> or \"literal\" token."""
    if tok.startswith("<") and tok.endswith(">") and len(tok) >= 2:
        return tok[1:-1], False
    if tok.startswith('"') and tok.endswith('"') and len(tok) >= 2:
        body = tok[1:-1]
        out = []
        i = 0
        while i < len(body):
            c = body[i]
            if c == "\\" and i + 1 < len(body):
                nxt = body[i + 1]
                out.append({"n": "\n", "t": "\t", "r": "\r"}.get(nxt, nxt))
                i += 2
            else:
                out.append(c)
                i += 1
        return "".join(out), True
    return None


def _split_triple(line: str):
    """Tokenize one line into three term tokens; None when malformed."""
    toks = []
    i = 0
    n = len(line)
    while i < n:
        c = line[i]
        if c in " \t":
            i += 1
            continue
        if c == "<":
            j = line.find(">", i)
            if j < 0:
                return None
            toks.append(line[i : j + 1])
            i = j + 1
        elif c == '"':
            j = i + 1
            while j < n:
                if line[j] == "\\":
                    j += 2
                    continue
                if line[j] == '"':
                    break
                j += 1
            if j >= n:
                return None
            toks.append(line[i : j + 1])
            i = j + 1
        elif c == ".":
            if len(toks) == 3 and line[i + 1 :].strip() == "":
                return toks
            return None
        else:
            return None
    return None  # no terminating dot


class KnowledgeGraph:
    """Dictionary-encoded edge-labeled multigraph with per-view adjacency.

    Construction deduplicates triples, classifies each into exactly one kind,
    and builds one incidence index (sorted by label then neighbor) and one
    traversal index (unique neighbors, sorted) per view. Instances are
    immutable after construction and safe for concurrent reads.
    """

    def __init__(self, dictionary: Dictionary, triples, config: PredicateConfig | None = None,
                 diagnostics=None):
        self.dictionary = dictionary
        self.config = config or PredicateConfig()
        self.diagnostics = list(diagnostics or [])
        self.type_pred_id = dictionary.lookup(self.config.type_pred)
        self.subclass_pred_id = dictionary.lookup(self.config.subclass_pred)

        seen = set()
        subj, pred, obj, kind = [], [], [], []
        for s, p, o in triples:
            key = (s, p, o)
            if key in seen:
                continue
            seen.add(key)
            subj.append(s)
            pred.append(p)
            obj.append(o)
            kind.append(self._classify(s, p, o))
        self.subj = np.asarray(subj, dtype=np.int64)
        self.pred = np.asarray(pred, dtype=np.int64)
        self.obj = np.asarray(obj, dtype=np.int64)
        self.kind = np.asarray(kind, dtype=np.int64)
        self._edge_set = seen
        self._build_indexes()

    def _classify(self, s, p, o) -> int:
        if self.subclass_pred_id is not None and p == self.subclass_pred_id:
            return KIND_TBOX
        if self.dictionary.is_literal(o):
            return KIND_ATTRIBUTE
        if self.type_pred_id is not None and p == self.type_pred_id:
            return KIND_TYPE
        return KIND_ROLE

    # -- index construction ------------------------------------------------

    def _build_indexes(self):
        n_terms = len(self.dictionary)
        self.num_terms = n_terms
        self._inc = {}
        self._trav = {}
        self._in_view = {}
        for view in (VIEW_ROLE, VIEW_TYPE, VIEW_ATTRIBUTE, VIEW_ABOX):
            if view == VIEW_ABOX:
                rows = np.flatnonzero(self.kind != KIND_TBOX)
            else:
                rows = np.flatnonzero(self.kind == view)
            s = self.subj[rows]
            o = self.obj[rows]
            p = self.pred[rows]
            src = np.concatenate([s, o])
            nbr = np.concatenate([o, s])
            lbl = np.concatenate([p, p])
            drc = np.concatenate([np.zeros(len(rows), np.int64), np.ones(len(rows), np.int64)])
            order = np.lexsort((drc, nbr, lbl, src))
            src, nbr, lbl, drc = src[order], nbr[order], lbl[order], drc[order]
            counts = np.bincount(src, minlength=n_terms) if len(src) else np.zeros(n_terms, np.int64)
            indptr = np.zeros(n_terms + 1, dtype=np.int64)
            np.cumsum(counts, out=indptr[1:])
            self._inc[view] = (indptr, nbr, lbl, drc)
            self._in_view[view] = counts > 0
            if len(src):
                pair_key = src * n_terms + nbr
                uniq = np.unique(pair_key)
                t_src = uniq // n_terms
                t_nbr = uniq % n_terms
            else:
                t_src = np.zeros(0, np.int64)
                t_nbr = np.zeros(0, np.int64)
            t_counts = np.bincount(t_src, minlength=n_terms) if len(t_src) else np.zeros(n_terms, np.int64)
            t_indptr = np.zeros(n_terms + 1, dtype=np.int64)
            np.cumsum(t_counts, out=t_indptr[1:])
            self._trav[view] = (t_indptr, t_nbr.astype(np.int64))
        tb = np.flatnonzero(self.kind == KIND_TBOX)
        self.tbox_edges = list(zip(self.subj[tb].tolist(), self.obj[tb].tolist()))
        self._label_rows = {}
        abox = np.flatnonzero(self.kind != KIND_TBOX)
        for row in abox.tolist():
            self._label_rows.setdefault(int(self.pred[row]), []).append(row)

    # -- lookups -------------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return int(len(self.subj))

    @property
    def num_abox_edges(self) -> int:
        return int(np.count_nonzero(self.kind != KIND_TBOX))

    def num_vertices(self, view=VIEW_ABOX) -> int:
        return int(np.count_nonzero(self._in_view[view]))

    def vertices_in_view(self, view=VIEW_ABOX):
        return np.flatnonzero(self._in_view[view])

    def in_view(self, v, view=VIEW_ABOX) -> bool:
        return 0 <= v < self.num_terms and bool(self._in_view[view][v])

    def neighbors(self, v: int, view=VIEW_ABOX):
        """All incident edges of ``v`` in the view as (label, neighbor, direction).

        Both orientations are reported, each stored edge once, in (label,
        neighbor, direction) order. Unknown vertices yield an empty list.
        """
        if not (0 <= v < self.num_terms):
            return []
        indptr, nbr, lbl, drc = self._inc[view]
        lo, hi = indptr[v], indptr[v + 1]
        return [(int(lbl[i]), int(nbr[i]), int(drc[i])) for i in range(lo, hi)]

    def degree(self, v: int, view=VIEW_ABOX) -> int:
        if not (0 <= v < self.num_terms):
            return 0
        indptr = self._inc[view][0]
        return int(indptr[v + 1] - indptr[v])

    def edge_label_set(self, v: int, view=VIEW_ABOX) -> set[int]:
        """Distinct labels over both incoming and outgoing edges of ``v``."""
        if not (0 <= v < self.num_terms):
            return set()
        indptr, _, lbl, _ = self._inc[view]
        lo, hi = indptr[v], indptr[v + 1]
        return set(int(x) for x in lbl[lo:hi])

    def traversal_csr(self, view=VIEW_ABOX):
        """(indptr, neighbors) with unique undirected neighbors, id-sorted."""
        return self._trav[view]

    def adjacent_vertices(self, v: int, view=VIEW_ABOX):
        if not (0 <= v < self.num_terms):
            return []
        indptr, nbr = self._trav[view]
        return [int(x) for x in nbr[indptr[v] : indptr[v + 1]]]

    def labels_between(self, u: int, v: int, view=VIEW_ABOX):
        """Stored edges between u and v as (label, direction from u), sorted."""
        out = []
        for lbl, nbr, drc in self.neighbors(u, view):
            if nbr == v:
                out.append((lbl, drc))
        return out

    def has_edge(self, s: int, p: int, o: int) -> bool:
        return (s, p, o) in self._edge_set

    def has_any_edge(self, u: int, v: int, view=VIEW_ABOX) -> bool:
        return len(self.labels_between(u, v, view)) > 0

    def resolve_edge(self, u: int, v: int, prefer_labels=None, view=VIEW_ABOX):
        """Pick one stored triple between u and v, preferring given labels.

        Returns (s, p, o) with the stored orientation; smallest label id wins
        within each preference class. None when no edge exists.
        """
        cands = self.labels_between(u, v, view)
        if not cands:
            return None
        chosen = None
        if prefer_labels:
            pref = [c for c in cands if c[0] in prefer_labels]
            if pref:
                chosen = pref[0]
        if chosen is None:
            chosen = cands[0]
        lbl, drc = chosen
        return (u, lbl, v) if drc == DIR_OUT else (v, lbl, u)

    def edges_with_label(self, p: int):
        """All ABox (s, o) pairs carrying label ``p``, in insertion order."""
        rows = self._label_rows.get(p, [])
        return [(int(self.subj[r]), int(self.obj[r])) for r in rows]

    def label_frequency(self, p: int) -> int:
        return len(self._label_rows.get(p, []))

    def is_predicate(self, tid: int) -> bool:
        return tid in self._label_rows or (
            self.subclass_pred_id is not None and tid == self.subclass_pred_id and len(self.tbox_edges) > 0
        )

    def concepts(self) -> set[int]:
        """Concept ids: objects of type assertions plus terminology members."""
        out = set()
        rows = np.flatnonzero(self.kind == KIND_TYPE)
        out.update(int(x) for x in self.obj[rows])
        for c1, c2 in self.tbox_edges:
            out.add(c1)
            out.add(c2)
        return out

    def assertions(self):
        for i in range(self.num_edges):
            yield (int(self.subj[i]), int(self.pred[i]), int(self.obj[i]), int(self.kind[i]))

    def fingerprint(self) -> bytes:
        """Stable content hash of the dictionary and edge table."""
        h = hashlib.sha256()
        for t in self.dictionary.terms():
            h.update(t.encode("utf-8"))
            h.update(b"\x00")
        h.update(self.subj.tobytes())
        h.update(self.pred.tobytes())
        h.update(self.obj.tobytes())
        return h.digest()


def parse_triples(stream, config: PredicateConfig | None = None) -> KnowledgeGraph:
    """Parse a line-oriented triple stream into a KnowledgeGraph.

    Accepts an iterable of str/bytes lines or a file-like object. Lines are
    ``<iri>``/quoted-literal terms terminated by `` .``; ``#`` starts a
    comment line. Malformed lines are recorded as (line_no, message)
    diagnostics and skipped, or raise ParseError in strict mode.
    """
    config = config or PredicateConfig()
    dictionary = Dictionary()
    triples = []
    diagnostics = []
    for line_no, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                if config.strict:
                    raise ParseError(f"line {line_no}: invalid UTF-8") from exc
                diagnostics.append((line_no, "invalid UTF-8"))
                continue
        else:
            line = raw
        line = line.rstrip("\n").rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        toks = _split_triple(line)
        if toks is None:
            if config.strict:
                raise ParseError(f"line {line_no}: malformed triple")
            diagnostics.append((line_no, "malformed triple"))
            continue
        s = _parse_term(toks[0])
        p = _parse_term(toks[1])
        o = _parse_term(toks[2])
        if s is None or p is None or o is None or s[1] or p[1]:
            if config.strict:
                raise ParseError(f"line {line_no}: malformed term")
            diagnostics.append((line_no, "malformed term"))
            continue
        sid = dictionary.intern(s[0], literal=False)
        pid = dictionary.intern(p[0], literal=False)
        oid = dictionary.intern(o[0], literal=o[1])
        triples.append((sid, pid, oid))
    return KnowledgeGraph(dictionary, triples, config, diagnostics)


class GraphBuilder:
    """Convenience builder for fixtures: term strings in, graph out."""

    def __init__(self, config: PredicateConfig | None = None):
        self.config = config or PredicateConfig()
        self.dictionary = Dictionary()
        self.triples: list[tuple[int, int, int]] = []

    def term(self, name: str, literal: bool = False) -> int:
        return self.dictionary.intern(name, literal)

    def add(self, s: str, p: str, o: str, literal_object: bool = False):
        self.triples.append(
            (self.term(s), self.term(p), self.term(o, literal_object))
        )
        return self

    def build(self) -> KnowledgeGraph:
        return KnowledgeGraph(self.dictionary, self.triples, self.config)
