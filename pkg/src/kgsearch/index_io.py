"""Binary index file: dictionary, graph, sketches, hub labels, hierarchy.

Layout: magic "RCKG", format version, sha-256 fingerprint of the graph
content, then length-prefixed crc-checked sections with varint-encoded ids.
Loading rejects version mismatches, checksum failures, and fingerprint
drift between the stored graph and the stored indexes.
"""

from __future__ import annotations

import zlib

import numpy as np

from .graph import Dictionary, KnowledgeGraph, PredicateConfig
from .ontology import ConceptHierarchy
from .pipeline import Indexes, RunConfig
from .pll import PllIndex
from .sketch import SketchIndex

MAGIC = b"RCKG"
VERSION = 1

SEC_DICT = 1
SEC_GRAPH = 2
SEC_SKETCH = 3
SEC_PLL = 4
SEC_HIER = 5


class IndexFormatError(Exception):
    pass


class Writer:
    def __init__(self):
        self.buf = bytearray()

    def varint(self, value: int):
        v = int(value)
        if v < 0:
            raise ValueError("varint requires non-negative input")
        while True:
            b = v & 0x7F
            v >>= 7
            if v:
                self.buf.append(b | 0x80)
            else:
                self.buf.append(b)
                return

    def signed(self, value: int):
        # offset by one so -1 sentinels stay cheap
        self.varint(int(value) + 1)

    def text(self, s: str):
        raw = s.encode("utf-8")
        self.varint(len(raw))
        self.buf.extend(raw)

    def raw(self, data: bytes):
        self.buf.extend(data)


class Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def varint(self) -> int:
        out = 0
        shift = 0
        while True:
            if self.pos >= len(self.data):
                raise IndexFormatError("truncated varint")
            b = self.data[self.pos]
            self.pos += 1
            out |= (b & 0x7F) << shift
            if not b & 0x80:
                return out
            shift += 7

    def signed(self) -> int:
        return self.varint() - 1

    def text(self) -> str:
        n = self.varint()
        raw = self.data[self.pos : self.pos + n]
        if len(raw) != n:
            raise IndexFormatError("truncated text")
        self.pos += n
        return raw.decode("utf-8")

    def raw(self, n: int) -> bytes:
        out = self.data[self.pos : self.pos + n]
        if len(out) != n:
            raise IndexFormatError("truncated data")
        self.pos += n
        return out


def _section(out: bytearray, sec_id: int, payload: bytes):
    head = Writer()
    head.varint(sec_id)
    head.varint(len(payload))
    head.varint(zlib.crc32(payload))
    out.extend(head.buf)
    out.extend(payload)


def _write_dictionary(d: Dictionary) -> bytes:
    w = Writer()
    w.varint(len(d))
    for tid in range(len(d)):
        w.varint(1 if d.is_literal(tid) else 0)
        w.text(d.term(tid))
    return bytes(w.buf)


def _write_graph(g: KnowledgeGraph) -> bytes:
    w = Writer()
    w.text(g.config.type_pred)
    w.text(g.config.subclass_pred)
    w.varint(g.num_edges)
    for arr in (g.subj, g.pred, g.obj):
        for v in arr.tolist():
            w.varint(v)
    return bytes(w.buf)


def _write_array(w: Writer, arr):
    for v in arr.tolist():
        w.signed(v)


def _write_sketches(idx: SketchIndex) -> bytes:
    w = Writer()
    w.varint(idx.r)
    w.varint(idx.k)
    w.varint(idx.seed)
    views = sorted(idx.rounds)
    w.varint(len(views))
    for view in views:
        w.varint(view)
        w.varint(len(idx.rounds[view]))
        for landmark, parent, dist in idx.rounds[view]:
            w.varint(len(landmark))
            _write_array(w, landmark)
            _write_array(w, parent)
            _write_array(w, dist)
        used = sorted(idx.used[view])
        w.varint(len(used))
        for v in used:
            w.varint(v)
    return bytes(w.buf)


def _write_pll(idx: PllIndex) -> bytes:
    w = Writer()
    w.varint(idx.r)
    n = len(idx.lab_indptr) - 1
    w.varint(n)
    _write_array(w, idx.order)
    for v in range(n):
        lo, hi = int(idx.lab_indptr[v]), int(idx.lab_indptr[v + 1])
        w.varint(hi - lo)
        prev = 0
        for i in range(lo, hi):
            hub = int(idx.lab_hub[i])
            w.varint(hub - prev)  # hubs sorted per vertex
            prev = hub
            w.varint(int(idx.lab_dist[i]))
            w.signed(int(idx.lab_pred[i]))
    return bytes(w.buf)


def _write_hierarchy(h: ConceptHierarchy) -> bytes:
    w = Writer()
    concepts = sorted(h.comp_of)
    w.varint(len(concepts))
    for c in concepts:
        w.varint(c)
        w.varint(h.comp_of[c])
    comps = sorted(h.members)
    w.varint(len(comps))
    for c in comps:
        w.varint(c)
        w.varint(h.depth[c])
        parents = sorted(h.parents[c])
        w.varint(len(parents))
        for p in parents:
            w.varint(p)
    return bytes(w.buf)


def store_index(path, g: KnowledgeGraph, idx: Indexes):
    data = bytearray()
    data.extend(MAGIC)
    head = Writer()
    head.varint(VERSION)
    data.extend(head.buf)
    data.extend(g.fingerprint())
    _section(data, SEC_DICT, _write_dictionary(g.dictionary))
    _section(data, SEC_GRAPH, _write_graph(g))
    _section(data, SEC_SKETCH, _write_sketches(idx.sketches))
    _section(data, SEC_PLL, _write_pll(idx.pll))
    _section(data, SEC_HIER, _write_hierarchy(idx.hierarchy))
    with open(path, "wb") as fh:
        fh.write(bytes(data))


def _read_sections(data: bytes):
    if data[:4] != MAGIC:
        raise IndexFormatError("bad magic; not an index file")
    r = Reader(data)
    r.pos = 4
    version = r.varint()
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version}")
    fingerprint = r.raw(32)
    sections = {}
    while r.pos < len(data):
        sec_id = r.varint()
        length = r.varint()
        crc = r.varint()
        payload = r.raw(length)
        if zlib.crc32(payload) != crc:
            raise IndexFormatError(f"section {sec_id} failed its checksum")
        sections[sec_id] = payload
    return fingerprint, sections


def load_index(path):
    """Load (graph, indexes) and verify checksums plus the graph fingerprint."""
    with open(path, "rb") as fh:
        data = fh.read()
    fingerprint, sections = _read_sections(data)
    for required in (SEC_DICT, SEC_GRAPH, SEC_SKETCH, SEC_PLL, SEC_HIER):
        if required not in sections:
            raise IndexFormatError(f"missing section {required}")

    r = Reader(sections[SEC_DICT])
    dictionary = Dictionary()
    n_terms = r.varint()
    for _ in range(n_terms):
        literal = r.varint() == 1
        dictionary.intern(r.text(), literal)

    r = Reader(sections[SEC_GRAPH])
    type_pred = r.text()
    subclass_pred = r.text()
    n_edges = r.varint()
    subj = [r.varint() for _ in range(n_edges)]
    pred = [r.varint() for _ in range(n_edges)]
    obj = [r.varint() for _ in range(n_edges)]
    config = PredicateConfig(type_pred=type_pred, subclass_pred=subclass_pred)
    g = KnowledgeGraph(dictionary, list(zip(subj, pred, obj)), config)
    if g.fingerprint() != fingerprint:
        raise IndexFormatError("graph fingerprint mismatch")

    r = Reader(sections[SEC_SKETCH])
    sk_r = r.varint()
    sk_k = r.varint()
    sk_seed = r.varint()
    sketches = SketchIndex(g, sk_r, sk_k, sk_seed)
    n_views = r.varint()
    for _ in range(n_views):
        view = r.varint()
        n_rounds = r.varint()
        rounds = []
        for _ in range(n_rounds):
            n = r.varint()
            landmark = np.array([r.signed() for _ in range(n)], dtype=np.int64)
            parent = np.array([r.signed() for _ in range(n)], dtype=np.int64)
            dist = np.array([r.signed() for _ in range(n)], dtype=np.int64)
            rounds.append((landmark, parent, dist))
        sketches.rounds[view] = rounds
        n_used = r.varint()
        sketches.used[view] = {r.varint() for _ in range(n_used)}

    r = Reader(sections[SEC_PLL])
    pll_r = r.varint()
    n = r.varint()
    order = np.array([r.signed() for _ in range(n)], dtype=np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    hubs, dists, preds = [], [], []
    for v in range(n):
        cnt = r.varint()
        indptr[v + 1] = indptr[v] + cnt
        prev = 0
        for _ in range(cnt):
            prev += r.varint()
            hubs.append(prev)
            dists.append(r.varint())
            preds.append(r.signed())
    pll = PllIndex(
        g, pll_r, indptr,
        np.array(hubs, dtype=np.int64),
        np.array(dists, dtype=np.int64),
        np.array(preds, dtype=np.int64),
        order,
    )

    r = Reader(sections[SEC_HIER])
    n_concepts = r.varint()
    comp_of = {}
    for _ in range(n_concepts):
        c = r.varint()
        comp_of[c] = r.varint()
    n_comps = r.varint()
    depth = {ConceptHierarchy.PSEUDO_ROOT: 0}
    parents = {}
    for _ in range(n_comps):
        c = r.varint()
        depth[c] = r.varint()
        parents[c] = {r.varint() for _ in range(r.varint())}
    hierarchy = ConceptHierarchy.__new__(ConceptHierarchy)
    hierarchy._concepts = set(comp_of)
    hierarchy.comp_of = comp_of
    members: dict[int, list[int]] = {}
    for c, comp in comp_of.items():
        members.setdefault(comp, []).append(c)
    hierarchy.members = {comp: sorted(vs) for comp, vs in members.items()}
    hierarchy.parents = parents
    children: dict[int, set[int]] = {c: set() for c in parents}
    for c, ps in parents.items():
        for p in ps:
            children.setdefault(p, set()).add(c)
    hierarchy.children = children
    hierarchy.depth = depth
    hierarchy._ancestors_cache = {}
    hierarchy._descendants_cache = {}

    return g, Indexes(sketches, pll, hierarchy)
