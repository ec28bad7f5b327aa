import numpy as np
import pytest

from kgsearch.graph import (DIR_IN, DIR_OUT, Dictionary, GraphBuilder, KIND_ATTRIBUTE,
                            KIND_ROLE, KIND_TBOX, KIND_TYPE, ParseError,
                            PredicateConfig, VIEW_ABOX, VIEW_ROLE, parse_triples)

from conftest import TEST_CONFIG, random_role_graph


def parse(text, **kw):
    return parse_triples(text.splitlines(), PredicateConfig(
        type_pred="type", subclass_pred="subClassOf", **kw))


def test_subclass_line_is_tbox():
    g = parse("<a> <subClassOf> <b> .")
    assert g.num_edges == 1
    assert g.kind.tolist() == [KIND_TBOX]
    assert g.tbox_edges == [(0, 2)]


def test_example_fragment_classification():
    g = parse("<BMW_M43> <type> <AutomobileEngine> .\n"
              "<BMW_M40> <successor> <BMW_M43> .")
    kinds = sorted(g.kind.tolist())
    assert kinds == [KIND_ROLE, KIND_TYPE]


def test_empty_stream():
    g = parse("")
    assert g.num_edges == 0
    assert g.num_vertices() == 0
    assert len(g.dictionary) == 0


def test_malformed_line_reported_and_skipped():
    g = parse("<a> <p> <b> .\nnot a triple\n<c> <p> <d> .")
    assert g.num_edges == 2
    assert g.diagnostics == [(2, "malformed triple")]


def test_strict_mode_raises():
    with pytest.raises(ParseError):
        parse("junk .", strict=True)


def test_comments_and_blank_lines_skipped():
    g = parse("# header\n\n<a> <p> <b> .\n   \n")
    assert g.num_edges == 1


def test_literal_objects_become_attributes():
    g = parse('<a> <p> "hello \\"quoted\\" world" .')
    assert g.kind.tolist() == [KIND_ATTRIBUTE]
    assert g.dictionary.term(2) == 'hello "quoted" world'
    assert g.dictionary.is_literal(2)


def test_duplicate_triples_collapse():
    g = parse("<a> <p> <b> .\n<a> <p> <b> .")
    assert g.num_edges == 1


def test_dictionary_round_trip():
    d = Dictionary()
    terms = ["iri:x", "iri:y", "some literal", "iri:x"]
    ids = [d.intern(t, literal=(i == 2)) for i, t in enumerate(terms)]
    assert ids == [0, 1, 2, 0]
    for t in set(terms):
        assert d.term(d.lookup(t)) == t


def test_first_seen_id_order():
    g = parse("<b> <p> <a> .\n<a> <q> <c> .")
    d = g.dictionary
    assert [d.term(i) for i in range(len(d))] == ["b", "p", "a", "q", "c"]


def test_kind_partition_counts():
    g = random_role_graph(60, 4, 3, seed=5, type_share=0.2, attr_share=0.2)
    total = sum(int((g.kind == k).sum()) for k in
                (KIND_ROLE, KIND_TYPE, KIND_ATTRIBUTE, KIND_TBOX))
    assert total == g.num_edges


def test_neighbors_sorted_and_directed():
    b = GraphBuilder(TEST_CONFIG)
    b.add("v", "q", "x")
    b.add("v", "p", "y")
    b.add("z", "p", "v")
    g = b.build()
    v = g.dictionary.lookup("v")
    out = g.neighbors(v)
    labels = [lbl for lbl, _, _ in out]
    assert labels == sorted(labels)
    z = g.dictionary.lookup("z")
    p = g.dictionary.lookup("p")
    assert (p, z, DIR_IN) in out
    assert sum(1 for _, n, _ in out if n == z) == 1


def test_neighbors_isolated_and_unknown():
    b = GraphBuilder(TEST_CONFIG)
    b.term("lonely")
    b.add("a", "p", "b")
    g = b.build()
    assert g.neighbors(g.dictionary.lookup("lonely")) == []
    assert g.neighbors(999) == []


def test_neighbors_matches_edge_list_scan():
    for seed in range(8):
        g = random_role_graph(40, 4, 3, seed=seed, type_share=0.1, attr_share=0.1)
        rng = np.random.default_rng(seed)
        for v in rng.integers(0, g.num_terms, size=12).tolist():
            expected = []
            for s, p, o, kind in g.assertions():
                if kind == KIND_TBOX:
                    continue
                if s == v:
                    expected.append((p, o, DIR_OUT))
                if o == v:
                    expected.append((p, s, DIR_IN))
            assert sorted(expected) == g.neighbors(int(v))


def test_edge_label_set_dedup():
    b = GraphBuilder(TEST_CONFIG)
    b.add("v", "p", "a").add("v", "p", "b")
    b.add("c", "q", "v").add("d", "q", "v")
    g = b.build()
    v = g.dictionary.lookup("v")
    assert g.edge_label_set(v) == {g.dictionary.lookup("p"), g.dictionary.lookup("q")}


def test_edge_label_set_isolated():
    b = GraphBuilder(TEST_CONFIG)
    b.term("alone")
    b.add("a", "p", "b")
    g = b.build()
    assert g.edge_label_set(g.dictionary.lookup("alone")) == set()


def test_edge_label_set_matches_scan():
    g = random_role_graph(30, 4, 4, seed=11)
    for v in range(g.num_terms):
        expected = set()
        for s, p, o, kind in g.assertions():
            if kind != KIND_TBOX and (s == v or o == v):
                expected.add(p)
        assert g.edge_label_set(v) == expected


def test_resolve_edge_prefers_requested_labels():
    b = GraphBuilder(TEST_CONFIG)
    b.add("a", "p", "b")
    b.add("a", "q", "b")
    g = b.build()
    a, b_ = g.dictionary.lookup("a"), g.dictionary.lookup("b")
    q = g.dictionary.lookup("q")
    assert g.resolve_edge(a, b_) == (a, g.dictionary.lookup("p"), b_)
    assert g.resolve_edge(a, b_, prefer_labels={q}) == (a, q, b_)
    assert g.resolve_edge(b_, a) == (a, g.dictionary.lookup("p"), b_)


def test_views_are_disjoint_and_cover_abox():
    g = random_role_graph(50, 4, 3, seed=3, type_share=0.2, attr_share=0.2)
    abox_pairs = []
    for view in (0, 1, 2):
        rows = np.flatnonzero(g.kind == view)
        abox_pairs.extend(rows.tolist())
    assert sorted(abox_pairs) == np.flatnonzero(g.kind != KIND_TBOX).tolist()


def test_fingerprint_changes_with_content():
    g1 = parse("<a> <p> <b> .")
    g2 = parse("<a> <p> <b> .")
    g3 = parse("<a> <p> <c> .")
    assert g1.fingerprint() == g2.fingerprint()
    assert g1.fingerprint() != g3.fingerprint()
