import collections
import json

import pytest
from lxml import etree

from etymograph.graph import (
    COMPONENT_OF, ETYMON_UNIT, PRECEDES, SAME_AS, UnknownAnchor, build_network,
    export, graph_from_json, is_process, to_dot, to_graphml, to_json, trace,
)
from etymograph.tei import parse_document, parse_file

from cases import tei
from conftest import ALL_FIXTURES, fixture_path
from oracles import expected_node_count


def graph_of(name):
    doc, _ = parse_file(fixture_path(name))
    return build_network([doc])


def relations(graph):
    return collections.Counter(e.relation for e in graph.edges)


def test_numeral_compound_edges():
    g = graph_of("ex16_num13_diachronic.xml")
    counts = relations(g)
    assert counts["compounding"] == 2
    assert counts[SAME_AS] == 2
    assert {g.node(e.target).xml_id for e in g.edges if e.relation == SAME_AS} == {"num-3", "num-10"}


def test_nested_process_path():
    g = graph_of("ex17_handschuh.xml")
    by_form = {g.node(e.source).form: e for e in g.edges if is_process(e.relation)}
    assert by_form["Schuh"].process_path == ("compounding", "metaphor")
    assert by_form["Hand"].process_path == ("compounding",)


def test_sense_level_metaphor_targets_sense():
    g = graph_of("ex11_kidney.xml")
    edge = [e for e in g.edges if e.relation == "metaphor"][0]
    assert g.node(edge.target).kind == "SenseHead"
    assert g.node(edge.source).form == "ntuchi"


def test_empty_graph():
    g = build_network([])
    assert g.nodes == () and g.edges == ()
    assert json.loads(to_json(g)) == {"nodes": [], "edges": []}


@pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.stem)
def test_node_count_matches_raw_xml(path):
    doc, _ = parse_file(path)
    assert len(build_network([doc]).nodes) == expected_node_count(path)


def _corpus_graph():
    docs = [parse_file(p)[0] for p in ALL_FIXTURES]
    return build_network(docs)


def test_no_dangling_edges():
    g = _corpus_graph()
    ids = {n.id for n in g.nodes}
    assert len(ids) == len(g.nodes)
    for e in g.edges:
        assert e.source in ids and e.target in ids


def test_precedes_paths_are_disjoint():
    g = _corpus_graph()
    outs = collections.Counter(e.source for e in g.edges if e.relation == PRECEDES)
    ins = collections.Counter(e.target for e in g.edges if e.relation == PRECEDES)
    assert max(outs.values()) == 1 and max(ins.values()) == 1
    for e in g.edges:
        if e.relation == PRECEDES:
            assert g.node(e.source).kind == ETYMON_UNIT == g.node(e.target).kind


@pytest.mark.parametrize("fmt", ["json", "dot", "graphml"])
def test_export_is_deterministic(fmt):
    assert export(_corpus_graph(), fmt) == export(_corpus_graph(), fmt)


def test_input_order_does_not_change_ids():
    docs = [parse_file(p)[0] for p in ALL_FIXTURES]
    assert to_json(build_network(docs)) == to_json(build_network(list(reversed(docs))))


@pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.stem)
def test_json_reload(path):
    doc, _ = parse_file(path)
    g = build_network([doc])
    again = graph_from_json(to_json(g))
    assert again == g
    assert to_json(again) == to_json(g)


def test_dot_labels():
    text = to_dot(graph_of("ex16_num13_diachronic.xml")).decode("utf-8")
    assert text.startswith("digraph")
    assert text.count('label="compounding"') == 2


def test_graphml_is_well_formed():
    root = etree.fromstring(to_graphml(graph_of("ex17_handschuh.xml")))
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    assert len(root.xpath("//g:node", namespaces=ns)) == 5
    assert len(root.xpath("//g:edge", namespaces=ns)) == 4


def test_chain_becomes_precedes_path():
    g = graph_of("ex04_chef_cleaned.xml")
    assert relations(g)[PRECEDES] == 8
    paths = trace(g, "chef")
    assert len(paths) == 1
    ids = [node.xml_id for node, _ in paths[0].stages]
    assert ids == ["kápŭ", "kábu", "káβo", "távo", "tsávo", "tsiévo", "tsiéf", "šyéf", "šéf"]
    assert paths[0].stages[-1][1] == "inheritance"


def test_trace_sense_anchor():
    paths = trace(graph_of("ex12_kiti.xml"), "animal-horse")
    assert len(paths) == 1
    node, rel = paths[0].stages[0]
    assert (node.form, node.lang.raw, rel) == ("kiti", "mix", "metonymy")


def test_defective_chain_gives_fragments():
    g = graph_of("sec10_besides.xml")
    assert g.unresolved == 3
    assert relations(g)[PRECEDES] == 5
    assert len(trace(g, "besides")) == 4


def test_trace_without_etymology_is_empty():
    doc, _ = parse_document(tei('<entry xml:id="e" xml:lang="fr"><form><orth>x</orth></form></entry>'))
    assert trace(build_network([doc]), "e") == []


def test_unknown_anchor():
    with pytest.raises(UnknownAnchor):
        trace(graph_of("ex12_kiti.xml"), "nope")


def test_component_edges_point_at_entries():
    g = graph_of("ex15_rouge_gorge.xml")
    for e in g.edges:
        if e.relation == COMPONENT_OF:
            assert g.node(e.target).kind == "EntryHead"
