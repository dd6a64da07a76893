import pytest

from etymograph.model import (
    CitKind,
    CrossRef,
    DateSpan,
    Diagnostic,
    EtymType,
    External,
    Resolved,
    Severity,
    UnknownNode,
    Unresolved,
    effective_language,
    iter_entry_blocks,
    node_at,
    render_path,
    resolve_ref,
)
from etymograph.tei import parse_document

from cases import tei

DOC, _ = parse_document(tei(
    '<entry xml:id="e1" xml:lang="fr"><form type="lemma"><orth>chef</orth></form>'
    '<sense xml:id="s1"><etym type="metaphor"><cit type="etymon" xml:id="c1">'
    '<oRef>tête</oRef></cit></etym></sense>'
    '<etym type="inheritance" xml:lang="la"><cit type="etymon"><pRef notation="ipa">kaput</pRef></cit>'
    '<etym type="metaphor"><cit type="etymon" xml:lang="frm"><oRef>chief</oRef></cit></etym></etym>'
    "</entry>"
))


def test_etym_type_from_attr():
    assert EtymType.from_attr("Borrowing") == EtymType("borrowing")
    assert EtymType.from_attr(None).is_other and EtymType.from_attr(None).name == ""
    odd = EtymType.from_attr("phonological-processA")
    assert odd.is_other and odd.name == "phonological-processA"


def test_date_label():
    assert DateSpan(not_before=350, not_after=399).label() == "0350-0399"
    assert DateSpan(when=1554).label() == "1554"
    assert DateSpan(not_before=1517).label() == "1517-"


def test_cross_ref_kinds():
    assert CrossRef("#a").is_internal and CrossRef("#a").fragment == "a"
    assert CrossRef("http://x.org/y").uri == "http://x.org/y"
    assert not CrossRef("#").is_internal


def test_node_at_and_render_path():
    path = ("entries", 0, "etymologies", 0, "nested", 0, "citations", 0, "oref")
    assert node_at(DOC, path).text == "chief"
    assert render_path(path) == "entry[0]/etym[0]/etym[0]/cit[0]/oRef"
    with pytest.raises(UnknownNode):
        node_at(DOC, ("entries", 3))
    with pytest.raises(UnknownNode):
        node_at(DOC, ("entries", 0, "nonsense"))


def test_effective_language_inherits():
    sense_oref = ("entries", 0, "senses", 0, "etymologies", 0, "citations", 0, "oref")
    assert effective_language(sense_oref, DOC).raw == "fr"
    inner = ("entries", 0, "etymologies", 0, "citations", 0, "pref")
    assert effective_language(inner, DOC).raw == "la"
    nested = ("entries", 0, "etymologies", 0, "nested", 0, "citations", 0, "oref")
    assert effective_language(nested, DOC).raw == "frm"


def test_resolve_ref():
    assert resolve_ref(CrossRef("#c1"), DOC) == Resolved(("entries", 0, "senses", 0, "etymologies", 0, "citations", 0))
    assert resolve_ref(CrossRef("#missing"), DOC) is Unresolved
    assert not Unresolved
    assert resolve_ref(CrossRef("http://dbpedia.org/resource/Horse"), DOC) == External("http://dbpedia.org/resource/Horse")
    assert resolve_ref(CrossRef("#missing"), DOC, {"missing": ("entries", 9)}) == Resolved(("entries", 9))


def test_iter_entry_blocks_ancestry():
    blocks = list(iter_entry_blocks(DOC.entries[0], 0))
    assert [b.etym_type.name for _, b, _ in blocks] == ["inheritance", "metaphor", "metaphor"]
    _, inner, ancestry = blocks[1]
    assert [a.etym_type.name for a in ancestry] == ["inheritance"]
    assert inner.citations[0].kind is CitKind.ETYMON


def test_models_are_value_objects():
    again, _ = parse_document(tei(
        '<entry xml:id="e1" xml:lang="fr"><form type="lemma"><orth>chef</orth></form></entry>'
    ))
    assert again.entries[0].forms == DOC.entries[0].forms
    with pytest.raises(Exception):
        DOC.entries[0].id = "x"


def test_diagnostic_serialization_fields():
    d = Diagnostic("E-ID-DUP", Severity.ERROR, "dup", 0, "e1", ("entries", 0), 4, None, ("x",), "f.xml")
    assert list(d.to_dict()) == ["rule", "severity", "file", "entry", "path", "line", "col", "message", "related"]
    assert d.to_dict()["path"] == "entry[0]"
