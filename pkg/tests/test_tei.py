import pytest
from hypothesis import given, settings, strategies as st
from lxml import etree

from etymograph.model import (
    CitKind,
    Citation,
    DateSpan,
    Document,
    EtymologyBlock,
    EtymType,
    FormBlock,
    FormKind,
    LexicalEntry,
    Plain,
    Punct,
    Seg,
    SegmentedForm,
    SenseBlock,
    cross_ref,
)
from etymograph.langtag import parse_tag
from etymograph.tei import (
    BadDateFormat,
    DepthExceeded,
    EncodingError,
    InvertedSpan,
    XmlSyntaxError,
    emit_tei,
    parse_date_attrs,
    parse_document,
    parse_etym,
    parse_file,
)

from cases import tei
from conftest import ALL_FIXTURES, fixture_path


@pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.name)
def test_round_trip(path):
    doc, _ = parse_file(path)
    again, _ = parse_document(emit_tei(doc), doc.source_name)
    assert again.entries == doc.entries
    assert again.duplicate_ids == doc.duplicate_ids


@pytest.mark.parametrize("path", ALL_FIXTURES, ids=lambda p: p.name)
def test_emit_is_a_fixpoint(path):
    doc, _ = parse_file(path)
    first = emit_tei(doc)
    assert emit_tei(parse_document(first, doc.source_name)[0]) == first


def test_emitted_layout():
    doc, _ = parse_file(fixture_path("ex12_kiti.xml"))
    text = emit_tei(doc).decode("utf-8")
    assert text.startswith('<?xml version="1.0" encoding="UTF-8"?>\n<TEI xmlns="http://www.tei-c.org/ns/1.0">')
    assert "\r" not in text
    assert '      <entry xml:id="animal-horse" xml:lang="mix">\n' in text
    # attributes are written in sorted order
    assert '<pRef corresp="#animal" notation="ipa">ki.t̪i</pRef>' in text


def test_segmented_forms():
    doc, _ = parse_file(fixture_path("sec10_besides.xml"))
    cits = doc.entries[0].senses[0].etymologies[0].citations
    assert cits[1].oref.segments == (
        Seg("bi", "e2s1"), Punct("-"), Seg("sid", "e2s2"), Seg("en", "e2s3"),
    )
    assert cits[1].oref.text == "bi-siden"
    assert cits[0].oref.seg_ids() == {"els1", "els2"}
    assert cits[2].oref.segments[-1] == Plain("siden")


def test_layout_whitespace_dropped_but_spaces_kept():
    doc, _ = parse_document(tei(
        '<entry xml:lang="de"><form><orth>\n  <seg>Hand</seg>\n  <seg>schuh</seg>\n</orth>'
        "<orth><seg>a</seg> <seg>b</seg></orth><pron notation=\"ipa\"> ʃ u: </pron></form></entry>"
    ))
    orths = doc.entries[0].forms[0].orths
    assert orths[0].text == "Handschuh"
    assert orths[1].segments == (Seg("a"), Plain(" "), Seg("b"))
    assert doc.entries[0].forms[0].prons[0].text == "ʃ u:"


def test_quote_inline_markup():
    doc, _ = parse_file(fixture_path("sec10_besides.xml"))
    att = doc.entries[0].senses[0].etymologies[0].citations[0].nested[2]
    assert att.kind is CitKind.ATTESTATION
    assert att.quote.marked_forms() == ["sidan"]
    assert att.quote.text.startswith("& þonne licge on ða swiðran sidan gode")


def test_grammar_and_nested_forms():
    doc, _ = parse_file(fixture_path("ex06_perdere.xml"))
    lemma = doc.entries[0].forms[0]
    inflected = lemma.nested[0]
    assert inflected.id == "perdere-1s-rem-pt-indic"
    assert inflected.grammar.person == "1" and inflected.grammar.mood == "indic"
    assert ("aspect", "remote") in inflected.grammar.extra
    nested_block = doc.entries[0].etymologies[0].nested[0]
    assert nested_block.corresp.raw == "#perdere-1s-rem-pt-indic"
    # loose <gram> outside a gramGrp is kept verbatim
    assert nested_block.citations[0].extras == (
        '<gram type="aspect">perfective</gram>', '<gram type="voice">active</gram>',
    )


def test_duplicate_ids_recorded():
    doc, _ = parse_file(fixture_path("ex04_chef_as_printed.xml"))
    assert [i for i, _ in doc.duplicate_ids] == ["šéf"]
    assert doc.id_index["šéf"] == ("entries", 0, "etymologies", 0, "citations", 8)


def test_unknown_cit_type_preserved():
    doc, _ = parse_document(tei(
        '<entry xml:lang="fr"><etym type="borrowing"><cit type="cognate"><oRef>x</oRef></cit></etym></entry>'
    ))
    cit = doc.entries[0].etymologies[0].citations[0]
    assert cit.kind is CitKind.ETYMON and cit.raw_type == "cognate"
    assert b'<cit type="cognate">' in emit_tei(doc)


def test_legacy_etym_items():
    doc, _ = parse_file(fixture_path("sec02_abend_legacy.xml"))
    block = doc.entries[0].etymologies[0]
    assert block.is_legacy
    assert [(i.kind, i.text) for i in block.legacy[:6]] == [
        ("lang", "Ahd."), ("mentioned", "âband"), ("text", ","),
        ("lang", "mhd."), ("mentioned", "âbent"), ("text", ";"),
    ]
    assert block.etym_type == EtymType("", known=False)


def test_non_entry_content_reported():
    _, diags = parse_document(tei('<div><p>front matter</p></div><entry xml:lang="fr"/>'))
    assert [d.rule for d in diags] == ["I-PARSE-SKIPPED"]


def test_header_is_silently_skipped():
    doc, diags = parse_file(fixture_path("ex05_mare.xml"))
    assert len(doc.entries) == 1 and diags == []


def test_bare_entry_root():
    doc, _ = parse_document(b'<entry xmlns="http://www.tei-c.org/ns/1.0" xml:lang="it"/>')
    assert len(doc.entries) == 1


def test_syntax_error_has_position():
    with pytest.raises(XmlSyntaxError) as info:
        parse_document(b"<TEI>\n<entry>\n</TEI>", "broken.xml")
    assert info.value.line == 3


def test_encoding_error():
    with pytest.raises(EncodingError):
        parse_document("<entry>Âbend</entry>".encode("latin-1"))


def test_declared_encoding_honoured():
    data = '<?xml version="1.0" encoding="ISO-8859-1"?><entry xml:lang="de"><form><orth>Âbend</orth></form></entry>'
    doc, _ = parse_document(data.encode("latin-1"))
    assert doc.entries[0].forms[0].orths[0].text == "Âbend"


def test_depth_limit():
    xml = "<etym>" * 33 + "</etym>" * 33
    assert parse_etym(etree.fromstring(xml)).nested
    with pytest.raises(DepthExceeded):
        parse_etym(etree.fromstring("<etym>" * 34 + "</etym>" * 34))


@pytest.mark.parametrize("attrs,expected", [
    ({"notBefore": "0350", "notAfter": "0399"}, DateSpan(350, 399)),
    ({"when": "1554"}, DateSpan(when=1554)),
    ({"notBefore": "1517"}, DateSpan(not_before=1517)),
])
def test_dates(attrs, expected):
    assert parse_date_attrs(attrs) == expected


@pytest.mark.parametrize("attrs,error", [
    ({"notBefore": "350"}, BadDateFormat),
    ({"when": "IVe2"}, BadDateFormat),
    ({"when": "1554-05"}, BadDateFormat),
    ({}, BadDateFormat),
    ({"notBefore": "1600", "notAfter": "1500"}, InvertedSpan),
])
def test_bad_dates(attrs, error):
    with pytest.raises(error):
        parse_date_attrs(attrs)


def test_original_date_text_kept():
    assert parse_date_attrs({"when": "0350"}, " IVe2 ").original_text == "IVe2"


def test_invalid_date_kept_opaque():
    doc, diags = parse_document(tei(
        '<entry xml:lang="fr"><etym type="inheritance"><cit type="etymon">'
        '<date when="350"/><oRef>x</oRef></cit></etym></entry>'
    ))
    cit = doc.entries[0].etymologies[0].citations[0]
    assert cit.date is None and cit.extras == ('<date when="350"/>',)
    assert [d.rule for d in diags] == ["W-PARSE-OPAQUE"]


# -- generated entries survive emit/parse ------------------------------------

_word = st.text(alphabet="abcdefghijklmnopqrstuvwxyzáéšβŭ", min_size=1, max_size=8)
_lang = st.sampled_from([None, "fr", "la", "gmh", "en-GB", "emodeng"])
_type = st.sampled_from(["inheritance", "borrowing", "metaphor", "compounding", None, "open-type"])
_date = st.one_of(
    st.none(),
    st.builds(lambda a, b: DateSpan(min(a, b), max(a, b)), st.integers(0, 2020), st.integers(0, 2020)),
    st.builds(lambda w: DateSpan(when=w), st.integers(0, 2020)),
)


def _tag(raw):
    return parse_tag(raw) if raw is not None else None


@st.composite
def _segmented(draw, kind):
    parts = draw(st.lists(st.one_of(
        st.builds(Seg, _word),
        st.builds(Punct, st.sampled_from(["-", "·"])),
    ), min_size=0, max_size=3))
    if not parts:
        parts = [Plain(draw(_word))]
    notation = draw(st.sampled_from([None, "ipa"])) if kind is FormKind.PRON else None
    return SegmentedForm(kind, tuple(parts), notation=notation, lang=_tag(draw(_lang)))


@st.composite
def _citation(draw, index):
    return Citation(
        kind=CitKind.ETYMON,
        id=f"c{index}",
        next=cross_ref(f"#c{index + 1}") if draw(st.booleans()) else None,
        lang=_tag(draw(_lang)),
        oref=draw(_segmented(FormKind.ORTH)),
        pref=draw(st.one_of(st.none(), _segmented(FormKind.PRON))),
        date=draw(_date),
        notes=tuple(draw(st.lists(_word, max_size=2))),
    )


@st.composite
def _entry(draw):
    n = draw(st.integers(0, 4))
    cits = tuple(draw(_citation(i)) for i in range(n))
    raw_type = draw(_type)
    block = EtymologyBlock(etym_type=EtymType.from_attr(raw_type), citations=cits, date=draw(_date))
    return LexicalEntry(
        id="e",
        lang=_tag(draw(_lang)),
        forms=(FormBlock(form_type="lemma", orths=(draw(_segmented(FormKind.ORTH)),)),),
        senses=(SenseBlock(corresp=cross_ref("http://example.org/c")),),
        etymologies=(block,),
    )


@settings(max_examples=60, deadline=None)
@given(_entry())
def test_generated_entries_round_trip(entry):
    doc = Document(entries=(entry,), source_name="gen")
    again, _ = parse_document(emit_tei(doc))
    assert again.entries == doc.entries
