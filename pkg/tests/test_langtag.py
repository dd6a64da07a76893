import pytest
from hypothesis import given, strategies as st

from etymograph.langtag import (
    AbbrevTable,
    NotWellFormed,
    check_tag,
    default_registry,
    expand_abbreviation,
    load_abbrev_table,
    load_registry,
    parse_tag,
    registry_lookup,
)
from etymograph.model import RegistryStatus

from cases import MALFORMED_TAGS

REG = RegistryStatus.REGISTERED
UNREG = RegistryStatus.UNREGISTERED


@pytest.mark.parametrize("raw", MALFORMED_TAGS)
def test_malformed_rejected(raw):
    assert not parse_tag(raw).well_formed


@pytest.mark.parametrize(
    "raw,parts",
    [
        ("fro", dict(primary_subtag="fro")),
        ("sr-Latn-RS", dict(primary_subtag="sr", script="Latn", region="RS")),
        ("de-CH-1901", dict(region="CH", variants=("1901",))),
        ("zh-yue-HK", dict(extlangs=("yue",), region="HK")),
        ("en-a-bbb-x-a-ccc", dict(extensions=("a-bbb",), private_use="x-a-ccc")),
        ("es-419", dict(region="419")),
    ],
)
def test_subtags_split(raw, parts):
    tag = parse_tag(raw)
    assert tag.well_formed
    for name, value in parts.items():
        assert getattr(tag, name) == value


def test_grandfathered_and_private_use():
    assert parse_tag("i-klingon").grandfathered
    assert parse_tag("zh-min-nan").grandfathered
    tag = parse_tag("x-whatever")
    assert tag.well_formed and tag.private_use == "x-whatever" and tag.primary_subtag == ""


@pytest.mark.parametrize("raw,status", [
    ("fro", REG), ("gmh", REG), ("la", REG), ("goh", REG), ("frm", REG),
    ("en-GB", REG), ("sr-Latn-RS", REG), ("en-GB-oed", REG), ("qaa", REG),
    ("emodeng", UNREG), ("lat", UNREG), ("srd", UNREG), ("en-ZZZ", UNREG), ("xx", UNREG),
    ("x-private", UNREG),
])
def test_registry_lookup(raw, status):
    assert registry_lookup(parse_tag(raw), default_registry()) is status


def test_lookup_refuses_malformed():
    with pytest.raises(NotWellFormed):
        registry_lookup(parse_tag("en_US"), default_registry())


def test_check_tag_sets_status():
    snap = default_registry()
    assert check_tag("la", snap).registry_status is REG
    assert check_tag("en--x", snap).registry_status is RegistryStatus.NOT_CHECKED


def test_snapshot_date_and_env_override(tmp_path, monkeypatch):
    assert default_registry().snapshot_date == "2021-08-06"
    reg = tmp_path / "reg.txt"
    reg.write_text(
        "File-Date: 2000-01-01\n%%\nType: language\nSubtag: zz\nDescription: Test\nAdded: 2000-01-01\n",
        encoding="utf-8",
    )
    snap = load_registry(reg)
    assert snap.snapshot_date == "2000-01-01"
    assert registry_lookup(parse_tag("zz"), snap) is REG
    assert registry_lookup(parse_tag("fr"), snap) is UNREG
    monkeypatch.setenv("ETYMOGRAPH_REGISTRY", str(reg))
    assert load_registry().snapshot_date == "2000-01-01"


def test_registry_without_date_rejected(tmp_path):
    bad = tmp_path / "reg.txt"
    bad.write_text("Type: language\nSubtag: zz\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_registry(bad)


def test_continuation_lines_joined():
    rec = default_registry().get("language", "ang")
    assert rec is not None and "English" in rec.description


def test_abbreviation_table():
    table = load_abbrev_table()
    assert expand_abbreviation("mhd.", table).raw == "gmh"
    assert expand_abbreviation(" Ahd. ", table).raw == "goh"
    assert expand_abbreviation("klingonisch", table) is None
    snap = default_registry()
    for value in table.values():
        assert registry_lookup(parse_tag(value), snap) is REG, value


def test_abbreviation_values_must_be_tags():
    with pytest.raises(ValueError):
        AbbrevTable({"foo.": "not a tag"})


def test_old_high_german_code_comes_from_registry():
    assert "goh" in default_registry().languages_described("Old High German (ca. 750-1050)")


_alpha = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=2, max_size=3)
_region = st.one_of(
    st.none(),
    st.text(alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ", min_size=2, max_size=2),
    st.text(alphabet="0123456789", min_size=3, max_size=3),
)


@given(_alpha, _region)
def test_generated_tags_are_well_formed(lang, region):
    raw = lang if region is None else f"{lang}-{region}"
    tag = parse_tag(raw)
    assert tag.well_formed
    assert tag.primary_subtag == lang
    assert tag.region == region


@given(st.text(alphabet=" _!@/.,;\n\t", min_size=1), _alpha)
def test_junk_characters_never_well_formed(junk, lang):
    assert not parse_tag(lang + junk).well_formed
    assert not parse_tag(junk + lang).well_formed


@given(st.text(max_size=20))
def test_parse_tag_total(raw):
    tag = parse_tag(raw)
    assert tag.raw == raw
    if tag.well_formed and not tag.grandfathered:
        rebuilt = "-".join(
            p for p in [tag.primary_subtag, *tag.extlangs, tag.script, tag.region, *tag.variants,
                        *tag.extensions, tag.private_use] if p
        )
        assert rebuilt.lower() == raw.lower()
