"""BCP 47 language tags: well-formedness, registry validity, label expansion."""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

from .model import LangTag, RegistryStatus

REGISTRY_ENV = "ETYMOGRAPH_REGISTRY"

_LANGTAG = re.compile(
    r"""
    ^(?P<language>[a-z]{2,3}(?:-[a-z]{3}){0,3}|[a-z]{4}|[a-z]{5,8})
    (?:-(?P<script>[a-z]{4}))?
    (?:-(?P<region>[a-z]{2}|[0-9]{3}))?
    (?P<variants>(?:-(?:[a-z0-9]{5,8}|[0-9][a-z0-9]{3}))*)
    (?P<extensions>(?:-[0-9a-wyz](?:-[a-z0-9]{2,8})+)*)
    (?:-(?P<privateuse>x(?:-[a-z0-9]{1,8})+))?\Z
    """,
    re.VERBOSE | re.IGNORECASE,
)
_PRIVATEUSE = re.compile(r"^x(?:-[a-z0-9]{1,8})+\Z", re.IGNORECASE)
_EXTENSION = re.compile(r"-([0-9a-wyz](?:-[a-z0-9]{2,8})+)", re.IGNORECASE)

# RFC 5646 section 2.2.8; also carried in the registry as Type: grandfathered.
IRREGULAR_TAGS = frozenset(
    t.lower()
    for t in (
        "en-GB-oed", "i-ami", "i-bnn", "i-default", "i-enochian", "i-hak",
        "i-klingon", "i-lux", "i-mingo", "i-navajo", "i-pwn", "i-tao",
        "i-tay", "i-tsu", "sgn-BE-FR", "sgn-BE-NL", "sgn-CH-DE",
    )
)
REGULAR_GRANDFATHERED = frozenset(
    t.lower()
    for t in (
        "art-lojban", "cel-gaulish", "no-bok", "no-nyn", "zh-guoyu",
        "zh-hakka", "zh-min", "zh-min-nan", "zh-xiang",
    )
)


class NotWellFormed(ValueError):
    pass


def parse_tag(raw: str) -> LangTag:
    """Split ``raw`` into subtags; ``well_formed`` reports grammar conformance."""
    if raw is None:
        raw = ""
    lowered = raw.lower()
    if lowered in IRREGULAR_TAGS or lowered in REGULAR_GRANDFATHERED:
        return LangTag(raw=raw, primary_subtag=lowered.split("-")[0], grandfathered=True, well_formed=True)
    if _PRIVATEUSE.match(raw):
        return LangTag(raw=raw, private_use=raw, well_formed=True)
    m = _LANGTAG.match(raw)
    if not m:
        return LangTag(raw=raw, well_formed=False)
    language = m.group("language").split("-")
    variants = tuple(v for v in m.group("variants").split("-") if v)
    extensions = tuple(e.group(1) for e in _EXTENSION.finditer(m.group("extensions") or ""))
    # Repeated variants or extension singletons are not well formed (RFC 5646 2.2.5/2.2.6).
    singletons = [e[0].lower() for e in extensions]
    if len({v.lower() for v in variants}) != len(variants) or len(set(singletons)) != len(singletons):
        return LangTag(raw=raw, well_formed=False)
    return LangTag(
        raw=raw,
        primary_subtag=language[0],
        extlangs=tuple(language[1:]),
        script=m.group("script"),
        region=m.group("region"),
        variants=variants,
        extensions=extensions,
        private_use=m.group("privateuse"),
        well_formed=True,
    )


@dataclass(frozen=True)
class RegistryRecord:
    type: str
    description: str
    deprecated: bool = False


@dataclass(frozen=True)
class RegistrySnapshot:
    """Subtag records keyed by ``(type, lowercased subtag)``."""

    entries: dict
    snapshot_date: str
    ranges: tuple = ()  # (type, low, high) for "qaa..qtz" style records
    tags: frozenset = frozenset()  # grandfathered and redundant full tags

    __hash__ = None

    def get(self, type_: str, subtag: str) -> Optional[RegistryRecord]:
        key = subtag.lower()
        record = self.entries.get((type_, key))
        if record is not None:
            return record
        for rtype, low, high in self.ranges:
            if rtype == type_ and len(key) == len(low) and low <= key <= high:
                return RegistryRecord(rtype, "Private use")
        return None

    def languages_described(self, description: str) -> list:
        return sorted(
            subtag for (type_, subtag), rec in self.entries.items()
            if type_ == "language" and rec.description == description
        )


def _records(text: str):
    for chunk in text.split("\n%%\n"):
        fields = []
        for line in chunk.splitlines():
            if line.startswith(" ") and fields:
                name, value = fields[-1]
                fields[-1] = (name, value + " " + line.strip())
            elif ":" in line:
                name, _, value = line.partition(":")
                fields.append((name.strip(), value.strip()))
        if fields:
            yield fields


def load_registry(path=None) -> RegistrySnapshot:
    """Load an IANA language-subtag-registry file (record-jar format)."""
    if path is None:
        text = _default_registry_text()
    else:
        text = Path(path).read_text(encoding="utf-8")
    text = text.replace("\r\n", "\n")
    entries = {}
    ranges = []
    tags = set()
    snapshot_date = ""
    for fields in _records(text):
        record = {}
        for name, value in fields:
            record.setdefault(name, value)
        if "File-Date" in record and "Type" not in record:
            snapshot_date = record["File-Date"]
            continue
        type_ = record.get("Type")
        if type_ in ("grandfathered", "redundant"):
            tags.add(record["Tag"].lower())
            continue
        subtag = record.get("Subtag")
        if not type_ or not subtag:
            continue
        rec = RegistryRecord(type_, record.get("Description", ""), "Deprecated" in record)
        if ".." in subtag:
            low, high = subtag.lower().split("..")
            ranges.append((type_, low, high))
        else:
            entries.setdefault((type_, subtag.lower()), rec)
    if not snapshot_date:
        raise ValueError("registry file has no File-Date header")
    return RegistrySnapshot(entries=entries, snapshot_date=snapshot_date, ranges=tuple(ranges), tags=frozenset(tags))


def _default_registry_text() -> str:
    override = os.environ.get(REGISTRY_ENV)
    if override:
        return Path(override).read_text(encoding="utf-8")
    return resources.files("etymograph.data").joinpath("language-subtag-registry.txt").read_text(encoding="utf-8")


_default_registry: Optional[RegistrySnapshot] = None


def default_registry() -> RegistrySnapshot:
    global _default_registry
    if _default_registry is None:
        _default_registry = load_registry()
    return _default_registry


def registry_lookup(tag: LangTag, snap: RegistrySnapshot) -> RegistryStatus:
    """Registered iff every registrable subtag of ``tag`` appears with the right type."""
    if not tag.well_formed:
        raise NotWellFormed(tag.raw)
    if tag.grandfathered or tag.raw.lower() in snap.tags:
        return RegistryStatus.REGISTERED
    if not tag.primary_subtag:
        # private-use only: nothing to look up
        return RegistryStatus.UNREGISTERED
    checks = [("language", tag.primary_subtag)]
    checks += [("extlang", e) for e in tag.extlangs]
    if tag.script:
        checks.append(("script", tag.script))
    if tag.region:
        checks.append(("region", tag.region))
    checks += [("variant", v) for v in tag.variants]
    for type_, subtag in checks:
        if snap.get(type_, subtag) is None:
            return RegistryStatus.UNREGISTERED
    return RegistryStatus.REGISTERED


def check_tag(raw: str, snap: RegistrySnapshot) -> LangTag:
    tag = parse_tag(raw)
    if not tag.well_formed:
        return tag
    return replace(tag, registry_status=registry_lookup(tag, snap))


def _fold(label: str) -> str:
    return label.strip().casefold()


@dataclass(frozen=True)
class AbbrevTable:
    """Legacy language labels ("mhd.") mapped to language tags ("gmh")."""

    rows: dict = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self):
        folded = {}
        for key, value in self.rows.items():
            if not parse_tag(value).well_formed:
                raise ValueError(f"abbreviation {key!r} maps to malformed tag {value!r}")
            folded[_fold(key)] = value
        object.__setattr__(self, "rows", folded)

    def values(self) -> set:
        return set(self.rows.values())


def load_abbrev_table(path=None) -> AbbrevTable:
    if path is None:
        text = resources.files("etymograph.data").joinpath("abbreviations.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    data = json.loads(text)
    if not isinstance(data, dict) or not all(isinstance(k, str) and isinstance(v, str) for k, v in data.items()):
        raise ValueError("abbreviation table must be a JSON object of strings")
    return AbbrevTable(data)


def expand_abbreviation(label: str, table: AbbrevTable) -> Optional[LangTag]:
    raw = table.rows.get(_fold(label))
    return parse_tag(raw) if raw is not None else None
