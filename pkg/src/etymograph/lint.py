"""Structural checks over a parsed Document.

Rules are independent: each one looks at the model and yields findings, and
the final list is sorted, so disabling one rule never changes another's
output.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from lxml import etree

from .langtag import NotWellFormed, RegistrySnapshot, default_registry, registry_lookup
from .model import (
    CitKind,
    Citation,
    CrossRef,
    Diagnostic,
    Document,
    EtymologyBlock,
    FormBlock,
    LangTag,
    RegistryStatus,
    Severity,
    UnknownNode,
    iter_citations,
    iter_entry_blocks,
    iter_forms,
    iter_nodes,
    node_at,
    resolve_ref,
)
from .tei import BadDateFormat, InvertedSpan, parse_date_attrs

E, W, I = Severity.ERROR, Severity.WARNING, Severity.INFO

RULES = {
    "E-LANG-MISSING": (E, "entry has no xml:lang"),
    "E-LANG-MALFORMED": (E, "xml:lang is not a well-formed language tag"),
    "W-LANG-UNREGISTERED": (W, "xml:lang uses subtags missing from the registry snapshot"),
    "E-ETYM-PLACE": (E, "etym block placed at the wrong level for its type"),
    "E-ID-DUP": (E, "xml:id used more than once"),
    "E-CHAIN-DANGLING": (E, "prev/next does not resolve to an etymon of the same block"),
    "E-CHAIN-SELF": (E, "prev/next points at the citation itself"),
    "E-CHAIN-ASYM": (E, "prev/next not mirrored by the target"),
    "E-CHAIN-CYCLE": (E, "next pointers form a cycle"),
    "E-CHAIN-LENGTH": (E, "chain longer than the configured maximum"),
    "W-CHAIN-BRANCH": (W, "etym block holds more than one chain"),
    "E-DATE-FORMAT": (E, "date attribute is not a four-digit year"),
    "E-DATE-INVERTED": (E, "notBefore is later than notAfter"),
    "E-REF-UNRESOLVED": (E, "pointer does not resolve"),
    "E-REF-KIND": (I, "etym corresp does not point at a form"),
    "E-COMP-SEG": (E, "component does not point at a seg of its etymon"),
    "W-COMPOUND-DECOMP": (W, "compound entry with neither segmented form nor compounding etym"),
    "W-ETYM-UNTYPED": (W, "etym without @type"),
    "I-ETYM-OPENTYPE": (I, "etym @type outside the named processes"),
    "I-ETYM-LEGACY": (I, "flat legacy etym content"),
    "E-ETYMON-EMPTY": (E, "etymon citation without oRef or pRef"),
    "W-PRON-NOTATION": (W, "pron/pRef without @notation"),
    "I-NOTATION-UNKNOWN": (I, "notation name outside the known list"),
    "W-CIT-REDUNDANT": (W, "etymon citation only wraps another etymon citation"),
    "W-CIT-UNKNOWN-TYPE": (W, "cit @type outside etymon/attestation/translation/component"),
    "W-ETYM-BAREREF": (W, "oRef/pRef directly inside etym, outside any cit"),
    "W-ENTRY-NOFORM": (W, "entry has no form"),
    # emitted by the parser and by legacy-lift, listed so they can be configured
    "I-PARSE-SKIPPED": (I, "content outside entries skipped"),
    "I-PARSE-OPAQUE": (I, "unmodeled element kept verbatim"),
    "W-PARSE-OPAQUE": (W, "malformed element kept verbatim"),
    "W-LIFT-NOLANG": (W, "legacy language label could not be expanded"),
    "I-LIFT-CONVERTED": (I, "legacy etym converted"),
    "I-NORM-UNWRAP": (I, "redundant etymon wrapper removed"),
    "I-NORM-DUPCIT": (I, "consecutive duplicate etymon citation"),
    "I-NORM-DUPCIT-REMOVED": (I, "consecutive duplicate etymon citation removed"),
    "I-NORM-DUPID": (I, "duplicate xml:id kept"),
    "I-NORM-REF2OREF": (I, "ref used as etymon rewritten to oRef"),
}

DEFAULT_NOTATIONS = ("ipa", "xsampa", "private")

_ENTRY_LEVEL = {"inheritance", "borrowing", "compounding"}
_SENSE_LEVEL = {"metaphor", "metonymy", "grammaticalization"}
_URI = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:[^\s]*\Z")


class UnknownRule(ValueError):
    pass


@dataclass(frozen=True)
class RuleConfig:
    severity_overrides: dict = field(default_factory=dict)
    disabled_rules: frozenset = frozenset()
    max_chain_length: int = 1024
    check_registry: bool = True
    known_notations: tuple = DEFAULT_NOTATIONS

    __hash__ = None

    def __post_init__(self):
        overrides = {}
        for rule, severity in self.severity_overrides.items():
            if rule not in RULES:
                raise UnknownRule(rule)
            overrides[rule] = Severity(severity)
        object.__setattr__(self, "severity_overrides", overrides)
        disabled = frozenset(self.disabled_rules)
        unknown = sorted(disabled - RULES.keys())
        if unknown:
            raise UnknownRule(", ".join(unknown))
        object.__setattr__(self, "disabled_rules", disabled)
        object.__setattr__(self, "known_notations", tuple(n.lower() for n in self.known_notations))

    @classmethod
    def from_dict(cls, data: dict) -> "RuleConfig":
        notations = tuple(DEFAULT_NOTATIONS) + tuple(data.get("known_notations", ()))
        return cls(
            severity_overrides=dict(data.get("severity_overrides", {})),
            disabled_rules=frozenset(data.get("disabled_rules", ())),
            max_chain_length=int(data.get("max_chain_length", 1024)),
            check_registry=bool(data.get("check_registry", True)),
            known_notations=tuple(dict.fromkeys(notations)),
        )

    def severity(self, rule: str) -> Severity:
        return self.severity_overrides.get(rule, RULES[rule][0])


class _Sink:
    """Collects findings for one document and fills in entry/line context."""

    def __init__(self, doc: Document):
        self.doc = doc
        self.items = []

    def __call__(self, rule, path, message, related=()):
        entry_index = path[1] if len(path) >= 2 and path[0] == "entries" else None
        entry = None
        if entry_index is not None:
            entry = self.doc.entries[entry_index].key(entry_index)
        self.items.append(
            Diagnostic(
                rule=rule,
                severity=RULES[rule][0],
                message=message,
                entry_index=entry_index,
                entry=entry,
                path=tuple(path),
                line=line_of(self.doc, path),
                related=tuple(related),
                file=self.doc.source_name,
            )
        )


def line_of(doc: Document, path) -> Optional[int]:
    path = tuple(path)
    while path:
        if path in doc.lines:
            return doc.lines[path]
        path = path[:-1]
    return None


# -- chains -------------------------------------------------------------------


@dataclass(frozen=True)
class ChainReport:
    """Result of checking the prev/next pointers of one etym block.

    ``members`` and ``order`` hold xml:ids (None for a citation without one);
    ``positions`` and ``order_positions`` hold indices into
    ``block.citations``, which stay unambiguous when ids are duplicated.
    """

    members: tuple = ()
    order: Optional[tuple] = None
    defects: tuple = ()
    positions: tuple = ()
    order_positions: Optional[tuple] = None
    components: tuple = ()


def _find_block_path(block: EtymologyBlock, doc: Document):
    for i, entry in enumerate(doc.entries):
        for path, candidate, _ in iter_entry_blocks(entry, i):
            if candidate is block:
                return path
    return ()


def check_chain(block: EtymologyBlock, doc: Document, block_path=None, cfg: Optional[RuleConfig] = None) -> ChainReport:
    """Check the pointers of one block and derive its linear order if sound."""
    cfg = cfg or RuleConfig()
    if block_path is None:
        block_path = _find_block_path(block, doc)
    sink = _Sink(doc)
    cits = block.citations
    members = [
        i for i, c in enumerate(cits)
        if c.kind is CitKind.ETYMON and (c.id or c.prev is not None or c.next is not None)
    ]
    member_set = set(members)
    local = {}
    for i, c in enumerate(cits):
        if c.id and c.id not in local:
            local[c.id] = i

    def cpath(i):
        return tuple(block_path) + ("citations", i)

    has_pointers = any(cits[i].prev is not None or cits[i].next is not None for i in members)
    resolved = {}
    for i in members:
        for attr in ("prev", "next"):
            ref = getattr(cits[i], attr)
            if ref is None:
                continue
            target = local.get(ref.fragment) if ref.is_internal else None
            label = cits[i].id or f"cit[{i}]"
            if target is None:
                elsewhere = resolve_ref(ref, doc) if ref.is_internal else None
                where = "resolves outside this etym block" if elsewhere else "does not resolve"
                sink("E-CHAIN-DANGLING", cpath(i), f"{label}: @{attr}={ref.raw} {where}", (ref.raw,))
            elif target not in member_set:
                sink("E-CHAIN-DANGLING", cpath(i), f"{label}: @{attr}={ref.raw} is not an etymon of this chain", (ref.raw,))
            elif target == i:
                sink("E-CHAIN-SELF", cpath(i), f"{label}: @{attr}={ref.raw} points at itself", (ref.raw,))
            else:
                resolved[(i, attr)] = target

    mirror = {"next": "prev", "prev": "next"}
    for (i, attr), target in sorted(resolved.items()):
        if resolved.get((target, mirror[attr])) != i:
            label = cits[i].id or f"cit[{i}]"
            back = getattr(cits[target], mirror[attr])
            shown = back.raw if back is not None else "nothing"
            sink(
                "E-CHAIN-ASYM", cpath(i),
                f"{label}: @{attr}={getattr(cits[i], attr).raw} but the target's @{mirror[attr]} is {shown}",
                (getattr(cits[i], attr).raw,),
            )

    # cycles along next pointers (self-loops are reported separately)
    nxt = {i: t for (i, attr), t in resolved.items() if attr == "next"}
    seen_cycles = set()
    for start in members:
        trail, node = [], start
        while node in nxt and node not in trail:
            trail.append(node)
            node = nxt[node]
        if node in trail:
            cycle = frozenset(trail[trail.index(node):])
            if cycle not in seen_cycles:
                seen_cycles.add(cycle)
                first = min(cycle)
                ids = ", ".join(cits[k].id or f"cit[{k}]" for k in sorted(cycle))
                sink("E-CHAIN-CYCLE", cpath(first), f"next pointers cycle through {ids}")

    # components joined by mirrored links
    parent = {i: i for i in members}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (i, attr), t in resolved.items():
        if attr == "next" and resolved.get((t, "prev")) == i:
            parent[find(i)] = find(t)
    groups = {}
    for i in members:
        groups.setdefault(find(i), []).append(i)
    components = tuple(sorted(tuple(sorted(g)) for g in groups.values()))

    if has_pointers and len(components) > 1:
        for n, comp in enumerate(components, 1):
            ids = ", ".join(cits[k].id or f"cit[{k}]" for k in comp)
            sink("W-CHAIN-BRANCH", cpath(comp[0]), f"chain fragment {n} of {len(components)}: {ids}")

    if len(members) > cfg.max_chain_length:
        sink("E-CHAIN-LENGTH", tuple(block_path), f"{len(members)} chain members exceed {cfg.max_chain_length}")

    defects = tuple(sink.items)
    chain_errors = any(d.severity is Severity.ERROR for d in defects)
    order = None
    if not has_pointers:
        etymons = [i for i, c in enumerate(cits) if c.kind is CitKind.ETYMON]
        if len(etymons) <= 1:
            order = tuple(etymons)
    elif not chain_errors and len(components) == 1:
        heads = [i for i in members if (i, "prev") not in resolved]
        walk, node = [], heads[0]
        while True:
            walk.append(node)
            if (node, "next") not in resolved:
                break
            node = resolved[(node, "next")]
        order = tuple(walk)
    return ChainReport(
        members=tuple(cits[i].id for i in members),
        order=tuple(cits[i].id for i in order) if order is not None else None,
        defects=defects,
        positions=tuple(members),
        order_positions=order,
        components=components,
    )


# -- per-rule checks ----------------------------------------------------------


def _rule_lang(doc, sink, cfg, registry):
    cache = {}
    for i, entry in enumerate(doc.entries):
        if entry.lang is None:
            sink("E-LANG-MISSING", ("entries", i), f"entry {entry.key(i)} has no xml:lang")
    for path, node in iter_nodes(doc):
        tag = getattr(node, "lang", None)
        if not isinstance(tag, LangTag):
            continue
        if not tag.well_formed:
            sink("E-LANG-MALFORMED", path, f"xml:lang={tag.raw!r} is not a well-formed language tag", (tag.raw,))
            continue
        if not cfg.check_registry:
            continue
        if tag.raw not in cache:
            try:
                cache[tag.raw] = registry_lookup(tag, registry)
            except NotWellFormed:
                cache[tag.raw] = RegistryStatus.NOT_CHECKED
        if cache[tag.raw] is RegistryStatus.UNREGISTERED:
            sink(
                "W-LANG-UNREGISTERED", path,
                f"xml:lang={tag.raw!r} not found in registry snapshot {registry.snapshot_date}", (tag.raw,),
            )


def _rule_place(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        for j, block in enumerate(entry.etymologies):
            if block.etym_type.known and block.etym_type.name in _SENSE_LEVEL:
                sink(
                    "E-ETYM-PLACE", ("entries", i, "etymologies", j),
                    f"{block.etym_type.name} etym belongs inside <sense>, not directly in <entry>",
                )
        for s, sense in enumerate(entry.senses):
            for j, block in enumerate(sense.etymologies):
                if block.etym_type.known and block.etym_type.name in _ENTRY_LEVEL:
                    sink(
                        "E-ETYM-PLACE", ("entries", i, "senses", s, "etymologies", j),
                        f"{block.etym_type.name} etym belongs directly in <entry>, not inside <sense>",
                    )


def _rule_ids(doc, sink, cfg, registry):
    for xml_id, path in doc.duplicate_ids:
        sink("E-ID-DUP", path, f"xml:id={xml_id!r} already used", (xml_id,))


def _rule_chains(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        for path, block, _ in iter_entry_blocks(entry, i):
            for d in check_chain(block, doc, path, cfg).defects:
                sink(d.rule, d.path, d.message, d.related)


def _iter_opaque(doc):
    for path, node in iter_nodes(doc):
        for k, xml in enumerate(getattr(node, "extras", ()) or ()):
            yield path + ("extras", k), xml


def _rule_dates(doc, sink, cfg, registry):
    for path, xml in _iter_opaque(doc):
        try:
            el = etree.fromstring(xml)
        except etree.XMLSyntaxError:
            continue
        for date in el.iter("date"):
            try:
                parse_date_attrs(date.attrib)
            except (BadDateFormat, InvertedSpan) as exc:
                sink(exc.rule, path, str(exc))


def _ref_ok(ref: CrossRef, doc, extra_index) -> tuple:
    """(ok, message) for a non-chain pointer."""
    if ref.is_internal:
        if resolve_ref(ref, doc, extra_index):
            return True, ""
        return False, f"{ref.raw} does not resolve to any xml:id"
    if _URI.match(ref.raw):
        return True, ""
    return False, f"{ref.raw!r} is neither a #fragment nor an absolute URI"


def _iter_refs(doc):
    for path, node in iter_nodes(doc):
        for name in ("corresp", "target"):
            ref = getattr(node, name, None)
            if isinstance(ref, CrossRef):
                yield path, name, ref
        for k, ref in enumerate(getattr(node, "sense_refs", ()) or ()):
            yield path + ("sense_refs", k), "corresp", ref


def _rule_refs(doc, sink, cfg, registry, extra_index=None):
    for path, name, ref in _iter_refs(doc):
        ok, message = _ref_ok(ref, doc, extra_index)
        if not ok:
            sink("E-REF-UNRESOLVED", path, f"@{name}: {message}", (ref.raw,))


def _rule_ref_kind(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        for path, block, _ in iter_entry_blocks(entry, i):
            if block.corresp is None or not block.corresp.is_internal:
                continue
            hit = resolve_ref(block.corresp, doc)
            if not hit:
                continue
            try:
                target = node_at(doc, hit.path)
            except UnknownNode:
                continue
            if not isinstance(target, FormBlock):
                sink(
                    "E-REF-KIND", path,
                    f"etym @corresp={block.corresp.raw} points at a {type(target).__name__}, not a form",
                    (block.corresp.raw,),
                )


def _rule_components(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        for bpath, block, _ in iter_entry_blocks(entry, i):
            for cpath, cit in iter_citations(block.citations, bpath + ("citations",)):
                for k, child in enumerate(cit.nested):
                    if child.kind is CitKind.COMPONENT:
                        _check_component(sink, cpath + ("nested", k), child, cit)
                if cit.kind is CitKind.COMPONENT and len(cpath) == len(bpath) + 2:
                    sink("E-COMP-SEG", cpath, "component citation is not inside an etymon citation")


def _check_component(sink, path, comp: Citation, owner: Citation):
    if comp.corresp is None:
        sink("E-COMP-SEG", path, "component citation has no @corresp")
        return
    seg_ids = set()
    for form in (owner.oref, owner.pref):
        if form is not None:
            seg_ids |= form.seg_ids()
    if comp.corresp.fragment not in seg_ids:
        where = owner.id or "the enclosing etymon"
        sink(
            "E-COMP-SEG", path,
            f"@corresp={comp.corresp.raw} is not a seg id in the oRef/pRef of {where}",
            (comp.corresp.raw,),
        )


def _rule_compound(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        if (entry.entry_type or "").lower() != "compound":
            continue
        decomposed = any(
            f.is_decomposed
            for _, form in iter_forms(entry.forms, ())
            for f in form.orths + form.prons
        )
        compounding = any(
            b.etym_type.known and b.etym_type.name == "compounding"
            for _, b, _ in iter_entry_blocks(entry, i)
        )
        if not decomposed and not compounding:
            sink(
                "W-COMPOUND-DECOMP", ("entries", i),
                f"compound entry {entry.key(i)} has no seg-decomposed form and no compounding etym",
            )


def _rule_etym_types(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        for path, block, _ in iter_entry_blocks(entry, i):
            if block.is_legacy:
                sink("I-ETYM-LEGACY", path, "etym holds flat <lang>/<mentioned> content; see convert")
            if block.etym_type.known:
                continue
            if block.etym_type.name == "":
                sink("W-ETYM-UNTYPED", path, "etym has no @type")
            else:
                sink("I-ETYM-OPENTYPE", path, f"etym @type={block.etym_type.name!r} is not a named process")
        for path, block, _ in iter_entry_blocks(entry, i):
            for k, xml in enumerate(block.extras):
                if xml.startswith("<oRef") or xml.startswith("<pRef"):
                    sink("W-ETYM-BAREREF", path + ("extras", k), "oRef/pRef directly inside etym; wrap it in <cit type=\"etymon\">")


def is_redundant_wrapper(cit: Citation) -> bool:
    inner = [c for c in cit.nested if c.kind is CitKind.ETYMON]
    if len(cit.nested) != 1 or len(inner) != 1:
        return False
    payload = (
        cit.oref, cit.pref, cit.date, cit.grammar, cit.quote, cit.label, cit.lang_label,
        cit.id, cit.prev, cit.next, cit.corresp,
    )
    lists = (cit.glosses, cit.usages, cit.sense_refs, cit.notes, cit.bibls, cit.refs, cit.extras)
    if cit.lang is not None and inner[0].lang is not None:
        return False
    return all(v is None for v in payload) and not any(lists)


def _rule_citations(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        for bpath, block, _ in iter_entry_blocks(entry, i):
            for cpath, cit in iter_citations(block.citations, bpath + ("citations",)):
                if cit.raw_type is not None:
                    sink("W-CIT-UNKNOWN-TYPE", cpath, f"cit @type={cit.raw_type!r} read as etymon")
                if cit.kind is not CitKind.ETYMON:
                    continue
                if is_redundant_wrapper(cit):
                    sink("W-CIT-REDUNDANT", cpath, "etymon citation only wraps one nested etymon citation")
                elif cit.oref is None and cit.pref is None and not any(
                    c.kind is CitKind.ETYMON for c in cit.nested
                ):
                    label = cit.id or "citation"
                    sink("E-ETYMON-EMPTY", cpath, f"etymon {label} has neither oRef nor pRef")


def _rule_notation(doc, sink, cfg, registry):
    for path, node in iter_nodes(doc):
        if getattr(node, "kind", None) is None or not hasattr(node, "notation"):
            continue
        if node.kind.value != "pron":
            continue
        if node.notation is None:
            sink("W-PRON-NOTATION", path, "pronunciation without @notation")
        elif node.notation.lower() not in cfg.known_notations:
            sink("I-NOTATION-UNKNOWN", path, f"notation {node.notation!r} is not in the known list", (node.notation,))


def _rule_forms(doc, sink, cfg, registry):
    for i, entry in enumerate(doc.entries):
        if not entry.forms:
            sink("W-ENTRY-NOFORM", ("entries", i), f"entry {entry.key(i)} has no <form>")


_CHECKS = (
    _rule_lang, _rule_place, _rule_ids, _rule_chains, _rule_dates, _rule_refs, _rule_ref_kind,
    _rule_components, _rule_compound, _rule_etym_types, _rule_citations, _rule_notation, _rule_forms,
)


def sort_diagnostics(items) -> list:
    return sorted(items, key=Diagnostic.sort_key)


def lint_document(
    doc: Document,
    cfg: Optional[RuleConfig] = None,
    registry: Optional[RegistrySnapshot] = None,
    external_index: Optional[dict] = None,
) -> list:
    """Run every rule and return findings sorted by entry, path and rule id."""
    cfg = cfg or RuleConfig()
    if registry is None and cfg.check_registry:
        registry = default_registry()
    sink = _Sink(doc)
    for check in _CHECKS:
        if check is _rule_refs:
            check(doc, sink, cfg, registry, external_index)
        else:
            check(doc, sink, cfg, registry)
    return apply_config(sink.items, cfg)


def apply_config(items, cfg: RuleConfig) -> list:
    out = []
    for d in items:
        if d.rule in cfg.disabled_rules:
            continue
        severity = cfg.severity(d.rule) if d.rule in RULES else d.severity
        if severity is not d.severity:
            d = Diagnostic(**{**d.__dict__, "severity": severity})
        out.append(d)
    return sort_diagnostics(out)
