"""Read TEI P5 dictionary XML into the model and write it back out."""

from __future__ import annotations

import copy
import io
import re
from typing import Mapping, Optional

from lxml import etree

from .langtag import parse_tag
from .model import (
    CitKind,
    Citation,
    CrossRef,
    DateSpan,
    Diagnostic,
    Document,
    EtymologyBlock,
    EtymType,
    FormBlock,
    FormKind,
    Gloss,
    GrammarGroup,
    Inline,
    LangLabel,
    LegacyItem,
    LexicalEntry,
    Plain,
    Punct,
    Quote,
    Ref,
    Seg,
    SegmentedForm,
    SenseBlock,
    Severity,
    SourceSpan,
    UsageDomain,
    cross_ref,
)

TEI_NS = "http://www.tei-c.org/ns/1.0"
XML_NS = "http://www.w3.org/XML/1998/namespace"
XML_ID = f"{{{XML_NS}}}id"
XML_LANG = f"{{{XML_NS}}}lang"

MAX_ETYM_DEPTH = 32

_CONTAINERS = {"TEI", "teiCorpus", "text", "body", "front", "back", "group", "div"}
_WS = re.compile(r"\s+")
_YEAR = re.compile(r"^[0-9]{4}\Z")

# <gramGrp> children with a dedicated GrammarGroup field
_GRAM_FIELDS = {
    "pos": "pos",
    "gen": "gender",
    "number": "number",
    "case": "case",
    "per": "person",
    "tns": "tense",
    "mood": "mood",
    "iType": "inflection_type",
}
_GRAM_TAGS = {v: k for k, v in _GRAM_FIELDS.items()}


class XmlSyntaxError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class EncodingError(ValueError):
    pass


class DepthExceeded(RecursionError):
    pass


class BadDateFormat(ValueError):
    rule = "E-DATE-FORMAT"


class InvertedSpan(ValueError):
    rule = "E-DATE-INVERTED"


def _local(el) -> str:
    if not isinstance(el.tag, str):
        return ""
    return etree.QName(el).localname


def _collapse(text: Optional[str]) -> str:
    return _WS.sub(" ", text or "").strip()


def parse_date_attrs(attrs: Mapping[str, str], text: Optional[str] = None) -> DateSpan:
    """Build a DateSpan from ``notBefore``/``notAfter``/``when``; years must be four digits."""
    years = {}
    for name in ("notBefore", "notAfter", "when"):
        value = attrs.get(name)
        if value is None:
            continue
        if not _YEAR.match(value.strip()):
            raise BadDateFormat(f"@{name}={value!r} is not a four-digit year")
        years[name] = int(value)
    if not years:
        raise BadDateFormat("date carries none of @notBefore, @notAfter, @when")
    lo, hi = years.get("notBefore"), years.get("notAfter")
    if lo is not None and hi is not None and lo > hi:
        raise InvertedSpan(f"@notBefore={lo:04d} is later than @notAfter={hi:04d}")
    original = _collapse(text) or None
    return DateSpan(not_before=lo, not_after=hi, when=years.get("when"), original_text=original)


def _merge_plain(parts: list) -> list:
    out = []
    for p in parts:
        if isinstance(p, Plain) and out and isinstance(out[-1], Plain):
            out[-1] = Plain(out[-1].text + p.text)
        else:
            out.append(p)
    return out


def _trim_edges(parts: list, rebuild) -> list:
    """Strip leading whitespace of the first part and trailing of the last."""
    if not parts:
        return parts
    parts = list(parts)
    parts[0] = rebuild(parts[0], lambda s: s.lstrip())
    parts[-1] = rebuild(parts[-1], lambda s: s.rstrip())
    return [p for p in parts if not (isinstance(p, Plain) and p.text == "")]


def opaque_xml(el) -> str:
    """Serialize an unmodeled element without namespaces, comments or tail."""
    clone = copy.deepcopy(el)
    clone.tail = None
    for node in clone.iter():
        if isinstance(node.tag, str):
            node.tag = etree.QName(node).localname
    etree.cleanup_namespaces(clone)
    return etree.tostring(clone, encoding="unicode", with_tail=False)


class _Parser:
    def __init__(self, source_name: str):
        self.source_name = source_name
        self.diagnostics = []
        self.id_index = {}
        self.duplicates = []
        self.lines = {}
        self.entry_index = None
        self.entry_key = None

    # -- bookkeeping ------------------------------------------------------

    def diag(self, rule, severity, message, path=(), el=None, related=()):
        self.diagnostics.append(
            Diagnostic(
                rule=rule,
                severity=severity,
                message=message,
                entry_index=self.entry_index,
                entry=self.entry_key,
                path=path,
                line=el.sourceline if el is not None else None,
                related=tuple(related),
                file=self.source_name,
            )
        )

    def register_id(self, xml_id: Optional[str], path):
        if not xml_id:
            return
        if xml_id in self.id_index:
            self.duplicates.append((xml_id, path))
        else:
            self.id_index[xml_id] = path

    def mark(self, el, path):
        self.lines[path] = el.sourceline

    def opaque(self, el, path, reason: Optional[str] = None) -> str:
        self.mark(el, path)
        for node in el.iter():
            if isinstance(node.tag, str):
                self.register_id(node.get(XML_ID), path)
        if reason:
            self.diag("W-PARSE-OPAQUE", Severity.WARNING, reason, path, el)
        else:
            self.diag("I-PARSE-OPAQUE", Severity.INFO, f"<{_local(el)}> kept as opaque content", path, el)
        return opaque_xml(el)

    @staticmethod
    def lang(el):
        value = el.get(XML_LANG)
        return parse_tag(value) if value is not None else None

    # -- document ---------------------------------------------------------

    def walk(self, el, entries):
        name = _local(el)
        if name == "entry":
            self.entry_index = len(entries)
            entries.append(self.parse_entry(el, len(entries)))
            self.entry_index = self.entry_key = None
            return
        if name in _CONTAINERS:
            for child in el:
                if isinstance(child.tag, str):
                    self.walk(child, entries)
            return
        if name and name != "teiHeader":
            self.diag("I-PARSE-SKIPPED", Severity.INFO, f"<{name}> outside any entry skipped", (), el)

    # -- entries ----------------------------------------------------------

    def parse_entry(self, el, index: int) -> LexicalEntry:
        base = ("entries", index)
        self.entry_key = el.get(XML_ID) or f"entry[{index}]"
        self.mark(el, base)
        self.register_id(el.get(XML_ID), base)
        forms, senses, etyms, extras = [], [], [], []
        grammar = None
        for child in el:
            name = _local(child)
            if not name:
                continue
            if name == "form":
                forms.append(self.parse_form(child, base + ("forms", len(forms))))
            elif name == "sense":
                senses.append(self.parse_sense(child, base + ("senses", len(senses))))
            elif name == "etym":
                etyms.append(self.parse_etym(child, 0, base + ("etymologies", len(etyms))))
            elif name == "gramGrp" and grammar is None:
                grammar = self.parse_grammar(child)
            else:
                extras.append(self.opaque(child, base + ("extras", len(extras))))
        return LexicalEntry(
            id=el.get(XML_ID),
            lang=self.lang(el),
            entry_type=el.get("type"),
            entry_subtype=el.get("subtype"),
            forms=tuple(forms),
            grammar=grammar,
            senses=tuple(senses),
            etymologies=tuple(etyms),
            extras=tuple(extras),
            source_span=SourceSpan(el.sourceline),
        )

    def parse_form(self, el, path) -> FormBlock:
        self.mark(el, path)
        self.register_id(el.get(XML_ID), path)
        orths, prons, nested, extras = [], [], [], []
        grammar = None
        for child in el:
            name = _local(child)
            if name == "orth":
                orths.append(self.parse_segmented(child, FormKind.ORTH, path + ("orths", len(orths))))
            elif name == "pron":
                prons.append(self.parse_segmented(child, FormKind.PRON, path + ("prons", len(prons))))
            elif name == "form":
                nested.append(self.parse_form(child, path + ("nested", len(nested))))
            elif name == "gramGrp" and grammar is None:
                grammar = self.parse_grammar(child)
            elif name:
                extras.append(self.opaque(child, path + ("extras", len(extras))))
        return FormBlock(
            id=el.get(XML_ID),
            form_type=el.get("type"),
            lang=self.lang(el),
            orths=tuple(orths),
            prons=tuple(prons),
            grammar=grammar,
            nested=tuple(nested),
            extras=tuple(extras),
        )

    def parse_segmented(self, el, kind: FormKind, path) -> SegmentedForm:
        self.mark(el, path)
        parts = []

        def add_text(chunk):
            if not chunk:
                return
            if not chunk.strip():
                # indentation between <seg>s is layout, a lone space is data
                if "\n" not in chunk:
                    parts.append(Plain(" "))
                return
            parts.append(Plain(_WS.sub(" ", chunk)))

        add_text(el.text)
        for child in el:
            name = _local(child)
            if name == "seg":
                spath = path + ("segments", len(parts))
                self.register_id(child.get(XML_ID), spath)
                parts.append(
                    Seg(
                        text=_WS.sub(" ", "".join(child.itertext())),
                        id=child.get(XML_ID),
                        corresp=cross_ref(child.get("corresp")),
                        ana=child.get("ana"),
                    )
                )
            elif name == "pc":
                parts.append(Punct(_collapse("".join(child.itertext()))))
            elif name:
                self.diag(
                    "W-PARSE-OPAQUE", Severity.WARNING,
                    f"<{name}> inside <{_local(el)}> flattened to text", path, child,
                )
                parts.append(Plain(_WS.sub(" ", "".join(child.itertext()))))
            add_text(child.tail)

        def rebuild(seg, fn):
            if isinstance(seg, Seg):
                return Seg(fn(seg.text), seg.id, seg.corresp, seg.ana)
            return type(seg)(fn(seg.text))

        segments = _trim_edges(_merge_plain(parts), rebuild)
        return SegmentedForm(
            kind=kind,
            segments=tuple(segments),
            notation=el.get("notation"),
            lang=self.lang(el),
            corresp=cross_ref(el.get("corresp")),
            type=el.get("type"),
            ana=el.get("ana"),
        )

    def parse_grammar(self, el) -> GrammarGroup:
        values = {}
        extra = []
        for child in el:
            name = _local(child)
            if not name:
                continue
            text = _collapse("".join(child.itertext()))
            if not text:
                continue
            field_name = _GRAM_FIELDS.get(name)
            if field_name and field_name not in values:
                values[field_name] = text
            elif name == "gram":
                extra.append((child.get("type") or "", text))
            else:
                extra.append((name, text))
        return GrammarGroup(extra=tuple(extra), **values)

    def parse_sense(self, el, path) -> SenseBlock:
        self.mark(el, path)
        self.register_id(el.get(XML_ID), path)
        defs, usages, cits, etyms, extras = [], [], [], [], []
        for child in el:
            name = _local(child)
            if name == "def":
                defs.append(Gloss(_collapse("".join(child.itertext())), self.lang(child)))
            elif name == "usg" and _collapse("".join(child.itertext())):
                usages.append(self.parse_usage(child))
            elif name == "etym":
                etyms.append(self.parse_etym(child, 0, path + ("etymologies", len(etyms))))
            elif name == "cit":
                cits.append(self.parse_citation(child, path + ("translations", len(cits))))
            elif name:
                extras.append(self.opaque(child, path + ("extras", len(extras))))
        return SenseBlock(
            id=el.get(XML_ID),
            corresp=cross_ref(el.get("corresp")),
            lang=self.lang(el),
            definitions=tuple(defs),
            usages=tuple(usages),
            translations=tuple(cits),
            etymologies=tuple(etyms),
            extras=tuple(extras),
        )

    @staticmethod
    def parse_usage(el) -> UsageDomain:
        return UsageDomain(el.get("type"), _collapse("".join(el.itertext())), cross_ref(el.get("corresp")))

    def parse_date(self, el, path):
        try:
            return parse_date_attrs(el.attrib, "".join(el.itertext()))
        except (BadDateFormat, InvertedSpan) as exc:
            self.opaque(el, path, f"<date> not usable: {exc}")
            return None

    # -- etymologies ------------------------------------------------------

    def parse_etym(self, el, depth: int, path) -> EtymologyBlock:
        if depth > MAX_ETYM_DEPTH:
            raise DepthExceeded(f"<etym> nested deeper than {MAX_ETYM_DEPTH}")
        self.mark(el, path)
        legacy_mode = any(_local(c) == "mentioned" for c in el)
        cits, nested, lang_labels, labels, notes, bibls, refs, legacy, extras = ([] for _ in range(9))
        date = None

        def legacy_text(chunk):
            text = _collapse(chunk)
            if text:
                legacy.append(LegacyItem("text", text))

        if legacy_mode:
            legacy_text(el.text)
        for child in el:
            name = _local(child)
            if not name:
                if legacy_mode:
                    legacy_text(child.tail)
                continue
            if legacy_mode and name in ("lang", "mentioned", "bibl"):
                legacy.append(LegacyItem(name, _collapse("".join(child.itertext()))))
            elif name == "cit":
                cits.append(self.parse_citation(child, path + ("citations", len(cits))))
            elif name == "etym":
                nested.append(self.parse_etym(child, depth + 1, path + ("nested", len(nested))))
            elif name == "date" and date is None:
                date = self.parse_date(child, path + ("extras", len(extras)))
                if date is None:
                    extras.append(opaque_xml(child))
            elif name == "lang":
                lang_labels.append(LangLabel(_collapse("".join(child.itertext())), cross_ref(child.get("corresp"))))
            elif name == "lbl":
                labels.append(_collapse("".join(child.itertext())))
            elif name == "note":
                notes.append(_collapse("".join(child.itertext())))
            elif name == "bibl":
                bibls.append(_collapse("".join(child.itertext())))
            elif name == "ref":
                refs.append(self.parse_ref(child))
            else:
                extras.append(self.opaque(child, path + ("extras", len(extras))))
            if legacy_mode:
                legacy_text(child.tail)
        return EtymologyBlock(
            etym_type=EtymType.from_attr(el.get("type")),
            corresp=cross_ref(el.get("corresp")),
            lang=self.lang(el),
            date=date,
            citations=tuple(cits),
            nested=tuple(nested),
            lang_labels=tuple(lang_labels),
            labels=tuple(labels),
            notes=tuple(notes),
            bibls=tuple(bibls),
            refs=tuple(refs),
            legacy=tuple(legacy),
            extras=tuple(extras),
        )

    @staticmethod
    def parse_ref(el) -> Ref:
        return Ref(
            text=_collapse("".join(el.itertext())),
            target=cross_ref(el.get("target")),
            corresp=cross_ref(el.get("corresp")),
            ref_type=el.get("type"),
        )

    def parse_citation(self, el, path) -> Citation:
        self.mark(el, path)
        self.register_id(el.get(XML_ID), path)
        raw_type = el.get("type")
        try:
            kind = CitKind((raw_type or "").lower())
            unknown = None
        except ValueError:
            kind = CitKind.ETYMON
            unknown = raw_type if raw_type is not None else ""
        fields = {}
        glosses, usages, sense_refs, notes, bibls, refs, nested, extras = ([] for _ in range(8))
        for child in el:
            name = _local(child)
            if name in ("oRef", "pRef") and name.lower() not in fields:
                kind_ = FormKind.ORTH if name == "oRef" else FormKind.PRON
                fields[name.lower()] = self.parse_segmented(child, kind_, path + (name.lower(),))
            elif name == "date" and "date" not in fields:
                date = self.parse_date(child, path + ("extras", len(extras)))
                if date is None:
                    extras.append(opaque_xml(child))
                else:
                    fields["date"] = date
            elif name == "gramGrp" and "grammar" not in fields:
                fields["grammar"] = self.parse_grammar(child)
            elif name == "gloss":
                glosses.append(Gloss(_collapse("".join(child.itertext())), self.lang(child)))
            elif name == "usg" and _collapse("".join(child.itertext())):
                usages.append(self.parse_usage(child))
            elif name == "ref":
                ref = self.parse_ref(child)
                if ref.ref_type == "sense" and ref.corresp and not ref.text and ref.target is None:
                    sense_refs.append(ref.corresp)
                else:
                    refs.append(ref)
            elif name == "quote" and "quote" not in fields:
                fields["quote"] = self.parse_quote(child, path + ("quote",))
            elif name == "note":
                notes.append(_collapse("".join(child.itertext())))
            elif name == "bibl":
                bibls.append(_collapse("".join(child.itertext())))
            elif name == "lbl" and "label" not in fields:
                fields["label"] = _collapse("".join(child.itertext()))
            elif name == "lang" and "lang_label" not in fields:
                fields["lang_label"] = _collapse("".join(child.itertext()))
            elif name == "cit":
                nested.append(self.parse_citation(child, path + ("nested", len(nested))))
            elif name:
                extras.append(self.opaque(child, path + ("extras", len(extras))))
        if el.get("cert") is not None:
            notes.append(f"cert: {el.get('cert')}")
        return Citation(
            kind=kind,
            id=el.get(XML_ID),
            prev=cross_ref(el.get("prev")),
            next=cross_ref(el.get("next")),
            lang=self.lang(el),
            raw_type=unknown,
            oref=fields.get("oref"),
            pref=fields.get("pref"),
            date=fields.get("date"),
            grammar=fields.get("grammar"),
            glosses=tuple(glosses),
            usages=tuple(usages),
            sense_refs=tuple(sense_refs),
            quote=fields.get("quote"),
            corresp=cross_ref(el.get("corresp")),
            ana=el.get("ana"),
            label=fields.get("label"),
            lang_label=fields.get("lang_label"),
            notes=tuple(notes),
            bibls=tuple(bibls),
            refs=tuple(refs),
            nested=tuple(nested),
            extras=tuple(extras),
        )

    def parse_quote(self, el, path) -> Quote:
        self.mark(el, path)

        def inline_parts(node, base):
            parts = []
            if node.text:
                parts.append(Plain(_WS.sub(" ", node.text)))
            for child in node:
                name = _local(child)
                if name in ("oRef", "seg"):
                    ipath = base + ("parts", len(parts))
                    self.register_id(child.get(XML_ID), ipath)
                    parts.append(
                        Inline(
                            tag=name,
                            parts=tuple(inline_parts(child, ipath)),
                            id=child.get(XML_ID),
                            corresp=cross_ref(child.get("corresp")),
                            ana=child.get("ana"),
                            lang=self.lang(child),
                        )
                    )
                elif name:
                    parts.append(Plain(_WS.sub(" ", "".join(child.itertext()))))
                if child.tail:
                    parts.append(Plain(_WS.sub(" ", child.tail)))
            return _merge_plain(parts)

        parts = _trim_edges(inline_parts(el, path), _edge_rebuilder)
        return Quote(parts=tuple(parts), lang=self.lang(el))


def _edge_rebuilder(part, fn):
    """Apply ``fn`` to the outermost text of ``part`` (for edge trimming)."""
    if isinstance(part, Plain):
        return Plain(fn(part.text))
    inner = list(part.parts)
    if inner:
        probe = fn(" x ")
        idx = 0 if probe.startswith("x") else -1
        inner[idx] = _edge_rebuilder(inner[idx], fn)
        inner = [p for p in inner if not (isinstance(p, Plain) and p.text == "")]
    return Inline(part.tag, tuple(inner), part.id, part.corresp, part.ana, part.lang)


def _load_tree(data, source_name: str):
    parser = etree.XMLParser(
        collect_ids=False, remove_comments=True, remove_pis=True,
        resolve_entities=False, no_network=True, huge_tree=True,
    )
    if isinstance(data, str):
        data = data.encode("utf-8")
    elif hasattr(data, "read"):
        data = data.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    head = data[:200].lstrip()
    if not head.startswith(b"<?xml") or b"encoding" not in head.split(b"?>")[0]:
        try:
            data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise EncodingError(f"{source_name}: input is not UTF-8 ({exc.reason} at byte {exc.start})") from exc
    try:
        return etree.fromstring(data, parser)
    except etree.XMLSyntaxError as exc:
        message = str(exc)
        if "encoding" in message.lower() or "utf-8" in message.lower():
            raise EncodingError(f"{source_name}: {message}") from exc
        line, column = exc.position if exc.position else (None, None)
        raise XmlSyntaxError(f"{source_name}: {exc.msg}", line, column) from exc


def parse_document(data, source_name: str = "") -> tuple:
    """Parse TEI bytes into ``(Document, diagnostics)``.

    Raises :class:`XmlSyntaxError` or :class:`EncodingError`; everything else
    is reported as a diagnostic.
    """
    root = _load_tree(data, source_name)
    p = _Parser(source_name)
    entries = []
    p.walk(root, entries)
    doc = Document(
        entries=tuple(entries),
        id_index=p.id_index,
        duplicate_ids=tuple(p.duplicates),
        source_name=source_name,
        lines=p.lines,
    )
    return doc, p.diagnostics


def parse_file(path) -> tuple:
    with open(path, "rb") as fh:
        return parse_document(fh.read(), str(path))


def parse_entry(element) -> LexicalEntry:
    return _Parser("").parse_entry(element, 0)


def parse_etym(element, depth: int = 0) -> EtymologyBlock:
    return _Parser("").parse_etym(element, depth, ("etymologies", 0))


def parse_citation(element) -> Citation:
    return _Parser("").parse_citation(element, ("citations", 0))


# -- emission -----------------------------------------------------------------

_BLOCKS = {
    "TEI", "teiHeader", "fileDesc", "titleStmt", "publicationStmt", "sourceDesc",
    "text", "body", "entry", "form", "gramGrp", "sense", "etym", "cit",
}


def _q(name: str) -> str:
    return f"{{{TEI_NS}}}{name}"


def _set_attrs(el, attrs: dict):
    """Attributes in a fixed order: sorted by their serialized name."""
    named = []
    for key, value in attrs.items():
        if value is None:
            continue
        shown = key.replace(f"{{{XML_NS}}}", "xml:")
        named.append((shown, key, str(value)))
    for _, key, value in sorted(named):
        el.set(key, value)


def _sub(parent, name, text=None, **attrs):
    el = etree.SubElement(parent, _q(name))
    _set_attrs(el, attrs)
    if text is not None:
        el.text = text
    return el


def _lang(tag) -> Optional[str]:
    return tag.raw if tag is not None else None


def _ref(ref) -> Optional[str]:
    return ref.raw if ref is not None else None


def _append_opaque(parent, xml: str):
    el = etree.fromstring(xml)
    for node in el.iter():
        if isinstance(node.tag, str) and not etree.QName(node).namespace:
            node.tag = _q(node.tag)
    parent.append(el)


def _append_text(parent, text: str):
    if len(parent):
        parent[-1].tail = (parent[-1].tail or "") + text
    else:
        parent.text = (parent.text or "") + text


def _emit_segmented(parent, name, form: SegmentedForm):
    el = _sub(
        parent, name,
        notation=form.notation, type=form.type, corresp=_ref(form.corresp), ana=form.ana,
        **{XML_LANG: _lang(form.lang)},
    )
    for seg in form.segments:
        if isinstance(seg, Seg):
            _sub(el, "seg", seg.text, corresp=_ref(seg.corresp), ana=seg.ana, **{XML_ID: seg.id})
        elif isinstance(seg, Punct):
            _sub(el, "pc", seg.text)
        else:
            _append_text(el, seg.text)
    return el


def _emit_grammar(parent, grammar: GrammarGroup):
    el = _sub(parent, "gramGrp")
    for field_name, tag in _GRAM_TAGS.items():
        value = getattr(grammar, field_name)
        if value is not None:
            _sub(el, tag, value)
    for category, value in grammar.extra:
        _sub(el, "gram", value, type=category or None)
    return el


def _emit_date(parent, date: DateSpan):
    def year(v):
        return f"{v:04d}" if v is not None else None

    _sub(
        parent, "date", date.original_text,
        notBefore=year(date.not_before), notAfter=year(date.not_after), when=year(date.when),
    )


def _emit_inline_parts(parent, parts):
    for part in parts:
        if isinstance(part, Inline):
            child = _sub(
                parent, part.tag, corresp=_ref(part.corresp), ana=part.ana,
                **{XML_ID: part.id, XML_LANG: _lang(part.lang)},
            )
            _emit_inline_parts(child, part.parts)
        else:
            _append_text(parent, part.text)


def _emit_ref(parent, ref: Ref):
    _sub(parent, "ref", ref.text or None, target=_ref(ref.target), corresp=_ref(ref.corresp), type=ref.ref_type)


def _emit_citation(parent, cit: Citation):
    el = _sub(
        parent, "cit",
        type=cit.raw_type if cit.raw_type is not None else cit.kind.value,
        prev=_ref(cit.prev), next=_ref(cit.next), corresp=_ref(cit.corresp), ana=cit.ana,
        **{XML_ID: cit.id, XML_LANG: _lang(cit.lang)},
    )
    if cit.date is not None:
        _emit_date(el, cit.date)
    if cit.label is not None:
        _sub(el, "lbl", cit.label)
    if cit.oref is not None:
        _emit_segmented(el, "oRef", cit.oref)
    if cit.pref is not None:
        _emit_segmented(el, "pRef", cit.pref)
    if cit.lang_label is not None:
        _sub(el, "lang", cit.lang_label)
    if cit.quote is not None:
        q = _sub(el, "quote", **{XML_LANG: _lang(cit.quote.lang)})
        _emit_inline_parts(q, cit.quote.parts)
    if cit.grammar is not None:
        _emit_grammar(el, cit.grammar)
    for usage in cit.usages:
        _sub(el, "usg", usage.text, type=usage.usage_type, corresp=_ref(usage.corresp))
    for gloss in cit.glosses:
        _sub(el, "gloss", gloss.text, **{XML_LANG: _lang(gloss.lang)})
    for sref in cit.sense_refs:
        _sub(el, "ref", type="sense", corresp=sref.raw)
    for ref in cit.refs:
        _emit_ref(el, ref)
    for note in cit.notes:
        _sub(el, "note", note)
    for bibl in cit.bibls:
        _sub(el, "bibl", bibl)
    for child in cit.nested:
        _emit_citation(el, child)
    for xml in cit.extras:
        _append_opaque(el, xml)


def _emit_etym(parent, block: EtymologyBlock):
    el = _sub(
        parent, "etym",
        type=block.etym_type.name if (block.etym_type.known or block.etym_type.name) else None,
        corresp=_ref(block.corresp), **{XML_LANG: _lang(block.lang)},
    )
    for item in block.legacy:
        if item.kind == "text":
            _append_text(el, item.text)
        else:
            _sub(el, item.kind, item.text)
    if block.date is not None:
        _emit_date(el, block.date)
    for label in block.labels:
        _sub(el, "lbl", label)
    for lang in block.lang_labels:
        _sub(el, "lang", lang.text, corresp=_ref(lang.corresp))
    for cit in block.citations:
        _emit_citation(el, cit)
    for child in block.nested:
        _emit_etym(el, child)
    for note in block.notes:
        _sub(el, "note", note)
    for ref in block.refs:
        _emit_ref(el, ref)
    for bibl in block.bibls:
        _sub(el, "bibl", bibl)
    for xml in block.extras:
        _append_opaque(el, xml)


def _emit_form(parent, form: FormBlock):
    el = _sub(parent, "form", type=form.form_type, **{XML_ID: form.id, XML_LANG: _lang(form.lang)})
    for orth in form.orths:
        _emit_segmented(el, "orth", orth)
    for pron in form.prons:
        _emit_segmented(el, "pron", pron)
    if form.grammar is not None:
        _emit_grammar(el, form.grammar)
    for child in form.nested:
        _emit_form(el, child)
    for xml in form.extras:
        _append_opaque(el, xml)


def _emit_sense(parent, sense: SenseBlock):
    el = _sub(parent, "sense", corresp=_ref(sense.corresp), **{XML_ID: sense.id, XML_LANG: _lang(sense.lang)})
    for d in sense.definitions:
        _sub(el, "def", d.text, **{XML_LANG: _lang(d.lang)})
    for usage in sense.usages:
        _sub(el, "usg", usage.text, type=usage.usage_type, corresp=_ref(usage.corresp))
    for block in sense.etymologies:
        _emit_etym(el, block)
    for cit in sense.translations:
        _emit_citation(el, cit)
    for xml in sense.extras:
        _append_opaque(el, xml)


def emit_entry(parent, entry: LexicalEntry):
    el = _sub(
        parent, "entry", type=entry.entry_type, subtype=entry.entry_subtype,
        **{XML_ID: entry.id, XML_LANG: _lang(entry.lang)},
    )
    for form in entry.forms:
        _emit_form(el, form)
    if entry.grammar is not None:
        _emit_grammar(el, entry.grammar)
    for sense in entry.senses:
        _emit_sense(el, sense)
    for block in entry.etymologies:
        _emit_etym(el, block)
    for xml in entry.extras:
        _append_opaque(el, xml)
    return el


def _is_mixed(el) -> bool:
    if el.text and el.text.strip():
        return True
    return any(child.tail and child.tail.strip() for child in el)


def _indent(el, level: int = 0):
    if _local(el) not in _BLOCKS or not len(el) or _is_mixed(el):
        return
    pad = "\n" + "  " * (level + 1)
    el.text = pad
    for child in el:
        child.tail = pad
        _indent(child, level + 1)
    el[-1].tail = "\n" + "  " * level


def emit_tei(doc: Document) -> bytes:
    """Serialize a document as TEI XML (UTF-8, LF, two-space indent)."""
    root = etree.Element(_q("TEI"), nsmap={None: TEI_NS})
    header = _sub(root, "teiHeader")
    file_desc = _sub(header, "fileDesc")
    _sub(_sub(file_desc, "titleStmt"), "title", doc.source_name or "untitled")
    _sub(_sub(file_desc, "publicationStmt"), "p", "Generated by etymograph.")
    _sub(_sub(file_desc, "sourceDesc"), "p", doc.source_name or "constructed document")
    body = _sub(_sub(root, "text"), "body")
    for entry in doc.entries:
        emit_entry(body, entry)
    _indent(root)
    out = io.BytesIO()
    out.write(b'<?xml version="1.0" encoding="UTF-8"?>\n')
    out.write(etree.tostring(root, encoding="utf-8"))
    out.write(b"\n")
    return out.getvalue()
