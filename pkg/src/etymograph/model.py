"""In-memory model of TEI dictionary entries and their etymologies.

Every value here is a frozen dataclass built from tuples, so two parses of the
same bytes compare equal and model values can be shared freely between
threads.  Source positions (line numbers) are carried outside of equality.

A *node path* addresses any model node relative to a :class:`Document`.  It is
a flat tuple alternating attribute names and list indices, e.g.::

    ("entries", 0, "etymologies", 0, "citations", 3, "pref")
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Optional, Union

NodePath = tuple


class UnknownNode(LookupError):
    """A node path does not resolve inside a document."""


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


class RegistryStatus(str, enum.Enum):
    REGISTERED = "registered"
    UNREGISTERED = "unregistered"
    NOT_CHECKED = "not-checked"


class CitKind(str, enum.Enum):
    ETYMON = "etymon"
    ATTESTATION = "attestation"
    TRANSLATION = "translation"
    COMPONENT = "component"


class FormKind(str, enum.Enum):
    ORTH = "orth"
    PRON = "pron"


# The six process names with dedicated semantics; anything else is carried
# verbatim as an "open" type.
KNOWN_ETYM_TYPES = (
    "inheritance",
    "borrowing",
    "metaphor",
    "metonymy",
    "compounding",
    "grammaticalization",
)


@dataclass(frozen=True)
class EtymType:
    """An ``<etym @type>`` value: one of the six named processes or ``Other``."""

    name: str
    known: bool = True

    @classmethod
    def from_attr(cls, value: Optional[str]) -> "EtymType":
        if value is None:
            return cls("", known=False)
        lowered = value.lower()
        if lowered in KNOWN_ETYM_TYPES:
            return cls(lowered)
        return cls(value, known=False)

    @property
    def is_other(self) -> bool:
        return not self.known

    def __str__(self) -> str:
        return self.name


INHERITANCE = EtymType("inheritance")
BORROWING = EtymType("borrowing")
METAPHOR = EtymType("metaphor")
METONYMY = EtymType("metonymy")
COMPOUNDING = EtymType("compounding")
GRAMMATICALIZATION = EtymType("grammaticalization")


@dataclass(frozen=True)
class LangTag:
    raw: str
    primary_subtag: str = ""
    extlangs: tuple = ()
    script: Optional[str] = None
    region: Optional[str] = None
    variants: tuple = ()
    extensions: tuple = ()
    private_use: Optional[str] = None
    grandfathered: bool = False
    well_formed: bool = False
    registry_status: RegistryStatus = RegistryStatus.NOT_CHECKED

    def __str__(self) -> str:
        return self.raw


@dataclass(frozen=True)
class DateSpan:
    not_before: Optional[int] = None
    not_after: Optional[int] = None
    when: Optional[int] = None
    original_text: Optional[str] = None

    def label(self) -> str:
        if self.when is not None:
            return f"{self.when:04d}"
        lo = f"{self.not_before:04d}" if self.not_before is not None else ""
        hi = f"{self.not_after:04d}" if self.not_after is not None else ""
        return f"{lo}-{hi}"


@dataclass(frozen=True)
class GrammarGroup:
    pos: Optional[str] = None
    gender: Optional[str] = None
    number: Optional[str] = None
    case: Optional[str] = None
    person: Optional[str] = None
    tense: Optional[str] = None
    mood: Optional[str] = None
    inflection_type: Optional[str] = None
    extra: tuple = ()  # (category, value) pairs from <gram type="...">


@dataclass(frozen=True)
class CrossRef:
    raw: str

    @property
    def is_internal(self) -> bool:
        return self.raw.startswith("#") and len(self.raw) > 1

    @property
    def fragment(self) -> Optional[str]:
        return self.raw[1:] if self.is_internal else None

    @property
    def uri(self) -> Optional[str]:
        return None if self.is_internal else self.raw

    def __str__(self) -> str:
        return self.raw


def cross_ref(value: Optional[str]) -> Optional[CrossRef]:
    if value is None:
        return None
    value = value.strip()
    return CrossRef(value) if value else None


@dataclass(frozen=True)
class Seg:
    text: str
    id: Optional[str] = None
    corresp: Optional[CrossRef] = None
    ana: Optional[str] = None


@dataclass(frozen=True)
class Punct:
    text: str


@dataclass(frozen=True)
class Plain:
    text: str


Segment = Union[Seg, Punct, Plain]


@dataclass(frozen=True)
class SegmentedForm:
    """An ``<orth>``, ``<pron>``, ``<oRef>`` or ``<pRef>`` with optional seg markup."""

    kind: FormKind
    segments: tuple = ()
    notation: Optional[str] = None
    lang: Optional[LangTag] = None
    corresp: Optional[CrossRef] = None
    type: Optional[str] = None
    ana: Optional[str] = None

    @property
    def text(self) -> str:
        return "".join(s.text for s in self.segments)

    @property
    def is_decomposed(self) -> bool:
        return any(isinstance(s, Seg) for s in self.segments)

    def seg_ids(self) -> set:
        return {s.id for s in self.segments if isinstance(s, Seg) and s.id}


@dataclass(frozen=True)
class Inline:
    """Markup inside a ``<quote>``: an ``<oRef>`` or ``<seg>`` holding more parts."""

    tag: str
    parts: tuple = ()
    id: Optional[str] = None
    corresp: Optional[CrossRef] = None
    ana: Optional[str] = None
    lang: Optional[LangTag] = None

    @property
    def text(self) -> str:
        return "".join(p.text for p in self.parts)


@dataclass(frozen=True)
class Quote:
    parts: tuple = ()
    lang: Optional[LangTag] = None

    @property
    def text(self) -> str:
        return "".join(p.text for p in self.parts)

    def marked_forms(self) -> list:
        """Texts of every ``<oRef>`` marked inside the quotation."""
        found = []

        def walk(parts):
            for p in parts:
                if isinstance(p, Inline):
                    if p.tag == "oRef":
                        found.append(p.text)
                    walk(p.parts)

        walk(self.parts)
        return found


@dataclass(frozen=True)
class Gloss:
    text: str
    lang: Optional[LangTag] = None


@dataclass(frozen=True)
class UsageDomain:
    usage_type: Optional[str]
    text: str
    corresp: Optional[CrossRef] = None


@dataclass(frozen=True)
class Ref:
    text: str
    target: Optional[CrossRef] = None
    corresp: Optional[CrossRef] = None
    ref_type: Optional[str] = None


@dataclass(frozen=True)
class LangLabel:
    text: str
    corresp: Optional[CrossRef] = None


@dataclass(frozen=True)
class FormBlock:
    id: Optional[str] = None
    form_type: Optional[str] = None
    lang: Optional[LangTag] = None
    orths: tuple = ()
    prons: tuple = ()
    grammar: Optional[GrammarGroup] = None
    nested: tuple = ()
    extras: tuple = ()


@dataclass(frozen=True)
class Citation:
    kind: CitKind
    id: Optional[str] = None
    prev: Optional[CrossRef] = None
    next: Optional[CrossRef] = None
    lang: Optional[LangTag] = None
    # Set only when @type was not one of the four citation kinds.
    raw_type: Optional[str] = None
    oref: Optional[SegmentedForm] = None
    pref: Optional[SegmentedForm] = None
    date: Optional[DateSpan] = None
    grammar: Optional[GrammarGroup] = None
    glosses: tuple = ()
    usages: tuple = ()
    sense_refs: tuple = ()
    quote: Optional[Quote] = None
    corresp: Optional[CrossRef] = None
    ana: Optional[str] = None
    label: Optional[str] = None
    lang_label: Optional[str] = None
    notes: tuple = ()
    bibls: tuple = ()
    refs: tuple = ()
    nested: tuple = ()
    extras: tuple = ()

    @property
    def component_corresp(self) -> Optional[CrossRef]:
        return self.corresp if self.kind is CitKind.COMPONENT else None

    @property
    def form(self) -> Optional[str]:
        if self.oref is not None:
            return self.oref.text
        if self.pref is not None:
            return self.pref.text
        return None


@dataclass(frozen=True)
class LegacyItem:
    """One run of a flat legacy ``<etym>``: kind is lang/mentioned/text/bibl/other."""

    kind: str
    text: str


@dataclass(frozen=True)
class EtymologyBlock:
    etym_type: EtymType
    corresp: Optional[CrossRef] = None
    lang: Optional[LangTag] = None
    date: Optional[DateSpan] = None
    citations: tuple = ()
    nested: tuple = ()
    lang_labels: tuple = ()
    labels: tuple = ()
    notes: tuple = ()
    bibls: tuple = ()
    refs: tuple = ()
    legacy: tuple = ()
    extras: tuple = ()

    @property
    def is_legacy(self) -> bool:
        return any(item.kind == "mentioned" for item in self.legacy)


@dataclass(frozen=True)
class SenseBlock:
    id: Optional[str] = None
    corresp: Optional[CrossRef] = None
    lang: Optional[LangTag] = None
    definitions: tuple = ()
    usages: tuple = ()
    translations: tuple = ()
    etymologies: tuple = ()
    extras: tuple = ()


@dataclass(frozen=True)
class SourceSpan:
    line: Optional[int] = None
    column: Optional[int] = None


@dataclass(frozen=True)
class LexicalEntry:
    id: Optional[str] = None
    lang: Optional[LangTag] = None
    entry_type: Optional[str] = None
    entry_subtype: Optional[str] = None
    forms: tuple = ()
    grammar: Optional[GrammarGroup] = None
    senses: tuple = ()
    etymologies: tuple = ()
    extras: tuple = ()
    source_span: SourceSpan = field(default=SourceSpan(), compare=False)

    def key(self, index: int) -> str:
        return self.id if self.id else f"entry[{index}]"


@dataclass(frozen=True)
class Document:
    entries: tuple = ()
    id_index: dict = field(default_factory=dict)
    duplicate_ids: tuple = ()  # (id, path) for every occurrence after the first
    source_name: str = ""
    lines: dict = field(default_factory=dict, compare=False)

    __hash__ = None  # id_index is a dict


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    severity: Severity
    message: str
    entry_index: Optional[int] = None
    entry: Optional[str] = None
    path: NodePath = ()
    line: Optional[int] = None
    column: Optional[int] = None
    related: tuple = ()
    file: str = ""

    def sort_key(self):
        index = -1 if self.entry_index is None else self.entry_index
        return (self.file, index, path_sort_key(self.path), self.rule, self.message, self.related)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "severity": self.severity.value,
            "file": self.file,
            "entry": self.entry,
            "path": render_path(self.path),
            "line": self.line,
            "col": self.column,
            "message": self.message,
            "related": list(self.related),
        }


# -- node paths ---------------------------------------------------------------

_ELEMENT_NAMES = {
    "entries": "entry",
    "forms": "form",
    "orths": "orth",
    "prons": "pron",
    "senses": "sense",
    "etymologies": "etym",
    "citations": "cit",
    "translations": "cit",
    "oref": "oRef",
    "pref": "pRef",
    "segments": "seg",
    "parts": "part",
    "glosses": "gloss",
    "definitions": "def",
    "usages": "usg",
    "refs": "ref",
    "sense_refs": "ref",
    "extras": "opaque",
    "grammar": "gramGrp",
    "lang_labels": "lang",
}


def render_path(path: NodePath) -> str:
    """Human-readable XPath-like rendering of a node path."""
    out = []
    container = None
    for step in path:
        if isinstance(step, int):
            out[-1] = f"{out[-1]}[{step}]"
        elif step == "nested":
            out.append(_ELEMENT_NAMES.get(container, "nested"))
        else:
            container = step
            out.append(_ELEMENT_NAMES.get(step, step))
    return "/".join(out)


def path_sort_key(path: NodePath) -> tuple:
    return tuple((0, s, "") if isinstance(s, int) else (1, 0, s) for s in path)


def node_at(doc: Document, path: NodePath):
    """Return the model node addressed by ``path``."""
    node = doc
    try:
        for step in path:
            if isinstance(step, int):
                node = node[step]
            else:
                if step.startswith("_") or not hasattr(node, step):
                    raise UnknownNode(render_path(path))
                node = getattr(node, step)
    except (IndexError, TypeError, AttributeError) as exc:
        raise UnknownNode(render_path(path)) from exc
    if node is None:
        raise UnknownNode(render_path(path))
    return node


def _node_chain(doc: Document, path: NodePath) -> list:
    """Nodes along ``path`` from the entry down, skipping bare lists."""
    if len(path) < 2 or path[0] != "entries":
        raise UnknownNode(render_path(path))
    chain = []
    node = doc
    for i, step in enumerate(path):
        try:
            node = node[step] if isinstance(step, int) else getattr(node, step)
        except (IndexError, TypeError, AttributeError) as exc:
            raise UnknownNode(render_path(path)) from exc
        if node is None:
            raise UnknownNode(render_path(path))
        if i >= 1 and not isinstance(node, tuple):
            chain.append(node)
    return chain


def effective_language(node_path: NodePath, doc: Document) -> Optional[LangTag]:
    """The node's own ``xml:lang`` or else the nearest ancestor's, up to the entry."""
    for node in reversed(_node_chain(doc, node_path)):
        lang = getattr(node, "lang", None)
        if isinstance(lang, LangTag):
            return lang
    return None


@dataclass(frozen=True)
class Resolved:
    path: NodePath


@dataclass(frozen=True)
class External:
    uri: str


class _Unresolved:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unresolved"

    def __bool__(self) -> bool:
        return False


Unresolved = _Unresolved()


def resolve_ref(ref: CrossRef, doc: Document, extra_index: Optional[dict] = None):
    """Resolve a pointer against the document id index; never touches the network."""
    if not ref.is_internal:
        if ref.raw.startswith("#"):
            return Unresolved
        return External(ref.raw)
    path = doc.id_index.get(ref.fragment)
    if path is not None:
        return Resolved(path)
    if extra_index and ref.fragment in extra_index:
        return Resolved(extra_index[ref.fragment])
    return Unresolved


def entry_path(path: NodePath) -> NodePath:
    return path[:2]


def iter_blocks(blocks, base: NodePath, ancestry: tuple = ()):
    """Yield ``(path, block, ancestry)`` for every etym block, depth first.

    ``ancestry`` is the tuple of enclosing blocks, outermost first.
    """
    for i, block in enumerate(blocks):
        path = base + (i,)
        yield path, block, ancestry
        yield from iter_blocks(block.nested, path + ("nested",), ancestry + (block,))


def iter_entry_blocks(entry: LexicalEntry, entry_index: int):
    """Every etym block of an entry, entry level first then per sense."""
    yield from iter_blocks(entry.etymologies, ("entries", entry_index, "etymologies"))
    for s, sense in enumerate(entry.senses):
        yield from iter_blocks(sense.etymologies, ("entries", entry_index, "senses", s, "etymologies"))


def iter_citations(citations, base: NodePath):
    """Yield ``(path, citation)`` for citations and their nested citations."""
    for i, cit in enumerate(citations):
        path = base + (i,)
        yield path, cit
        yield from iter_citations(cit.nested, path + ("nested",))


def iter_entry_citations(entry: LexicalEntry, entry_index: int):
    for block_path, block, _ in iter_entry_blocks(entry, entry_index):
        yield from iter_citations(block.citations, block_path + ("citations",))
    for s, sense in enumerate(entry.senses):
        yield from iter_citations(sense.translations, ("entries", entry_index, "senses", s, "translations"))


def iter_forms(forms, base: NodePath):
    for i, form in enumerate(forms):
        path = base + (i,)
        yield path, form
        yield from iter_forms(form.nested, path + ("nested",))


# value types that are leaves rather than addressable nodes
_LEAF_TYPES = (LangTag, CrossRef, EtymType, DateSpan, GrammarGroup, SourceSpan)


def _walk(node, path):
    yield path, node
    for f in fields(node):
        value = getattr(node, f.name)
        if isinstance(value, tuple):
            for j, item in enumerate(value):
                if is_dataclass(item) and not isinstance(item, _LEAF_TYPES):
                    yield from _walk(item, path + (f.name, j))
        elif is_dataclass(value) and not isinstance(value, _LEAF_TYPES):
            yield from _walk(value, path + (f.name,))


def iter_entry_nodes(entry: LexicalEntry, entry_index: int):
    return _walk(entry, ("entries", entry_index))


def iter_nodes(doc: Document):
    """Every model node below the document as ``(path, node)``, in document order."""
    for i, entry in enumerate(doc.entries):
        yield from _walk(entry, ("entries", i))
