"""Etymological network: nodes for entries, senses, etymons and external concepts."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from lxml import etree

from .langtag import parse_tag
from .lint import ChainReport, check_chain
from .model import (
    CitKind,
    DateSpan,
    Document,
    EtymologyBlock,
    FormBlock,
    LangTag,
    Seg,
    effective_language,
    iter_citations,
    iter_entry_blocks,
    iter_forms,
    iter_entry_nodes,
    node_at,
    render_path,
    resolve_ref,
)

ENTRY_HEAD = "EntryHead"
SENSE_HEAD = "SenseHead"
ETYMON_UNIT = "EtymonUnit"
EXTERNAL_CONCEPT = "ExternalConcept"
NODE_KINDS = (ENTRY_HEAD, SENSE_HEAD, ETYMON_UNIT, EXTERNAL_CONCEPT)

PRECEDES = "precedes"
SENSE_OF = "sense-of"
COMPONENT_OF = "component-of"
SAME_AS = "same-as"
DENOTES = "denotes"
DOMAIN = "domain"
STRUCTURAL = (PRECEDES, SENSE_OF, COMPONENT_OF, SAME_AS, DENOTES, DOMAIN)


class UnknownAnchor(LookupError):
    pass


def relation_for(etym_type) -> str:
    """Edge relation for an etym type; open types become ``other:<name>``."""
    return etym_type.name if etym_type.known else f"other:{etym_type.name}"


def is_process(relation: str) -> bool:
    return relation not in STRUCTURAL


@dataclass(frozen=True)
class GraphNode:
    id: str
    kind: str
    form: Optional[str] = None
    lang: Optional[LangTag] = None
    date: Optional[DateSpan] = None
    gloss: Optional[str] = None
    uri: Optional[str] = None
    xml_id: Optional[str] = None

    def label(self) -> str:
        if self.kind == EXTERNAL_CONCEPT:
            return self.uri
        form = self.form or self.xml_id or self.id
        lang = self.lang.raw if self.lang is not None else "-"
        date = self.date.label() if self.date is not None else "-"
        return f"{form} ({lang}, {date})"


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    relation: str
    process_path: tuple = ()
    target_form: Optional[str] = None

    def sort_key(self):
        return (self.source, self.target, self.relation, self.process_path, self.target_form or "")


@dataclass(frozen=True)
class EtymGraph:
    nodes: tuple = ()  # sorted by id
    edges: tuple = ()  # sorted by GraphEdge.sort_key
    unresolved: int = field(default=0, compare=False)

    def node(self, node_id: str) -> GraphNode:
        return self._index()[node_id]

    def _index(self) -> dict:
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = {n.id: n for n in self.nodes}
            object.__setattr__(self, "_cache", cache)
        return cache

    def in_edges(self, node_id: str) -> list:
        return [e for e in self.edges if e.target == node_id]

    def out_edges(self, node_id: str) -> list:
        return [e for e in self.edges if e.source == node_id]


@dataclass(frozen=True)
class DiachronyPath:
    """Stages oldest first; each stage is ``(node, relation into the next stage)``."""

    stages: tuple
    anchored_entry: str


class Linearized(list):
    """Citations of one block in chain order.

    ``fallback`` is set when the chain is defective and document order was
    used; ``segments`` then holds one citation list per chain fragment.
    """

    def __init__(self, citations, fallback=False, segments=()):
        super().__init__(citations)
        self.fallback = fallback
        self.segments = tuple(tuple(s) for s in segments)


def _follow_segment(report: ChainReport, block: EtymologyBlock, comp: tuple) -> list:
    """Order one fragment by its mirrored links, falling back to document order."""
    cits = block.citations
    members = set(comp)
    by_id = {}
    for i in comp:
        if cits[i].id and cits[i].id not in by_id:
            by_id[cits[i].id] = i

    def nxt(i):
        ref = cits[i].next
        t = by_id.get(ref.fragment) if ref is not None and ref.is_internal else None
        if t is None or t == i:
            return None
        back = cits[t].prev
        if back is None or back.fragment != cits[i].id or t not in members:
            return None
        return t

    has_prev = {nxt(i) for i in comp} - {None}
    heads = [i for i in comp if i not in has_prev]
    if len(heads) != 1:
        return list(comp)
    walk, node = [], heads[0]
    while node is not None and node not in walk:
        walk.append(node)
        node = nxt(node)
    return walk if len(walk) == len(comp) else list(comp)


def linearize(report: ChainReport, block: EtymologyBlock) -> Linearized:
    cits = block.citations
    if report.order_positions is not None:
        order = [cits[i] for i in report.order_positions]
        return Linearized(order, False, (order,) if order else ())
    etymons = [i for i, c in enumerate(cits) if c.kind is CitKind.ETYMON]
    segments = [[cits[i] for i in _follow_segment(report, block, comp)] for comp in report.components]
    return Linearized([cits[i] for i in etymons], True, segments)


def _first_orth(forms) -> Optional[str]:
    for _, form in iter_forms(forms, ()):
        for orth in form.orths:
            if orth.text:
                return orth.text
    return None


class _Builder:
    def __init__(self):
        self.nodes = {}
        self.edges = set()
        self.unresolved = 0

    def add_node(self, node: GraphNode):
        self.nodes.setdefault(node.id, node)
        return node.id

    def add_edge(self, source, target, relation, process_path=(), target_form=None):
        if source in self.nodes and target in self.nodes and source != target:
            self.edges.add(GraphEdge(source, target, relation, tuple(process_path), target_form))

    def concept(self, uri: str) -> str:
        return self.add_node(GraphNode(id=uri, kind=EXTERNAL_CONCEPT, uri=uri))

    # -- one document -----------------------------------------------------

    def add_document(self, doc: Document, prefix: str):
        entry_ids = {}
        used = set()
        for i, entry in enumerate(doc.entries):
            key = entry.key(i)
            if key in used:
                key = f"entry[{i}]"
            used.add(key)
            entry_ids[i] = f"{prefix}#{key}"
            self.add_node(GraphNode(
                id=entry_ids[i], kind=ENTRY_HEAD, form=_first_orth(entry.forms),
                lang=entry.lang, xml_id=entry.id,
            ))
        for i, entry in enumerate(doc.entries):
            self.add_entry(doc, i, entry, entry_ids)

    def add_entry(self, doc, i, entry, entry_ids):
        head = entry_ids[i]
        sense_heads = {}
        for j, sense in enumerate(entry.senses):
            if sense.etymologies or sense.corresp is not None:
                sid = f"{head}/sense[{j}]"
                gloss = sense.definitions[0].text if sense.definitions else None
                self.add_node(GraphNode(
                    id=sid, kind=SENSE_HEAD, form=self.nodes[head].form,
                    lang=sense.lang or entry.lang, gloss=gloss, xml_id=sense.id,
                ))
                self.add_edge(sid, head, SENSE_OF)
                sense_heads[j] = sid

        def owner_of(path):
            """Graph node standing for the element at ``path`` (for usg/ref edges)."""
            for k in range(len(path), 1, -1):
                prefix = path[:k]
                if len(prefix) >= 3 and prefix[-2] in ("citations", "nested") and prefix in unit_ids:
                    return unit_ids[prefix]
                if len(prefix) == 4 and prefix[2] == "senses" and prefix[3] in sense_heads:
                    return sense_heads[prefix[3]]
            return head

        # etymon units
        unit_ids = {}
        blocks = list(iter_entry_blocks(entry, i))
        for bpath, block, ancestry in blocks:
            for cpath, cit in iter_citations(block.citations, bpath + ("citations",)):
                if cit.kind is not CitKind.ETYMON:
                    continue
                uid = f"{head}/{render_path(cpath[2:])}"
                unit_ids[cpath] = uid
                self.add_node(GraphNode(
                    id=uid, kind=ETYMON_UNIT, form=cit.form,
                    lang=self._unit_lang(doc, cpath, cit),
                    date=cit.date or self._block_date(block, ancestry),
                    gloss=cit.glosses[0].text if cit.glosses else None,
                    xml_id=cit.id,
                ))

        # process, precedes and nesting edges
        for bpath, block, ancestry in blocks:
            types = tuple(b.etym_type for b in ancestry) + (block.etym_type,)
            process_path = tuple(relation_for(t) for t in types)
            relation = process_path[-1]
            owner = sense_heads.get(bpath[3], head) if bpath[2] == "senses" else head
            target_form = self._target_form(doc, ancestry, block)
            report = check_chain(block, doc, bpath)
            cits = block.citations
            precedes = self._precedes(report, block)
            for a, b in precedes:
                self.add_edge(unit_ids[bpath + ("citations", a)], unit_ids[bpath + ("citations", b)], PRECEDES)
            has_successor = {a for a, _ in precedes}
            for k, cit in enumerate(cits):
                cpath = bpath + ("citations", k)
                if cpath in unit_ids and k not in has_successor:
                    self.add_edge(unit_ids[cpath], owner, relation, process_path, target_form)
            for cpath, cit in iter_citations(cits, bpath + ("citations",)):
                if cpath in unit_ids and cpath[-2] == "nested" and cpath[:-2] in unit_ids:
                    self.add_edge(unit_ids[cpath], unit_ids[cpath[:-2]], relation, process_path)

        # same-as and component-of
        for cpath, uid in unit_ids.items():
            cit = node_at(doc, cpath)
            for form in (cit.oref, cit.pref):
                if form is None:
                    continue
                if form.corresp is not None and form.corresp.is_internal:
                    target = self._resolve_entry(doc, form.corresp, entry_ids)
                    if target is None:
                        self.unresolved += 1
                    else:
                        self.add_edge(uid, target, SAME_AS)
                for seg in form.segments:
                    if isinstance(seg, Seg) and seg.corresp is not None and seg.corresp.is_internal:
                        target = self._resolve_entry(doc, seg.corresp, entry_ids)
                        if target is None:
                            self.unresolved += 1
                        else:
                            self.add_edge(target, uid, COMPONENT_OF)
            for child in cit.nested:
                if child.kind is CitKind.COMPONENT and child.corresp is not None and child.corresp.is_internal:
                    hit = resolve_ref(child.corresp, doc)
                    if not hit:
                        self.unresolved += 1
                    elif len(hit.path) == 2:
                        self.add_edge(entry_ids[hit.path[1]], uid, COMPONENT_OF)
        for _, form in iter_forms(entry.forms, ()):
            for orth in form.orths + form.prons:
                for seg in orth.segments:
                    if isinstance(seg, Seg) and seg.corresp is not None and seg.corresp.is_internal:
                        target = self._resolve_entry(doc, seg.corresp, entry_ids)
                        if target is None:
                            self.unresolved += 1
                        else:
                            self.add_edge(target, head, COMPONENT_OF)

        # external concepts
        for j, sense in enumerate(entry.senses):
            if sense.corresp is not None and sense.corresp.uri and j in sense_heads:
                self.add_edge(sense_heads[j], self.concept(sense.corresp.uri), DENOTES)
        for path, node in iter_entry_nodes(entry, i):
            kind = type(node).__name__
            if kind == "UsageDomain" and node.corresp is not None and node.corresp.uri:
                self.add_edge(owner_of(path), self.concept(node.corresp.uri), DOMAIN)
            elif kind == "Ref" and node.corresp is not None and node.corresp.uri:
                self.add_edge(owner_of(path), self.concept(node.corresp.uri), DENOTES)
            elif kind == "Citation":
                for ref in node.sense_refs:
                    if ref.uri:
                        self.add_edge(owner_of(path), self.concept(ref.uri), DENOTES)

    @staticmethod
    def _unit_lang(doc, cpath, cit):
        for name in ("oref", "pref"):
            if getattr(cit, name) is not None:
                return effective_language(cpath + (name,), doc)
        return effective_language(cpath, doc)

    @staticmethod
    def _block_date(block, ancestry):
        for b in (block,) + tuple(reversed(ancestry)):
            if b.date is not None:
                return b.date
        return None

    @staticmethod
    def _target_form(doc, ancestry, block):
        for b in tuple(ancestry) + (block,):
            if b.corresp is not None and b.corresp.is_internal:
                hit = resolve_ref(b.corresp, doc)
                if hit and isinstance(node_at(doc, hit.path), FormBlock):
                    return b.corresp.fragment
        return None

    @staticmethod
    def _resolve_entry(doc, ref, entry_ids):
        hit = resolve_ref(ref, doc)
        if not hit:
            return None
        return entry_ids.get(hit.path[1])

    @staticmethod
    def _precedes(report: ChainReport, block: EtymologyBlock) -> list:
        """Old-to-new pairs: the whole order if sound, else mirrored neighbours."""
        if report.order_positions is not None:
            order = report.order_positions
            return list(zip(order, order[1:]))
        cits = block.citations
        positions = list(report.positions)
        pairs = []
        for a, b in zip(positions, positions[1:]):
            x, y = cits[a], cits[b]
            if (
                x.id and y.id and x.id != y.id
                and x.next is not None and x.next.fragment == y.id
                and y.prev is not None and y.prev.fragment == x.id
                and [c.id for c in cits].count(x.id) == 1
                and [c.id for c in cits].count(y.id) == 1
            ):
                pairs.append((a, b))
        return pairs


def build_network(docs) -> EtymGraph:
    """Build one graph over all documents; ids are prefixed by source name."""
    builder = _Builder()
    seen = set()
    for k, doc in enumerate(docs):
        prefix = doc.source_name or f"doc{k}"
        if prefix in seen:
            prefix = f"{prefix}[{k}]"
        seen.add(prefix)
        builder.add_document(doc, prefix)
    nodes = tuple(sorted(builder.nodes.values(), key=lambda n: n.id))
    edges = tuple(sorted(builder.edges, key=GraphEdge.sort_key))
    return EtymGraph(nodes=nodes, edges=edges, unresolved=builder.unresolved)


# -- tracing ------------------------------------------------------------------


def trace(graph: EtymGraph, anchor: str) -> list:
    """Every maximal backward path from ``anchor`` (an entry or sense id)."""
    heads = [
        n for n in graph.nodes
        if n.kind in (ENTRY_HEAD, SENSE_HEAD) and (n.xml_id == anchor or n.id == anchor)
    ]
    if not heads:
        raise UnknownAnchor(anchor)
    targets = []
    for h in heads:
        targets.append(h.id)
        if h.kind == ENTRY_HEAD:
            targets.extend(e.source for e in graph.in_edges(h.id) if e.relation == SENSE_OF)
    anchored = heads[0].xml_id or heads[0].id
    incoming = {}
    for e in graph.edges:
        if (is_process(e.relation) or e.relation == PRECEDES) and graph.node(e.source).kind == ETYMON_UNIT:
            incoming.setdefault(e.target, []).append(e)

    paths = []

    def back(node_id, trail):
        preds = [e for e in incoming.get(node_id, []) if e.source not in {s for s, _ in trail}]
        if not preds:
            paths.append(tuple(reversed(trail)))
            return
        for e in preds:
            back(e.source, trail + [(e.source, e.relation)])

    for t in dict.fromkeys(targets):
        for e in incoming.get(t, []):
            back(e.source, [(e.source, e.relation)])
    return [
        DiachronyPath(stages=tuple((graph.node(n), rel) for n, rel in p), anchored_entry=anchored)
        for p in paths
    ]


# -- export -------------------------------------------------------------------


def _date_dict(date: Optional[DateSpan]):
    if date is None:
        return None
    return {
        "not_before": date.not_before, "not_after": date.not_after,
        "when": date.when, "original_text": date.original_text,
    }


def node_dict(n: GraphNode) -> dict:
    return {
        "id": n.id, "kind": n.kind, "form": n.form,
        "lang": n.lang.raw if n.lang is not None else None,
        "date": _date_dict(n.date), "gloss": n.gloss, "uri": n.uri, "xml_id": n.xml_id,
    }


def edge_dict(e: GraphEdge) -> dict:
    return {
        "from": e.source, "to": e.target, "relation": e.relation,
        "process_path": list(e.process_path), "target_form": e.target_form,
    }


def to_json(graph: EtymGraph) -> bytes:
    data = {"nodes": [node_dict(n) for n in graph.nodes], "edges": [edge_dict(e) for e in graph.edges]}
    return (json.dumps(data, sort_keys=True, ensure_ascii=False, indent=1) + "\n").encode("utf-8")


def graph_from_json(data) -> EtymGraph:
    """Reload a graph written by :func:`to_json`."""
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    raw = json.loads(data)
    nodes = []
    for n in raw["nodes"]:
        date = DateSpan(**n["date"]) if n["date"] is not None else None
        lang = parse_tag(n["lang"]) if n["lang"] is not None else None
        nodes.append(GraphNode(
            id=n["id"], kind=n["kind"], form=n["form"], lang=lang, date=date,
            gloss=n["gloss"], uri=n["uri"], xml_id=n["xml_id"],
        ))
    edges = [
        GraphEdge(e["from"], e["to"], e["relation"], tuple(e["process_path"]), e["target_form"])
        for e in raw["edges"]
    ]
    return EtymGraph(
        nodes=tuple(sorted(nodes, key=lambda n: n.id)),
        edges=tuple(sorted(edges, key=GraphEdge.sort_key)),
    )


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


_DOT_SHAPES = {ENTRY_HEAD: "box", SENSE_HEAD: "box", ETYMON_UNIT: "ellipse", EXTERNAL_CONCEPT: "note"}


def to_dot(graph: EtymGraph) -> bytes:
    lines = ["digraph etymograph {", "  rankdir=LR;"]
    for n in graph.nodes:
        lines.append(f"  {_dot_quote(n.id)} [label={_dot_quote(n.label())}, shape={_DOT_SHAPES[n.kind]}];")
    for e in graph.edges:
        lines.append(f"  {_dot_quote(e.source)} -> {_dot_quote(e.target)} [label={_dot_quote(e.relation)}];")
    lines.append("}")
    return ("\n".join(lines) + "\n").encode("utf-8")


GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"
_NODE_KEYS = ("kind", "form", "lang", "date", "gloss", "uri", "xml_id")
_EDGE_KEYS = ("relation", "process_path", "target_form")


def to_graphml(graph: EtymGraph) -> bytes:
    q = lambda tag: f"{{{GRAPHML_NS}}}{tag}"  # noqa: E731
    root = etree.Element(q("graphml"), nsmap={None: GRAPHML_NS})
    for domain, keys in (("node", _NODE_KEYS), ("edge", _EDGE_KEYS)):
        for key in keys:
            etree.SubElement(root, q("key"), {
                "id": f"{domain[0]}_{key}", "for": domain, "attr.name": key, "attr.type": "string",
            })
    g = etree.SubElement(root, q("graph"), {"id": "etymograph", "edgedefault": "directed"})
    for n in graph.nodes:
        el = etree.SubElement(g, q("node"), {"id": n.id})
        values = node_dict(n)
        values["date"] = n.date.label() if n.date is not None else None
        for key in _NODE_KEYS:
            if values[key] is not None:
                etree.SubElement(el, q("data"), {"key": f"n_{key}"}).text = str(values[key])
    for k, e in enumerate(graph.edges):
        el = etree.SubElement(g, q("edge"), {"id": f"e{k}", "source": e.source, "target": e.target})
        values = {"relation": e.relation, "process_path": " > ".join(e.process_path), "target_form": e.target_form}
        for key in _EDGE_KEYS:
            if values[key]:
                etree.SubElement(el, q("data"), {"key": f"e_{key}"}).text = values[key]
    etree.indent(root, space="  ")
    return etree.tostring(root, xml_declaration=True, encoding="UTF-8") + b"\n"


EXPORTERS = {"json": to_json, "dot": to_dot, "graphml": to_graphml}


def export(graph: EtymGraph, fmt: str) -> bytes:
    try:
        return EXPORTERS[fmt](graph)
    except KeyError:
        raise ValueError(f"unknown export format {fmt!r}") from None
