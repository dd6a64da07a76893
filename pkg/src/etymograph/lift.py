"""Convert flat legacy etymologies and repair common encoding patterns."""

from __future__ import annotations

from dataclasses import replace
from typing import Optional

from .langtag import AbbrevTable, expand_abbreviation, load_abbrev_table
from .lint import is_redundant_wrapper
from .model import (
    CitKind,
    Citation,
    Diagnostic,
    EtymologyBlock,
    FormKind,
    LexicalEntry,
    Plain,
    SegmentedForm,
    Severity,
    iter_citations,
    iter_entry_blocks,
    render_path,
)


class NotLegacy(ValueError):
    """The block has no ``<mentioned>`` content to lift."""


def _diag(rule, severity, message, path, entry=None, entry_index=None, related=()):
    if entry_index is None and len(path) >= 2 and path[0] == "entries":
        entry_index = path[1]
    return Diagnostic(
        rule=rule, severity=severity, message=message, entry_index=entry_index,
        entry=entry, path=tuple(path), related=tuple(related),
    )


def _sentence_break(text: str) -> bool:
    return "." in text or ";" in text


def lift_flat_etym(
    block: EtymologyBlock,
    table: Optional[AbbrevTable] = None,
    block_path=(),
    entry: Optional[str] = None,
) -> tuple:
    """Turn ``<lang>``/``<mentioned>`` runs into etymon citations.

    Each mentioned form takes the nearest preceding language label; a label
    stops applying at prose containing "." or ";".
    """
    if not block.is_legacy:
        raise NotLegacy("etym block has no <mentioned> content")
    table = table if table is not None else load_abbrev_table()
    diags = []
    lifted, notes, bibls = [], [], []
    pending = None
    for item in block.legacy:
        if item.kind == "lang":
            pending = item.text
        elif item.kind == "mentioned":
            tag = expand_abbreviation(pending, table) if pending is not None else None
            k = len(lifted)
            if tag is None:
                why = f"label {pending!r} is not in the abbreviation table" if pending else "no language label"
                diags.append(_diag(
                    "W-LIFT-NOLANG", Severity.WARNING, f"{item.text!r}: {why}",
                    tuple(block_path) + ("citations", k), entry,
                ))
            lifted.append(Citation(
                kind=CitKind.ETYMON,
                lang=tag,
                oref=SegmentedForm(FormKind.ORTH, (Plain(item.text),)),
                lang_label=pending,
            ))
        elif item.kind == "bibl":
            bibls.append(item.text)
        else:
            # separators such as "," carry no content worth a note
            if any(ch.isalnum() for ch in item.text):
                notes.append(item.text)
            if _sentence_break(item.text):
                pending = None
    new = replace(
        block,
        citations=tuple(lifted) + block.citations,
        notes=block.notes + tuple(notes),
        bibls=block.bibls + tuple(bibls),
        legacy=(),
    )
    diags.append(_diag(
        "I-LIFT-CONVERTED", Severity.INFO,
        f"{len(lifted)} etymon citation(s), {len(notes)} note(s), {len(bibls)} bibl(s) lifted",
        tuple(block_path), entry,
    ))
    return new, diags


# -- normalization passes -----------------------------------------------------


def _unwrap(cit: Citation) -> Citation:
    while is_redundant_wrapper(cit):
        inner = cit.nested[0]
        if cit.lang is not None and inner.lang is None:
            inner = replace(inner, lang=cit.lang)
        cit = inner
    return replace(cit, nested=tuple(_unwrap(c) for c in cit.nested)) if cit.nested else cit


def _ref_as_etymon(cit: Citation) -> Optional[Citation]:
    if cit.kind is not CitKind.ETYMON or cit.oref is not None or cit.pref is not None:
        return None
    if any(c.kind is CitKind.ETYMON for c in cit.nested) or len(cit.refs) != 1:
        return None
    ref = cit.refs[0]
    if not ref.text:
        return None
    oref = SegmentedForm(FormKind.ORTH, (Plain(ref.text),), corresp=ref.target or ref.corresp)
    return replace(cit, oref=oref, refs=())


def _without_pointers(cit: Citation) -> Citation:
    return replace(cit, prev=None, next=None)


def _normalize_citations(cits, base, aggressive, diags, entry):
    out = []
    for k, cit in enumerate(cits):
        path = base + (k,)
        fixed = _unwrap(cit)
        if fixed != cit:
            diags.append(_diag(
                "I-NORM-UNWRAP", Severity.INFO, "redundant etymon wrapper collapsed",
                path, entry, related=(render_path(path), render_path(path + ("nested", 0))),
            ))
        rewritten = _ref_as_etymon(fixed)
        if rewritten is not None:
            diags.append(_diag(
                "I-NORM-REF2OREF", Severity.INFO, f"<ref>{fixed.refs[0].text}</ref> rewritten as <oRef>",
                path, entry, related=(render_path(path + ("refs", 0)), render_path(path + ("oref",))),
            ))
            fixed = rewritten
        out.append(fixed)

    kept = []
    for k, cit in enumerate(out):
        prev = kept[-1][1] if kept else None
        if (
            prev is not None and cit.kind is CitKind.ETYMON and prev.kind is CitKind.ETYMON
            and _without_pointers(prev) == _without_pointers(cit)
        ):
            label = cit.id or cit.form or "citation"
            rule = "I-NORM-DUPCIT-REMOVED" if aggressive else "I-NORM-DUPCIT"
            verb = "removed" if aggressive else "kept"
            diags.append(_diag(
                rule, Severity.INFO, f"etymon {label} repeats the previous citation; {verb}",
                base + (k,), entry, related=(render_path(base + (kept[-1][0],)),),
            ))
            if aggressive:
                continue
        kept.append((k, cit))
    return tuple(c for _, c in kept)


def _normalize_block(block, path, aggressive, diags, entry):
    cits = _normalize_citations(block.citations, path + ("citations",), aggressive, diags, entry)
    nested = tuple(
        _normalize_block(b, path + ("nested", j), aggressive, diags, entry)
        for j, b in enumerate(block.nested)
    )
    return replace(block, citations=cits, nested=nested)


def normalize_entry(entry: LexicalEntry, aggressive: bool = False, entry_index: int = 0) -> tuple:
    """Apply the fix passes; returns ``(entry, info diagnostics)``."""
    diags = []
    key = entry.key(entry_index)
    base = ("entries", entry_index)
    etyms = tuple(
        _normalize_block(b, base + ("etymologies", j), aggressive, diags, key)
        for j, b in enumerate(entry.etymologies)
    )
    senses = tuple(
        replace(sense, etymologies=tuple(
            _normalize_block(b, base + ("senses", s, "etymologies", j), aggressive, diags, key)
            for j, b in enumerate(sense.etymologies)
        ))
        for s, sense in enumerate(entry.senses)
    )
    new = replace(entry, etymologies=etyms, senses=senses)

    seen = {}
    for bpath, block, _ in iter_entry_blocks(new, entry_index):
        for cpath, cit in iter_citations(block.citations, bpath + ("citations",)):
            if not cit.id:
                continue
            if cit.id in seen:
                diags.append(_diag(
                    "I-NORM-DUPID", Severity.INFO, f"xml:id={cit.id!r} repeated; kept for editorial review",
                    cpath, key, related=(render_path(seen[cit.id]),),
                ))
            else:
                seen[cit.id] = cpath
    return new, diags


def lift_entry(entry: LexicalEntry, table: Optional[AbbrevTable] = None, entry_index: int = 0) -> tuple:
    """Lift every legacy block of an entry."""
    diags = []
    key = entry.key(entry_index)
    base = ("entries", entry_index)

    def lift_blocks(blocks, path):
        out = []
        for j, block in enumerate(blocks):
            bpath = path + (j,)
            if block.is_legacy:
                block, found = lift_flat_etym(block, table, bpath, key)
                diags.extend(found)
            out.append(replace(block, nested=lift_blocks(block.nested, bpath + ("nested",))))
        return tuple(out)

    new = replace(
        entry,
        etymologies=lift_blocks(entry.etymologies, base + ("etymologies",)),
        senses=tuple(
            replace(s, etymologies=lift_blocks(s.etymologies, base + ("senses", k, "etymologies")))
            for k, s in enumerate(entry.senses)
        ),
    )
    return new, diags

