"""Command-line front end: parse, lint, graph, trace, convert."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .graph import EXPORTERS, UnknownAnchor, build_network, export, trace
from .langtag import load_abbrev_table, load_registry
from .lift import lift_entry, normalize_entry
from .lint import RuleConfig, UnknownRule, apply_config, lint_document, sort_diagnostics
from .model import CitKind, Document, Severity, iter_entry_citations, render_path
from .tei import DepthExceeded, EncodingError, XmlSyntaxError, emit_tei, parse_file


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("files", nargs="+", help="TEI XML files")
    common.add_argument("--config", help="JSON config: rule overrides, abbrev, registry, known_notations")
    common.add_argument("--registry", help="language-subtag-registry file")
    common.add_argument(
        "--link-across-files", action="store_true",
        help="resolve #fragments against every input file, not just the current one",
    )

    parser = _Parser(prog="etymograph", description="Check and explore TEI etymology markup.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("parse", parents=[common], help="parse and count entries and citations")

    lint = sub.add_parser("lint", parents=[common], help="run the structural checks")
    lint.add_argument("--rules", help="JSON rule config (severity_overrides, disabled_rules, ...)")
    lint.add_argument("--format", choices=("text", "json"), default="text")

    graph = sub.add_parser("graph", parents=[common], help="export the etymological network")
    graph.add_argument("--format", choices=sorted(EXPORTERS), required=True)
    graph.add_argument("--out", help="output file (default stdout)")

    tr = sub.add_parser("trace", parents=[common], help="print diachronic paths into an entry or sense")
    tr.add_argument("--anchor", required=True)

    conv = sub.add_parser("convert", parents=[common], help="lift legacy etymologies and normalize")
    conv.add_argument("--aggressive", action="store_true", help="also drop duplicated consecutive etymons")
    conv.add_argument("--abbrev", help="JSON abbreviation table")
    conv.add_argument("--out", required=True, help="output directory")
    return parser


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _settings(args) -> dict:
    """Merge defaults, the config file and flags (flags win)."""
    settings = {}
    if args.config:
        data = _read_json(args.config)
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
        settings.update(data)
    if getattr(args, "rules", None):
        data = _read_json(args.rules)
        if not isinstance(data, dict):
            raise UsageError("rule config must be a JSON object")
        settings.update(data)
    if args.registry:
        settings["registry"] = args.registry
    if getattr(args, "abbrev", None):
        settings["abbrev"] = args.abbrev
    return settings


def _rule_config(settings) -> RuleConfig:
    try:
        return RuleConfig.from_dict(settings)
    except (UnknownRule, ValueError, TypeError) as exc:
        raise UsageError(f"bad rule config: {exc}") from exc


def _load(files, err):
    """Parse every file; returns (docs, parse diagnostics, fatal flag)."""
    docs, diags, fatal = [], [], False
    for name in files:
        try:
            doc, found = parse_file(name)
        except OSError as exc:
            raise UsageError(f"cannot read {name}: {exc.strerror}") from exc
        except (XmlSyntaxError, EncodingError, DepthExceeded) as exc:
            print(f"{name}: {exc}", file=err)
            fatal = True
            continue
        docs.append(doc)
        diags.extend(found)
    return docs, diags, fatal


def _external_index(docs, current):
    index = {}
    for doc in docs:
        if doc is current:
            continue
        for key, path in doc.id_index.items():
            index.setdefault(key, path)
    return index


def _cmd_parse(args, out, err):
    docs, _, fatal = _load(args.files, err)
    for doc in docs:
        etymons = citations = 0
        for i, entry in enumerate(doc.entries):
            for _, cit in iter_entry_citations(entry, i):
                citations += 1
                etymons += cit.kind is CitKind.ETYMON
        print(f"{doc.source_name}: {len(doc.entries)} entries, {etymons} etymon citations, {citations} citations", file=out)
    return 1 if fatal else 0


def _format_text(d) -> str:
    where = f"{d.file}:{d.line}" if d.line is not None else d.file
    entry = f" [{d.entry}]" if d.entry else ""
    path = f" {render_path(d.path)}" if d.path else ""
    return f"{where}: {d.severity.value} {d.rule}{entry}{path}: {d.message}"


def _cmd_lint(args, out, err):
    settings = _settings(args)
    cfg = _rule_config(settings)
    registry = load_registry(settings["registry"]) if settings.get("registry") else None
    docs, parse_diags, fatal = _load(args.files, err)
    findings = list(parse_diags)
    for doc in docs:
        extra = _external_index(docs, doc) if args.link_across_files else None
        findings.extend(lint_document(doc, cfg, registry=registry, external_index=extra))
    findings = apply_config(findings, cfg)
    order = {name: k for k, name in enumerate(args.files)}
    findings.sort(key=lambda d: (order.get(d.file, len(order)),) + d.sort_key())
    for d in findings:
        if args.format == "json":
            print(json.dumps(d.to_dict(), ensure_ascii=False), file=out)
        else:
            print(_format_text(d), file=out)
    if fatal or any(d.severity is Severity.ERROR for d in findings):
        return 1
    return 0


def _cmd_graph(args, out, err):
    docs, _, fatal = _load(args.files, err)
    data = export(build_network(docs), args.format)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        out.flush()
        if hasattr(out, "buffer"):
            out.buffer.write(data)
            out.buffer.flush()
        else:
            out.write(data.decode("utf-8"))
    return 1 if fatal else 0


def _stage_text(node) -> str:
    lang = node.lang.raw if node.lang is not None else "-"
    date = node.date.label() if node.date is not None else "-"
    return f"{node.form or node.xml_id or node.id} ({lang}, {date})"


def _cmd_trace(args, out, err):
    docs, _, fatal = _load(args.files, err)
    graph = build_network(docs)
    try:
        paths = trace(graph, args.anchor)
    except UnknownAnchor:
        print(f"unknown anchor: {args.anchor}", file=err)
        return 1
    for k, path in enumerate(paths, 1):
        parts = [f"{_stage_text(node)} -{rel}->" for node, rel in path.stages]
        print(f"path {k}: {' '.join(parts)} {path.anchored_entry}", file=out)
    return 1 if fatal else 0


def _cmd_convert(args, out, err):
    settings = _settings(args)
    try:
        table = load_abbrev_table(settings.get("abbrev"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"bad abbreviation table: {exc}") from exc
    docs, _, fatal = _load(args.files, err)
    target = Path(args.out)
    target.mkdir(parents=True, exist_ok=True)
    for doc in docs:
        entries, log = [], []
        for i, entry in enumerate(doc.entries):
            entry, found = lift_entry(entry, table, i)
            log.extend(found)
            entry, found = normalize_entry(entry, aggressive=args.aggressive, entry_index=i)
            log.extend(found)
            entries.append(entry)
        converted = Document(entries=tuple(entries), source_name=doc.source_name)
        dest = target / Path(doc.source_name).name
        dest.write_bytes(emit_tei(converted))
        for d in sort_diagnostics(replace(d, file=doc.source_name) for d in log):
            print(_format_text(d), file=err)
        print(f"{doc.source_name} -> {dest}", file=out)
    return 1 if fatal else 0


_COMMANDS = {
    "parse": _cmd_parse, "lint": _cmd_lint, "graph": _cmd_graph,
    "trace": _cmd_trace, "convert": _cmd_convert,
}


def run(argv=None, out=None, err=None) -> int:
    """Run one command; returns the exit code instead of exiting."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args, out, err)
    except UsageError as exc:
        print(f"etymograph: {exc}", file=err)
        return 2
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
