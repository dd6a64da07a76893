"""Counts taken straight from the raw XML, without going through the model."""

import re

from lxml import etree

TEI = "{http://www.tei-c.org/ns/1.0}"


def raw_text(path) -> str:
    return open(path, encoding="utf-8").read()


def _strip_comments(text: str) -> str:
    return re.sub(r"<!--.*?-->", "", text, flags=re.S)


def grep_entries(path) -> int:
    return len(re.findall(r"<entry[\s>]", _strip_comments(raw_text(path))))


def grep_etymons(path) -> int:
    return len(re.findall(r'type="etymon"', _strip_comments(raw_text(path))))


def _tree(path):
    parser = etree.XMLParser(collect_ids=False, remove_comments=True)
    return etree.parse(str(path), parser)


def expected_node_count(path) -> int:
    """entries + senses with an etym or corresp + etymons + distinct external URIs."""
    tree = _tree(path)
    ns = {"t": TEI[1:-1]}
    entries = tree.xpath("//t:entry", namespaces=ns)
    senses = tree.xpath("//t:entry/t:sense[t:etym or @corresp]", namespaces=ns)
    etymons = tree.xpath("//t:etym//t:cit[@type='etymon']", namespaces=ns)
    uris = {
        v.strip()
        for v in tree.xpath("//t:sense/@corresp | //t:usg/@corresp | //t:ref/@corresp", namespaces=ns)
        if v.strip() and not v.strip().startswith("#")
    }
    return len(entries) + len(senses) + len(etymons) + len(uris)
