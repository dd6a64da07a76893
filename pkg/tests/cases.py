"""Shared case tables."""

# Strings that must never parse as well-formed language tags.
MALFORMED_TAGS = [
    "",
    "-",
    "e",
    "en-",
    "-en",
    "en--us",
    "en_US",
    "123",
    "en-u",
    "en-x",
    "x",
    "en-a-bb-a-cc",      # repeated extension singleton
    "de-1901-1901",      # repeated variant
    "en-US-x-",
    "toolongsubtag",
    "en-abcdefghi",
    "fr-latn-latn",
    "en US",
    "é",
    "en-x-toolongpriv",
]

ETYM_TYPES = ["inheritance", "borrowing", "compounding", "metaphor", "metonymy", "grammaticalization"]
ENTRY_LEVEL = {"inheritance", "borrowing", "compounding"}


def tei(body: str) -> bytes:
    return (
        '<TEI xmlns="http://www.tei-c.org/ns/1.0"><text><body>' + body + "</body></text></TEI>"
    ).encode("utf-8")


def placement_case(etym_type: str, at_entry: bool) -> bytes:
    etym = (
        f'<etym type="{etym_type}"><cit type="etymon">'
        '<oRef xml:lang="la">x</oRef></cit></etym>'
    )
    sense = f"<sense>{'' if at_entry else etym}</sense>"
    return tei(
        '<entry xml:id="e" xml:lang="fr"><form type="lemma"><orth>x</orth></form>'
        + sense + (etym if at_entry else "") + "</entry>"
    )
