"""Phrase lexicon backing the rule-based marker extractor.

The lexicon is plain data: five phrase lists plus the reference-pattern
prefixes used to spot concrete line/page/figure/table citations. It
ships as a text file with one ``[section]`` per marker and one phrase
per line, so editorial teams can tune the lists without touching code.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields
from importlib import resources

_SECTION_FIELDS = (
    "section_headers",
    "critique_phrases",
    "diplomatic_phrases",
    "generic_phrases",
    "personal_markers",
    "reference_patterns",
)


class LexiconError(ValueError):
    """Raised for malformed lexicon files or invalid phrase lists."""


@dataclass(frozen=True)
class Lexicon:
    section_headers: tuple[str, ...]
    critique_phrases: tuple[str, ...]
    diplomatic_phrases: tuple[str, ...]
    generic_phrases: tuple[str, ...]
    personal_markers: tuple[str, ...]
    reference_patterns: tuple[str, ...]

    def __post_init__(self) -> None:
        for f in fields(self):
            phrases = getattr(self, f.name)
            seen: set[str] = set()
            for phrase in phrases:
                if not phrase:
                    raise LexiconError(f"{f.name}: empty phrase")
                if phrase != phrase.lower():
                    raise LexiconError(f"{f.name}: phrase {phrase!r} is not lowercase")
                if phrase in seen:
                    raise LexiconError(f"{f.name}: duplicate phrase {phrase!r}")
                seen.add(phrase)

    @property
    def version(self) -> str:
        """Content fingerprint, embedded in reports for auditability."""
        digest = hashlib.blake2b(digest_size=6)
        for f in fields(self):
            digest.update(f.name.encode())
            for phrase in getattr(self, f.name):
                digest.update(b"\x00" + phrase.encode("utf-8"))
        return digest.hexdigest()


def parse_lexicon_text(text: str) -> Lexicon:
    """Parse the ``[section]``/one-phrase-per-line format; ``#`` comments."""
    sections: dict[str, list[str]] = {name: [] for name in _SECTION_FIELDS}
    current: list[str] | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in sections:
                raise LexiconError(f"line {lineno}: unknown section {name!r}")
            current = sections[name]
            continue
        if current is None:
            raise LexiconError(f"line {lineno}: phrase before any [section] header")
        current.append(line.lower())
    return Lexicon(**{name: tuple(phrases) for name, phrases in sections.items()})


def load_lexicon(path) -> Lexicon:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_lexicon_text(fh.read())


def default_lexicon() -> Lexicon:
    """The lexicon bundled with the package."""
    text = resources.files("reviewscope.data").joinpath("default_lexicon.txt").read_text("utf-8")
    return parse_lexicon_text(text)
