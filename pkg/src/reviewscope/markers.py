"""The eight-marker stylometric taxonomy and its rule-based extractor.

Each marker maps review text to a score in [0, 1]. The rule-based
extractor is a pure function of (text, lexicon): deterministic, fast,
and usable with no network access. Count-based markers saturate at
fixed divisors; the two distributional markers are built on sentence
lengths and word trigrams.

Marker order (the classifier's feature space):

    1. standardized_structure      min(h/5, 1)   h = distinct header keywords
    2. predictable_criticism       min(c/4, 1)   c = critique phrase hits
    3. excessive_balance           min(d/3, 1)   d = diplomatic phrase hits
    4. linguistic_homogeneity      max(0, 1 - sd(L)/(mean(L)+1e-9))
    5. generic_domain_language     min(g/4, 1)   g = generic phrase hits
    6. conceptual_feedback         max(0, 1 - p/5)  p = concrete references
    7. absence_personal_signals    max(0, 1 - s/3)  s = personal voice hits
    8. repetition_patterns         min(3*(1 - u), 1)  u = trigram uniqueness
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .lexicon import Lexicon

MARKER_NAMES = (
    "standardized_structure",
    "predictable_criticism",
    "excessive_balance",
    "linguistic_homogeneity",
    "generic_domain_language",
    "conceptual_feedback",
    "absence_personal_signals",
    "repetition_patterns",
)

N_MARKERS = len(MARKER_NAMES)

_HOMOGENEITY_EPS = 1e-9


def _clip01(x: float) -> float:
    return 0.0 if x < 0.0 else 1.0 if x > 1.0 else x


@dataclass(frozen=True)
class MarkerVector:
    """The eight marker scores; every component is clipped to [0, 1]."""

    standardized_structure: float
    predictable_criticism: float
    excessive_balance: float
    linguistic_homogeneity: float
    generic_domain_language: float
    conceptual_feedback: float
    absence_personal_signals: float
    repetition_patterns: float

    def __post_init__(self) -> None:
        for name in MARKER_NAMES:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name}: non-finite score {value!r}")
            object.__setattr__(self, name, _clip01(float(value)))

    @classmethod
    def from_values(cls, values) -> "MarkerVector":
        values = list(values)
        if len(values) != N_MARKERS:
            raise ValueError(f"expected {N_MARKERS} scores, got {len(values)}")
        return cls(*values)

    @classmethod
    def from_dict(cls, mapping) -> "MarkerVector":
        missing = [name for name in MARKER_NAMES if name not in mapping]
        if missing:
            raise ValueError(f"missing marker keys: {missing}")
        return cls(**{name: float(mapping[name]) for name in MARKER_NAMES})

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in MARKER_NAMES)

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in MARKER_NAMES}


# -- sentence segmentation ---------------------------------------------------

_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")


def segment_sentences(text: str) -> list[int]:
    """Token lengths of the text's sentences.

    Sentences end at '.', '!', or '?' followed by whitespace or
    end-of-text; sentence length is the whitespace-delimited token
    count. Empty text gives an empty list.
    """
    lengths = []
    for chunk in _SENTENCE_BREAK.split(text.strip()):
        n = len(chunk.split())
        if n:
            lengths.append(n)
    return lengths


# -- phrase and pattern counting ---------------------------------------------

def _count_occurrences(text_lower: str, phrases) -> int:
    """Total case-insensitive substring occurrences across all phrases."""
    return sum(text_lower.count(phrase) for phrase in phrases)


def _header_regexes(keyword: str) -> tuple[re.Pattern, re.Pattern]:
    escaped = re.escape(keyword)
    at_line_start = re.compile(rf"(?im)^\W{{0,10}}{escaped}\b")
    before_colon = re.compile(rf"(?i)\b{escaped}\s*:")
    return at_line_start, before_colon


def _count_headers(text: str, keywords) -> int:
    """Distinct header keywords seen at line starts or before a colon."""
    hits = 0
    for keyword in keywords:
        at_start, colon = _header_regexes(keyword)
        if at_start.search(text) or colon.search(text):
            hits += 1
    return hits


def _reference_regex(prefixes) -> re.Pattern:
    words = [p for p in prefixes if p.isalnum()]
    symbols = [p for p in prefixes if not p.isalnum()]
    # "figure 3", "fig. 2", "§4"; optional dot, then a number
    parts = []
    if words:
        parts.append(rf"\b(?:{'|'.join(re.escape(w) for w in words)})\.?\s*\d+")
    for symbol in symbols:
        parts.append(rf"{re.escape(symbol)}\s*\d+")
    return re.compile("(?i)" + "|".join(parts))


def _count_references(text: str, prefixes) -> int:
    return len(_reference_regex(prefixes).findall(text))


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _content_tokens(text: str) -> list[str]:
    """Lowercase tokens with punctuation stripped, for trigram counting."""
    return _TOKEN_RE.findall(text.lower())


# -- the eight marker scores -------------------------------------------------

def score_structure(text: str, lexicon: Lexicon) -> float:
    h = _count_headers(text, lexicon.section_headers)
    return min(h / 5.0, 1.0)


def score_criticism(text: str, lexicon: Lexicon) -> float:
    c = _count_occurrences(text.lower(), lexicon.critique_phrases)
    return min(c / 4.0, 1.0)


def score_balance(text: str, lexicon: Lexicon) -> float:
    d = _count_occurrences(text.lower(), lexicon.diplomatic_phrases)
    return min(d / 3.0, 1.0)


def score_homogeneity(text: str) -> float:
    """1 minus the coefficient of variation of sentence lengths.

    Uses the population standard deviation. Texts with zero or one
    sentence have no length variation and score 1.0.
    """
    lengths = segment_sentences(text)
    if len(lengths) <= 1:
        return 1.0
    mean = sum(lengths) / len(lengths)
    var = sum((n - mean) ** 2 for n in lengths) / len(lengths)
    cv = math.sqrt(var) / (mean + _HOMOGENEITY_EPS)
    return max(0.0, 1.0 - cv)


def score_generic(text: str, lexicon: Lexicon) -> float:
    g = _count_occurrences(text.lower(), lexicon.generic_phrases)
    return min(g / 4.0, 1.0)


def score_conceptual(text: str, lexicon: Lexicon) -> float:
    p = _count_references(text, lexicon.reference_patterns)
    return max(0.0, 1.0 - p / 5.0)


def score_personal_absence(text: str, lexicon: Lexicon) -> float:
    s = _count_occurrences(text.lower(), lexicon.personal_markers)
    return max(0.0, 1.0 - s / 3.0)


def score_repetition(text: str) -> float:
    """Amplified trigram duplication: min(3*(1 - u), 1).

    u is the unique/total ratio over word trigrams. Texts with fewer
    than 3 tokens expose no trigram, so no repetition is observable
    and the score is 0.
    """
    tokens = _content_tokens(text)
    total = len(tokens) - 2
    if total < 1:
        return 0.0
    unique = len({(tokens[i], tokens[i + 1], tokens[i + 2]) for i in range(total)})
    u = unique / total
    return min(3.0 * (1.0 - u), 1.0)


def extract_rule_based(text: str, lexicon: Lexicon) -> MarkerVector:
    """All eight marker scores for one review text. Pure and deterministic."""
    return MarkerVector(
        standardized_structure=score_structure(text, lexicon),
        predictable_criticism=score_criticism(text, lexicon),
        excessive_balance=score_balance(text, lexicon),
        linguistic_homogeneity=score_homogeneity(text),
        generic_domain_language=score_generic(text, lexicon),
        conceptual_feedback=score_conceptual(text, lexicon),
        absence_personal_signals=score_personal_absence(text, lexicon),
        repetition_patterns=score_repetition(text),
    )
