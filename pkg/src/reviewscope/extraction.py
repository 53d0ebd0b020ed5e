"""Batch marker extraction with checkpointing, plus the external LLM scorer.

Two extractors share one interface: the rule-based extractor (pure,
offline) and an LLM client that asks an external model to score the
same eight properties and must return strict JSON. Batch extraction
runs a bounded thread pool, appends progress to a line-delimited
checkpoint file, and falls back to the rule-based extractor when the
LLM response cannot be parsed (per review, after one retry) or the
endpoint is unreachable (whole batch).
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import httpx

from .corpus import Review
from .lexicon import Lexicon, default_lexicon
from .markers import MARKER_NAMES, MarkerVector, extract_rule_based

PROMPT_CHAR_LIMIT = 3000

# Scoring prompt sent to the external model. The review text is
# truncated to PROMPT_CHAR_LIMIT characters at the placeholder.
EXTRACTION_PROMPT_TEMPLATE = '''You are a linguistic analyst evaluating the writing characteristics of an academic peer review.

Score each of the following 8 textual properties from 0.0 (not present at all) to 1.0 (very strongly present). Be precise and use the full range of scores.

PROPERTIES:

1. `standardized_structure`: How rigidly does the text follow a templated structure with clearly labeled sections (e.g., Summary, Strengths, Weaknesses)?
2. `predictable_criticism`: How much does the text rely on common, formulaic critique phrases (e.g., "needs ablation study", "stronger baselines") rather than paper-specific criticism?
3. `excessive_balance`: How diplomatically balanced is the tone? Does it systematically pair criticism with positive framing?
4. `linguistic_homogeneity`: How uniform are the grammar, sentence length, and tone throughout the text?
5. `generic_domain_language`: How much does the text use broad academic phrases (e.g., "novel approach", "significant contribution") rather than precise technical language?
6. `conceptual_feedback`: How much does the feedback stay at a high/conceptual level without referencing specific lines, pages, figures, or tables?
7. `absence_personal_signals`: How absent are personal voice markers (e.g., "I think", "I found", "in my experience", expressions of uncertainty)?
8. `repetition_patterns`: How much repetitive or templated phrasing appears across sections?

PEER REVIEW TEXT:

```
""
{review_text}
""
```

Respond ONLY with valid JSON containing the 8 scores (no justifications):

```
{{
  "standardized_structure": 0.0,
  "predictable_criticism": 0.0,
  "excessive_balance": 0.0,
  "linguistic_homogeneity": 0.0,
  "generic_domain_language": 0.0,
  "conceptual_feedback": 0.0,
  "absence_personal_signals": 0.0,
  "repetition_patterns": 0.0
}}
```'''


class ParseFailure(ValueError):
    """The LLM response did not contain the eight scores as valid JSON."""


class ExtractorUnavailable(RuntimeError):
    """The external scoring endpoint could not be reached."""


def build_extraction_prompt(review_text: str) -> str:
    """The scoring prompt with the review text truncated to 3,000 chars."""
    return EXTRACTION_PROMPT_TEMPLATE.format(review_text=review_text[:PROMPT_CHAR_LIMIT])


def parse_llm_scores(response_text: str) -> MarkerVector:
    """Extract the first JSON object in the response and read the 8 scores.

    All eight marker keys must be present with numeric values; values
    are clipped to [0, 1]. Anything else raises :class:`ParseFailure`.
    """
    decoder = json.JSONDecoder()
    obj = None
    pos = response_text.find("{")
    while pos != -1:
        try:
            candidate, _ = decoder.raw_decode(response_text, pos)
        except json.JSONDecodeError:
            pos = response_text.find("{", pos + 1)
            continue
        if isinstance(candidate, dict):
            obj = candidate
            break
        pos = response_text.find("{", pos + 1)
    if obj is None:
        raise ParseFailure("no JSON object found in response")

    scores = {}
    for name in MARKER_NAMES:
        if name not in obj:
            raise ParseFailure(f"missing key {name!r}")
        value = obj[name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseFailure(f"non-numeric value for {name!r}: {value!r}")
        scores[name] = float(value)
    return MarkerVector.from_dict(scores)


class RuleBasedExtractor:
    """Adapter giving the rule-based extractor the batch interface."""

    name = "rule"

    def __init__(self, lexicon: Lexicon | None = None):
        self.lexicon = lexicon if lexicon is not None else default_lexicon()

    def score_text(self, text: str) -> MarkerVector:
        return extract_rule_based(text, self.lexicon)


@dataclass(frozen=True)
class LlmClientConfig:
    endpoint: str
    model: str
    credential_env: str = "REVIEWSCOPE_LLM_API_KEY"
    timeout: float = 60.0
    max_response_tokens: int = 300


class LlmExtractor:
    """Scores reviews through an OpenAI-style chat-completions endpoint.

    Requests are sent at temperature 0.0 with a bounded response length
    so scoring is reproducible. A ``transport`` callable (prompt -> raw
    response text) can be injected for testing.
    """

    name = "llm"

    def __init__(self, config: LlmClientConfig, transport=None):
        self.config = config
        self._transport = transport if transport is not None else self._http_call

    def _http_call(self, prompt: str) -> str:
        headers = {"Content-Type": "application/json"}
        credential = os.environ.get(self.config.credential_env)
        if credential:
            headers["Authorization"] = f"Bearer {credential}"
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0.0,
            "max_tokens": self.config.max_response_tokens,
        }
        try:
            response = httpx.post(
                self.config.endpoint, json=payload, headers=headers,
                timeout=self.config.timeout,
            )
            response.raise_for_status()
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, json.JSONDecodeError) as exc:
            raise ExtractorUnavailable(str(exc)) from exc

    def score_text(self, text: str) -> MarkerVector:
        try:
            raw = self._transport(build_extraction_prompt(text))
        except ExtractorUnavailable:
            raise
        except (OSError, ConnectionError) as exc:
            raise ExtractorUnavailable(str(exc)) from exc
        return parse_llm_scores(raw)


@dataclass
class ExtractionResult:
    """Per-review marker vectors plus provenance and batch warnings.

    Behaves as a mapping from review id to :class:`MarkerVector`.
    """

    vectors: dict[str, MarkerVector] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def __getitem__(self, review_id: str) -> MarkerVector:
        return self.vectors[review_id]

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, review_id: str) -> bool:
        return review_id in self.vectors

    def keys(self):
        return self.vectors.keys()

    def items(self):
        return self.vectors.items()


def load_checkpoint(path) -> ExtractionResult:
    """Read completed rows from a line-delimited checkpoint file."""
    result = ExtractionResult()
    if path is None or not os.path.exists(path):
        return result
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            result.vectors[record["id"]] = MarkerVector.from_dict(record["scores"])
            result.provenance[record["id"]] = record["extractor"]
    return result


def _checkpoint_line(review_id: str, vector: MarkerVector, tag: str) -> str:
    record = {"id": review_id, "scores": vector.as_dict(), "extractor": tag}
    return json.dumps(record, sort_keys=False) + "\n"


def extract_batch(
    reviews: list[Review],
    extractor,
    *,
    workers: int = 1,
    checkpoint_every: int = 50,
    checkpoint_path=None,
    fallback=None,
    on_checkpoint=None,
) -> ExtractionResult:
    """Extract marker vectors for every review, resumably.

    Rows already present in the checkpoint file are skipped. A
    ``ParseFailure`` from the extractor triggers one retry, then the
    rule-based fallback for that review; an ``ExtractorUnavailable``
    after retry switches the whole remaining batch to the fallback.
    Completed rows are appended to the checkpoint file every
    ``checkpoint_every`` completions and once at the end;
    ``on_checkpoint(cursor)`` is invoked after each write.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if checkpoint_every < 1:
        raise ValueError("checkpoint_every must be >= 1")
    if fallback is None:
        fallback = extractor if extractor.name == "rule" else RuleBasedExtractor()

    result = load_checkpoint(checkpoint_path)
    pending = [r for r in reviews if r.id not in result.vectors]

    batch_degraded = threading.Event()

    def score_one(review: Review) -> tuple[str, MarkerVector, str]:
        if batch_degraded.is_set() and extractor.name != fallback.name:
            return review.id, fallback.score_text(review.text), f"{fallback.name}-fallback"
        try:
            return review.id, extractor.score_text(review.text), extractor.name
        except ParseFailure:
            try:
                return review.id, extractor.score_text(review.text), extractor.name
            except (ParseFailure, ExtractorUnavailable):
                vector = fallback.score_text(review.text)
                return review.id, vector, f"{fallback.name}-fallback"
        except ExtractorUnavailable:
            try:
                return review.id, extractor.score_text(review.text), extractor.name
            except (ParseFailure, ExtractorUnavailable):
                batch_degraded.set()
                vector = fallback.score_text(review.text)
                return review.id, vector, f"{fallback.name}-fallback"

    buffer: list[str] = []
    completed = 0

    def flush() -> None:
        nonlocal buffer
        if checkpoint_path is not None and buffer:
            with open(checkpoint_path, "a", encoding="utf-8") as fh:
                fh.writelines(buffer)
        buffer = []
        if on_checkpoint is not None:
            on_checkpoint(len(result.vectors))

    def record(review_id: str, vector: MarkerVector, tag: str) -> None:
        nonlocal completed
        result.vectors[review_id] = vector
        result.provenance[review_id] = tag
        buffer.append(_checkpoint_line(review_id, vector, tag))
        completed += 1
        if completed % checkpoint_every == 0:
            flush()

    if workers == 1:
        for review in pending:
            record(*score_one(review))
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(score_one, review) for review in pending]
            for future in as_completed(futures):
                record(*future.result())

    if buffer:
        flush()
    if batch_degraded.is_set():
        result.warnings.append(
            f"extractor {extractor.name!r} unreachable; "
            f"remaining reviews scored with {fallback.name!r}"
        )
    return result
