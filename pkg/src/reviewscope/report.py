"""Editor-facing report assembly: extract, classify, explain, retrieve, verdict.

The report combines the classifier's probability with marker-level
evidence so the final recommendation never rests on a point estimate
alone. Verdict rules are small pure functions over (probabilities,
marker scores) and are re-checkable by any consumer:

* confidence: High if max(P0, P1) > 0.8, Medium if > 0.6, else Low
* marker severity: High if score > 0.7, Medium if > 0.4, else Low
* assessment cascade on (P1, markers above 0.7):
  STRONG if P1 > 0.8 and >= 3; MODERATE if P1 > 0.6 and >= 2;
  WEAK if P1 > 0.4; otherwise HUMAN.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

from .classify.model import TrainedModel, predict_proba
from .explain import ShapExplanation, explain
from .extraction import ExtractorUnavailable, ParseFailure, RuleBasedExtractor
from .markers import MARKER_NAMES, MarkerVector
from .retrieve import EvidenceIndex, RetrieveError, search

PREVIEW_CHARS = 200
HIGH_MARKER_THRESHOLD = 0.7

STRONG = "STRONG"
MODERATE = "MODERATE"
WEAK = "WEAK"
HUMAN_VERDICT = "HUMAN"

TEXT_SECTIONS = (
    "CLASSIFICATION",
    "MARKER SCORES",
    "SHAP EXPLANATION",
    "RETRIEVAL EVIDENCE",
    "OVERALL ASSESSMENT",
)


class ReportError(ValueError):
    """Raised for empty input text or malformed report documents."""


def confidence_level(p0: float, p1: float) -> str:
    top = max(p0, p1)
    if top > 0.8:
        return "High"
    if top > 0.6:
        return "Medium"
    return "Low"


def severity(score: float) -> str:
    if score > 0.7:
        return "High"
    if score > 0.4:
        return "Medium"
    return "Low"


def high_marker_count(vector: MarkerVector) -> int:
    return sum(1 for v in vector.as_tuple() if v > HIGH_MARKER_THRESHOLD)


def assess(p1: float, high_markers: int) -> str:
    if p1 > 0.8 and high_markers >= 3:
        return STRONG
    if p1 > 0.6 and high_markers >= 2:
        return MODERATE
    if p1 > 0.4:
        return WEAK
    return HUMAN_VERDICT


@dataclass(frozen=True)
class EditorReport:
    review_id: str
    predicted_label: int
    ai_probability: float
    confidence: str
    marker_scores: MarkerVector
    shap: ShapExplanation
    evidence_neighbors: tuple[dict, ...]
    evidence_summary: dict | None
    assessment: str
    provenance: dict
    evidence_warning: str | None = None

    def to_dict(self) -> dict:
        doc = {
            "classification": {
                "label": "AI-Generated" if self.predicted_label == 1 else "Human",
                "ai_probability": self.ai_probability,
                "confidence": self.confidence,
            },
            "markers": [
                {"name": name, "score": score, "severity": severity(score)}
                for name, score in zip(MARKER_NAMES, self.marker_scores.as_tuple())
            ],
            "shap": self.shap.to_dict(),
            "evidence": {
                "neighbors": [dict(n) for n in self.evidence_neighbors],
                "summary": dict(self.evidence_summary) if self.evidence_summary else None,
            },
            "assessment": self.assessment,
            "provenance": dict(self.provenance),
        }
        if self.evidence_warning is not None:
            doc["evidence"]["warning"] = self.evidence_warning
        return doc


def generate_report(
    review_text: str,
    model: TrainedModel,
    index: EvidenceIndex | None,
    extractor=None,
    lexicon=None,
    evidence_k: int = 3,
    review_id: str | None = None,
) -> EditorReport:
    """Run the full pipeline on one review text.

    Steps, in order: marker extraction (with rule-based fallback when
    the LLM extractor fails), classification, Shapley explanation,
    evidence retrieval, verdict assembly. A missing or failing index
    degrades to a report whose evidence section carries a warning.
    """
    if not review_text or not review_text.strip():
        raise ReportError("review text is empty")

    fallback = RuleBasedExtractor(lexicon)
    if extractor is None:
        extractor = fallback

    vector, extractor_tag = _extract_with_fallback(review_text, extractor, fallback)

    p0, p1 = predict_proba(model, vector)
    explanation = explain(model, vector)

    neighbors: tuple[dict, ...] = ()
    summary = None
    warning = None
    if index is None:
        warning = "evidence index unavailable; retrieval skipped"
    else:
        try:
            result = search(index, review_text, K=evidence_k)
            neighbors = tuple(
                {
                    "id": n["id"],
                    "label": "AI-Generated" if n["label"] == 1 else "Human",
                    "similarity": n["similarity"],
                    "preview": n["display_text"][:PREVIEW_CHARS],
                    "source": n["source"],
                    "paper_id": n["paper_id"],
                }
                for n in result.neighbors
            )
            summary = result.summary
        except RetrieveError as exc:
            warning = f"evidence retrieval failed: {exc}"

    if review_id is None:
        review_id = "r-" + hashlib.blake2b(review_text.encode("utf-8"), digest_size=5).hexdigest()

    return EditorReport(
        review_id=review_id,
        predicted_label=int(p1 >= 0.5),
        ai_probability=p1,
        confidence=confidence_level(p0, p1),
        marker_scores=vector,
        shap=explanation,
        evidence_neighbors=neighbors,
        evidence_summary=summary,
        assessment=assess(p1, high_marker_count(vector)),
        provenance={
            "review_id": review_id,
            "extractor": extractor_tag,
            "model_kind": model.kind,
            "model_version": model.version,
            "lexicon_version": fallback.lexicon.version,
        },
        evidence_warning=warning,
    )


def _extract_with_fallback(text: str, extractor, fallback) -> tuple[MarkerVector, str]:
    if extractor.name == fallback.name:
        return extractor.score_text(text), extractor.name
    try:
        return extractor.score_text(text), extractor.name
    except (ParseFailure, ExtractorUnavailable):
        try:
            return extractor.score_text(text), extractor.name
        except (ParseFailure, ExtractorUnavailable):
            return fallback.score_text(text), f"{fallback.name}-fallback"


def render_json(report: EditorReport) -> str:
    """Canonical JSON rendering; the single code path for CLI and service."""
    return json.dumps(report.to_dict(), indent=2, ensure_ascii=False) + "\n"


def parse_report_json(text: str) -> EditorReport:
    """Inverse of :func:`render_json` (lossless round-trip)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"malformed report JSON: {exc}") from exc
    classification = doc["classification"]
    markers = MarkerVector.from_dict({m["name"]: m["score"] for m in doc["markers"]})
    shap_doc = doc["shap"]
    explanation = ShapExplanation(
        base_value=shap_doc["base_value"],
        values=tuple(shap_doc["values"][name] for name in MARKER_NAMES),
        scale=shap_doc["scale"],
        model_version=shap_doc["model_version"],
        top_contributors=tuple(
            (entry["name"], entry["value"], entry["direction"]) for entry in shap_doc["top5"]
        ),
    )
    evidence = doc["evidence"]
    return EditorReport(
        review_id=doc["provenance"]["review_id"],
        predicted_label=1 if classification["label"] == "AI-Generated" else 0,
        ai_probability=classification["ai_probability"],
        confidence=classification["confidence"],
        marker_scores=markers,
        shap=explanation,
        evidence_neighbors=tuple(evidence["neighbors"]),
        evidence_summary=evidence["summary"],
        assessment=doc["assessment"],
        provenance=doc["provenance"],
        evidence_warning=evidence.get("warning"),
    )


def render_text(report: EditorReport) -> str:
    """Plain-text rendering with every section present, in fixed order."""
    doc = report.to_dict()
    lines: list[str] = []

    def header(title: str) -> None:
        lines.append(f"== {title} ==")

    header(TEXT_SECTIONS[0])
    c = doc["classification"]
    lines.append(f"verdict: {c['label']}")
    lines.append(f"ai probability: {c['ai_probability']:.4f}")
    lines.append(f"confidence: {c['confidence']}")

    lines.append("")
    header(TEXT_SECTIONS[1])
    for m in doc["markers"]:
        lines.append(f"{m['name']:<28}{m['score']:.3f}  {m['severity']}")

    lines.append("")
    header(TEXT_SECTIONS[2])
    lines.append(f"scale: {doc['shap']['scale']}  base value: {doc['shap']['base_value']:+.4f}")
    for entry in doc["shap"]["top5"]:
        lines.append(f"{entry['name']:<28}{entry['value']:+.4f}  {entry['direction']}")

    lines.append("")
    header(TEXT_SECTIONS[3])
    if report.evidence_warning is not None:
        lines.append(f"warning: {report.evidence_warning}")
    if report.evidence_summary:
        s = report.evidence_summary
        lines.append(
            f"matches: {s['human_count']} human / {s['ai_count']} ai, "
            f"avg similarity {s['avg_similarity']:.3f}"
        )
    for n in doc["evidence"]["neighbors"]:
        lines.append(f"[{n['label']}] sim={n['similarity']:.3f} ({n['source']}) {n['id']}")
        lines.append(f"    {n['preview']}")

    lines.append("")
    header(TEXT_SECTIONS[4])
    lines.append(report.assessment)
    lines.append(
        f"extractor: {report.provenance['extractor']}  "
        f"model: {report.provenance['model_kind']}@{report.provenance['model_version']}  "
        f"lexicon: {report.provenance['lexicon_version']}"
    )
    return "\n".join(lines) + "\n"
