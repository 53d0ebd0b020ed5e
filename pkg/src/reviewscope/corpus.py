"""Labeled peer-review corpus: ingestion, CSV persistence, and stratified splitting.

The corpus is a flat list of reviews, each carrying the review text, an
optional 0/1 label (0 = human, 1 = AI-generated), a source tag, and an
optional paper id. Review files in the PeerRead JSON layout can be parsed
directly; the canonical on-disk form is a UTF-8 CSV with columns
``id,text,label,source,paper_id``.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field, replace

HUMAN = 0
AI_GENERATED = 1

MIN_REVIEW_CHARS = 50

SOURCES = (
    "PeerRead-ICLR",
    "PeerRead-ACL",
    "PeerRead-CoNLL",
    "GenReviewNeutral",
    "AdversarialA",
    "AdversarialB",
    "External",
)


class CorpusError(ValueError):
    """Raised for malformed review files, bad CSV rows, or invalid datasets."""


@dataclass(frozen=True)
class Review:
    """One peer-review text with optional ground-truth label.

    ``label`` is ``HUMAN`` (0), ``AI_GENERATED`` (1), or ``None`` for
    inference-only reviews. Text must be at least ``MIN_REVIEW_CHARS``
    unicode characters; shorter texts are not admitted to a corpus.
    """

    id: str
    text: str
    label: int | None = None
    source: str = "External"
    paper_id: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise CorpusError("review id must be non-empty")
        if len(self.text) < MIN_REVIEW_CHARS:
            raise CorpusError(
                f"review {self.id!r}: text has {len(self.text)} characters, "
                f"minimum is {MIN_REVIEW_CHARS}"
            )
        if self.label not in (None, HUMAN, AI_GENERATED):
            raise CorpusError(f"review {self.id!r}: label must be 0, 1, or None")
        if self.source not in SOURCES:
            raise CorpusError(f"review {self.id!r}: unknown source {self.source!r}")


@dataclass(frozen=True)
class Dataset:
    """An ordered, id-unique collection of reviews plus the shuffle seed."""

    reviews: tuple[Review, ...]
    seed: int = 0

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for review in self.reviews:
            if review.id in seen:
                raise CorpusError(f"duplicate review id {review.id!r}")
            seen.add(review.id)

    def __len__(self) -> int:
        return len(self.reviews)

    def __iter__(self):
        return iter(self.reviews)

    def shuffled(self, seed: int) -> "Dataset":
        """Deterministic permutation of the reviews under ``seed``."""
        order = list(self.reviews)
        random.Random(seed).shuffle(order)
        return Dataset(reviews=tuple(order), seed=seed)

    def labeled(self) -> bool:
        return all(r.label is not None for r in self.reviews)


def parse_peerread_file(
    raw: bytes,
    source: str = "PeerRead-ICLR",
    id_prefix: str = "",
) -> list[Review]:
    """Parse one PeerRead-style venue file into labeled human reviews.

    The file is a JSON document with a top-level ``reviews`` array whose
    elements carry a ``comments`` text field. Entries shorter than
    ``MIN_REVIEW_CHARS`` characters are silently dropped. All parsed
    reviews are labeled human.
    """
    text = raw.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        byte_offset = len(text[: exc.pos].encode("utf-8"))
        raise CorpusError(f"malformed JSON at byte offset {byte_offset}") from exc
    if not isinstance(doc, dict) or "reviews" not in doc:
        raise CorpusError("document has no top-level 'reviews' array")
    entries = doc["reviews"]
    if not isinstance(entries, list):
        raise CorpusError("'reviews' is not an array")
    paper_id = doc.get("id")
    paper_id = str(paper_id) if paper_id is not None else None

    reviews: list[Review] = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "comments" not in entry:
            raise CorpusError(f"reviews[{i}] has no 'comments' field")
        comments = entry["comments"]
        if not isinstance(comments, str):
            raise CorpusError(f"reviews[{i}].comments is not a string")
        if len(comments) < MIN_REVIEW_CHARS:
            continue
        reviews.append(
            Review(
                id=f"{id_prefix}{i}" if id_prefix else str(i),
                text=comments,
                label=HUMAN,
                source=source,
                paper_id=paper_id,
            )
        )
    return reviews


CSV_HEADER = ("id", "text", "label", "source", "paper_id")


def write_dataset_csv(dataset: Dataset, path) -> None:
    """Write the corpus CSV: UTF-8, quoted fields, LF newlines."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        _write_csv(dataset, fh)


def _write_csv(dataset: Dataset, fh) -> None:
    writer = csv.writer(fh, quoting=csv.QUOTE_ALL, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in dataset.reviews:
        label = "" if r.label is None else str(r.label)
        writer.writerow((r.id, r.text, label, r.source, r.paper_id or ""))


def dataset_to_csv_text(dataset: Dataset) -> str:
    buf = io.StringIO()
    _write_csv(dataset, buf)
    return buf.getvalue()


def load_dataset_csv(path) -> Dataset:
    """Load a corpus CSV written by :func:`write_dataset_csv`.

    Round-trip identity holds: writing then loading yields the same
    reviews in the same order. Unknown label values and duplicate ids
    are row-level errors reported with the offending line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return _read_csv(fh)


def dataset_from_csv_text(text: str) -> Dataset:
    return _read_csv(io.StringIO(text))


def _read_csv(fh) -> Dataset:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise CorpusError("empty file: missing CSV header") from None
    if tuple(header) != CSV_HEADER:
        raise CorpusError(
            f"unexpected CSV header {header!r}, expected {list(CSV_HEADER)!r}"
        )
    reviews: list[Review] = []
    seen: set[str] = set()
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise CorpusError(f"line {line}: expected {len(CSV_HEADER)} columns, got {len(row)}")
        rid, text, label_raw, source, paper_id = row
        if label_raw == "":
            label: int | None = None
        elif label_raw in ("0", "1"):
            label = int(label_raw)
        else:
            raise CorpusError(f"line {line}: unknown label value {label_raw!r}")
        if rid in seen:
            raise CorpusError(f"line {line}: duplicate id {rid!r}")
        seen.add(rid)
        try:
            reviews.append(
                Review(
                    id=rid,
                    text=text,
                    label=label,
                    source=source,
                    paper_id=paper_id or None,
                )
            )
        except CorpusError as exc:
            raise CorpusError(f"line {line}: {exc}") from None
    return Dataset(reviews=tuple(reviews))


def class_counts(dataset: Dataset) -> tuple[int, int]:
    """Exact (n_human, n_ai) counts; every review must be labeled."""
    n_human = n_ai = 0
    for r in dataset.reviews:
        if r.label == HUMAN:
            n_human += 1
        elif r.label == AI_GENERATED:
            n_ai += 1
        else:
            raise CorpusError(f"review {r.id!r} is unlabeled")
    return n_human, n_ai


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def stratified_split(
    dataset: Dataset, test_fraction: float, seed: int
) -> tuple[Dataset, Dataset]:
    """Split into (train, test) preserving the class distribution.

    Per-class test counts are round-half-up(test_fraction * class size);
    the remainder stays in train. Deterministic for a fixed seed; the
    union is disjoint and exhaustive. Requires every review labeled and
    at least 2 members per class.
    """
    if not 0.0 < test_fraction < 1.0:
        raise CorpusError(f"test_fraction must be in (0, 1), got {test_fraction}")
    by_class: dict[int, list[Review]] = {HUMAN: [], AI_GENERATED: []}
    for r in dataset.reviews:
        if r.label is None:
            raise CorpusError(f"review {r.id!r} is unlabeled")
        by_class[r.label].append(r)
    for label, members in by_class.items():
        if len(members) < 2:
            raise CorpusError(
                f"class {label} has {len(members)} member(s); need at least 2 to split"
            )

    rng = random.Random(seed)
    test_ids: set[str] = set()
    for label in (HUMAN, AI_GENERATED):
        members = list(by_class[label])
        rng.shuffle(members)
        n_test = _round_half_up(test_fraction * len(members))
        test_ids.update(r.id for r in members[:n_test])

    train = tuple(r for r in dataset.reviews if r.id not in test_ids)
    test = tuple(r for r in dataset.reviews if r.id in test_ids)
    return Dataset(reviews=train, seed=seed), Dataset(reviews=test, seed=seed)


def merge_datasets(parts: list[Dataset]) -> Dataset:
    reviews: list[Review] = []
    for part in parts:
        reviews.extend(part.reviews)
    return Dataset(reviews=tuple(reviews))


def relabel_source(dataset: Dataset, source: str) -> Dataset:
    return Dataset(
        reviews=tuple(replace(r, source=source) for r in dataset.reviews),
        seed=dataset.seed,
    )
