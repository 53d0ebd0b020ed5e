"""Labeled nearest-neighbor evidence over normalized dense embeddings.

Reviews are encoded to unit-norm 384-dim vectors and searched with an
exact, exhaustive inner-product scan (equivalent to cosine similarity
on normalized vectors). The default encoder hashes lowercase word
unigrams and bigrams into 384 frequency buckets, so the whole retrieval
stack runs offline and deterministically; an external sentence-encoder
endpoint can be swapped in behind the same interface.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import httpx
import numpy as np

from .corpus import Dataset

EMBEDDING_DIM = 384
DISPLAY_CHARS = 500
INDEX_FORMAT_VERSION = 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_HASH_SEED = 0x5EED0F  # fixed: the bucket layout is part of the index format


class RetrieveError(ValueError):
    """Raised for empty indexes, zero vectors, or malformed index files."""


class EncoderUnavailable(RuntimeError):
    """External encoder endpoint failed; the builtin encoder still works."""

    def __init__(self, message: str, fallback_available: bool = True):
        super().__init__(message)
        self.fallback_available = fallback_available


def _fnv1a(data: bytes) -> int:
    h = _FNV_OFFSET ^ _HASH_SEED
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def _bucket(ngram: str) -> int:
    return _fnv1a(ngram.encode("utf-8")) % EMBEDDING_DIM


def normalize(v: np.ndarray) -> np.ndarray:
    """v / ||v||_2; a zero vector has no direction and is an error."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise RetrieveError("cannot normalize a zero vector")
    return v / norm


def similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Inner product; cosine similarity for unit-norm inputs."""
    return float(np.dot(np.asarray(u, dtype=float), np.asarray(v, dtype=float)))


class BuiltinEncoder:
    """Hashed n-gram frequency encoder: deterministic and offline.

    Tokens are lowercased words; unigrams and bigrams of distinct
    adjacent tokens are hashed into the 384 buckets and counted, then
    the vector is L2-normalized, so only the frequency direction
    matters. Token-free text maps to a reserved bucket.
    """

    name = "builtin-hashed-ngram"

    def encode(self, text: str) -> np.ndarray:
        vec = np.zeros(EMBEDDING_DIM)
        tokens = text.lower().split()
        for token in tokens:
            vec[_bucket(token)] += 1.0
        for first, second in zip(tokens, tokens[1:]):
            if first != second:
                vec[_bucket(first + " " + second)] += 1.0
        if not tokens:
            vec[_bucket("\x00empty")] = 1.0
        return normalize(vec)

    def encode_batch(self, texts: list[str]) -> np.ndarray:
        return np.array([self.encode(t) for t in texts])


class ExternalEncoder:
    """Client for a sentence-encoder endpoint returning 384-dim vectors."""

    def __init__(self, endpoint: str, model: str, timeout: float = 60.0, transport=None):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout
        self.name = f"external:{model}"
        self._transport = transport if transport is not None else self._http_call

    def _http_call(self, texts: list[str]) -> list[list[float]]:
        try:
            response = httpx.post(
                self.endpoint,
                json={"model": self.model, "input": texts},
                timeout=self.timeout,
            )
            response.raise_for_status()
            body = response.json()
            return [item["embedding"] for item in body["data"]]
        except (httpx.HTTPError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise EncoderUnavailable(
                f"external encoder failed ({exc}); the builtin encoder can be used instead"
            ) from exc

    def encode_batch(self, texts: list[str]) -> np.ndarray:
        rows = self._transport(texts)
        out = np.asarray(rows, dtype=float)
        if out.shape != (len(texts), EMBEDDING_DIM):
            raise EncoderUnavailable(
                f"external encoder returned shape {out.shape}, "
                f"expected ({len(texts)}, {EMBEDDING_DIM})"
            )
        return np.array([normalize(row) for row in out])

    def encode(self, text: str) -> np.ndarray:
        return self.encode_batch([text])[0]


def encoder_from_config(config: dict | None):
    config = config or {"kind": "builtin"}
    kind = config.get("kind", "builtin")
    if kind == "builtin":
        return BuiltinEncoder()
    if kind == "external":
        return ExternalEncoder(endpoint=config["endpoint"], model=config["model"])
    raise RetrieveError(f"unknown encoder kind {kind!r}")


def encode(text: str, encoder=None) -> np.ndarray:
    """One normalized embedding; defaults to the builtin encoder."""
    return (encoder or BuiltinEncoder()).encode(text)


def _text_key(text: str) -> str:
    # equality key for self-match exclusion: bytes after trailing-space trim
    return hashlib.blake2b(text.rstrip().encode("utf-8"), digest_size=16).hexdigest()


@dataclass(frozen=True)
class EvidenceIndex:
    vectors: np.ndarray  # (N, 384), rows unit-norm
    metadata: tuple[dict, ...]
    encoder_name: str

    def __post_init__(self) -> None:
        if self.vectors.shape[0] != len(self.metadata):
            raise RetrieveError("vector rows and metadata rows disagree")
        if self.vectors.shape[1] != EMBEDDING_DIM:
            raise RetrieveError(f"index dimension must be {EMBEDDING_DIM}")

    def __len__(self) -> int:
        return self.vectors.shape[0]


def build_index(dataset: Dataset, encoder=None, batch_size: int = 32) -> EvidenceIndex:
    """Encode every review (in index order) and attach display metadata."""
    if len(dataset) == 0:
        raise RetrieveError("cannot build an index from an empty dataset")
    encoder = encoder or BuiltinEncoder()
    texts = [r.text for r in dataset.reviews]
    blocks = [
        encoder.encode_batch(texts[start : start + batch_size])
        for start in range(0, len(texts), batch_size)
    ]
    vectors = np.vstack(blocks)
    metadata = tuple(
        {
            "id": r.id,
            "label": r.label,
            "source": r.source,
            "paper_id": r.paper_id,
            "display_text": r.text[:DISPLAY_CHARS],
            "text_key": _text_key(r.text),
        }
        for r in dataset.reviews
    )
    return EvidenceIndex(vectors=vectors, metadata=metadata, encoder_name=encoder.name)


@dataclass(frozen=True)
class RetrievalResult:
    neighbors: tuple[dict, ...]
    summary: dict

    def to_dict(self) -> dict:
        return {"neighbors": [dict(n) for n in self.neighbors], "summary": dict(self.summary)}


def search(index: EvidenceIndex, query_text: str, K: int = 5, encoder=None) -> RetrievalResult:
    """Exact top-K scan by descending inner product.

    K+1 candidates are ranked (ties broken by ascending row index), any
    row whose text exactly matches the query is dropped, and the first
    K survivors are returned with an aggregate summary.
    """
    if len(index) == 0:
        raise RetrieveError("search over an empty index")
    if K < 1:
        raise RetrieveError(f"K must be >= 1, got {K}")
    query = encode(query_text, encoder)
    sims = index.vectors @ query
    order = np.argsort(-sims, kind="stable")

    query_key = _text_key(query_text)
    neighbors: list[dict] = []
    for row in order[: K + 1]:
        meta = index.metadata[row]
        if meta["text_key"] == query_key:
            continue
        neighbors.append(
            {
                "id": meta["id"],
                "label": meta["label"],
                "similarity": float(sims[row]),
                "display_text": meta["display_text"],
                "source": meta["source"],
                "paper_id": meta["paper_id"],
            }
        )
        if len(neighbors) == K:
            break

    human_count = sum(1 for n in neighbors if n["label"] == 0)
    ai_count = sum(1 for n in neighbors if n["label"] == 1)
    summary = {
        "human_count": human_count,
        "ai_count": ai_count,
        "avg_similarity": float(np.mean([n["similarity"] for n in neighbors])) if neighbors else 0.0,
        "top1_label": neighbors[0]["label"] if neighbors else None,
    }
    return RetrievalResult(neighbors=tuple(neighbors), summary=summary)


# -- persistence ---------------------------------------------------------------

def save_index(index: EvidenceIndex, path) -> None:
    """Framed binary file: JSON header line, raw float64 block, metadata JSON."""
    vector_bytes = index.vectors.astype("<f8").tobytes(order="C")
    metadata_bytes = json.dumps(list(index.metadata)).encode("utf-8")
    header = {
        "format_version": INDEX_FORMAT_VERSION,
        "dimension": EMBEDDING_DIM,
        "count": len(index),
        "encoder": index.encoder_name,
        "vector_bytes": len(vector_bytes),
        "metadata_bytes": len(metadata_bytes),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(vector_bytes)
        fh.write(metadata_bytes)


def load_index(path) -> EvidenceIndex:
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
        except json.JSONDecodeError as exc:
            raise RetrieveError(f"malformed index header: {exc}") from exc
        if header.get("format_version") != INDEX_FORMAT_VERSION:
            raise RetrieveError(f"unsupported index format {header.get('format_version')!r}")
        vector_block = fh.read(header["vector_bytes"])
        metadata_block = fh.read(header["metadata_bytes"])
    if len(vector_block) != header["vector_bytes"]:
        raise RetrieveError("truncated vector block")
    vectors = np.frombuffer(vector_block, dtype="<f8").reshape(
        header["count"], header["dimension"]
    ).copy()
    metadata = tuple(json.loads(metadata_block.decode("utf-8")))
    return EvidenceIndex(vectors=vectors, metadata=metadata, encoder_name=header["encoder"])


# -- retrieval evaluation harness ----------------------------------------------

@dataclass(frozen=True)
class ClassRetrievalMetrics:
    top1_accuracy: float
    avg_same_class_topk: float
    avg_cross_class_topk: float
    mean_topk_similarity: float
    mean_top1_similarity: float

    def to_dict(self) -> dict:
        return {
            "top1_accuracy": self.top1_accuracy,
            "avg_same_class_topk": self.avg_same_class_topk,
            "avg_cross_class_topk": self.avg_cross_class_topk,
            "mean_topk_similarity": self.mean_topk_similarity,
            "mean_top1_similarity": self.mean_top1_similarity,
        }


@dataclass(frozen=True)
class RetrievalEvalResult:
    human: ClassRetrievalMetrics
    ai: ClassRetrievalMetrics
    k: int

    def to_dict(self) -> dict:
        return {"k": self.k, "human": self.human.to_dict(), "ai": self.ai.to_dict()}

    def format_table(self) -> str:
        rows = [
            ("top-1 accuracy", "top1_accuracy", "{:.2%}"),
            (f"avg same-class in top-{self.k}", "avg_same_class_topk", "{:.2f}"),
            (f"avg cross-class in top-{self.k}", "avg_cross_class_topk", "{:.2f}"),
            (f"mean top-{self.k} similarity", "mean_topk_similarity", "{:.3f}"),
            ("mean top-1 similarity", "mean_top1_similarity", "{:.3f}"),
        ]
        lines = [f"{'metric':<28}{'human queries':>16}{'ai queries':>16}"]
        for label, attr, fmt in rows:
            lines.append(
                f"{label:<28}"
                f"{fmt.format(getattr(self.human, attr)):>16}"
                f"{fmt.format(getattr(self.ai, attr)):>16}"
            )
        return "\n".join(lines)


def _evaluate_class(index, queries, label, K, encoder) -> ClassRetrievalMetrics:
    top1_hits = 0
    same_counts = []
    cross_counts = []
    topk_sims = []
    top1_sims = []
    for text in queries:
        result = search(index, text, K=K, encoder=encoder)
        if not result.neighbors:
            continue
        same = sum(1 for n in result.neighbors if n["label"] == label)
        cross = len(result.neighbors) - same
        top1_hits += int(result.neighbors[0]["label"] == label)
        same_counts.append(same)
        cross_counts.append(cross)
        topk_sims.append(float(np.mean([n["similarity"] for n in result.neighbors])))
        top1_sims.append(result.neighbors[0]["similarity"])
    if not same_counts:
        raise RetrieveError("no query produced any neighbors")
    return ClassRetrievalMetrics(
        top1_accuracy=top1_hits / len(same_counts),
        avg_same_class_topk=float(np.mean(same_counts)),
        avg_cross_class_topk=float(np.mean(cross_counts)),
        mean_topk_similarity=float(np.mean(topk_sims)),
        mean_top1_similarity=float(np.mean(top1_sims)),
    )


def evaluate_retrieval(
    index: EvidenceIndex,
    human_queries: list[str],
    ai_queries: list[str],
    K: int = 5,
    encoder=None,
) -> RetrievalEvalResult:
    """Same-class retrieval statistics for both query classes."""
    if not human_queries or not ai_queries:
        raise RetrieveError("both query sets must be non-empty")
    return RetrievalEvalResult(
        human=_evaluate_class(index, human_queries, 0, K, encoder),
        ai=_evaluate_class(index, ai_queries, 1, K, encoder),
        k=K,
    )
