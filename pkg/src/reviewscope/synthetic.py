"""Synthetic fixtures that mirror the corpus geometry at desk scale.

Two generators:

* ``generate_marker_corpus`` draws marker vectors from class-conditional
  Gaussians whose means and SDs were measured on the labeled review
  corpus. The human class is one broad component; the AI class is a
  3-component mixture: a high-scoring template-like source (half the
  class) and two low-scoring evasion-prompted sources (a quarter each).
  The per-source spreads are recovered from the aggregate AI SDs by
  removing the between-source variance, which is what makes the mixture
  tight around its modes and the class boundary strongly non-linear.

* ``two_cluster_corpus`` builds review texts over two verified
  bucket-disjoint vocabularies, so under the builtin encoder the
  classes are exactly orthogonal and retrieval behavior has a known
  ground truth.
"""

from __future__ import annotations

import numpy as np

from .corpus import AI_GENERATED, HUMAN, Dataset, Review
from .retrieve import BuiltinEncoder

# measured marker statistics (mean, sd) of the human class
HUMAN_MEANS = (0.205, 0.213, 0.268, 0.524, 0.284, 0.502, 0.405, 0.167)
HUMAN_SDS = (0.227, 0.146, 0.178, 0.128, 0.148, 0.208, 0.265, 0.112)

# aggregate statistics of the AI class
AI_MEANS = (0.457, 0.427, 0.512, 0.554, 0.473, 0.581, 0.469, 0.398)
AI_SDS = (0.393, 0.249, 0.243, 0.258, 0.323, 0.266, 0.425, 0.300)

# per-source means inside the AI class and their mixture weights
AI_SOURCE_MEANS = {
    "template": (0.849, 0.665, 0.748, 0.810, 0.793, 0.840, 0.894, 0.696),
    "evasive_a": (0.077, 0.201, 0.262, 0.298, 0.164, 0.330, 0.048, 0.105),
    "evasive_b": (0.053, 0.177, 0.292, 0.299, 0.143, 0.315, 0.042, 0.096),
}
AI_SOURCE_WEIGHTS = {"template": 0.5, "evasive_a": 0.25, "evasive_b": 0.25}

_MIN_WITHIN_SD = 0.02


def _within_source_sds() -> np.ndarray:
    """Per-source SDs consistent with the aggregate AI SDs.

    aggregate variance = between-source variance + within-source
    variance, so the within part is the remainder (floored: the tables
    round to three decimals).
    """
    weights = np.array([AI_SOURCE_WEIGHTS[s] for s in AI_SOURCE_MEANS])
    means = np.array(list(AI_SOURCE_MEANS.values()))
    mixture_mean = weights @ means
    between_var = (weights[:, None] * (means - mixture_mean) ** 2).sum(axis=0)
    within_var = np.maximum(np.array(AI_SDS) ** 2 - between_var, _MIN_WITHIN_SD**2)
    return np.sqrt(within_var)


def generate_marker_corpus(
    n_human: int, n_ai: int, seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """(X, y) of synthetic marker vectors, clipped to [0, 1]."""
    rng = np.random.default_rng(seed)
    human = rng.normal(HUMAN_MEANS, HUMAN_SDS, size=(n_human, 8))

    names = list(AI_SOURCE_MEANS)
    counts = [round(AI_SOURCE_WEIGHTS[name] * n_ai) for name in names]
    counts[0] += n_ai - sum(counts)
    within_sds = _within_source_sds()
    ai_blocks = [
        rng.normal(AI_SOURCE_MEANS[name], within_sds, size=(count, 8))
        for name, count in zip(names, counts)
    ]

    X = np.clip(np.vstack([human] + ai_blocks), 0.0, 1.0)
    y = np.concatenate([np.zeros(n_human, dtype=int), np.ones(n_ai, dtype=int)])
    order = rng.permutation(X.shape[0])
    return X[order], y[order]


_CLUSTER_VOCAB = {
    HUMAN: ("convergence", "gradient", "regularizer"),
    AI_GENERATED: ("ethnography", "fieldwork", "interview"),
}


def two_cluster_corpus(n_per_class: int = 40, seed: int = 0) -> Dataset:
    """Reviews over two bucket-disjoint vocabularies (verified at build).

    Every review contains all three of its class's words, so any two
    same-class reviews have positive similarity while cross-class
    similarity is exactly zero under the builtin encoder.
    """
    encoder = BuiltinEncoder()
    rng = np.random.default_rng(seed)

    for attempt in range(32):
        suffix = "" if attempt == 0 else str(attempt)
        vocab = {label: tuple(w + suffix for w in words) for label, words in _CLUSTER_VOCAB.items()}
        reviews: list[Review] = []
        texts: dict[int, list[str]] = {HUMAN: [], AI_GENERATED: []}
        seen: set[str] = set()
        ok = True
        for label, words in vocab.items():
            prefix = "h" if label == HUMAN else "a"
            for i in range(n_per_class):
                tokens = list(words) * 10
                rng.shuffle(tokens)
                text = " ".join(tokens)
                if text in seen:
                    ok = False
                    break
                seen.add(text)
                texts[label].append(text)
                reviews.append(
                    Review(id=f"{prefix}{i:03d}", text=text, label=label, source="External")
                )
            if not ok:
                break
        if not ok:
            continue

        human_buckets = set().union(
            *(set(np.flatnonzero(encoder.encode(t))) for t in texts[HUMAN])
        )
        ai_buckets = set().union(
            *(set(np.flatnonzero(encoder.encode(t))) for t in texts[AI_GENERATED])
        )
        if human_buckets & ai_buckets:
            continue
        return Dataset(reviews=tuple(reviews), seed=seed)

    raise RuntimeError("could not build bucket-disjoint vocabularies")
