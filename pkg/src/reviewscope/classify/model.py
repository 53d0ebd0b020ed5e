"""The fitted-classifier container, prediction operations, and model files.

A ``TrainedModel`` is immutable after fitting and safe to share across
threads. Three kinds exist: the gradient-boosted ensemble and the
random forest (both tree lists) and the standardized elastic-net
logistic baseline. Models persist to a self-describing JSON document;
reloading reproduces bit-identical predictions.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..markers import MARKER_NAMES, MarkerVector
from .trees import TreeNode

FORMAT_VERSION = 1

GRADIENT_BOOSTED = "gradient_boosted"
RANDOM_FOREST = "random_forest"
LINEAR = "linear"

TREE_KINDS = (GRADIENT_BOOSTED, RANDOM_FOREST)


class ModelError(ValueError):
    """Raised for invalid training inputs or malformed model files."""


def compute_class_weight(y) -> float:
    """Cost-sensitive weight for the AI class: negatives over positives.

    With this weight the total instance weight placed on the AI class
    equals the total weight on the human class.
    """
    y = np.asarray(y)
    n_negative = int(np.sum(y == 0))
    n_positive = int(np.sum(y == 1))
    if n_positive == 0:
        raise ModelError("no positive (AI) instances; class weight is undefined")
    return n_negative / n_positive


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass(frozen=True)
class LinearPayload:
    """Standardization constants and coefficients of the linear baseline."""

    means: tuple[float, ...]
    sds: tuple[float, ...]
    coefficients: tuple[float, ...]
    intercept: float
    converged: bool
    n_iter: int

    def standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - np.asarray(self.means)) / np.asarray(self.sds)


@dataclass(frozen=True)
class TrainedModel:
    kind: str
    class_weight: float
    seed: int
    hyperparameters: dict
    feature_names: tuple[str, ...] = MARKER_NAMES
    trees: tuple[TreeNode, ...] | None = None
    base_score: float = 0.0
    linear: LinearPayload | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def output_scale(self) -> str:
        """Scale of :meth:`margin`: log-odds for boosted/linear models,
        probability for the forest (it averages leaf class frequencies)."""
        return "probability" if self.kind == RANDOM_FOREST else "margin"

    def margins(self, X: np.ndarray) -> np.ndarray:
        """Raw model output per row, on :attr:`output_scale`."""
        X = np.asarray(X, dtype=float)
        if self.kind == GRADIENT_BOOSTED:
            out = np.full(X.shape[0], self.base_score)
            for tree in self.trees:
                out += tree.predict(X)
            return out
        if self.kind == RANDOM_FOREST:
            out = np.zeros(X.shape[0])
            for tree in self.trees:
                out += tree.predict(X)
            return out / len(self.trees)
        z = self.linear.standardize(X)
        return z @ np.asarray(self.linear.coefficients) + self.linear.intercept

    def margin(self, x) -> float:
        return float(self.margins(_as_row(x))[0])

    def proba_ai(self, X: np.ndarray) -> np.ndarray:
        raw = self.margins(X)
        return raw if self.kind == RANDOM_FOREST else sigmoid(raw)

    @property
    def version(self) -> str:
        """Content fingerprint of the fitted model (stable across loads)."""
        payload = _model_document(self)
        payload.pop("metadata", None)
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.blake2b(blob, digest_size=6).hexdigest()


def _as_row(x) -> np.ndarray:
    if isinstance(x, MarkerVector):
        x = x.as_tuple()
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


def predict_proba(model: TrainedModel, x) -> tuple[float, float]:
    """(P_human, P_ai) for one marker vector; the pair sums to 1."""
    p1 = float(model.proba_ai(_as_row(x))[0])
    return 1.0 - p1, p1


def predict(model: TrainedModel, x) -> int:
    """Hard label at the fixed 0.5 threshold; 1 means AI-generated."""
    return int(predict_proba(model, x)[1] >= 0.5)


def _model_document(model: TrainedModel) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "hyperparameters": model.hyperparameters,
        "class_weight": model.class_weight,
        "seed": model.seed,
        "feature_names": list(model.feature_names),
        "metadata": model.metadata,
    }
    if model.kind in TREE_KINDS:
        doc["base_score"] = model.base_score
        doc["trees"] = [tree.to_dict() for tree in model.trees]
    else:
        doc["linear"] = {
            "means": list(model.linear.means),
            "sds": list(model.linear.sds),
            "coefficients": list(model.linear.coefficients),
            "intercept": model.linear.intercept,
            "converged": model.linear.converged,
            "n_iter": model.linear.n_iter,
        }
    return doc


def save_model(model: TrainedModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_model_document(model), fh, indent=1)
        fh.write("\n")


def load_model(path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {doc.get('format_version')!r}")
    kind = doc.get("kind")
    if kind not in (GRADIENT_BOOSTED, RANDOM_FOREST, LINEAR):
        raise ModelError(f"unknown model kind {kind!r}")
    common = dict(
        kind=kind,
        class_weight=float(doc["class_weight"]),
        seed=int(doc["seed"]),
        hyperparameters=doc["hyperparameters"],
        feature_names=tuple(doc["feature_names"]),
        metadata=doc.get("metadata", {}),
    )
    if kind in TREE_KINDS:
        return TrainedModel(
            trees=tuple(TreeNode.from_dict(t) for t in doc["trees"]),
            base_score=float(doc.get("base_score", 0.0)),
            **common,
        )
    lin = doc["linear"]
    payload = LinearPayload(
        means=tuple(float(v) for v in lin["means"]),
        sds=tuple(float(v) for v in lin["sds"]),
        coefficients=tuple(float(v) for v in lin["coefficients"]),
        intercept=float(lin["intercept"]),
        converged=bool(lin["converged"]),
        n_iter=int(lin["n_iter"]),
    )
    return TrainedModel(linear=payload, **common)


def validate_training_inputs(X, y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or X.shape[1] != len(MARKER_NAMES):
        raise ModelError(f"X must be (n, {len(MARKER_NAMES)}), got {X.shape}")
    if y.shape != (X.shape[0],):
        raise ModelError("y must align with X rows")
    if X.shape[0] == 0:
        raise ModelError("empty training set")
    if not np.isin(y, (0, 1)).all():
        raise ModelError("labels must be 0 or 1")
    if y.min() == y.max():
        raise ModelError("training data contains a single class")
    if not (np.isfinite(X).all() and (X >= 0).all() and (X <= 1).all()):
        raise ModelError("marker features must be finite and in [0, 1]")
    return X, y


def instance_weights(y: np.ndarray, w_plus: float) -> np.ndarray:
    if not math.isfinite(w_plus) or w_plus <= 0:
        raise ModelError(f"class weight must be positive, got {w_plus}")
    return np.where(y == 1, w_plus, 1.0)
