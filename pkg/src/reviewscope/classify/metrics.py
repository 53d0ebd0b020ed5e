"""Evaluation metrics with the AI class as positive.

Confusion-matrix metrics follow the standard definitions; zero
denominators yield 0.0 and are flagged as degenerate rather than
raising. AUC-ROC is the rank-based (Mann-Whitney) statistic with
midranks for tied scores, so it is invariant under strictly monotone
score transforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MetricsError(ValueError):
    """Raised for empty inputs or single-class AUC."""


Confusion = tuple[int, int, int, int]  # (TP, FP, FN, TN)


def confusion_matrix(y_true, y_pred) -> Confusion:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.size == 0:
        raise MetricsError("empty evaluation set")
    if y_true.shape != y_pred.shape:
        raise MetricsError("y_true and y_pred must align")
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    return tp, fp, fn, tn


def _ratio(numerator: float, denominator: float) -> tuple[float, bool]:
    if denominator == 0:
        return 0.0, True
    return numerator / denominator, False


def accuracy(confusion: Confusion) -> float:
    tp, fp, fn, tn = confusion
    return _ratio(tp + tn, tp + fp + fn + tn)[0]


def precision(confusion: Confusion) -> float:
    tp, fp, _, _ = confusion
    return _ratio(tp, tp + fp)[0]


def recall(confusion: Confusion) -> float:
    tp, _, fn, _ = confusion
    return _ratio(tp, tp + fn)[0]


def f1_score(confusion: Confusion) -> float:
    p = precision(confusion)
    r = recall(confusion)
    return _ratio(2.0 * p * r, p + r)[0]


def fpr_fnr(confusion: Confusion) -> tuple[float, float]:
    tp, fp, fn, tn = confusion
    return _ratio(fp, fp + tn)[0], _ratio(fn, fn + tp)[0]


def auc_roc(y_true, scores) -> float:
    """Mann-Whitney AUC with midranks for ties."""
    y_true = np.asarray(y_true, dtype=int)
    scores = np.asarray(scores, dtype=float)
    if y_true.size == 0:
        raise MetricsError("empty evaluation set")
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == 0))
    if n_pos == 0 or n_neg == 0:
        raise MetricsError("AUC requires both classes present")
    ranks = _midranks(scores)
    rank_sum_pos = float(ranks[y_true == 1].sum())
    u_stat = rank_sum_pos - n_pos * (n_pos + 1) / 2.0
    return u_stat / (n_pos * n_neg)


def _midranks(scores: np.ndarray) -> np.ndarray:
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=float)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class EvalReport:
    """The full metric suite over one evaluation set."""

    accuracy: float
    precision: float
    recall: float
    f1: float
    auc_roc: float
    confusion: Confusion
    fpr: float
    fnr: float
    degenerate_metrics: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "auc_roc": self.auc_roc,
            "confusion": {
                "tp": self.confusion[0],
                "fp": self.confusion[1],
                "fn": self.confusion[2],
                "tn": self.confusion[3],
            },
            "fpr": self.fpr,
            "fnr": self.fnr,
            "degenerate_metrics": list(self.degenerate_metrics),
        }

    def format_table(self) -> str:
        tp, fp, fn, tn = self.confusion
        lines = [
            f"{'accuracy':<12}{self.accuracy:.4f}",
            f"{'precision':<12}{self.precision:.4f}",
            f"{'recall':<12}{self.recall:.4f}",
            f"{'f1':<12}{self.f1:.4f}",
            f"{'auc_roc':<12}{self.auc_roc:.4f}",
            f"{'fpr':<12}{self.fpr * 100:.2f}%",
            f"{'fnr':<12}{self.fnr * 100:.2f}%",
            f"confusion   TP={tp} FP={fp} FN={fn} TN={tn}",
        ]
        if self.degenerate_metrics:
            lines.append("degenerate  " + ", ".join(self.degenerate_metrics))
        return "\n".join(lines)


def evaluate_predictions(y_true, y_pred, scores) -> EvalReport:
    """Assemble the EvalReport from hard labels plus AI-probability scores."""
    confusion = confusion_matrix(y_true, y_pred)
    tp, fp, fn, tn = confusion
    degenerate = []
    prec, prec_deg = _ratio(tp, tp + fp)
    if prec_deg:
        degenerate.append("precision")
    rec, rec_deg = _ratio(tp, tp + fn)
    if rec_deg:
        degenerate.append("recall")
    f1, f1_deg = _ratio(2.0 * prec * rec, prec + rec)
    if f1_deg:
        degenerate.append("f1")
    fpr, fpr_deg = _ratio(fp, fp + tn)
    if fpr_deg:
        degenerate.append("fpr")
    fnr, fnr_deg = _ratio(fn, fn + tp)
    if fnr_deg:
        degenerate.append("fnr")
    return EvalReport(
        accuracy=accuracy(confusion),
        precision=prec,
        recall=rec,
        f1=f1,
        auc_roc=auc_roc(y_true, scores),
        confusion=confusion,
        fpr=fpr,
        fnr=fnr,
        degenerate_metrics=tuple(degenerate),
    )
