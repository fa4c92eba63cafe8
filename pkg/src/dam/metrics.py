"""Accuracy and macro-F1 over the three polarity classes."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .corpus import POLARITIES


@dataclass
class Metrics:
    accuracy: float
    macro_f1: float
    per_class_f1: dict[str, float]
    n_examples: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "n_examples": self.n_examples,
            "per_class_f1": dict(self.per_class_f1),
        }


def confusion_matrix(gold: Sequence[int], pred: Sequence[int], k: int = len(POLARITIES)) -> np.ndarray:
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (np.asarray(gold, dtype=np.intp), np.asarray(pred, dtype=np.intp)), 1)
    return cm


def compute_metrics(gold: Sequence[int], pred: Sequence[int]) -> Metrics:
    """Accuracy and unweighted mean per-class F1.

    A class with no true positives (including one absent from both gold and
    predictions) scores F1 = 0.
    """
    if len(gold) != len(pred):
        raise ValueError(f"{len(gold)} gold labels vs {len(pred)} predictions")
    if not gold:
        raise ValueError("cannot compute metrics on an empty evaluation set")
    cm = confusion_matrix(gold, pred)
    tp = np.diag(cm).astype(np.float64)
    fp = cm.sum(axis=0) - tp
    fn = cm.sum(axis=1) - tp
    denom = 2 * tp + fp + fn
    f1 = np.divide(2 * tp, denom, out=np.zeros_like(tp), where=denom > 0)
    return Metrics(
        accuracy=float(tp.sum() / len(gold)),
        macro_f1=float(f1.mean()),
        per_class_f1={p: float(v) for p, v in zip(POLARITIES, f1)},
        n_examples=len(gold),
    )
