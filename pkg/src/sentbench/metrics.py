"""Evaluation measures: classification accuracy, Pearson correlation and a
majority-class reference baseline."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError


@dataclass(frozen=True)
class EvalResult:
    task_name: str
    method_name: str
    measure: str  # "accuracy" | "pearson"
    value: float
    n: int

    def __post_init__(self):
        if self.measure == "accuracy" and not 0.0 <= self.value <= 1.0:
            raise ValueError("accuracy outside [0, 1]")
        if self.measure == "pearson" and not -1.0 <= self.value <= 1.0:
            raise ValueError("pearson outside [-1, 1]")
        if self.n < 1:
            raise ValueError("n must be at least 1")


def accuracy(pred: Sequence, gold: Sequence) -> float:
    """Fraction of positions where prediction equals gold."""
    if len(pred) != len(gold):
        raise ValueError("pred and gold must have equal length")
    if len(gold) == 0:
        raise ValueError("empty sequences")
    return sum(p == g for p, g in zip(pred, gold)) / len(gold)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation (n-1 convention). Constant inputs raise
    DegenerateInputError so a collapsed predictor is diagnosed, never scored."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    n = len(x)
    if n < 2:
        raise ValueError("need at least 2 points")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.sqrt((dx @ dx) / (n - 1))
    sy = np.sqrt((dy @ dy) / (n - 1))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateInputError("zero variance input to pearson")
    r = (dx @ dy) / ((n - 1) * sx * sy)
    return float(np.clip(r, -1.0, 1.0))


def majority_baseline(gold: Sequence) -> float:
    """Accuracy of always predicting the most common gold label."""
    if len(gold) == 0:
        raise ValueError("empty sequence")
    (_, count), = Counter(gold).most_common(1)
    return count / len(gold)
