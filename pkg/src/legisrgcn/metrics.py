"""Shared classification metrics so model and baselines are comparable."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class EmptySplit(Exception):
    pass


@dataclass(frozen=True)
class ClassReport:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class F1Report:
    f1: float  # binary F1 on the positive class (primary figure)
    macro_f1: float
    per_class: dict[int, ClassReport]


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (
        2 * precision * recall / (precision + recall) if precision + recall else 0.0
    )
    return precision, recall, f1


def f1_report(
    y_true: Sequence[int], y_pred: Sequence[int], positive: int = 1
) -> F1Report:
    if not y_true:
        raise EmptySplit("no examples to evaluate")
    if len(y_true) != len(y_pred):
        raise ValueError("length mismatch")
    per_class: dict[int, ClassReport] = {}
    f1s = []
    for cls in (positive, 1 - positive):
        tp = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p == cls)
        fp = sum(1 for t, p in zip(y_true, y_pred) if t != cls and p == cls)
        fn = sum(1 for t, p in zip(y_true, y_pred) if t == cls and p != cls)
        precision, recall, f1 = _prf(tp, fp, fn)
        per_class[cls] = ClassReport(
            precision, recall, f1, sum(1 for t in y_true if t == cls)
        )
        f1s.append(f1)
    return F1Report(f1=f1s[0], macro_f1=sum(f1s) / len(f1s), per_class=per_class)
