"""Per-class precision/recall/F1 and macro-F1 report assembly.

All scores live in [0, 1]; table rendering (percentages, one decimal)
is left to the presentation layer. Degenerate denominators score 0,
which penalizes classes that are never predicted.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping, Sequence


class MetricsError(ValueError):
    """Malformed input to a scoring function."""


@dataclass(frozen=True)
class ClassCounts:
    true_positives: int
    false_positives: int
    false_negatives: int

    def __post_init__(self):
        for name in ("true_positives", "false_positives", "false_negatives"):
            if getattr(self, name) < 0:
                raise MetricsError(f"{name} must be non-negative")


@dataclass(frozen=True)
class ConfusionCounts:
    """One-vs-rest counts per class, tallied from a prediction/gold pairing."""

    per_class: Mapping[str, ClassCounts]
    total: int

    @classmethod
    def from_pairs(
        cls,
        predictions: Sequence[str],
        gold: Sequence[str],
        label_set: Sequence[str],
    ) -> "ConfusionCounts":
        if len(predictions) != len(gold):
            raise MetricsError(
                f"length mismatch: {len(predictions)} predictions vs {len(gold)} gold"
            )
        known = set(label_set)
        for i, (pred, truth) in enumerate(zip(predictions, gold)):
            if pred not in known:
                raise MetricsError(f"prediction {pred!r} at index {i} not in label set")
            if truth not in known:
                raise MetricsError(f"gold label {truth!r} at index {i} not in label set")
        per_class = {}
        for label in label_set:
            tp = fp = fn = 0
            for pred, truth in zip(predictions, gold):
                if pred == label and truth == label:
                    tp += 1
                elif pred == label:
                    fp += 1
                elif truth == label:
                    fn += 1
            per_class[label] = ClassCounts(tp, fp, fn)
        return cls(per_class=per_class, total=len(predictions))


def _counts_for(counts: ConfusionCounts, label: str) -> ClassCounts:
    try:
        return counts.per_class[label]
    except KeyError:
        raise MetricsError(f"unknown class {label!r}") from None


def precision(counts: ConfusionCounts, label: str) -> float:
    c = _counts_for(counts, label)
    denom = c.true_positives + c.false_positives
    return c.true_positives / denom if denom else 0.0


def recall(counts: ConfusionCounts, label: str) -> float:
    c = _counts_for(counts, label)
    denom = c.true_positives + c.false_negatives
    return c.true_positives / denom if denom else 0.0


def f1(p: float, r: float) -> float:
    if not (0.0 <= p <= 1.0 and 0.0 <= r <= 1.0):
        raise MetricsError(f"precision/recall out of [0,1]: p={p}, r={r}")
    return 2 * p * r / (p + r) if p + r else 0.0


def macro_f1(per_class_f1: Sequence[float]) -> float:
    if not per_class_f1:
        raise MetricsError("macro F1 of an empty class list is undefined")
    return sum(per_class_f1) / len(per_class_f1)


@dataclass(frozen=True)
class PerClassMetrics:
    label: str
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    """Per-class P/R/F1 plus macro F1 for one run configuration."""

    label_set: tuple[str, ...]
    per_class: tuple[PerClassMetrics, ...]
    macro_f1: float
    config_fingerprint: str = ""

    def to_dict(self) -> dict:
        return {
            "label_set": list(self.label_set),
            "per_class": [
                {
                    "label": m.label,
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                }
                for m in self.per_class
            ],
            "macro_f1": self.macro_f1,
            "config_fingerprint": self.config_fingerprint,
        }

    @classmethod
    def from_dict(cls, payload: Mapping) -> "EvalReport":
        return cls(
            label_set=tuple(payload["label_set"]),
            per_class=tuple(
                PerClassMetrics(m["label"], m["precision"], m["recall"], m["f1"])
                for m in payload["per_class"]
            ),
            macro_f1=payload["macro_f1"],
            config_fingerprint=payload.get("config_fingerprint", ""),
        )


def evaluate(
    predictions: Sequence[str],
    gold: Sequence[str],
    label_set: Sequence[str],
    config_fingerprint: str = "",
) -> EvalReport:
    """Score predictions against gold over the full label set.

    The macro average runs over every class in ``label_set``, including
    classes that never occur in the gold labels or the predictions.
    """
    if not predictions:
        raise MetricsError("empty prediction list")
    counts = ConfusionCounts.from_pairs(predictions, gold, label_set)
    per_class = []
    for label in label_set:
        p = precision(counts, label)
        r = recall(counts, label)
        per_class.append(PerClassMetrics(label, p, r, f1(p, r)))
    return EvalReport(
        label_set=tuple(label_set),
        per_class=tuple(per_class),
        macro_f1=macro_f1([m.f1 for m in per_class]),
        config_fingerprint=config_fingerprint,
    )


def config_fingerprint(**fields) -> str:
    """Stable hex id for a run configuration (dataset, backend, template, ...)."""
    canonical = json.dumps(fields, sort_keys=True, ensure_ascii=False, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
