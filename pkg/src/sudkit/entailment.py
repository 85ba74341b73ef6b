"""Premise/hypothesis entailment scoring and class distributions.

A backend scores (premise, hypothesis) pairs into per-pair NLI
probabilities plus the raw entailment logit. Classification couples one
premise with one hypothesis per candidate label and turns the per-pair
entailment scores into a normalized distribution.

Two normalization modes:

``softmax`` (default)
    Cross-candidate softmax over the per-pair raw entailment logits.
    Falls back to log-probabilities when a backend reports no logits,
    which reduces to proportional renormalization of the entailment
    probabilities.
``independent``
    Per-pair entailment-vs-contradiction probability, then sum-normalized
    so the distribution invariant still holds; the raw per-pair values are
    kept for multi-label readings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, runtime_checkable

from .templates import CandidateLabelSet, HypothesisTemplate, instantiate

NORMALIZATION_MODES = ("softmax", "independent")

_PROB_TOLERANCE = 1e-6
_LOG_FLOOR = 1e-300


class EntailmentError(ValueError):
    """Invalid scoring input or configuration."""


class BackendError(RuntimeError):
    """A backend failed to produce scores (model missing, endpoint down...)."""


@dataclass(frozen=True)
class NliScore:
    """Per-pair softmax probabilities, plus the raw entailment logit if known."""

    entailment: float
    neutral: float
    contradiction: float
    entail_logit: float | None = None

    def __post_init__(self):
        for name in ("entailment", "neutral", "contradiction"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise EntailmentError(f"{name} probability out of [0,1]: {value}")
        total = self.entailment + self.neutral + self.contradiction
        if abs(total - 1.0) > _PROB_TOLERANCE:
            raise EntailmentError(f"probabilities sum to {total}, expected 1")

    @classmethod
    def from_logits(
        cls, entailment: float, neutral: float, contradiction: float
    ) -> "NliScore":
        probs = softmax([entailment, neutral, contradiction])
        return cls(probs[0], probs[1], probs[2], entail_logit=entailment)

    @classmethod
    def uniform(cls) -> "NliScore":
        return cls(1 / 3, 1 / 3, 1 / 3)

    @property
    def logit(self) -> float:
        """Raw entailment logit, or log-probability when none was reported."""
        if self.entail_logit is not None:
            return self.entail_logit
        return math.log(max(self.entailment, _LOG_FLOOR))

    def to_dict(self) -> dict:
        return {
            "entailment": self.entailment,
            "neutral": self.neutral,
            "contradiction": self.contradiction,
            "entail_logit": self.entail_logit,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "NliScore":
        return cls(
            entailment=payload["entailment"],
            neutral=payload["neutral"],
            contradiction=payload["contradiction"],
            entail_logit=payload.get("entail_logit"),
        )


@runtime_checkable
class EntailmentBackend(Protocol):
    """Anything that can score batches of (premise, hypothesis) pairs.

    Scoring must be deterministic for fixed inputs, and batch scoring must
    equal elementwise pair scoring. ``max_in_flight`` bounds how many
    batches callers may keep outstanding concurrently.
    """

    backend_id: str
    max_premise_length: int
    mask_symbol: str
    batch_size: int
    max_in_flight: int

    def score_batch(
        self, pairs: Sequence[tuple[str, str]]
    ) -> list[NliScore]: ...


def softmax(values: Sequence[float]) -> list[float]:
    peak = max(values)
    exps = [math.exp(v - peak) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def score_pair(
    backend: EntailmentBackend, premise: str, hypothesis: str
) -> NliScore:
    """Score one pair; the backend applies its own premise truncation."""
    if not premise.strip():
        raise EntailmentError("premise must be non-empty")
    if not hypothesis.strip():
        raise EntailmentError("hypothesis must be non-empty")
    return backend.score_batch([(premise, hypothesis)])[0]


@dataclass(frozen=True)
class ClassDistribution:
    """Normalized per-candidate-label probabilities for one premise."""

    labels: tuple[str, ...]
    probabilities: tuple[float, ...]
    predicted: str
    raw_entailment: tuple[float, ...]

    def __post_init__(self):
        if len(self.probabilities) != len(self.labels) or len(
            self.raw_entailment
        ) != len(self.labels):
            raise EntailmentError("labels/probabilities/raw_entailment lengths differ")
        for p in self.probabilities:
            if not 0.0 <= p <= 1.0:
                raise EntailmentError(f"probability out of [0,1]: {p}")
        total = sum(self.probabilities)
        if abs(total - 1.0) > _PROB_TOLERANCE:
            raise EntailmentError(f"probabilities sum to {total}, expected 1")
        expected = self.labels[_argmax_first(self.probabilities)]
        if self.predicted != expected:
            raise EntailmentError(
                f"predicted {self.predicted!r} is not the first argmax {expected!r}"
            )

    def probability_of(self, label: str) -> float:
        return self.probabilities[self.labels.index(label)]

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "probabilities": list(self.probabilities),
            "predicted": self.predicted,
            "raw_entailment": list(self.raw_entailment),
        }


def _argmax_first(values: Sequence[float]) -> int:
    return max(range(len(values)), key=lambda i: (values[i], -i))


def _distribution(
    scores: Sequence[NliScore],
    labels: CandidateLabelSet,
    normalization: str,
) -> ClassDistribution:
    if normalization not in NORMALIZATION_MODES:
        raise EntailmentError(
            f"normalization must be one of {NORMALIZATION_MODES}, got {normalization!r}"
        )
    if normalization == "softmax":
        raw = [s.logit for s in scores]
        probs = softmax(raw)
    else:
        raw = []
        for s in scores:
            binary = s.entailment + s.contradiction
            raw.append(s.entailment / binary if binary > 0.0 else 0.0)
        total = sum(raw)
        probs = [r / total for r in raw] if total > 0.0 else [1 / len(raw)] * len(raw)
    return ClassDistribution(
        labels=labels.labels,
        probabilities=tuple(probs),
        predicted=labels.labels[_argmax_first(probs)],
        raw_entailment=tuple(raw),
    )


# Maps (premise, label surface form) to the premise variant scored for that
# candidate, e.g. a per-label token-masked copy.
PremiseMasker = Callable[[str, str], str]


def classify(
    backend: EntailmentBackend,
    premise: str,
    template: HypothesisTemplate | str,
    labels: CandidateLabelSet,
    *,
    normalization: str = "softmax",
    masker: PremiseMasker | None = None,
) -> ClassDistribution:
    """Couple the premise with one hypothesis per candidate label and score."""
    if not premise.strip():
        raise EntailmentError("premise must be non-empty")
    pairs = []
    for label in labels.labels:
        surface = labels.surface(label)
        staged = masker(premise, surface) if masker else premise
        pairs.append((staged, instantiate(template, surface)))
    scores = backend.score_batch(pairs)
    return _distribution(scores, labels, normalization)


def classify_batch(
    backend: EntailmentBackend,
    premises: Sequence[str],
    template: HypothesisTemplate | str,
    labels: CandidateLabelSet,
    *,
    normalization: str = "softmax",
    masker: PremiseMasker | None = None,
    return_exceptions: bool = False,
) -> list[ClassDistribution | Exception]:
    """Order-preserving batched classification, elementwise equal to classify.

    With ``return_exceptions`` a failing item keeps its slot (holding the
    exception) instead of aborting the batch; otherwise the first failure
    propagates.
    """
    hypotheses = [instantiate(template, labels.surface(l)) for l in labels.labels]
    surfaces = [labels.surface(l) for l in labels.labels]
    n_labels = len(labels.labels)

    results: list[ClassDistribution | Exception | None] = [None] * len(premises)
    pairs: list[tuple[str, str]] = []
    owners: list[int] = []
    for i, premise in enumerate(premises):
        if not premise.strip():
            error = EntailmentError(f"premise at index {i} is empty")
            if not return_exceptions:
                raise error
            results[i] = error
            continue
        for surface, hypothesis in zip(surfaces, hypotheses):
            staged = masker(premise, surface) if masker else premise
            pairs.append((staged, hypothesis))
            owners.append(i)

    scores: list[NliScore | Exception | None] = [None] * len(pairs)
    chunk_size = max(1, getattr(backend, "batch_size", 16))
    for start in range(0, len(pairs), chunk_size):
        chunk = pairs[start : start + chunk_size]
        try:
            out = backend.score_batch(chunk)
            scores[start : start + len(chunk)] = list(out)
        except Exception:
            # Isolate the failure: retry the chunk one pair at a time.
            for offset, pair in enumerate(chunk):
                try:
                    scores[start + offset] = backend.score_batch([pair])[0]
                except Exception as exc:
                    scores[start + offset] = exc

    by_owner: dict[int, list[NliScore | Exception]] = {}
    for owner, score in zip(owners, scores):
        by_owner.setdefault(owner, []).append(score)
    for i, item_scores in by_owner.items():
        failure = next((s for s in item_scores if isinstance(s, Exception)), None)
        if failure is not None:
            if not return_exceptions:
                raise failure
            results[i] = failure
            continue
        assert len(item_scores) == n_labels
        results[i] = _distribution(item_scores, labels, normalization)
    return results  # type: ignore[return-value]
