"""Supervised shallow baseline: logistic regression over token counts.

The feature space is a deterministic bag-of-words: the vocabulary keeps
the top-cap tokens by total corpus frequency (ties broken
lexicographically) and rows carry raw term-frequency counts. A
fine-tuned MLM baseline is out of scope here; ``SupervisedBaseline`` is
the interface such a model would plug into.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np
from scipy import sparse
from sklearn.linear_model import LogisticRegression

from .corpus import Corpus
from .masking import tokenize


class BaselineError(ValueError):
    """Invalid baseline configuration or training input."""


@dataclass(frozen=True)
class LrBaselineConfig:
    """Pinned solver/feature settings so runs are reproducible.

    ``regularization`` follows the sklearn convention (inverse strength).
    ``split_fraction``/``split_seed`` govern the per-dataset train/test
    partition used by benchmark runs.
    """

    vocabulary_cap: int = 20_000
    regularization: float = 1.0
    max_iterations: int = 1_000
    split_fraction: float = 0.2
    split_seed: int = 13

    def __post_init__(self):
        if self.vocabulary_cap < 1:
            raise BaselineError(f"vocabulary_cap must be >= 1, got {self.vocabulary_cap}")


def _text_tokens(text: str) -> list[str]:
    return [t.core for t in tokenize(text) if t.core]


def build_vocabulary(texts: Sequence[str], cap: int) -> list[str]:
    counts = Counter()
    for text in texts:
        counts.update(_text_tokens(text))
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [token for token, _ in ranked[:cap]]


def vectorize(
    texts: Sequence[str],
    config: LrBaselineConfig = LrBaselineConfig(),
    vocabulary: Sequence[str] | None = None,
) -> tuple[sparse.csr_matrix, list[str]]:
    """Document-term count matrix with rows aligned to ``texts``.

    Without an explicit vocabulary one is built from the texts themselves.
    """
    if not texts:
        raise BaselineError("vectorize needs at least one text")
    vocab = list(vocabulary) if vocabulary is not None else build_vocabulary(
        texts, config.vocabulary_cap
    )
    index = {token: i for i, token in enumerate(vocab)}
    matrix = sparse.lil_matrix((len(texts), len(vocab)), dtype=np.float64)
    for row, text in enumerate(texts):
        for token, count in Counter(_text_tokens(text)).items():
            col = index.get(token)
            if col is not None:
                matrix[row, col] = count
    return matrix.tocsr(), vocab


@runtime_checkable
class SupervisedBaseline(Protocol):
    """Trained per-dataset classifier usable as a benchmark column."""

    baseline_id: str

    def predict(self, texts: Sequence[str]) -> list[str]: ...


class LrBaseline:
    baseline_id = "lr"

    def __init__(self, model: LogisticRegression, vocabulary: list[str], config: LrBaselineConfig):
        self._model = model
        self.vocabulary = vocabulary
        self.config = config

    def predict(self, texts: Sequence[str]) -> list[str]:
        features, _ = vectorize(texts, self.config, vocabulary=self.vocabulary)
        return [str(label) for label in self._model.predict(features)]


def train_lr_baseline(
    train: Corpus, config: LrBaselineConfig = LrBaselineConfig()
) -> LrBaseline:
    labels = train.gold_labels()
    if len(set(labels)) < 2:
        raise BaselineError(
            f"training corpus has a single class {set(labels)}; need at least two"
        )
    features, vocabulary = vectorize(train.texts(), config)
    model = LogisticRegression(
        C=config.regularization,
        max_iter=config.max_iterations,
        random_state=0,
    )
    model.fit(features, labels)
    return LrBaseline(model, vocabulary, config)
