"""Embedding-similarity token masking.

Premise tokens whose static-embedding cosine similarity to the candidate
class name is high get replaced by a mask symbol, forcing classification
to rely on the remaining context instead of class-stereotypical words.

Tokenizer contract (bit-exact, so other implementations can match it):
  1. split the text on runs of whitespace;
  2. each piece keeps its raw surface form for reassembly;
  3. the lookup key is the piece with leading/trailing characters of
     Unicode category P* (punctuation) stripped, then lowercased.
Masked pieces are replaced wholesale by the mask symbol; everything else
is reassembled byte-identical, joined with single spaces. Tokens without
a vector (or when the whole label phrase is out of vocabulary) are never
masked: there is no similarity evidence for them.
"""

from __future__ import annotations

import math
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

DEFAULT_MASK_SYMBOL = "[MASK]"


class MaskingError(ValueError):
    """Invalid masking policy or embedding input."""


@dataclass(frozen=True)
class Token:
    raw: str
    core: str  # lowercased, punctuation-stripped lookup key ("" if none left)


def _strip_punctuation(piece: str) -> str:
    start, end = 0, len(piece)
    while start < end and unicodedata.category(piece[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(piece[end - 1]).startswith("P"):
        end -= 1
    return piece[start:end]


def tokenize(text: str) -> list[Token]:
    return [Token(raw=p, core=_strip_punctuation(p).lower()) for p in text.split()]


@dataclass(frozen=True)
class EmbeddingTable:
    """Static word vectors with case-folded lookup."""

    dimension: int
    vectors: Mapping[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.vectors)

    def lookup(self, token: str) -> np.ndarray | None:
        return self.vectors.get(token.lower())

    def __contains__(self, token: str) -> bool:
        return token.lower() in self.vectors


@dataclass(frozen=True)
class EmbeddingLoadReport:
    lines_read: int
    tokens_loaded: int
    rejected: int


def load_embeddings(path: str | Path) -> EmbeddingTable:
    table, _ = load_embeddings_with_report(path)
    return table


def load_embeddings_with_report(
    path: str | Path,
) -> tuple[EmbeddingTable, EmbeddingLoadReport]:
    """Parse a text-format vector file: token then space-separated floats.

    Dimensionality is inferred from the first parseable line; lines with a
    different component count (or unparseable components) are rejected and
    counted. Duplicate tokens keep their first occurrence.
    """
    path = Path(path)
    if not path.exists():
        raise MaskingError(f"embedding file not found: {path}")
    vectors: dict[str, np.ndarray] = {}
    dimension: int | None = None
    lines_read = 0
    rejected = 0
    with path.open(encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            lines_read += 1
            parts = line.split(" ")
            token, components = parts[0], parts[1:]
            try:
                values = np.asarray([float(c) for c in components], dtype=np.float64)
            except ValueError:
                rejected += 1
                continue
            if len(values) == 0:
                rejected += 1
                continue
            if dimension is None:
                dimension = len(values)
            if len(values) != dimension:
                rejected += 1
                continue
            key = token.lower()
            if key in vectors:
                rejected += 1
                continue
            vectors[key] = values
    if dimension is None or not vectors:
        raise MaskingError(f"{path}: no valid embedding lines")
    table = EmbeddingTable(dimension=dimension, vectors=vectors)
    return table, EmbeddingLoadReport(lines_read, len(vectors), rejected)


def label_vector(table: EmbeddingTable, label_phrase: str) -> np.ndarray | None:
    """Mean of the in-vocabulary vectors of a (possibly multi-word) label."""
    found = [
        vec
        for token in tokenize(label_phrase)
        if token.core and (vec := table.lookup(token.core)) is not None
    ]
    if not found:
        return None
    return np.mean(found, axis=0)


def _cosine(a: np.ndarray, b: np.ndarray) -> float | None:
    norm = math.sqrt(float(a @ a)) * math.sqrt(float(b @ b))
    if norm == 0.0:
        return None
    return float(a @ b) / norm


def similarity(table: EmbeddingTable, token: str, label_phrase: str) -> float | None:
    """Cosine between a token vector and the label-phrase mean, if both exist."""
    key = _strip_punctuation(token).lower()
    vec = table.lookup(key) if key else None
    if vec is None:
        return None
    label_vec = label_vector(table, label_phrase)
    if label_vec is None:
        return None
    return _cosine(vec, label_vec)


@dataclass(frozen=True)
class MaskingPolicy:
    """Which tokens qualify for masking and how many may be replaced.

    ``threshold`` mode masks tokens with similarity >= tau (values above 1
    therefore mask nothing); ``top_k`` masks the k most similar. Either
    way at most ceil(max_fraction * token_count) tokens are replaced,
    highest similarity first.
    """

    mode: str = "threshold"
    tau: float = 0.4
    k: int = 0
    max_fraction: float = 0.5
    mask_symbol: str = DEFAULT_MASK_SYMBOL

    def __post_init__(self):
        if self.mode not in ("threshold", "top_k"):
            raise MaskingError(f"mode must be threshold or top_k, got {self.mode!r}")
        if self.tau < -1.0:
            raise MaskingError(f"tau must be >= -1, got {self.tau}")
        if self.k < 0:
            raise MaskingError(f"k must be >= 0, got {self.k}")
        if not 0.0 < self.max_fraction <= 1.0:
            raise MaskingError(f"max_fraction must be in (0,1], got {self.max_fraction}")
        if not self.mask_symbol:
            raise MaskingError("mask_symbol must be non-empty")


@dataclass(frozen=True)
class MaskResult:
    masked_text: str
    masked_positions: tuple[int, ...]
    similarities: tuple[float | None, ...] = field(default=(), compare=False)
    tokens: tuple[str, ...] = field(default=(), compare=False)


def mask_text(
    text: str,
    label_phrase: str,
    table: EmbeddingTable,
    policy: MaskingPolicy,
) -> MaskResult:
    """Replace the tokens most similar to the label phrase by the mask symbol.

    Token count is always preserved; unmasked tokens pass through
    byte-identical and the result joins tokens with single spaces.
    """
    tokens = tokenize(text)
    label_vec = label_vector(table, label_phrase)
    sims: list[float | None] = []
    for token in tokens:
        vec = table.lookup(token.core) if token.core else None
        if vec is None or label_vec is None:
            sims.append(None)
        else:
            sims.append(_cosine(vec, label_vec))

    scored = [(s, i) for i, s in enumerate(sims) if s is not None]
    if policy.mode == "threshold":
        qualifying = [(s, i) for s, i in scored if s >= policy.tau]
    else:
        qualifying = sorted(scored, key=lambda si: (-si[0], si[1]))[: policy.k]

    cap = math.ceil(policy.max_fraction * len(tokens)) if tokens else 0
    chosen = sorted(qualifying, key=lambda si: (-si[0], si[1]))[:cap]
    masked_positions = tuple(sorted(i for _, i in chosen))

    masked = set(masked_positions)
    pieces = [
        policy.mask_symbol if i in masked else token.raw
        for i, token in enumerate(tokens)
    ]
    return MaskResult(
        masked_text=" ".join(pieces),
        masked_positions=masked_positions,
        similarities=tuple(sims),
        tokens=tuple(t.raw for t in tokens),
    )
