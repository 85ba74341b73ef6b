from __future__ import annotations

import random
from pathlib import Path

import pytest

from sudkit.corpus import Corpus, DatasetSchema, TextRecord
from sudkit.masking import load_embeddings

DATA_DIR = Path(__file__).parent / "data"

# Word pools with disjoint vocabulary per class, handy for synthetic corpora.
CLASS_WORDS = {
    "hate": ["slur", "vile", "despise", "loathe", "attack", "enemy"],
    "offensive": ["rude", "crude", "insult", "mock", "jeer", "sneer"],
    "neither": ["sunny", "coffee", "music", "garden", "friendly", "walk"],
    "aggressive": ["shove", "threat", "fight", "slam", "bully", "rage"],
}


def make_synth_corpus(
    dataset_id: str,
    per_label: dict[str, int],
    seed: int = 0,
    words: dict[str, list[str]] | None = None,
) -> Corpus:
    """Synthetic corpus with per-class token pools (disjoint by default)."""
    rng = random.Random(seed)
    pools = words or CLASS_WORDS
    records = []
    index = 0
    for label, count in per_label.items():
        pool = pools[label]
        for _ in range(count):
            text = " ".join(rng.choice(pool) for _ in range(rng.randint(4, 8)))
            records.append(
                TextRecord(
                    id=f"{dataset_id}-{index}",
                    text=text,
                    gold_label=label,
                    dataset_id=dataset_id,
                )
            )
            index += 1
    schema = DatasetSchema(
        dataset_id=dataset_id,
        label_set=tuple(per_label),
        source_format="jsonl",
    )
    return Corpus(schema=schema, records=tuple(records))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def toy_table():
    return load_embeddings(DATA_DIR / "toy_vectors.txt")
