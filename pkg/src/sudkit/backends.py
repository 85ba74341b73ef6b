"""Backend adapters: deterministic stubs, in-process checkpoints, remote APIs.

The full test suite runs on the stub; real NLI checkpoints load lazily so
nothing pulls multi-GB downloads at import time.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence

import yaml

from .cache import ScoreCache
from .entailment import BackendError, EntailmentError, NliScore

ADAPTERS = ("stub", "transformers", "remote")


@dataclass(frozen=True)
class BackendConfig:
    """Declarative description of one scoring backend.

    ``max_premise_length`` is the token budget for a scored pair; the
    premise is trimmed from its tail to fit (hypotheses are short and are
    never truncated).
    """

    backend_id: str
    adapter: str = "stub"
    checkpoint: str = ""
    endpoint: str = ""
    max_premise_length: int = 512
    batch_size: int = 16
    mask_symbol: str = "[MASK]"
    normalization: str = "softmax"
    max_in_flight: int = 1

    def __post_init__(self):
        if self.adapter not in ADAPTERS:
            raise EntailmentError(
                f"{self.backend_id}: adapter {self.adapter!r} not one of {ADAPTERS}"
            )


def load_backend_configs(path: str | Path | None = None) -> dict[str, BackendConfig]:
    """Built-in backend roster, optionally extended/overridden by a config file."""
    text = resources.files("sudkit").joinpath("backends.yaml").read_text("utf-8")
    entries = yaml.safe_load(text)
    if path is not None:
        entries.extend(yaml.safe_load(Path(path).read_text("utf-8")) or [])
    configs: dict[str, BackendConfig] = {}
    for entry in entries:
        config = BackendConfig(**entry)
        configs[config.backend_id] = config
    return configs


class StubBackend:
    """Deterministic model-free backend for tests and offline runs.

    Scores come from an explicit rule table when the pair matches,
    otherwise from the default score; with a seed set, unmatched pairs get
    stable pseudo-random scores derived from a SHA-256 of
    (seed, premise, hypothesis), identical across processes.
    """

    def __init__(
        self,
        rules: Mapping[tuple[str, str], NliScore] | None = None,
        default: NliScore | None = None,
        seed: int | None = None,
        backend_id: str = "stub",
        mask_symbol: str = "[MASK]",
    ):
        self.rules = dict(rules or {})
        self.default = default
        self.seed = seed
        if default is None and seed is None and not self.rules:
            self.default = NliScore.uniform()
        self.backend_id = backend_id
        self.max_premise_length = 512
        self.mask_symbol = mask_symbol
        self.batch_size = 64
        self.max_in_flight = 4
        self.ready = True

    def _hashed_score(self, premise: str, hypothesis: str) -> NliScore:
        digest = hashlib.sha256(
            f"{self.seed}\x1e{premise}\x1e{hypothesis}".encode("utf-8")
        ).digest()
        logits = [
            int.from_bytes(digest[i : i + 4], "big") / 0xFFFFFFFF * 8.0 - 4.0
            for i in (0, 4, 8)
        ]
        return NliScore.from_logits(*logits)

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NliScore]:
        scores = []
        for premise, hypothesis in pairs:
            if (premise, hypothesis) in self.rules:
                scores.append(self.rules[(premise, hypothesis)])
            elif self.seed is not None:
                scores.append(self._hashed_score(premise, hypothesis))
            elif self.default is not None:
                scores.append(self.default)
            else:
                raise BackendError(
                    f"stub has no rule for pair ({premise!r}, {hypothesis!r}) "
                    "and no default"
                )
        return scores


def stub_backend(
    rule_table: Mapping[tuple[str, str], NliScore] | None = None,
    default: NliScore | None = None,
    seed: int | None = None,
) -> StubBackend:
    """Lookup-or-default stub; see StubBackend."""
    return StubBackend(rules=rule_table, default=default, seed=seed)


class OracleBackend(StubBackend):
    """Stub that entails exactly the hypothesis naming each premise's gold class.

    ``gold`` maps premise text to the surface phrase of its correct label;
    a hypothesis containing that phrase scores high entailment, everything
    else low. Callers must pick surface phrases that do not contain each
    other.
    """

    def __init__(self, gold: Mapping[str, str], backend_id: str = "oracle"):
        super().__init__(default=NliScore.uniform(), backend_id=backend_id)
        self.gold = dict(gold)

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NliScore]:
        scores = []
        for premise, hypothesis in pairs:
            phrase = self.gold.get(premise)
            if phrase is None:
                scores.append(NliScore.uniform())
            elif phrase in hypothesis:
                scores.append(NliScore.from_logits(8.0, 0.0, 0.0))
            else:
                scores.append(NliScore.from_logits(-8.0, 0.0, 0.0))
        return scores


class TransformersBackend:
    """In-process scorer over a pre-trained NLI sequence-classification checkpoint."""

    def __init__(self, config: BackendConfig, device: str = "cpu"):
        if not config.checkpoint:
            raise EntailmentError(f"{config.backend_id}: checkpoint is required")
        self.config = config
        self.backend_id = config.backend_id
        self.max_premise_length = config.max_premise_length
        self.mask_symbol = config.mask_symbol
        self.batch_size = config.batch_size
        self.max_in_flight = config.max_in_flight
        self.device = device
        self._model = None
        self._tokenizer = None
        self._indices: tuple[int, int, int] | None = None
        self._lock = threading.Lock()

    @property
    def ready(self) -> bool:
        return self._model is not None

    def load(self) -> None:
        with self._lock:
            if self._model is not None:
                return
            try:
                import torch  # noqa: F401
                from transformers import (
                    AutoModelForSequenceClassification,
                    AutoTokenizer,
                )
            except ImportError as exc:
                raise BackendError(
                    f"{self.backend_id}: transformers/torch not installed "
                    "(install the 'models' extra)"
                ) from exc
            try:
                tokenizer = AutoTokenizer.from_pretrained(self.config.checkpoint)
                model = AutoModelForSequenceClassification.from_pretrained(
                    self.config.checkpoint
                )
            except Exception as exc:
                raise BackendError(
                    f"{self.backend_id}: cannot load checkpoint "
                    f"{self.config.checkpoint!r}: {exc}"
                ) from exc
            model.eval()
            model.to(self.device)
            self._indices = self._label_indices(model.config)
            if getattr(tokenizer, "mask_token", None):
                self.mask_symbol = tokenizer.mask_token
            self._tokenizer = tokenizer
            self._model = model

    @staticmethod
    def _label_indices(model_config) -> tuple[int, int, int]:
        """(entailment, neutral, contradiction) positions in the logit vector."""
        found = {}
        for name, index in model_config.label2id.items():
            lowered = name.lower()
            for key in ("entail", "neutral", "contradict"):
                if key in lowered:
                    found[key] = int(index)
        if set(found) != {"entail", "neutral", "contradict"}:
            raise BackendError(
                f"cannot locate entailment/neutral/contradiction in label2id "
                f"{model_config.label2id}"
            )
        return found["entail"], found["neutral"], found["contradict"]

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NliScore]:
        if not self.ready:
            self.load()
        import torch

        premises = [p for p, _ in pairs]
        hypotheses = [h for _, h in pairs]
        encoded = self._tokenizer(
            premises,
            hypotheses,
            truncation="only_first",
            max_length=self.max_premise_length,
            padding=True,
            return_tensors="pt",
        ).to(self.device)
        with torch.no_grad():
            logits = self._model(**encoded).logits
        probs = torch.softmax(logits, dim=-1)
        e, n, c = self._indices
        scores = []
        for row_probs, row_logits in zip(probs, logits):
            scores.append(
                NliScore(
                    entailment=float(row_probs[e]),
                    neutral=float(row_probs[n]),
                    contradiction=float(row_probs[c]),
                    entail_logit=float(row_logits[e]),
                )
            )
        return scores


class RemoteBackend:
    """Client for a remote scoring endpoint speaking the pair-score wire format.

    POST <endpoint>/score with {"pairs": [["premise", "hypothesis"], ...]}
    expecting {"scores": [{"entailment": ..., "neutral": ...,
    "contradiction": ..., "entail_logit": ...}, ...]}.
    """

    def __init__(
        self,
        config: BackendConfig,
        timeout: float = 30.0,
        retries: int = 3,
        backoff: float = 0.2,
        client=None,
    ):
        if not config.endpoint:
            raise EntailmentError(f"{config.backend_id}: endpoint is required")
        self.config = config
        self.backend_id = config.backend_id
        self.max_premise_length = config.max_premise_length
        self.mask_symbol = config.mask_symbol
        self.batch_size = config.batch_size
        self.max_in_flight = config.max_in_flight
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._client = client  # injectable for tests; defaults to module httpx
        self.ready = True

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NliScore]:
        import time

        import httpx

        poster = self._client if self._client is not None else httpx
        url = self.config.endpoint.rstrip("/") + "/score"
        body = {"pairs": [[p, h] for p, h in pairs]}
        last_error: Exception | None = None
        for attempt in range(self.retries):
            try:
                response = poster.post(url, json=body, timeout=self.timeout)
                if response.status_code >= 500:
                    raise BackendError(
                        f"{self.backend_id}: {url} returned {response.status_code}"
                    )
                response.raise_for_status()
                payload = response.json()
                scores = [NliScore.from_dict(s) for s in payload["scores"]]
                if len(scores) != len(pairs):
                    raise BackendError(
                        f"{self.backend_id}: expected {len(pairs)} scores, "
                        f"got {len(scores)}"
                    )
                return scores
            except (httpx.HTTPError, BackendError, KeyError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    time.sleep(self.backoff * 2**attempt)
        raise BackendError(
            f"{self.backend_id}: remote scoring failed after {self.retries} "
            f"attempts: {last_error}"
        )


class CachedBackend:
    """Wraps a backend with the persistent score cache; counts hits/misses."""

    def __init__(self, inner, cache: ScoreCache):
        self.inner = inner
        self.cache = cache
        self.hits = 0
        self.misses = 0

    def __getattr__(self, name):
        return getattr(self.inner, name)

    @property
    def hit_rate(self) -> float:
        total = self.hits + self.misses
        return self.hits / total if total else 0.0

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[NliScore]:
        backend_id = self.inner.backend_id
        scores: list[NliScore | None] = []
        missing: list[tuple[str, str]] = []
        for premise, hypothesis in pairs:
            cached = self.cache.get(backend_id, premise, hypothesis)
            if cached is None:
                missing.append((premise, hypothesis))
            scores.append(cached)
        self.hits += len(pairs) - len(missing)
        self.misses += len(missing)
        if missing:
            fresh = iter(self.inner.score_batch(missing))
            for i, score in enumerate(scores):
                if score is None:
                    new = next(fresh)
                    premise, hypothesis = pairs[i]
                    self.cache.put(backend_id, premise, hypothesis, new)
                    scores[i] = new
        return scores  # type: ignore[return-value]


def create_backend(
    config: BackendConfig | str,
    *,
    cache_dir: str | Path | None = None,
    configs: Mapping[str, BackendConfig] | None = None,
    stub_seed: int = 0,
):
    """Instantiate a backend from its config (or roster id), optionally cached."""
    if isinstance(config, str):
        roster = dict(configs) if configs is not None else load_backend_configs()
        if config not in roster:
            raise EntailmentError(
                f"unknown backend {config!r} (known: {sorted(roster)})"
            )
        config = roster[config]
    if config.adapter == "stub":
        backend = StubBackend(
            seed=stub_seed,
            backend_id=config.backend_id,
            mask_symbol=config.mask_symbol,
        )
    elif config.adapter == "transformers":
        backend = TransformersBackend(config)
    else:
        backend = RemoteBackend(config)
    if cache_dir is not None:
        return CachedBackend(backend, ScoreCache(cache_dir))
    return backend
