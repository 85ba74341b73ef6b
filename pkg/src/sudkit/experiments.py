"""Experiment orchestration: template sweeps, benchmarks, masking ablations.

A declarative spec names datasets, backends and templates; the runner
classifies every record, persists one evaluation report plus per-item
predictions per cell, and assembles a result table of macro-F1
percentages. Reports and tables are deterministic byte-for-byte given
the same spec, corpora and score cache, so interrupted runs can resume
and reruns can be diffed. Volatile run info (timestamps, cache hit
rate) lives in a separate run.json.

Output layout: <output_dir>/<fingerprint>/{reports/,predictions/,table.csv,table.md,run.json}
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import re
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import yaml

from . import reference
from .backends import CachedBackend, create_backend
from .baseline import LrBaselineConfig, SupervisedBaseline, train_lr_baseline
from .cache import ScoreCache
from .corpus import Corpus, load_jsonl, split, subsample
from .entailment import classify_batch
from .masking import EmbeddingTable, MaskingPolicy, load_embeddings, mask_text
from .metrics import EvalReport, config_fingerprint, evaluate
from .templates import CandidateLabelSet, HypothesisTemplate, builtin_templates

EXPERIMENT_KINDS = ("sweep", "benchmark", "masking_ablation")


class ExperimentError(ValueError):
    """Invalid experiment spec or unresolvable reference."""


@dataclass(frozen=True)
class MaskingSpec:
    mode: str = "threshold"
    tau: float = 0.4
    k: int = 0
    max_fraction: float = 0.5
    embeddings_path: str = ""

    def policy(self, mask_symbol: str) -> MaskingPolicy:
        return MaskingPolicy(
            mode=self.mode,
            tau=self.tau,
            k=self.k,
            max_fraction=self.max_fraction,
            mask_symbol=mask_symbol,
        )


@dataclass(frozen=True)
class SubsampleSpec:
    n: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ExperimentError(f"subsample n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    datasets: tuple[str, ...]
    backends: tuple[str, ...]
    templates: tuple[str, ...] = ()
    masking: MaskingSpec | None = None
    normalization: str = "softmax"
    subsample: SubsampleSpec | None = None
    neutral_surface_form: str = "neutral"
    baselines: tuple[str, ...] = ("lr",)
    baseline: LrBaselineConfig = field(default_factory=LrBaselineConfig)
    # Location fields: excluded from the fingerprint, they do not change results.
    data_dir: str = ""
    output_dir: str = "runs"

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ExperimentError(
                f"kind must be one of {EXPERIMENT_KINDS}, got {self.kind!r}"
            )
        object.__setattr__(self, "datasets", tuple(self.datasets))
        object.__setattr__(self, "backends", tuple(self.backends))
        object.__setattr__(self, "templates", tuple(self.templates))
        object.__setattr__(self, "baselines", tuple(self.baselines))
        if not self.datasets:
            raise ExperimentError("spec needs at least one dataset")
        if not self.backends:
            raise ExperimentError("spec needs at least one backend")
        if self.kind == "masking_ablation" and self.masking is None:
            raise ExperimentError("masking_ablation needs a masking policy")

    def fingerprint(self) -> str:
        payload = self.to_dict()
        payload.pop("data_dir", None)
        payload.pop("output_dir", None)
        canonical = json.dumps(payload, sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, payload: Mapping) -> "ExperimentSpec":
        data = dict(payload)
        if data.get("masking"):
            data["masking"] = MaskingSpec(**data["masking"])
        else:
            data["masking"] = None
        if data.get("subsample"):
            data["subsample"] = SubsampleSpec(**data["subsample"])
        else:
            data.pop("subsample", None)
            data.setdefault("subsample", None)
        if data.get("baseline"):
            data["baseline"] = LrBaselineConfig(**data["baseline"])
        else:
            data.pop("baseline", None)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ExperimentError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**data)


def load_spec(path: str | Path) -> ExperimentSpec:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    payload = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    return ExperimentSpec.from_dict(payload)


@dataclass
class ResultTable:
    """Macro-F1 percentages on a (rows × columns) grid; None marks a failed cell."""

    kind: str
    row_axis: str
    col_axis: str
    rows: tuple[str, ...]
    cols: tuple[str, ...]
    cells: dict[tuple[str, str], float | None]
    meta: dict = field(default_factory=dict)

    def cell(self, row: str, col: str) -> float | None:
        return self.cells[(row, col)]

    def to_csv(self) -> str:
        lines = [",".join([self.row_axis] + [_csv_quote(c) for c in self.cols])]
        for row in self.rows:
            values = [
                "" if self.cells[(row, col)] is None else repr(self.cells[(row, col)])
                for col in self.cols
            ]
            lines.append(",".join([_csv_quote(row)] + values))
        return "\n".join(lines) + "\n"

    def to_markdown(self) -> str:
        header = "| " + " | ".join([self.row_axis] + list(self.cols)) + " |"
        rule = "|" + "|".join(["---"] * (len(self.cols) + 1)) + "|"
        lines = [header, rule]
        for row in self.rows:
            cells = [
                "failed" if self.cells[(row, col)] is None
                else f"{self.cells[(row, col)]:.1f}"
                for col in self.cols
            ]
            lines.append("| " + " | ".join([row] + cells) + " |")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "row_axis": self.row_axis,
            "col_axis": self.col_axis,
            "rows": list(self.rows),
            "cols": list(self.cols),
            "cells": [
                [self.cells[(row, col)] for col in self.cols] for row in self.rows
            ],
            "meta": self.meta,
        }


def _csv_quote(value: str) -> str:
    if any(ch in value for ch in ',"\n'):
        return '"' + value.replace('"', '""') + '"'
    return value


def _safe_name(value: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "-", value).strip("-") or "x"


def _resolve_templates(entries: Sequence[str]) -> list[HypothesisTemplate]:
    by_id = {t.template_id: t for t in builtin_templates()}
    resolved = []
    for entry in entries:
        if entry in by_id:
            resolved.append(by_id[entry])
        elif "{}" in entry:
            resolved.append(HypothesisTemplate(template_id=entry, pattern=entry))
        else:
            raise ExperimentError(
                f"template {entry!r} is neither a built-in id nor a {{}} pattern"
            )
    return resolved


BaselineFactory = Callable[[Corpus, LrBaselineConfig], SupervisedBaseline]

DEFAULT_BASELINE_FACTORIES: dict[str, BaselineFactory] = {
    "lr": train_lr_baseline,
}


class ExperimentRunner:
    """Executes one spec: cells are isolated work units, failures don't abort.

    ``backends``/``datasets``/``embeddings`` can be injected (tests, the
    service session); anything not injected is resolved from the backend
    roster and ``<data_dir>/<dataset_id>.jsonl``.
    """

    def __init__(
        self,
        spec: ExperimentSpec,
        *,
        backends: Mapping[str, object] | None = None,
        datasets: Mapping[str, Corpus] | None = None,
        embeddings: EmbeddingTable | None = None,
        baseline_factories: Mapping[str, BaselineFactory] | None = None,
        cache_dir: str | Path | None = None,
        on_cell: Callable[[str, str, float | None], None] | None = None,
    ):
        self.spec = spec
        self._injected_backends = dict(backends or {})
        self._injected_datasets = dict(datasets or {})
        self._embeddings = embeddings
        self._factories = dict(baseline_factories or DEFAULT_BASELINE_FACTORIES)
        self.on_cell = on_cell
        self.out_dir = Path(spec.output_dir) / spec.fingerprint()
        self._cache = ScoreCache(
            cache_dir if cache_dir is not None else Path(spec.output_dir) / "cache"
        )
        self._backend_cache: dict[str, object] = {}
        self._corpus_cache: dict[str, Corpus] = {}
        self.failures: list[dict] = []

    # -- resolution ------------------------------------------------------

    def backend(self, backend_id: str):
        if backend_id not in self._backend_cache:
            if backend_id in self._injected_backends:
                inner = self._injected_backends[backend_id]
            else:
                inner = create_backend(backend_id)
            if not isinstance(inner, CachedBackend):
                inner = CachedBackend(inner, self._cache)
            self._backend_cache[backend_id] = inner
        return self._backend_cache[backend_id]

    def dataset(self, dataset_id: str) -> Corpus:
        if dataset_id not in self._corpus_cache:
            if dataset_id in self._injected_datasets:
                corpus = self._injected_datasets[dataset_id]
            else:
                path = Path(self.spec.data_dir) / f"{dataset_id}.jsonl"
                if not path.exists():
                    raise ExperimentError(
                        f"dataset {dataset_id!r} not provided and {path} is missing"
                    )
                corpus = load_jsonl(path)
            if self.spec.subsample is not None:
                corpus = subsample(
                    corpus, self.spec.subsample.n, self.spec.subsample.seed
                )
            self._corpus_cache[dataset_id] = corpus
        return self._corpus_cache[dataset_id]

    def embeddings(self) -> EmbeddingTable:
        if self._embeddings is None:
            masking = self.spec.masking
            if masking is None or not masking.embeddings_path:
                raise ExperimentError("masking requested but no embeddings available")
            self._embeddings = load_embeddings(masking.embeddings_path)
        return self._embeddings

    def template_for(self, backend_id: str, index: int) -> HypothesisTemplate:
        """Benchmark/ablation template choice: shared, aligned, or best-known."""
        entries = self.spec.templates
        if not entries:
            return reference.best_template(backend_id)
        resolved = _resolve_templates(entries)
        if len(resolved) == 1:
            return resolved[0]
        if len(resolved) == len(self.spec.backends):
            return resolved[index]
        raise ExperimentError(
            "templates must be empty (best per backend), a single entry, or "
            "one entry per backend"
        )

    def label_set_for(self, corpus: Corpus) -> CandidateLabelSet:
        surfaces = {}
        if "neither" in corpus.schema.label_set and self.spec.neutral_surface_form:
            surfaces["neither"] = self.spec.neutral_surface_form
        return CandidateLabelSet(
            labels=tuple(corpus.schema.label_set), surface_forms=surfaces
        )

    # -- cell execution ---------------------------------------------------

    def _masker(self, backend) -> Callable[[str, str], str]:
        table = self.embeddings()
        policy_spec = self.spec.masking or MaskingSpec()
        policy = policy_spec.policy(mask_symbol=backend.mask_symbol)

        def apply(premise: str, label_surface: str) -> str:
            return mask_text(premise, label_surface, table, policy).masked_text

        return apply

    def _score_cell(
        self,
        corpus: Corpus,
        backend_id: str,
        template: HypothesisTemplate,
        masked: bool,
        dataset_id: str,
    ) -> tuple[EvalReport, list[dict]]:
        backend = self.backend(backend_id)
        labels = self.label_set_for(corpus)
        masker = self._masker(backend) if masked else None
        outcomes = classify_batch(
            backend,
            corpus.texts(),
            template,
            labels,
            normalization=self.spec.normalization,
            masker=masker,
        )
        predictions = [o.predicted for o in outcomes]
        fingerprint = config_fingerprint(
            dataset=dataset_id,
            backend=backend_id,
            template=template.pattern,
            masked=masked,
            masking=dataclasses.asdict(self.spec.masking) if masked else None,
            normalization=self.spec.normalization,
            neutral_surface_form=self.spec.neutral_surface_form,
            subsample=dataclasses.asdict(self.spec.subsample)
            if self.spec.subsample
            else None,
        )
        report = evaluate(
            predictions,
            corpus.gold_labels(),
            corpus.schema.label_set,
            config_fingerprint=fingerprint,
        )
        rows = [
            {
                "id": record.id,
                "gold_label": record.gold_label,
                "predicted": outcome.predicted,
                "labels": list(outcome.labels),
                "probabilities": list(outcome.probabilities),
            }
            for record, outcome in zip(corpus.records, outcomes)
        ]
        return report, rows

    def _persist_cell(self, key: str, report: EvalReport, rows: list[dict]) -> None:
        reports_dir = self.out_dir / "reports"
        predictions_dir = self.out_dir / "predictions"
        reports_dir.mkdir(parents=True, exist_ok=True)
        predictions_dir.mkdir(parents=True, exist_ok=True)
        (reports_dir / f"{key}.json").write_text(
            json.dumps(report.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8",
        )
        with (predictions_dir / f"{key}.jsonl").open("w", encoding="utf-8") as handle:
            for row in rows:
                handle.write(json.dumps(row, ensure_ascii=False) + "\n")

    def _resume_cell(self, key: str) -> EvalReport | None:
        path = self.out_dir / "reports" / f"{key}.json"
        if not path.exists():
            return None
        try:
            return EvalReport.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (ValueError, KeyError):
            return None

    def _cell_macro(
        self,
        dataset_id: str,
        backend_id: str,
        template: HypothesisTemplate,
        masked: bool,
        corpus: Corpus | None = None,
    ) -> float:
        key = "__".join(
            [
                _safe_name(dataset_id),
                _safe_name(backend_id),
                _safe_name(template.template_id),
                "mask" if masked else "plain",
            ]
        )
        resumed = self._resume_cell(key)
        if resumed is not None:
            return resumed.macro_f1 * 100.0
        if corpus is None:
            corpus = self.dataset(dataset_id)
        report, rows = self._score_cell(corpus, backend_id, template, masked, dataset_id)
        self._persist_cell(key, report, rows)
        return report.macro_f1 * 100.0

    def _guard(self, row: str, col: str, compute: Callable[[], float]) -> float | None:
        try:
            value = compute()
        except Exception as exc:  # cell isolation: record and continue
            self.failures.append({"row": row, "col": col, "error": str(exc)})
            value = None
        if self.on_cell is not None:
            self.on_cell(row, col, value)
        return value

    # -- runs --------------------------------------------------------------

    def run(self) -> ResultTable:
        started = time.time()
        if self.spec.kind == "sweep":
            table = self._run_sweep()
        elif self.spec.kind == "benchmark":
            table = self._run_benchmark()
        else:
            table = self._run_masking_ablation()
        table.meta.update(
            {
                "fingerprint": self.spec.fingerprint(),
                "kind": self.spec.kind,
                "started_at": started,
                "finished_at": time.time(),
                "cache": self._cache_stats(),
                "failures": self.failures,
            }
        )
        self._save(table)
        return table

    def _cache_stats(self) -> dict:
        hits = sum(
            b.hits for b in self._backend_cache.values() if isinstance(b, CachedBackend)
        )
        misses = sum(
            b.misses
            for b in self._backend_cache.values()
            if isinstance(b, CachedBackend)
        )
        total = hits + misses
        return {
            "hits": hits,
            "misses": misses,
            "hit_rate": hits / total if total else 0.0,
        }

    def _save(self, table: ResultTable) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / "table.csv").write_text(table.to_csv(), encoding="utf-8")
        (self.out_dir / "table.md").write_text(table.to_markdown(), encoding="utf-8")
        run_info = {"spec": self.spec.to_dict(), **table.meta}
        (self.out_dir / "run.json").write_text(
            json.dumps(run_info, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
        )

    def _run_sweep(self) -> ResultTable:
        templates = _resolve_templates(self.spec.templates)
        if not templates:
            templates = list(builtin_templates())
        rows = tuple(t.template_id for t in templates)
        cols = self.spec.backends
        cells: dict[tuple[str, str], float | None] = {}
        for template in templates:
            for backend_id in cols:

                def compute(template=template, backend_id=backend_id) -> float:
                    per_dataset = [
                        self._cell_macro(ds, backend_id, template, masked=False)
                        for ds in self.spec.datasets
                    ]
                    return sum(per_dataset) / len(per_dataset)

                cells[(template.template_id, backend_id)] = self._guard(
                    template.template_id, backend_id, compute
                )
        return ResultTable(
            kind="sweep",
            row_axis="template",
            col_axis="backend",
            rows=rows,
            cols=cols,
            cells=cells,
        )

    def _run_benchmark(self) -> ResultTable:
        cols = self.spec.backends + self.spec.baselines
        cells: dict[tuple[str, str], float | None] = {}
        for dataset_id in self.spec.datasets:
            try:
                corpus = self.dataset(dataset_id)
                train, test = split(
                    corpus,
                    self.spec.baseline.split_fraction,
                    self.spec.baseline.split_seed,
                )
            except Exception as exc:
                for col in cols:
                    self.failures.append(
                        {"row": dataset_id, "col": col, "error": str(exc)}
                    )
                    cells[(dataset_id, col)] = None
                    if self.on_cell is not None:
                        self.on_cell(dataset_id, col, None)
                continue
            for index, backend_id in enumerate(self.spec.backends):

                def compute_zero_shot(
                    backend_id=backend_id, index=index, test=test, dataset_id=dataset_id
                ) -> float:
                    template = self.template_for(backend_id, index)
                    return self._cell_macro(
                        dataset_id, backend_id, template, masked=False, corpus=test
                    )

                cells[(dataset_id, backend_id)] = self._guard(
                    dataset_id, backend_id, compute_zero_shot
                )
            for baseline_id in self.spec.baselines:

                def compute_baseline(
                    baseline_id=baseline_id,
                    train=train,
                    test=test,
                    dataset_id=dataset_id,
                ) -> float:
                    return self._baseline_macro(dataset_id, baseline_id, train, test)

                cells[(dataset_id, baseline_id)] = self._guard(
                    dataset_id, baseline_id, compute_baseline
                )
        return ResultTable(
            kind="benchmark",
            row_axis="dataset",
            col_axis="system",
            rows=self.spec.datasets,
            cols=cols,
            cells=cells,
        )

    def _baseline_macro(
        self, dataset_id: str, baseline_id: str, train: Corpus, test: Corpus
    ) -> float:
        factory = self._factories.get(baseline_id)
        if factory is None:
            raise ExperimentError(
                f"baseline {baseline_id!r} has no registered implementation"
            )
        key = "__".join(
            [_safe_name(dataset_id), _safe_name(baseline_id), "baseline", "plain"]
        )
        resumed = self._resume_cell(key)
        if resumed is not None:
            return resumed.macro_f1 * 100.0
        model = factory(train, self.spec.baseline)
        predictions = model.predict(test.texts())
        fingerprint = config_fingerprint(
            dataset=dataset_id,
            baseline=baseline_id,
            config=dataclasses.asdict(self.spec.baseline),
            subsample=dataclasses.asdict(self.spec.subsample)
            if self.spec.subsample
            else None,
        )
        report = evaluate(
            predictions,
            test.gold_labels(),
            test.schema.label_set,
            config_fingerprint=fingerprint,
        )
        rows = [
            {
                "id": record.id,
                "gold_label": record.gold_label,
                "predicted": predicted,
                "labels": list(test.schema.label_set),
                "probabilities": None,
            }
            for record, predicted in zip(test.records, predictions)
        ]
        self._persist_cell(key, report, rows)
        return report.macro_f1 * 100.0

    def _run_masking_ablation(self) -> ResultTable:
        cols: list[str] = []
        for backend_id in self.spec.backends:
            cols.extend([backend_id, f"{backend_id}+mask"])
        cells: dict[tuple[str, str], float | None] = {}
        for dataset_id in self.spec.datasets:
            for index, backend_id in enumerate(self.spec.backends):
                for masked in (False, True):
                    col = f"{backend_id}+mask" if masked else backend_id

                    def compute(
                        backend_id=backend_id,
                        index=index,
                        masked=masked,
                        dataset_id=dataset_id,
                    ) -> float:
                        template = self.template_for(backend_id, index)
                        return self._cell_macro(
                            dataset_id, backend_id, template, masked=masked
                        )

                    cells[(dataset_id, col)] = self._guard(dataset_id, col, compute)
        return ResultTable(
            kind="masking_ablation",
            row_axis="dataset",
            col_axis="system",
            rows=self.spec.datasets,
            cols=tuple(cols),
            cells=cells,
        )


def run_sweep(spec: ExperimentSpec, **kwargs) -> ResultTable:
    return ExperimentRunner(replace(spec, kind="sweep"), **kwargs).run()


def run_benchmark(spec: ExperimentSpec, **kwargs) -> ResultTable:
    return ExperimentRunner(replace(spec, kind="benchmark"), **kwargs).run()


def run_masking_ablation(spec: ExperimentSpec, **kwargs) -> ResultTable:
    return ExperimentRunner(replace(spec, kind="masking_ablation"), **kwargs).run()
