import json

import numpy as np
import pytest

from conftest import make_synth_corpus
from sudkit.backends import OracleBackend, StubBackend
from sudkit.entailment import NliScore, classify_batch
from sudkit.experiments import (
    ExperimentError,
    ExperimentRunner,
    ExperimentSpec,
    MaskingSpec,
    SubsampleSpec,
    load_spec,
    run_benchmark,
    run_masking_ablation,
    run_sweep,
)
from sudkit.masking import EmbeddingTable
from sudkit.metrics import evaluate
from sudkit.templates import CandidateLabelSet, builtin_templates


def oracle_for(*corpora) -> OracleBackend:
    gold = {}
    for corpus in corpora:
        for record in corpus.records:
            phrase = "neutral" if record.gold_label == "neither" else record.gold_label
            gold[record.text] = phrase
    return OracleBackend(gold)


@pytest.fixture
def synth_pair():
    return (
        make_synth_corpus("synth-a", {"hate": 12, "neither": 8}, seed=21),
        make_synth_corpus("synth-b", {"offensive": 10, "neither": 10}, seed=22),
    )


class TestSpec:
    def test_requires_datasets(self):
        with pytest.raises(ExperimentError, match="dataset"):
            ExperimentSpec(kind="sweep", datasets=(), backends=("stub",))

    def test_requires_backends(self):
        with pytest.raises(ExperimentError, match="backend"):
            ExperimentSpec(kind="sweep", datasets=("d",), backends=())

    def test_unknown_kind(self):
        with pytest.raises(ExperimentError, match="kind"):
            ExperimentSpec(kind="party", datasets=("d",), backends=("stub",))

    def test_masking_required_for_ablation(self):
        with pytest.raises(ExperimentError, match="masking"):
            ExperimentSpec(
                kind="masking_ablation", datasets=("d",), backends=("stub",)
            )

    def test_subsample_validation(self):
        with pytest.raises(ExperimentError, match="subsample"):
            SubsampleSpec(n=0)

    def test_fingerprint_ignores_location_fields(self):
        base = ExperimentSpec(
            kind="sweep", datasets=("d",), backends=("stub",), templates=("contains",)
        )
        moved = ExperimentSpec(
            kind="sweep", datasets=("d",), backends=("stub",),
            templates=("contains",), output_dir="elsewhere", data_dir="/tmp",
        )
        different = ExperimentSpec(
            kind="sweep", datasets=("d",), backends=("stub",), templates=("has",)
        )
        assert base.fingerprint() == moved.fingerprint()
        assert base.fingerprint() != different.fingerprint()

    def test_roundtrip_through_dict(self):
        spec = ExperimentSpec(
            kind="benchmark",
            datasets=("a", "b"),
            backends=("stub",),
            templates=("contains",),
            masking=MaskingSpec(tau=0.6),
            subsample=SubsampleSpec(n=50, seed=3),
        )
        again = ExperimentSpec.from_dict(spec.to_dict())
        assert again == spec
        assert again.fingerprint() == spec.fingerprint()

    def test_load_spec_yaml(self, tmp_path):
        path = tmp_path / "spec.yaml"
        path.write_text(
            "kind: sweep\ndatasets: [d]\nbackends: [stub]\ntemplates: [contains]\n",
            encoding="utf-8",
        )
        spec = load_spec(path)
        assert spec.kind == "sweep"
        assert spec.templates == ("contains",)

    def test_unknown_spec_field_rejected(self):
        with pytest.raises(ExperimentError, match="unknown spec fields"):
            ExperimentSpec.from_dict(
                {"kind": "sweep", "datasets": ["d"], "backends": ["stub"],
                 "mystery": 1}
            )


class TestSweep:
    def test_cells_match_direct_pipeline_oracle(self, tmp_path, synth_pair):
        corpus = synth_pair[0]
        spec = ExperimentSpec(
            kind="sweep",
            datasets=("synth-a",),
            backends=("seeded",),
            templates=("contains", "has"),
            output_dir=str(tmp_path),
        )
        backend = StubBackend(seed=5, backend_id="seeded")
        table = run_sweep(
            spec, backends={"seeded": backend}, datasets={"synth-a": corpus}
        )
        assert table.rows == ("contains", "has")
        assert table.cols == ("seeded",)
        for template in builtin_templates()[:1] + builtin_templates()[-1:]:
            labels = CandidateLabelSet(
                tuple(corpus.schema.label_set), {"neither": "neutral"}
            )
            outcomes = classify_batch(
                StubBackend(seed=5, backend_id="seeded"),
                corpus.texts(), template, labels,
            )
            expected = evaluate(
                [o.predicted for o in outcomes],
                corpus.gold_labels(),
                corpus.schema.label_set,
            ).macro_f1 * 100.0
            assert table.cell(template.template_id, "seeded") == pytest.approx(
                expected, abs=1e-12
            )

    def test_default_templates_are_the_nineteen_builtins(self, tmp_path, synth_pair):
        spec = ExperimentSpec(
            kind="sweep", datasets=("synth-a",), backends=("s",),
            output_dir=str(tmp_path),
        )
        table = run_sweep(
            spec,
            backends={"s": StubBackend(seed=1, backend_id="s")},
            datasets={"synth-a": synth_pair[0]},
        )
        assert table.rows == tuple(t.template_id for t in builtin_templates())
        assert len(table.rows) == 19

    def test_cell_averages_over_datasets(self, tmp_path, synth_pair):
        a, b = synth_pair
        spec = ExperimentSpec(
            kind="sweep", datasets=("synth-a", "synth-b"), backends=("s",),
            templates=("contains",), output_dir=str(tmp_path),
        )
        oracle = oracle_for(a, b)
        oracle.backend_id = "s"
        table = run_sweep(spec, backends={"s": oracle},
                          datasets={"synth-a": a, "synth-b": b})
        assert table.cell("contains", "s") == 100.0


class TestBenchmark:
    def test_perfect_oracle_scores_all_hundred(self, tmp_path, synth_pair):
        a, b = synth_pair
        spec = ExperimentSpec(
            kind="benchmark",
            datasets=("synth-a", "synth-b"),
            backends=("oracle",),
            templates=("contains",),
            output_dir=str(tmp_path),
        )
        table = run_benchmark(
            spec,
            backends={"oracle": oracle_for(a, b)},
            datasets={"synth-a": a, "synth-b": b},
        )
        assert table.cols == ("oracle", "lr")
        for dataset in ("synth-a", "synth-b"):
            assert table.cell(dataset, "oracle") == 100.0

    def test_lr_column_on_separable_corpus(self, tmp_path):
        corpus = make_synth_corpus("sep", {"hate": 30, "neither": 30}, seed=8)
        spec = ExperimentSpec(
            kind="benchmark", datasets=("sep",), backends=("oracle",),
            templates=("contains",), output_dir=str(tmp_path),
        )
        table = run_benchmark(
            spec, backends={"oracle": oracle_for(corpus)}, datasets={"sep": corpus}
        )
        assert table.cell("sep", "lr") == 100.0

    def test_unregistered_baseline_fails_cell_not_run(self, tmp_path, synth_pair):
        a, _ = synth_pair
        spec = ExperimentSpec(
            kind="benchmark", datasets=("synth-a",), backends=("oracle",),
            templates=("contains",), baselines=("lr", "bert-mlm"),
            output_dir=str(tmp_path),
        )
        runner = ExperimentRunner(
            spec, backends={"oracle": oracle_for(a)}, datasets={"synth-a": a}
        )
        table = runner.run()
        assert table.cell("synth-a", "bert-mlm") is None
        assert table.cell("synth-a", "oracle") == 100.0
        assert any(f["col"] == "bert-mlm" for f in runner.failures)

    def test_missing_dataset_marks_row_failed(self, tmp_path):
        spec = ExperimentSpec(
            kind="benchmark", datasets=("ghost",), backends=("stub",),
            templates=("contains",), output_dir=str(tmp_path),
        )
        runner = ExperimentRunner(spec, backends={"stub": StubBackend(seed=0)})
        table = runner.run()
        assert table.cell("ghost", "stub") is None
        assert table.cell("ghost", "lr") is None

    def test_subsample_is_paired_across_backends(self, tmp_path):
        corpus = make_synth_corpus("big", {"hate": 50, "neither": 50}, seed=4)
        spec = ExperimentSpec(
            kind="benchmark", datasets=("big",), backends=("s1", "s2"),
            templates=("contains",), subsample=SubsampleSpec(n=30, seed=14),
            baselines=(), output_dir=str(tmp_path),
        )
        runner = ExperimentRunner(
            spec,
            backends={"s1": StubBackend(seed=1, backend_id="s1"),
                      "s2": StubBackend(seed=2, backend_id="s2")},
            datasets={"big": corpus},
        )
        runner.run()
        ids = {}
        for backend_id in ("s1", "s2"):
            path = runner.out_dir / "predictions" / f"big__{backend_id}__contains__plain.jsonl"
            ids[backend_id] = [
                json.loads(line)["id"]
                for line in path.read_text(encoding="utf-8").splitlines()
            ]
        assert ids["s1"] == ids["s2"]


class _KeywordBackend(StubBackend):
    """Entails a hypothesis only when its label word survives in the premise."""

    def __init__(self, label_words):
        super().__init__(default=NliScore.uniform(), backend_id="kw")
        self.label_words = label_words

    def score_batch(self, pairs):
        scores = []
        for premise, hypothesis in pairs:
            hit = any(
                word in premise.split() and word in hypothesis
                for word in self.label_words
            )
            scores.append(NliScore.from_logits(4.0 if hit else 0.0, 0.0, 0.0))
        return scores


def planted_table() -> EmbeddingTable:
    vectors = {
        "hate": np.array([1.0, 0.0, 0.0]),
        "neutral": np.array([0.0, 1.0, 0.0]),
        "filler": np.array([0.0, 0.0, 1.0]),
        "words": np.array([0.0, 0.1, 0.9]),
    }
    return EmbeddingTable(dimension=3, vectors=vectors)


def planted_corpus():
    from sudkit.corpus import Corpus, DatasetSchema, TextRecord

    records = []
    for i in range(10):
        label = "hate" if i % 2 == 0 else "neither"
        keyword = "hate" if label == "hate" else "neutral"
        records.append(
            TextRecord(f"p{i}", f"{keyword} filler words", label, "planted")
        )
    schema = DatasetSchema("planted", ("hate", "neither"), "jsonl")
    return Corpus(schema=schema, records=tuple(records))


class TestMaskingAblation:
    def test_tau_above_one_matches_unmasked_exactly(self, tmp_path, synth_pair):
        a, _ = synth_pair
        spec = ExperimentSpec(
            kind="masking_ablation", datasets=("synth-a",), backends=("s",),
            templates=("contains",), masking=MaskingSpec(tau=1.5),
            output_dir=str(tmp_path),
        )
        table = run_masking_ablation(
            spec,
            backends={"s": StubBackend(seed=6, backend_id="s")},
            datasets={"synth-a": a},
            embeddings=planted_table(),
        )
        assert table.cell("synth-a", "s") == table.cell("synth-a", "s+mask")

    def test_planted_keyword_masking_degrades_f1(self, tmp_path):
        corpus = planted_corpus()
        spec = ExperimentSpec(
            kind="masking_ablation", datasets=("planted",), backends=("kw",),
            templates=("contains",), masking=MaskingSpec(tau=0.9),
            output_dir=str(tmp_path),
        )
        table = run_masking_ablation(
            spec,
            backends={"kw": _KeywordBackend(("hate", "neutral"))},
            datasets={"planted": corpus},
            embeddings=planted_table(),
        )
        unmasked = table.cell("planted", "kw")
        masked = table.cell("planted", "kw+mask")
        assert unmasked == 100.0
        assert masked <= unmasked

    def test_column_layout_pairs_backends(self, tmp_path, synth_pair):
        a, _ = synth_pair
        spec = ExperimentSpec(
            kind="masking_ablation", datasets=("synth-a",), backends=("s1", "s2"),
            templates=("contains",), masking=MaskingSpec(tau=0.5),
            output_dir=str(tmp_path),
        )
        table = run_masking_ablation(
            spec,
            backends={"s1": StubBackend(seed=1, backend_id="s1"),
                      "s2": StubBackend(seed=2, backend_id="s2")},
            datasets={"synth-a": a},
            embeddings=planted_table(),
        )
        assert table.cols == ("s1", "s1+mask", "s2", "s2+mask")

    def test_missing_embeddings_fails_cells(self, tmp_path, synth_pair):
        a, _ = synth_pair
        spec = ExperimentSpec(
            kind="masking_ablation", datasets=("synth-a",), backends=("s",),
            templates=("contains",),
            masking=MaskingSpec(tau=0.5, embeddings_path=str(tmp_path / "none.txt")),
            output_dir=str(tmp_path),
        )
        runner = ExperimentRunner(
            spec, backends={"s": StubBackend(seed=1, backend_id="s")},
            datasets={"synth-a": a},
        )
        table = runner.run()
        assert table.cell("synth-a", "s+mask") is None
        assert table.cell("synth-a", "s") is not None


class TestPersistenceAndResume:
    def test_rerun_is_byte_identical(self, tmp_path, synth_pair):
        a, b = synth_pair

        def execute():
            spec = ExperimentSpec(
                kind="benchmark", datasets=("synth-a", "synth-b"),
                backends=("oracle",), templates=("contains",),
                output_dir=str(tmp_path),
            )
            runner = ExperimentRunner(
                spec, backends={"oracle": oracle_for(a, b)},
                datasets={"synth-a": a, "synth-b": b},
            )
            runner.run()
            return (
                (runner.out_dir / "table.csv").read_bytes(),
                (runner.out_dir / "table.md").read_bytes(),
                runner.out_dir,
            )

        first_csv, first_md, out_dir = execute()
        # Wipe per-cell artifacts but keep the score cache: resume recomputes
        # from cached scores only.
        import shutil

        shutil.rmtree(out_dir / "reports")
        shutil.rmtree(out_dir / "predictions")
        second_csv, second_md, _ = execute()
        assert first_csv == second_csv
        assert first_md == second_md
        # Full warm rerun (reports intact) is also byte-identical.
        third_csv, third_md, _ = execute()
        assert first_csv == third_csv and first_md == third_md

    def test_cell_equals_recomputed_evaluate_from_predictions(
        self, tmp_path, synth_pair
    ):
        a, _ = synth_pair
        spec = ExperimentSpec(
            kind="sweep", datasets=("synth-a",), backends=("s",),
            templates=("contains",), output_dir=str(tmp_path),
        )
        runner = ExperimentRunner(
            spec, backends={"s": StubBackend(seed=3, backend_id="s")},
            datasets={"synth-a": a},
        )
        table = runner.run()
        path = runner.out_dir / "predictions" / "synth-a__s__contains__plain.jsonl"
        rows = [json.loads(line) for line in path.read_text("utf-8").splitlines()]
        recomputed = evaluate(
            [r["predicted"] for r in rows],
            [r["gold_label"] for r in rows],
            a.schema.label_set,
        ).macro_f1 * 100.0
        assert table.cell("contains", "s") == pytest.approx(recomputed, abs=1e-12)

    def test_warm_cache_hit_rate_reported(self, tmp_path, synth_pair):
        a, _ = synth_pair
        spec = ExperimentSpec(
            kind="sweep", datasets=("synth-a",), backends=("s",),
            templates=("contains",), output_dir=str(tmp_path),
        )

        def run_once():
            runner = ExperimentRunner(
                spec, backends={"s": StubBackend(seed=3, backend_id="s")},
                datasets={"synth-a": a},
            )
            table = runner.run()
            return table.meta["cache"]

        cold = run_once()
        import shutil

        shutil.rmtree(tmp_path / spec.fingerprint() / "reports")
        shutil.rmtree(tmp_path / spec.fingerprint() / "predictions")
        warm = run_once()
        assert cold["misses"] > 0
        assert warm["hits"] == cold["misses"] and warm["misses"] == 0

    def test_on_cell_callback_fires_per_cell(self, tmp_path, synth_pair):
        a, _ = synth_pair
        seen = []
        spec = ExperimentSpec(
            kind="sweep", datasets=("synth-a",), backends=("s",),
            templates=("contains", "has"), output_dir=str(tmp_path),
        )
        ExperimentRunner(
            spec, backends={"s": StubBackend(seed=3, backend_id="s")},
            datasets={"synth-a": a},
            on_cell=lambda row, col, value: seen.append((row, col, value)),
        ).run()
        assert [(row, col) for row, col, _ in seen] == [
            ("contains", "s"), ("has", "s")
        ]


class TestFailureIsolation:
    def test_exploding_backend_marks_cell_failed_and_run_continues(
        self, tmp_path, synth_pair
    ):
        a, _ = synth_pair

        class Exploding(StubBackend):
            def score_batch(self, pairs):
                raise RuntimeError("backend down")

        spec = ExperimentSpec(
            kind="sweep", datasets=("synth-a",), backends=("bad", "good"),
            templates=("contains",), output_dir=str(tmp_path),
        )
        runner = ExperimentRunner(
            spec,
            backends={"bad": Exploding(backend_id="bad"),
                      "good": StubBackend(seed=1, backend_id="good")},
            datasets={"synth-a": a},
        )
        table = runner.run()
        assert table.cell("contains", "bad") is None
        assert table.cell("contains", "good") is not None
        assert runner.failures and runner.failures[0]["col"] == "bad"


class TestTableRendering:
    def test_csv_and_markdown_shapes(self, tmp_path, synth_pair):
        a, _ = synth_pair
        spec = ExperimentSpec(
            kind="sweep", datasets=("synth-a",), backends=("s",),
            templates=("contains",), output_dir=str(tmp_path),
        )
        table = run_sweep(
            spec, backends={"s": StubBackend(seed=3, backend_id="s")},
            datasets={"synth-a": a},
        )
        csv_text = table.to_csv()
        assert csv_text.splitlines()[0] == "template,s"
        md_text = table.to_markdown()
        assert md_text.splitlines()[0] == "| template | s |"
        # Markdown shows one decimal; CSV keeps full precision.
        value = table.cell("contains", "s")
        assert f"{value:.1f}" in md_text
        assert repr(value) in csv_text
