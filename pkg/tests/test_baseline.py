import pytest

from conftest import make_synth_corpus
from sudkit.baseline import (
    BaselineError,
    LrBaselineConfig,
    build_vocabulary,
    train_lr_baseline,
    vectorize,
)
from sudkit.corpus import split
from sudkit.metrics import evaluate


class TestVectorize:
    def test_simple_counts(self):
        matrix, vocab = vectorize(["a a b"])
        assert sorted(vocab) == ["a", "b"]
        row = {tok: matrix[0, i] for i, tok in enumerate(vocab)}
        assert row == {"a": 2.0, "b": 1.0}

    def test_cap_keeps_most_frequent(self):
        # Frequencies: b appears 3 times, a once.
        matrix, vocab = vectorize(["a b", "b b"], LrBaselineConfig(vocabulary_cap=1))
        assert vocab == ["b"]
        assert matrix.shape == (2, 1)
        assert matrix[0, 0] == 1.0 and matrix[1, 0] == 2.0

    def test_tie_break_is_lexicographic(self):
        vocab = build_vocabulary(["pear apple", "apple pear"], cap=10)
        assert vocab == ["apple", "pear"]

    def test_empty_string_row_is_zero_vector(self):
        matrix, vocab = vectorize(["a b", ""])
        assert matrix[1].toarray().sum() == 0.0

    def test_rows_align_with_texts(self):
        matrix, vocab = vectorize(["only here", "something else"])
        col = vocab.index("only")
        assert matrix[0, col] == 1.0
        assert matrix[1, col] == 0.0

    def test_rejects_empty_input(self):
        with pytest.raises(BaselineError):
            vectorize([])

    def test_external_vocabulary_ignores_unknown_tokens(self):
        matrix, vocab = vectorize(["new words only"], vocabulary=["known"])
        assert vocab == ["known"]
        assert matrix.toarray().sum() == 0.0


class TestLrBaseline:
    def test_memorizes_separable_training_set(self):
        corpus = make_synth_corpus("sep", {"hate": 20, "neither": 20}, seed=1)
        model = train_lr_baseline(corpus)
        predictions = model.predict(corpus.texts())
        assert predictions == corpus.gold_labels()

    def test_disjoint_vocabulary_heldout_macro_f1_is_one(self):
        corpus = make_synth_corpus("dv", {"hate": 40, "neither": 40}, seed=2)
        train, test = split(corpus, 0.25, seed=9)
        model = train_lr_baseline(train)
        report = evaluate(
            model.predict(test.texts()), test.gold_labels(), test.schema.label_set
        )
        assert report.macro_f1 == 1.0

    def test_prediction_is_deterministic(self):
        corpus = make_synth_corpus("det", {"hate": 15, "neither": 15}, seed=3)
        first = train_lr_baseline(corpus).predict(corpus.texts())
        second = train_lr_baseline(corpus).predict(corpus.texts())
        assert first == second

    def test_single_class_corpus_rejected(self):
        corpus = make_synth_corpus("one", {"hate": 10})
        with pytest.raises(BaselineError, match="single class"):
            train_lr_baseline(corpus)

    def test_config_validation(self):
        with pytest.raises(BaselineError):
            LrBaselineConfig(vocabulary_cap=0)
