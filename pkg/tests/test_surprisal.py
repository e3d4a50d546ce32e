import math

import numpy as np
import pytest

from lexopt.errors import ConfigError, NumericError, ParseError, ValidationError
from lexopt.surprisal import (EXTERNAL_HEADER, NgramLanguageModel, Source,
                              SurprisalSample, SurprisalTable, ingest_external,
                              score_corpus, surprisal_to_tsv, train_ngram)


class TestTable:
    def test_aggregates_equal_values(self):
        table = SurprisalTable.from_values(
            {"w": [(2.0, 3), (2.0, 7), (24.0, 1)]}, Source.EXTERNAL)
        samples = table.per_word["w"]
        assert [(s.surprisal_bits, s.count) for s in samples] == [(2.0, 10), (24.0, 1)]
        assert table.n_samples() == 11

    def test_moments(self, example_table):
        assert example_table.mean_bits("w") == 4.0
        assert example_table.second_moment_bits("w") == 56.0
        assert example_table.variance_bits("w") == 40.0

    def test_rejects_negative_and_nonfinite(self):
        with pytest.raises(ValidationError):
            SurprisalTable.from_values({"w": [(-0.5, 1)]}, Source.EXTERNAL)
        with pytest.raises(ValidationError):
            SurprisalTable.from_values({"w": [(float("inf"), 1)]}, Source.EXTERNAL)

    def test_rejects_empty_sample_sets(self):
        with pytest.raises(ValidationError):
            SurprisalTable.from_values({"w": []}, Source.EXTERNAL)


class TestNgramTraining:
    def test_unigram_add_one_unk_golden(self):
        # [a, a, b] with one pseudo-count on unk: 4 events in total
        model = train_ngram(["a", "a", "b"], order=1, weights=[1.0])
        assert model.conditional_prob("a") == 0.5
        assert model.conditional_prob("b") == 0.25
        assert model.conditional_prob("<unk>") == 0.25
        assert model.surprisal_bits("a") == 1.0

    def test_unk_surprisal_is_maximal_under_unigram(self):
        model = train_ngram(list("aaabbc"), order=1, weights=[1.0])
        unk = model.surprisal_bits("never-seen")
        assert all(unk >= model.surprisal_bits(w) for w in ["a", "b", "c"])

    def test_conditional_distribution_normalizes(self):
        rng = np.random.default_rng(7)
        vocab = [f"w{i}" for i in range(20)]
        tokens = [vocab[i] for i in rng.integers(0, 20, 500)]
        model = train_ngram(tokens, order=3, weights=[0.2, 0.3, 0.5])
        support = sorted(model.vocab_) + [model.unk_token]
        for _ in range(100):
            ctx = [vocab[i] for i in rng.integers(0, 20, rng.integers(0, 4))]
            total = sum(model.conditional_prob(w, ctx) for w in support)
            assert abs(total - 1.0) <= 1e-9

    def test_weight_validation(self):
        with pytest.raises(ConfigError):
            train_ngram(["a"], order=2, weights=[1.0])
        with pytest.raises(ConfigError):
            train_ngram(["a"], order=2, weights=[0.7, 0.4])
        with pytest.raises(ConfigError):
            train_ngram(["a"], order=1, weights=[-1.0])
        with pytest.raises(ConfigError):
            NgramLanguageModel(order=0).fit(["a"])

    def test_empty_and_reserved_token_rejected(self):
        with pytest.raises(ValidationError):
            train_ngram([], order=1, weights=[1.0])
        with pytest.raises(ValidationError):
            train_ngram(["a", "<unk>"], order=1, weights=[1.0])

    def test_fixed_vocab_smooths_unseen_words(self):
        model = NgramLanguageModel(order=1, weights=[1.0],
                                   vocab=["a", "b", "c"]).fit(["a", "a"])
        # c never occurs in the slice but is in the vocabulary
        assert model.conditional_prob("c") > 0.0
        support = ["a", "b", "c", model.unk_token]
        assert abs(sum(model.conditional_prob(w) for w in support) - 1.0) <= 1e-12

    def test_fixed_vocab_maps_training_oov_to_unk(self):
        model = NgramLanguageModel(order=1, weights=[1.0], vocab=["a"]).fit(["a", "zzz"])
        assert model.unigram_counts_[model.unk_token] == 1


class TestScoring:
    def test_order_one_collapses_to_one_value_per_form(self):
        tokens = list("abcabcaab")
        model = train_ngram(tokens, order=1, weights=[1.0])
        table = score_corpus(model, tokens)
        assert all(len(samples) == 1 for samples in table.per_word.values())
        assert table.source is Source.NGRAM_INTERNAL

    def test_total_samples_equal_token_count(self):
        tokens = list("abcabcaab")
        model = train_ngram(tokens, order=2, weights=[0.5, 0.5])
        assert score_corpus(model, tokens).n_samples() == len(tokens)

    def test_pure_bigram_deterministic_context_scores_zero(self):
        tokens = ["a", "b", "a", "b"]
        model = train_ngram(tokens, order=2, weights=[0.0, 1.0])
        table = score_corpus(model, tokens)
        b_samples = table.per_word["b"]
        assert b_samples[0].surprisal_bits == 0.0
        assert b_samples[0].count == 2

    def test_zero_probability_event_raises(self):
        model = train_ngram(["a", "b", "a", "c"], order=2, weights=[0.0, 1.0])
        with pytest.raises(NumericError, match="'b'"):
            model.score_tokens(["b", "b"])

    def test_train_fit_advantage_on_fixture(self, fixture_train_tokens,
                                            fixture_test_tokens):
        same = NgramLanguageModel(order=2).fit(fixture_test_tokens)
        disjoint = NgramLanguageModel(order=2).fit(fixture_train_tokens)
        assert (same.cross_entropy_bits(fixture_test_tokens)
                <= disjoint.cross_entropy_bits(fixture_test_tokens))

    def test_json_roundtrip_scores_identically(self):
        tokens = list("abcadbcaab")
        model = train_ngram(tokens, order=2, weights=[0.4, 0.6])
        clone = NgramLanguageModel.from_json(model.to_json())
        assert np.array_equal(model.score_tokens(tokens), clone.score_tokens(tokens))
        assert model.to_json() == clone.to_json()

    def test_estimator_params(self):
        model = NgramLanguageModel(order=3, unk_token="#u#")
        params = model.get_params()
        assert params["order"] == 3 and params["unk_token"] == "#u#"


def _external(rows: list[str]) -> str:
    return EXTERNAL_HEADER + "\n" + "\n".join(rows) + "\n"


class TestExternalIngestion:
    def test_subword_rows_sum(self):
        table = ingest_external(_external([
            "s1\t0\t0\twalking\t3.0",
            "s1\t0\t1\twalking\t1.5",
        ]))
        assert table.per_word["walking"] == tuple(
            [type(table.per_word["walking"][0])(4.5, 1)])
        assert table.source is Source.EXTERNAL

    def test_single_row_word_is_identity(self):
        table = ingest_external(_external(["s1\t0\t0\tcat\t2.25"]))
        assert table.per_word["cat"][0].surprisal_bits == 2.25

    def test_same_word_in_two_sentences_gives_two_samples(self):
        table = ingest_external(_external([
            "s1\t0\t0\tcat\t2.0",
            "s2\t5\t0\tcat\t3.0",
        ]))
        values = [(s.surprisal_bits, s.count) for s in table.per_word["cat"]]
        assert values == [(2.0, 1), (3.0, 1)]

    def test_malformed_row_names_line(self):
        with pytest.raises(ParseError, match="line 3"):
            ingest_external(_external(["s1\t0\t0\tcat\t2.0", "s1\t0\tcat\t2.0"]))
        with pytest.raises(ParseError, match="line 2"):
            ingest_external(_external(["s1\tzero\t0\tcat\t2.0"]))
        with pytest.raises(ParseError, match="line 1"):
            ingest_external("bad header\n")

    def test_negative_surprisal_rejected(self):
        with pytest.raises(ValidationError, match="negative"):
            ingest_external(_external(["s1\t0\t0\tcat\t-0.1"]))

    def test_duplicate_subword_key_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            ingest_external(_external([
                "s1\t0\t0\tcat\t2.0",
                "s1\t0\t0\tcat\t2.0",
            ]))

    def test_mismatched_form_within_word_rejected(self):
        with pytest.raises(ValidationError, match="disagrees"):
            ingest_external(_external([
                "s1\t0\t0\twalk\t2.0",
                "s1\t0\t1\twalks\t1.0",
            ]))

    def test_empty_file_rejected(self):
        with pytest.raises(ValidationError):
            ingest_external(EXTERNAL_HEADER + "\n")

    def test_accepts_bytes_and_crlf(self):
        raw = (EXTERNAL_HEADER + "\r\n" + "s1\t0\t0\tcat\t2.0\r\n").encode("utf-8")
        assert ingest_external(raw).per_word["cat"][0].surprisal_bits == 2.0

    def test_roundtrip_is_lossless(self):
        table = SurprisalTable.from_values(
            {"cat": [(2.0, 3), (3.5, 1)], "dog": [(0.25, 2)]}, Source.EXTERNAL)
        again = ingest_external(surprisal_to_tsv(table))
        assert again == table
        assert surprisal_to_tsv(again) == surprisal_to_tsv(table)

    def test_roundtrip_precision(self):
        value = -math.log2(1 / 3) + 1e-13
        table = SurprisalTable.from_values({"w": [(value, 1)]}, Source.EXTERNAL)
        again = ingest_external(surprisal_to_tsv(table))
        assert again.per_word["w"][0].surprisal_bits == value
