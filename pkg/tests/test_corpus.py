import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexopt.corpus import (CorpusConfig, FilterProtocol, count_frequencies,
                           count_shard, frequency_table_from_tsv,
                           ingest_and_filter, merge_counts, read_alphabet,
                           table_from_counts, tokenize)
from lexopt.errors import ConfigError, ParseError, ValidationError

LATIN = frozenset("abcdefghijklmnopqrstuvwxyzñ")


def _config(protocol=FilterProtocol.ALL, **kwargs):
    return CorpusConfig(filter_protocol=protocol, **kwargs)


class TestFiltering:
    def test_nopunct_drops_token_with_punctuation(self):
        tokens = tokenize("the cat, sat", _config(FilterProtocol.NO_PUNCT))
        assert tokens == ["the", "sat"]

    def test_all_keeps_every_token(self):
        tokens = tokenize("the cat, sat", _config(FilterProtocol.ALL))
        assert tokens == ["the", "cat,", "sat"]

    def test_alphabet_only_drops_token_with_digit(self):
        # a + n-tilde + Cyrillic o + digit; the digit alone disqualifies it
        token = "añо1"
        config = _config(FilterProtocol.ALPHABET_ONLY, alphabet=LATIN)
        assert tokenize(f"{token}", config) == []

    def test_alphabet_only_keeps_alphabet_words(self):
        config = _config(FilterProtocol.ALPHABET_ONLY, alphabet=LATIN)
        assert tokenize("mañana x9 ok", config) == ["mañana", "ok"]

    def test_whitespace_includes_crlf_tabs_nbsp(self):
        text = "a\tb\r\nc d  e\x0bf"
        assert tokenize(text, _config()) == list("abcdef")

    def test_unicode_line_separator_is_not_whitespace(self):
        assert tokenize("a b", _config()) == ["a b"]

    def test_lowercase_applies_before_filtering(self):
        config = CorpusConfig(filter_protocol=FilterProtocol.ALPHABET_ONLY,
                              alphabet=LATIN, lowercase=True)
        assert tokenize("The CAT", config) == ["the", "cat"]

    def test_ordering_preserved(self):
        assert tokenize("b a c a", _config()) == ["b", "a", "c", "a"]


class TestIngest:
    def test_empty_stream_yields_empty_sequence(self):
        assert ingest_and_filter(b"", _config()) == []

    def test_invalid_utf8_names_byte_offset(self):
        with pytest.raises(ParseError, match="byte offset 4"):
            ingest_and_filter(b"abcd\xff", _config())

    def test_reads_file_objects(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_bytes("a b\nc\r\nd\n".encode("utf-8"))
        with open(path, "rb") as fh:
            assert ingest_and_filter(fh, _config()) == ["a", "b", "c", "d"]


class TestCounting:
    def test_hand_counts(self):
        table = count_frequencies(["a", "a", "b"], _config())
        assert table.records["a"].frequency == 2
        assert table.records["b"].frequency == 1
        assert table.records["a"].rel_freq == pytest.approx(2 / 3, rel=1e-15)
        assert table.records["b"].rel_freq == pytest.approx(1 / 3, rel=1e-15)
        assert table.total_tokens == 3

    def test_top_n_truncates_and_renormalizes(self):
        table = count_frequencies(list("aabc"), CorpusConfig(top_n_types=2))
        assert table.forms() == ("a", "b")
        assert table.records["a"].rel_freq == pytest.approx(2 / 3, rel=1e-15)
        assert table.records["b"].rel_freq == pytest.approx(1 / 3, rel=1e-15)
        assert table.total_tokens == 4

    def test_top_n_tie_breaks_lexicographically(self):
        table = count_frequencies(["b", "c", "a", "a"], CorpusConfig(top_n_types=2))
        assert table.forms() == ("a", "b")

    def test_empty_tokens_give_empty_table(self):
        table = count_frequencies([], _config())
        assert len(table) == 0
        assert table.total_tokens == 0

    def test_length_counts_code_points(self):
        table = count_frequencies(["año"], _config())
        assert table.records["año"].length == 3

    def test_sharded_counting_matches_sequential(self):
        tokens = list("abracadabra") * 7
        merged = merge_counts(count_shard(tokens[:20]), count_shard(tokens[20:50]),
                              count_shard(tokens[50:]))
        assert merged == count_shard(tokens)
        sharded = table_from_counts(merged, total_tokens=len(tokens))
        assert sharded == count_frequencies(tokens, _config())

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            CorpusConfig(top_n_types=0)
        with pytest.raises(ConfigError):
            CorpusConfig(filter_protocol=FilterProtocol.ALPHABET_ONLY)


class TestSerialization:
    def test_tsv_roundtrip_preserves_bytes(self):
        table = count_frequencies(list("aaabbc") + ["ñu"], CorpusConfig(top_n_types=3))
        text = table.to_tsv()
        assert frequency_table_from_tsv(text).to_tsv() == text

    def test_tsv_roundtrip_preserves_records(self):
        table = count_frequencies(list("aaabbc"), _config())
        parsed = frequency_table_from_tsv(table.to_tsv())
        assert parsed == table

    def test_determinism(self):
        tokens = list("the quick brown fox the the quick".split())
        a = count_frequencies(tokens, _config()).to_tsv()
        b = count_frequencies(list(tokens), _config()).to_tsv()
        assert a == b

    def test_parse_errors_carry_line_numbers(self):
        with pytest.raises(ParseError, match="line 1"):
            frequency_table_from_tsv("wrong\theader\n")
        with pytest.raises(ParseError, match="line 3"):
            frequency_table_from_tsv("form\tfrequency\trel_freq\na\t2\t1.0\nb\tx\t0.0\n")

    def test_rel_freq_must_sum_to_one(self):
        with pytest.raises(ValidationError):
            frequency_table_from_tsv("form\tfrequency\trel_freq\na\t2\t0.4\n")

    def test_read_alphabet(self, tmp_path):
        path = tmp_path / "alpha.txt"
        path.write_text("abc\ndefñ\n", encoding="utf-8")
        assert read_alphabet(path) == frozenset("abcdefñ")


@settings(max_examples=60, deadline=None)
@given(st.text(alphabet=string.ascii_lowercase + string.digits + ",.;! \t\n", max_size=300))
def test_filter_monotonicity(text):
    # The configured alphabet excludes all punctuation, so the protocols nest.
    alphabet = frozenset(string.ascii_lowercase)
    n_all = len(tokenize(text, _config(FilterProtocol.ALL)))
    n_nopunct = len(tokenize(text, _config(FilterProtocol.NO_PUNCT)))
    n_alpha = len(tokenize(text, _config(FilterProtocol.ALPHABET_ONLY, alphabet=alphabet)))
    assert n_alpha <= n_nopunct <= n_all


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c", "dd", "eñe"]), min_size=1, max_size=60),
       st.integers(min_value=1, max_value=5))
def test_rel_freq_renormalizes_after_truncation(tokens, top_n):
    table = count_frequencies(tokens, CorpusConfig(top_n_types=top_n))
    assert abs(sum(r.rel_freq for r in table.records.values()) - 1.0) <= 1e-9
    assert sum(r.frequency for r in table.records.values()) <= table.total_tokens
