"""Corpus ingestion: tokenization, word-filtering protocols, and frequency counts.

Words are whitespace-separated maximal units. "Whitespace" here means the six
ASCII whitespace characters plus U+00A0; wider Unicode space classes are left
alone so that token boundaries stay easy to reason about across languages.
"""

from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Mapping

from .errors import ConfigError, ParseError, ValidationError

# The 32 ASCII marks: !"#$%&'()*+,-./:;<=>?@[\]^_`{|}~
DEFAULT_PUNCTUATION = frozenset(string.punctuation)

_WS_RE = re.compile(r"[ \t\n\r\f\v ]+")

FREQUENCY_HEADER = "form\tfrequency\trel_freq"


class FilterProtocol(Enum):
    """Which whitespace-separated tokens survive ingestion."""

    ALL = "all"
    NO_PUNCT = "nopunct"
    ALPHABET_ONLY = "alpha"


@dataclass(frozen=True)
class CorpusConfig:
    """Tokenization and filtering settings for one ingestion run.

    ``alphabet`` is the language's character inventory; it is only consulted
    under :attr:`FilterProtocol.ALPHABET_ONLY`. ``top_n_types`` bounds the
    number of retained word types (``None`` keeps all of them).
    """

    alphabet: frozenset[str] = frozenset()
    punctuation: frozenset[str] = DEFAULT_PUNCTUATION
    filter_protocol: FilterProtocol = FilterProtocol.ALL
    top_n_types: int | None = None
    lowercase: bool = False

    def __post_init__(self):
        if self.top_n_types is not None and self.top_n_types < 1:
            raise ConfigError("top_n_types must be >= 1 when bounded")
        if self.filter_protocol is FilterProtocol.ALPHABET_ONLY and not self.alphabet:
            raise ConfigError("alphabet-only filtering requires a nonempty alphabet")


@dataclass(frozen=True)
class WordRecord:
    """One retained word type with its counts."""

    form: str
    length: int
    frequency: int
    rel_freq: float


@dataclass(frozen=True)
class FrequencyTable:
    """Word types keyed by form, in canonical order (frequency desc, form asc).

    ``total_tokens`` counts the tokens that were ingested, so the retained
    frequencies may sum to less than it when top-N truncation dropped types.
    ``rel_freq`` is renormalized over the retained records.
    """

    records: dict[str, WordRecord]
    total_tokens: int

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, form: str) -> bool:
        return form in self.records

    def forms(self) -> tuple[str, ...]:
        return tuple(self.records)

    def rel_freq(self, form: str) -> float:
        return self.records[form].rel_freq

    def to_tsv(self) -> str:
        lines = [FREQUENCY_HEADER]
        for rec in self.records.values():
            lines.append(f"{rec.form}\t{rec.frequency}\t{rec.rel_freq:.17g}")
        return "\n".join(lines) + "\n"


def tokenize(text: str, config: CorpusConfig) -> list[str]:
    """Split ``text`` into tokens and apply the configured filter protocol."""
    if config.lowercase:
        text = text.lower()
    tokens = [t for t in _WS_RE.split(text) if t]
    protocol = config.filter_protocol
    if protocol is FilterProtocol.ALL:
        return tokens
    if protocol is FilterProtocol.NO_PUNCT:
        punct = config.punctuation
        return [t for t in tokens if not any(ch in punct for ch in t)]
    alphabet = config.alphabet
    return [t for t in tokens if all(ch in alphabet for ch in t)]


def ingest_and_filter(stream: IO[bytes] | bytes, config: CorpusConfig) -> list[str]:
    """Decode a UTF-8 byte stream and return its filtered tokens in order.

    Raises :class:`ParseError` naming the byte offset on invalid UTF-8. An
    empty stream yields an empty list.
    """
    data = stream if isinstance(stream, bytes) else stream.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"invalid UTF-8 at byte offset {exc.start}") from exc
    return tokenize(text, config)


def count_shard(tokens: Iterable[str]) -> Counter[str]:
    """Count one shard of the token stream; shards merge with :func:`merge_counts`."""
    return Counter(tokens)


def merge_counts(*shards: Mapping[str, int]) -> Counter[str]:
    """Merge shard counts; equals counting the concatenated stream."""
    total: Counter[str] = Counter()
    for shard in shards:
        total.update(shard)
    return total


def table_from_counts(
    counts: Mapping[str, int],
    total_tokens: int,
    top_n_types: int | None = None,
) -> FrequencyTable:
    """Build a :class:`FrequencyTable` from raw counts.

    When ``top_n_types`` is bounded, only the N most frequent forms survive;
    ties at the boundary break lexicographically ascending before truncation.
    ``rel_freq`` is renormalized over the retained forms.
    """
    for form, freq in counts.items():
        if freq < 1:
            raise ValidationError(f"non-positive count for form {form!r}")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if top_n_types is not None:
        ranked = ranked[:top_n_types]
    retained_total = sum(freq for _, freq in ranked)
    records = {
        form: WordRecord(form=form, length=len(form), frequency=freq,
                         rel_freq=freq / retained_total)
        for form, freq in ranked
    }
    return FrequencyTable(records=records, total_tokens=total_tokens)


def count_frequencies(tokens: Iterable[str], config: CorpusConfig) -> FrequencyTable:
    """Count token frequencies under ``config`` (tokens are already filtered)."""
    tokens = list(tokens)
    if not tokens:
        return FrequencyTable(records={}, total_tokens=0)
    counts = count_shard(tokens)
    return table_from_counts(counts, total_tokens=len(tokens),
                             top_n_types=config.top_n_types)


def frequency_table_from_tsv(text: str) -> FrequencyTable:
    """Parse the ``form<TAB>frequency<TAB>rel_freq`` format back into a table.

    ``total_tokens`` is reconstructed as the sum of retained frequencies (the
    count of dropped tokens is not serialized).
    """
    lines = text.split("\n")
    if not lines or lines[0].rstrip("\r") != FREQUENCY_HEADER:
        raise ParseError(f"expected header {FREQUENCY_HEADER!r}", line_no=1)
    records: dict[str, WordRecord] = {}
    for no, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", line_no=no)
        form, freq_s, rel_s = parts
        try:
            freq = int(freq_s)
            rel = float(rel_s)
        except ValueError as exc:
            raise ParseError(f"bad numeric field: {exc}", line_no=no) from exc
        if freq < 1:
            raise ValidationError(f"line {no}: frequency must be >= 1")
        if form in records:
            raise ValidationError(f"line {no}: duplicate form {form!r}")
        records[form] = WordRecord(form=form, length=len(form), frequency=freq, rel_freq=rel)
    total_rel = sum(rec.rel_freq for rec in records.values())
    if records and abs(total_rel - 1.0) > 1e-9:
        raise ValidationError(f"rel_freq column sums to {total_rel!r}, expected 1")
    total = sum(rec.frequency for rec in records.values())
    return FrequencyTable(records=records, total_tokens=total)


def read_alphabet(path: str | Path) -> frozenset[str]:
    """Read an alphabet file: every non-whitespace character in it is a member."""
    text = Path(path).read_text(encoding="utf-8")
    chars = frozenset("".join(text.split()))
    if not chars:
        raise ValidationError(f"alphabet file {path} contains no characters")
    return chars
