"""Per-word contextual surprisal samples.

Two sources feed the same table type: an in-repo interpolated n-gram model
(adequate at desk scale) and a TSV ingestion path for surprisals computed by
any external model. Surprisal is always in bits (base-2 logs); downstream
evaluation metrics are scale invariant, so the base choice carries no weight.
"""

from __future__ import annotations

import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .errors import ConfigError, NumericError, ParseError, ValidationError

EXTERNAL_HEADER = "sentence_id\tword_index\tsubword_index\tword_form\tsurprisal_bits"


class Source(Enum):
    NGRAM_INTERNAL = "ngram_internal"
    EXTERNAL = "external"


@dataclass(frozen=True)
class SurprisalSample:
    """One observed surprisal value and how many context occurrences share it."""

    surprisal_bits: float
    count: int = 1


@dataclass(frozen=True)
class SurprisalTable:
    """Per-word multisets of contextual surprisal observations.

    Samples are stored aggregated (equal values share one entry) and sorted by
    value, so two tables with the same observation multisets compare equal.
    """

    per_word: dict[str, tuple[SurprisalSample, ...]]
    source: Source

    @classmethod
    def from_values(
        cls,
        per_word: Mapping[str, Iterable[tuple[float, int]]],
        source: Source,
    ) -> "SurprisalTable":
        """Aggregate ``(value, count)`` observations into a canonical table."""
        table: dict[str, tuple[SurprisalSample, ...]] = {}
        for form, obs in per_word.items():
            agg: Counter[float] = Counter()
            for value, count in obs:
                value = float(value)
                if not math.isfinite(value) or value < 0.0:
                    raise ValidationError(
                        f"surprisal for {form!r} must be finite and >= 0, got {value!r}")
                if count < 1:
                    raise ValidationError(f"sample count for {form!r} must be >= 1")
                agg[value] += int(count)
            if not agg:
                raise ValidationError(f"form {form!r} has no surprisal samples")
            table[form] = tuple(SurprisalSample(v, agg[v]) for v in sorted(agg))
        return cls(per_word=table, source=source)

    def __len__(self) -> int:
        return len(self.per_word)

    def __contains__(self, form: str) -> bool:
        return form in self.per_word

    def forms(self) -> tuple[str, ...]:
        return tuple(self.per_word)

    def n_samples(self) -> int:
        return sum(s.count for samples in self.per_word.values() for s in samples)

    def values_counts(self, form: str) -> tuple[np.ndarray, np.ndarray]:
        samples = self.per_word[form]
        values = np.array([s.surprisal_bits for s in samples], dtype=float)
        counts = np.array([s.count for s in samples], dtype=float)
        return values, counts

    def mean_bits(self, form: str) -> float:
        values, counts = self.values_counts(form)
        return float((values * counts).sum() / counts.sum())

    def second_moment_bits(self, form: str) -> float:
        values, counts = self.values_counts(form)
        return float((values * values * counts).sum() / counts.sum())

    def variance_bits(self, form: str) -> float:
        mean = self.mean_bits(form)
        return self.second_moment_bits(form) - mean * mean

    def flattened(self) -> tuple[tuple[str, ...], np.ndarray, np.ndarray, np.ndarray]:
        """Flat arrays over all samples: (forms, values, counts, word_index)."""
        forms = tuple(self.per_word)
        values, counts, idx = [], [], []
        for i, form in enumerate(forms):
            for s in self.per_word[form]:
                values.append(s.surprisal_bits)
                counts.append(s.count)
                idx.append(i)
        return (forms, np.array(values, dtype=float),
                np.array(counts, dtype=float), np.array(idx, dtype=np.intp))


class NgramLanguageModel(BaseEstimator):
    """Interpolated n-gram model with add-one unk smoothing.

    The conditional probability is a weighted mixture of maximum-likelihood
    components of increasing order. By default the vocabulary is the set of
    training forms and the order-1 component adds a single pseudo-count for
    the reserved unk symbol, so every word in vocab + {unk} has positive
    unigram probability. With an explicit ``vocab``, training tokens outside
    it are mapped to unk and the add-one smoothing covers the whole
    vocabulary (words never seen in the training slice still need mass, and
    cross-entropies only compare across training sizes when the vocabulary is
    held fixed). Higher-order components whose context was never observed (or
    is shorter than they need) fall back to the unigram component, which
    keeps the conditional distribution normalized for arbitrary contexts.
    """

    def __init__(self, order: int = 2, weights: Sequence[float] | None = None,
                 unk_token: str = "<unk>", vocab: Iterable[str] | None = None):
        self.order = order
        self.weights = weights
        self.unk_token = unk_token
        self.vocab = vocab

    def fit(self, tokens: Iterable[str], y=None) -> "NgramLanguageModel":
        if not isinstance(self.order, int) or self.order < 1:
            raise ConfigError(f"order must be an integer >= 1, got {self.order!r}")
        if self.weights is None:
            weights = tuple(1.0 / self.order for _ in range(self.order))
        else:
            weights = tuple(float(w) for w in self.weights)
        if len(weights) != self.order:
            raise ConfigError(f"expected {self.order} interpolation weights, got {len(weights)}")
        if any(w < 0.0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
            raise ConfigError(f"interpolation weights must lie on the simplex: {weights}")

        tokens = list(tokens)
        if not tokens:
            raise ValidationError("cannot train an n-gram model on an empty token sequence")
        if self.unk_token in set(tokens):
            raise ValidationError(
                f"the reserved unk symbol {self.unk_token!r} occurs in the training tokens")

        self.weights_ = weights
        if self.vocab is None:
            self.fixed_vocab_ = False
            self.vocab_ = frozenset(tokens)
        else:
            self.fixed_vocab_ = True
            self.vocab_ = frozenset(self.vocab) - {self.unk_token}
            if not self.vocab_:
                raise ConfigError("explicit vocabulary must not be empty")
            tokens = [t if t in self.vocab_ else self.unk_token for t in tokens]
        self.n_tokens_ = len(tokens)
        self.unigram_counts_ = Counter(tokens)

        # counts_[k][context][word] and context_totals_[k][context], contexts
        # being the k-1 preceding tokens; short starts are not counted.
        self.counts_: dict[int, dict[tuple[str, ...], Counter[str]]] = {}
        self.context_totals_: dict[int, Counter[tuple[str, ...]]] = {}
        for k in range(2, self.order + 1):
            cont: dict[tuple[str, ...], Counter[str]] = defaultdict(Counter)
            totals: Counter[tuple[str, ...]] = Counter()
            for i in range(k - 1, len(tokens)):
                ctx = tuple(tokens[i - k + 1:i])
                cont[ctx][tokens[i]] += 1
                totals[ctx] += 1
            self.counts_[k] = dict(cont)
            self.context_totals_[k] = totals
        return self

    def _map(self, token: str) -> str:
        return token if token in self.vocab_ else self.unk_token

    def _unigram_prob(self, word: str) -> float:
        count = self.unigram_counts_.get(word, 0)
        if self.fixed_vocab_:
            return (count + 1) / (self.n_tokens_ + len(self.vocab_) + 1)
        return (count + (1 if word == self.unk_token else 0)) / (self.n_tokens_ + 1)

    def conditional_prob(self, word: str, context: Sequence[str] = ()) -> float:
        """Mixture probability of ``word`` after ``context`` (most recent last)."""
        check_is_fitted(self, "weights_")
        w = self._map(word)
        prob = 0.0
        for k, lam in enumerate(self.weights_, start=1):
            if lam == 0.0:
                continue
            if k == 1:
                prob += lam * self._unigram_prob(w)
                continue
            need = k - 1
            if len(context) < need:
                prob += lam * self._unigram_prob(w)
                continue
            ctx = tuple(self._map(t) for t in context[-need:])
            totals = self.context_totals_[k]
            if ctx not in totals:
                prob += lam * self._unigram_prob(w)
                continue
            prob += lam * self.counts_[k][ctx].get(w, 0) / totals[ctx]
        return prob

    def surprisal_bits(self, word: str, context: Sequence[str] = ()) -> float:
        prob = self.conditional_prob(word, context)
        if prob <= 0.0:
            raise NumericError(
                f"zero probability for {word!r} in context {tuple(context)!r}; "
                "give the order-1 component a nonzero weight to avoid this")
        return -math.log2(prob)

    def score_tokens(self, tokens: Sequence[str]) -> np.ndarray:
        """Per-token surprisal of a sequence, with contexts truncated to order-1."""
        check_is_fitted(self, "weights_")
        tokens = list(tokens)
        out = np.empty(len(tokens), dtype=float)
        window = self.order - 1
        for i, token in enumerate(tokens):
            context = tokens[max(0, i - window):i]
            out[i] = self.surprisal_bits(token, context)
        return out

    def surprisal_table(self, tokens: Sequence[str]) -> SurprisalTable:
        """One sample per token occurrence, attached to the token's form."""
        tokens = list(tokens)
        if not tokens:
            raise ValidationError("cannot score an empty token sequence")
        bits = self.score_tokens(tokens)
        per_word: dict[str, list[tuple[float, int]]] = defaultdict(list)
        for token, value in zip(tokens, bits):
            per_word[token].append((float(value), 1))
        return SurprisalTable.from_values(per_word, source=Source.NGRAM_INTERNAL)

    def cross_entropy_bits(self, tokens: Sequence[str]) -> float:
        """Mean per-token surprisal of ``tokens`` under the model."""
        return float(self.score_tokens(tokens).mean())

    def to_json(self) -> str:
        check_is_fitted(self, "weights_")
        contexts = {
            str(k): sorted(
                [list(ctx) + [word, count] for ctx, words in table.items()
                 for word, count in words.items()]
            )
            for k, table in self.counts_.items()
        }
        payload = {
            "order": self.order,
            "weights": list(self.weights_),
            "unk_token": self.unk_token,
            "vocab": sorted(self.vocab_) if self.fixed_vocab_ else None,
            "n_tokens": self.n_tokens_,
            "unigram": {w: c for w, c in sorted(self.unigram_counts_.items())},
            "contexts": contexts,
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NgramLanguageModel":
        try:
            payload = json.loads(text)
            order = payload["order"]
            vocab = payload.get("vocab")
            model = cls(order=order, weights=tuple(payload["weights"]),
                        unk_token=payload["unk_token"],
                        vocab=None if vocab is None else tuple(vocab))
            model.weights_ = tuple(float(w) for w in payload["weights"])
            model.n_tokens_ = int(payload["n_tokens"])
            model.unigram_counts_ = Counter(
                {w: int(c) for w, c in payload["unigram"].items()})
            model.fixed_vocab_ = vocab is not None
            model.vocab_ = (frozenset(vocab) if vocab is not None
                            else frozenset(model.unigram_counts_))
            model.counts_ = {}
            model.context_totals_ = {}
            for k_s, rows in payload["contexts"].items():
                k = int(k_s)
                cont: dict[tuple[str, ...], Counter[str]] = defaultdict(Counter)
                totals: Counter[tuple[str, ...]] = Counter()
                for row in rows:
                    *ctx, word, count = row
                    cont[tuple(ctx)][word] += int(count)
                    totals[tuple(ctx)] += int(count)
                model.counts_[k] = dict(cont)
                model.context_totals_[k] = totals
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"bad model file: {exc}") from exc
        return model


def train_ngram(tokens: Iterable[str], order: int,
                weights: Sequence[float]) -> NgramLanguageModel:
    """Train an interpolated n-gram model (see :class:`NgramLanguageModel`)."""
    return NgramLanguageModel(order=order, weights=tuple(weights)).fit(tokens)


def score_corpus(model: NgramLanguageModel, tokens: Sequence[str]) -> SurprisalTable:
    """Score every token occurrence and group the samples by form."""
    return model.surprisal_table(tokens)


def ingest_external(stream: IO[bytes] | IO[str] | bytes | str) -> SurprisalTable:
    """Read externally computed per-subword surprisals.

    Rows sharing (sentence_id, word_index) describe one word occurrence; its
    surprisal is the sum of the subword rows' bits and contributes one sample
    to the word's form. The form column must repeat identically across a
    word's subword rows.
    """
    if isinstance(stream, (bytes, str)):
        data = stream
    else:
        data = stream.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"invalid UTF-8 at byte offset {exc.start}") from exc

    lines = data.split("\n")
    if not lines or lines[0].rstrip("\r") != EXTERNAL_HEADER:
        raise ParseError(f"expected header {EXTERNAL_HEADER!r}", line_no=1)

    seen: set[tuple[str, int, int]] = set()
    groups: dict[tuple[str, int], tuple[str, float]] = {}
    order: list[tuple[str, int]] = []
    for no, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ParseError(f"expected 5 tab-separated fields, got {len(parts)}", line_no=no)
        sid, wi_s, si_s, form, bits_s = parts
        try:
            wi = int(wi_s)
            si = int(si_s)
            bits = float(bits_s)
        except ValueError as exc:
            raise ParseError(f"bad numeric field: {exc}", line_no=no) from exc
        if not math.isfinite(bits):
            raise ValidationError(f"line {no}: surprisal_bits must be finite")
        if bits < 0.0:
            raise ValidationError(f"line {no}: negative surprisal {bits!r}")
        key = (sid, wi, si)
        if key in seen:
            raise ValidationError(f"line {no}: duplicate subword row {key!r}")
        seen.add(key)
        gkey = (sid, wi)
        if gkey not in groups:
            groups[gkey] = (form, bits)
            order.append(gkey)
        else:
            prev_form, prev_bits = groups[gkey]
            if form != prev_form:
                raise ValidationError(
                    f"line {no}: word_form {form!r} disagrees with {prev_form!r} "
                    f"for {gkey!r}")
            groups[gkey] = (form, prev_bits + bits)

    per_word: dict[str, list[tuple[float, int]]] = defaultdict(list)
    for gkey in order:
        form, bits = groups[gkey]
        per_word[form].append((bits, 1))
    if not per_word:
        raise ValidationError("external surprisal file contains no rows")
    return SurprisalTable.from_values(per_word, source=Source.EXTERNAL)


def surprisal_to_tsv(table: SurprisalTable) -> str:
    """Serialize a table in the external wire format (one row per occurrence).

    Sample counts are expanded into separate single-subword rows under
    synthetic sentence ids, so re-ingesting reproduces an equal table.
    """
    lines = [EXTERNAL_HEADER]
    sid = 0
    for form in sorted(table.per_word):
        for sample in table.per_word[form]:
            for _ in range(sample.count):
                lines.append(f"s{sid}\t0\t0\t{form}\t{sample.surprisal_bits:.17g}")
                sid += 1
    return "\n".join(lines) + "\n"
