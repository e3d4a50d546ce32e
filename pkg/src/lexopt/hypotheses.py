"""Per-word length predictions for the three communicative-cost hypotheses.

All predictors omit their proportionality constants (1/capacity, 1/log K):
downstream evaluation is scale invariant, so only the per-word profile
matters. Words whose prediction would be zero or undefined (relative
frequency 1, all-zero surprisal) are excluded and logged rather than clamped;
clamping would silently distort rank correlations.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from enum import Enum
from math import log2
from typing import Mapping

from .corpus import FrequencyTable
from .errors import ParseError, ValidationError
from .surprisal import SurprisalTable

logger = logging.getLogger(__name__)

PREDICTIONS_HEADER = "form\thypothesis\tpredicted_length"


class Hypothesis(Enum):
    ZIPF = "zipf"
    CCH_LOWER = "cch_lower"
    CCH = "cch"


@dataclass(frozen=True)
class PredictionSet:
    """Predicted lengths (up to a constant) for one hypothesis."""

    hypothesis: Hypothesis
    per_word: dict[str, float]
    config_digest: str


def config_digest(payload: Mapping[str, object]) -> str:
    """Short stable digest of a configuration mapping, for provenance fields."""
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"),
                       ensure_ascii=False, default=str)
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def _digest_for(hypothesis: Hypothesis, provenance: Mapping[str, object] | None) -> str:
    payload = {"hypothesis": hypothesis.value}
    if provenance:
        payload.update(provenance)
    return config_digest(payload)


def _log_excluded(hypothesis: Hypothesis, excluded: list[str], reason: str) -> None:
    if excluded:
        logger.warning("%s: excluded %d word(s) (%s), e.g. %r",
                       hypothesis.value, len(excluded), reason, excluded[:5])


def predict_zipf(freq: FrequencyTable,
                 provenance: Mapping[str, object] | None = None) -> PredictionSet:
    """Length prediction from the unigram distribution: -log2 rel_freq."""
    if not freq.records:
        raise ValidationError("cannot predict from an empty frequency table")
    per_word: dict[str, float] = {}
    excluded: list[str] = []
    for rec in freq.records.values():
        if rec.rel_freq <= 0.0:
            excluded.append(rec.form)
            continue
        pred = -log2(rec.rel_freq)
        if pred > 0.0:
            per_word[rec.form] = pred
        else:
            excluded.append(rec.form)
    _log_excluded(Hypothesis.ZIPF, excluded, "rel_freq of 1 or 0")
    return PredictionSet(Hypothesis.ZIPF, per_word, _digest_for(Hypothesis.ZIPF, provenance))


def predict_cch_lower(table: SurprisalTable,
                      provenance: Mapping[str, object] | None = None) -> PredictionSet:
    """Length prediction from the count-weighted mean surprisal per word."""
    per_word: dict[str, float] = {}
    excluded: list[str] = []
    for form in table.per_word:
        mean = table.mean_bits(form)
        if mean > 0.0:
            per_word[form] = mean
        else:
            excluded.append(form)
    _log_excluded(Hypothesis.CCH_LOWER, excluded, "all-zero surprisal")
    return PredictionSet(Hypothesis.CCH_LOWER, per_word,
                         _digest_for(Hypothesis.CCH_LOWER, provenance))


def predict_cch(table: SurprisalTable,
                provenance: Mapping[str, object] | None = None) -> PredictionSet:
    """Length prediction from the surprisal second-moment-to-mean ratio.

    Equals mean surprisal plus its variance-to-mean ratio. Words with all-zero
    samples would divide by zero and are excluded.
    """
    per_word: dict[str, float] = {}
    excluded: list[str] = []
    for form in table.per_word:
        values, counts = table.values_counts(form)
        denom = float((values * counts).sum())
        if denom <= 0.0:
            excluded.append(form)
            continue
        per_word[form] = float((values * values * counts).sum()) / denom
    _log_excluded(Hypothesis.CCH, excluded, "division by zero: all-zero surprisal")
    return PredictionSet(Hypothesis.CCH, per_word, _digest_for(Hypothesis.CCH, provenance))


def predictions_to_tsv(pred: PredictionSet) -> str:
    lines = [PREDICTIONS_HEADER]
    for form in sorted(pred.per_word):
        lines.append(f"{form}\t{pred.hypothesis.value}\t{pred.per_word[form]:.17g}")
    return "\n".join(lines) + "\n"


def predictions_from_tsv(text: str) -> PredictionSet:
    lines = text.split("\n")
    if not lines or lines[0].rstrip("\r") != PREDICTIONS_HEADER:
        raise ParseError(f"expected header {PREDICTIONS_HEADER!r}", line_no=1)
    hypothesis: Hypothesis | None = None
    per_word: dict[str, float] = {}
    for no, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", line_no=no)
        form, hyp_s, value_s = parts
        try:
            hyp = Hypothesis(hyp_s)
        except ValueError as exc:
            raise ParseError(f"unknown hypothesis {hyp_s!r}", line_no=no) from exc
        if hypothesis is None:
            hypothesis = hyp
        elif hyp is not hypothesis:
            raise ValidationError(f"line {no}: mixed hypotheses in one file")
        try:
            value = float(value_s)
        except ValueError as exc:
            raise ParseError(f"bad predicted_length: {exc}", line_no=no) from exc
        if form in per_word:
            raise ValidationError(f"line {no}: duplicate form {form!r}")
        per_word[form] = value
    if hypothesis is None:
        raise ValidationError("prediction file contains no rows")
    return PredictionSet(hypothesis, per_word,
                         _digest_for(hypothesis, {"source": "tsv"}))
