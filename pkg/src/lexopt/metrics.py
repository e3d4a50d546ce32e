"""Evaluation metrics: rank and linear correlations, and the weighted
no-intercept regression whose weighted MSE scores each hypothesis.

The correlations are computed directly (scipy stays a test-side oracle so the
two routes remain independent).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .hypotheses import PredictionSet

REPORT_CSV_HEADER = "hypothesis,language,metric,value"
_METRIC_FIELDS = ("spearman", "pearson", "slope", "weighted_mse", "n_words")


def _as_vector(x: Sequence[float] | np.ndarray, name: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if not np.isfinite(v).all():
        raise ValidationError(f"{name} contains non-finite values")
    return v


def _check_pair(x: np.ndarray, y: np.ndarray) -> None:
    if len(x) != len(y):
        raise ValidationError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValidationError("correlation needs at least 2 points")
    if (x == x[0]).all() or (y == y[0]).all():
        raise ValidationError("correlation is undefined for a constant vector")


def average_ranks(x: Sequence[float] | np.ndarray) -> np.ndarray:
    """1-based ranks; tied values all receive the mean of their rank range."""
    v = _as_vector(x, "x")
    order = np.argsort(v, kind="mergesort")
    ranks = np.empty(len(v), dtype=float)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation."""
    xv = _as_vector(x, "x")
    yv = _as_vector(y, "y")
    _check_pair(xv, yv)
    dx = xv - xv.mean()
    dy = yv - yv.mean()
    r = float(np.dot(dx, dy) / math.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))
    return min(1.0, max(-1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of average-ranked vectors."""
    xv = _as_vector(x, "x")
    yv = _as_vector(y, "y")
    _check_pair(xv, yv)
    return pearson(average_ranks(xv), average_ranks(yv))


class FitResult(NamedTuple):
    slope: float
    weighted_mse: float


def weighted_fit(pred: Sequence[float], obs_len: Sequence[float],
                 weight: Sequence[float]) -> FitResult:
    """No-intercept least squares of observed lengths on predictions.

    The slope and the mean squared error both weight each word's term, so the
    result is robust to floods of low-weight words and invariant to rescaling
    the predictions (the slope absorbs any constant).
    """
    p = _as_vector(pred, "pred")
    l = _as_vector(obs_len, "obs_len")
    w = _as_vector(weight, "weight")
    if not (len(p) == len(l) == len(w)):
        raise ValidationError("pred, obs_len, and weight must have equal lengths")
    if (w < 0).any():
        raise ValidationError("weights must be non-negative")
    w_total = w.sum()
    if w_total <= 0.0:
        raise ValidationError("weights must not all be zero")
    denom = float(np.dot(w, p * p))
    if denom <= 0.0:
        raise ValidationError("degenerate fit: all weighted predictions are zero")
    slope = float(np.dot(w, p * l)) / denom
    resid = l - slope * p
    mse = float(np.dot(w / w_total, resid * resid))
    return FitResult(slope=slope, weighted_mse=mse)


@dataclass(frozen=True)
class HypothesisMetrics:
    spearman: float
    pearson: float
    slope: float
    weighted_mse: float
    n_words: int


@dataclass(frozen=True)
class EvalReport:
    """Per-hypothesis evaluation metrics plus the run's config digest."""

    per_hypothesis: dict[str, HypothesisMetrics]
    config_digest: str


def evaluate_predictions(pred: PredictionSet,
                         observed_lengths: Mapping[str, float],
                         weights: Mapping[str, float]) -> HypothesisMetrics:
    """Score one prediction set against observed lengths.

    Only words present in the predictions, the observed lengths, and the
    weights contribute.
    """
    forms = sorted(f for f in pred.per_word if f in observed_lengths and f in weights)
    if len(forms) < 2:
        raise ValidationError(
            f"{pred.hypothesis.value}: need at least 2 shared words, got {len(forms)}")
    p = np.array([pred.per_word[f] for f in forms])
    l = np.array([float(observed_lengths[f]) for f in forms])
    w = np.array([float(weights[f]) for f in forms])
    fit = weighted_fit(p, l, w)
    return HypothesisMetrics(
        spearman=spearman(p, l),
        pearson=pearson(p, l),
        slope=fit.slope,
        weighted_mse=fit.weighted_mse,
        n_words=len(forms),
    )


def build_report(predictions: Iterable[PredictionSet],
                 observed_lengths: Mapping[str, float],
                 weights: Mapping[str, float],
                 config_digest: str) -> EvalReport:
    per_hypothesis = {
        pred.hypothesis.value: evaluate_predictions(pred, observed_lengths, weights)
        for pred in predictions
    }
    return EvalReport(per_hypothesis=per_hypothesis, config_digest=config_digest)


def report_to_json(report: EvalReport) -> str:
    payload = {
        "config_digest": report.config_digest,
        "per_hypothesis": {
            name: {
                "spearman": m.spearman,
                "pearson": m.pearson,
                "slope": m.slope,
                "weighted_mse": m.weighted_mse,
                "n_words": m.n_words,
            }
            for name, m in report.per_hypothesis.items()
        },
    }
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def report_from_json(text: str) -> EvalReport:
    try:
        payload = json.loads(text)
        per_hypothesis = {
            name: HypothesisMetrics(
                spearman=float(m["spearman"]),
                pearson=float(m["pearson"]),
                slope=float(m["slope"]),
                weighted_mse=float(m["weighted_mse"]),
                n_words=int(m["n_words"]),
            )
            for name, m in payload["per_hypothesis"].items()
        }
        return EvalReport(per_hypothesis=per_hypothesis,
                          config_digest=str(payload["config_digest"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad report file: {exc}") from exc


def report_to_text(report: EvalReport) -> str:
    """Aligned-column rendering for terminals."""
    names = sorted(report.per_hypothesis)
    header = f"{'hypothesis':<12}{'spearman':>12}{'pearson':>12}{'slope':>12}{'w_mse':>12}{'n_words':>9}"
    lines = [header, "-" * len(header)]
    for name in names:
        m = report.per_hypothesis[name]
        lines.append(f"{name:<12}{m.spearman:>12.4f}{m.pearson:>12.4f}"
                     f"{m.slope:>12.4f}{m.weighted_mse:>12.4f}{m.n_words:>9d}")
    lines.append(f"config_digest: {report.config_digest}")
    return "\n".join(lines) + "\n"


def report_to_plot_csv(report: EvalReport, language: str) -> str:
    """Plot-ready long format: hypothesis,language,metric,value."""
    lines = [REPORT_CSV_HEADER]
    for name in sorted(report.per_hypothesis):
        m = report.per_hypothesis[name]
        for metric in _METRIC_FIELDS:
            value = getattr(m, metric)
            lines.append(f"{name},{language},{metric},{value:.17g}")
    return "\n".join(lines) + "\n"
