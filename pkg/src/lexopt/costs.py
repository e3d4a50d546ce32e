"""Lexicalization objectives: deviation costs, capacity fitting, and length
optimization.

The channel-deviation cost of a candidate length assignment decomposes per
word, and each per-word term is convex in the reciprocal length u = 1/len
(piecewise-quadratic with a continuous derivative), so the numeric optimizer
does monotone derivative bisection in u-space, vectorized across words.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .corpus import FrequencyTable
from .errors import ConfigError, CoverageError, NumericError, ParseError, ValidationError
from .hypotheses import Hypothesis, PREDICTIONS_HEADER
from .surprisal import SurprisalTable

logger = logging.getLogger(__name__)

LENGTH_BOUNDS = (1e-6, 1e6)
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

# Combinatorial guards for the exhaustive solver.
BRUTEFORCE_MAX_WORDS = 5
BRUTEFORCE_MAX_LEN = 8


@dataclass(frozen=True)
class CostSpec:
    """Distance-function parameters: channel capacity, asymmetry, objective.

    ``lam`` > 1 penalizes information rates above capacity more than below;
    ``lam`` = 1 recovers the symmetric quadratic.
    """

    capacity: float
    lam: float = 1.0
    objective: Hypothesis = Hypothesis.CCH

    def __post_init__(self):
        if not (self.capacity > 0.0 and math.isfinite(self.capacity)):
            raise ConfigError(f"capacity must be positive and finite, got {self.capacity!r}")
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise ConfigError(f"lambda must be positive and finite, got {self.lam!r}")


@dataclass(frozen=True)
class LengthAssignment:
    """Relaxed (real-valued) lengths per word."""

    per_word: dict[str, float]

    def __post_init__(self):
        for form, length in self.per_word.items():
            if not (length > 0.0 and math.isfinite(length)):
                raise ValidationError(f"length for {form!r} must be positive and finite")

    def __len__(self) -> int:
        return len(self.per_word)


def _deviation(rates: np.ndarray, spec: CostSpec) -> np.ndarray:
    gap = rates - spec.capacity
    return np.where(rates > spec.capacity, spec.lam * gap * gap, gap * gap)


def _deviation_slope(rates: np.ndarray, spec: CostSpec) -> np.ndarray:
    gap = rates - spec.capacity
    return np.where(rates > spec.capacity, 2.0 * spec.lam * gap, 2.0 * gap)


def distance(x: float, spec: CostSpec) -> float:
    """Penalty for an information rate ``x``: lam*(x-C)^2 above capacity, (x-C)^2 below."""
    if not math.isfinite(x):
        raise ValidationError(f"rate must be finite, got {x!r}")
    return float(_deviation(np.asarray(x, dtype=float), spec))


def word_cost(length: float, values: np.ndarray, counts: np.ndarray,
              spec: CostSpec) -> float:
    """Count-weighted mean deviation cost of one word at ``length``."""
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts, dtype=float)
    dev = _deviation(values / length, spec)
    return float((dev * counts).sum() / counts.sum())


def word_cost_grad(length: float, values: np.ndarray, counts: np.ndarray,
                   spec: CostSpec) -> float:
    """Analytic derivative of :func:`word_cost` with respect to the length."""
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts, dtype=float)
    rates = values / length
    slope = _deviation_slope(rates, spec)
    return float((slope * (-values / length**2) * counts).sum() / counts.sum())


def _domain(freq: FrequencyTable, table: SurprisalTable) -> list[str]:
    return [form for form in freq.records if form in table.per_word]


def objective_cost(lengths: LengthAssignment, table: SurprisalTable,
                   freq: FrequencyTable, spec: CostSpec) -> float:
    """Expected cost of a length assignment under the configured objective.

    Words present in both the frequency and surprisal tables contribute,
    weighted by their relative frequency; the per-word context distribution is
    the sample counts. The frequency objective ignores the distance function
    and is simply the expected length.
    """
    domain = _domain(freq, table)
    missing = [f for f in domain if f not in lengths.per_word]
    if missing:
        raise CoverageError("length assignment does not cover", missing)
    if not domain:
        return 0.0

    rel = np.array([freq.records[f].rel_freq for f in domain])
    lens = np.array([lengths.per_word[f] for f in domain])
    if spec.objective is Hypothesis.ZIPF:
        return float(np.dot(rel, lens))

    if spec.objective is Hypothesis.CCH_LOWER:
        means = np.array([table.mean_bits(f) for f in domain])
        return float(np.dot(rel, _deviation(means / lens, spec)))

    per_word = np.empty(len(domain))
    for i, form in enumerate(domain):
        values, counts = table.values_counts(form)
        per_word[i] = word_cost(lens[i], values, counts, spec)
    return float(np.dot(rel, per_word))


def closed_form_cch_lengths(table: SurprisalTable, spec: CostSpec) -> LengthAssignment:
    """Optimal lengths under the symmetric quadratic deviation cost.

    Per word: second moment over mean of the surprisal samples, divided by
    capacity. Only valid for lam = 1; other asymmetries have no closed form
    and must go through :func:`optimize_lengths`.
    """
    if spec.lam != 1.0:
        raise ConfigError(
            f"closed form requires lam=1 (got {spec.lam}); use optimize_lengths")
    per_word: dict[str, float] = {}
    excluded: list[str] = []
    for form in table.per_word:
        values, counts = table.values_counts(form)
        denom = float((values * counts).sum())
        if denom <= 0.0:
            excluded.append(form)
            continue
        per_word[form] = float((values * values * counts).sum()) / denom / spec.capacity
    if excluded:
        logger.warning("closed form skipped %d all-zero-surprisal word(s), e.g. %r",
                       len(excluded), excluded[:5])
    return LengthAssignment(per_word)


def closed_form_cch_lower_lengths(table: SurprisalTable, spec: CostSpec) -> LengthAssignment:
    """Optimal lengths under the mean-surprisal objective: mean over capacity.

    These lengths put every word's average information rate exactly at
    capacity, so they attain zero cost for any distance function.
    """
    per_word: dict[str, float] = {}
    excluded: list[str] = []
    for form in table.per_word:
        mean = table.mean_bits(form)
        if mean <= 0.0:
            excluded.append(form)
            continue
        per_word[form] = mean / spec.capacity
    if excluded:
        logger.warning("mean-surprisal lengths skipped %d all-zero word(s), e.g. %r",
                       len(excluded), excluded[:5])
    return LengthAssignment(per_word)


def _golden_min(f, lo: float, hi: float, rtol: float = 1e-9) -> float:
    """Golden-section minimum of a unimodal ``f`` on [lo, hi]."""
    if hi < lo:
        lo, hi = hi, lo
    if hi - lo <= rtol * max(abs(lo), abs(hi)):
        return 0.5 * (lo + hi)
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while (hi - lo) > rtol * max(abs(lo), abs(hi), 1e-300):
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
        if x1 >= x2:  # interval exhausted in float
            break
    return 0.5 * (lo + hi)


def fit_capacity(table: SurprisalTable, observed: LengthAssignment,
                 freq: FrequencyTable, lam: float) -> float:
    """Capacity minimizing the channel-deviation cost at the observed lengths.

    Searches [min rate, max rate] by golden section to relative tolerance
    1e-9. For lam=1 the result coincides with the frequency-and-count-weighted
    mean of the information rates.
    """
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ConfigError(f"lambda must be positive and finite, got {lam!r}")
    domain = [f for f in _domain(freq, table) if f in observed.per_word]
    if not domain:
        raise ValidationError("no words shared by the surprisal, length, and frequency inputs")

    rates_parts, weight_parts = [], []
    for form in domain:
        values, counts = table.values_counts(form)
        length = observed.per_word[form]
        rel = freq.records[form].rel_freq
        rates_parts.append(values / length)
        weight_parts.append(rel * counts / counts.sum())
    rates = np.concatenate(rates_parts)
    weights = np.concatenate(weight_parts)

    lo, hi = float(rates.min()), float(rates.max())
    if hi <= 0.0:
        raise ValidationError("all information rates are zero; capacity is undefined")
    if lo == hi:
        return lo

    lam_arr = lam  # closure constant

    def cost(c: float) -> float:
        gap = rates - c
        return float(np.dot(weights, np.where(rates > c, lam_arr * gap * gap, gap * gap)))

    return _golden_min(cost, lo, hi)


def optimize_lengths(table: SurprisalTable, spec: CostSpec) -> LengthAssignment:
    """Numerically optimal lengths under the channel-deviation objective.

    The objective decomposes per word; each word's cost is minimized over
    lengths in [1e-6, 1e6] until the length-space gradient magnitude drops to
    1e-9 (or the bisection bracket is exhausted, capped at 10^4 iterations).
    All-zero-surprisal words have constant cost and are skipped.
    """
    forms_all, values, counts, idx = table.flattened()
    if len(forms_all) == 0:
        raise ValidationError("cannot optimize an empty surprisal table")
    n = len(forms_all)
    totals = np.bincount(idx, weights=counts, minlength=n)
    weight = counts / totals[idx]
    sums = np.bincount(idx, weights=values * counts, minlength=n)
    keep = sums > 0.0
    if not keep.all():
        skipped = [forms_all[i] for i in np.flatnonzero(~keep)]
        logger.warning("optimizer skipped %d all-zero-surprisal word(s), e.g. %r",
                       len(skipped), skipped[:5])

    cap, lam = spec.capacity, spec.lam

    def grad_u(u: np.ndarray) -> np.ndarray:
        # Derivative of the per-word cost with respect to u = 1/len.
        x = values * u[idx]
        slope = np.where(x > cap, lam * (x - cap), x - cap)
        g = 2.0 * np.bincount(idx, weights=weight * slope * values, minlength=n)
        if not np.isfinite(g).all():
            bad = forms_all[int(np.flatnonzero(~np.isfinite(g))[0])]
            raise NumericError(f"non-finite cost gradient while optimizing {bad!r}")
        return g

    u_lo = np.full(n, 1.0 / LENGTH_BOUNDS[1])
    u_hi = np.full(n, 1.0 / LENGTH_BOUNDS[0])
    g_lo = grad_u(u_lo)
    g_hi = grad_u(u_hi)
    u = np.where(g_lo >= 0.0, u_lo, np.where(g_hi <= 0.0, u_hi, 0.5 * (u_lo + u_hi)))
    active = (g_lo < 0.0) & (g_hi > 0.0) & keep

    lo = u_lo.copy()
    hi = u_hi.copy()
    for _ in range(10_000):
        if not active.any():
            break
        mid = 0.5 * (lo + hi)
        g = grad_u(mid)
        u = np.where(active, mid, u)
        # |d cost/d len| = |d cost/d u| * u^2
        converged = np.abs(g) * mid * mid <= 1e-9
        exhausted = (mid <= lo) | (mid >= hi)
        shrink_hi = g > 0.0
        hi = np.where(active & shrink_hi, mid, hi)
        lo = np.where(active & ~shrink_hi, mid, lo)
        active = active & ~(converged | exhausted)

    lengths = 1.0 / u
    per_word = {form: float(lengths[i]) for i, form in enumerate(forms_all) if keep[i]}
    return LengthAssignment(per_word)


def bruteforce_lexicalization(freq: FrequencyTable, table: SurprisalTable,
                              spec: CostSpec, k: int, max_len: int) -> LengthAssignment:
    """Exhaustive integer-length solver for tiny vocabularies.

    Enumerates every assignment in [1, max_len]^V that satisfies the Kraft
    feasibility condition for base k (checked in exact integer arithmetic) and
    returns the first one attaining the minimum objective cost. Serves as the
    oracle for the coder and the numeric optimizer.
    """
    if k < 2:
        raise ConfigError(f"k must be >= 2, got {k}")
    forms = sorted(_domain(freq, table))
    if not forms:
        raise ValidationError("no words shared by the frequency and surprisal tables")
    if len(forms) > BRUTEFORCE_MAX_WORDS:
        raise ConfigError(
            f"refusing exhaustive search over {len(forms)} words (max {BRUTEFORCE_MAX_WORDS})")
    if not 1 <= max_len <= BRUTEFORCE_MAX_LEN:
        raise ConfigError(f"max_len must be in [1, {BRUTEFORCE_MAX_LEN}], got {max_len}")

    best_cost = math.inf
    best: tuple[int, ...] | None = None
    kraft_budget = k ** max_len
    for lens in itertools.product(range(1, max_len + 1), repeat=len(forms)):
        if sum(k ** (max_len - L) for L in lens) > kraft_budget:
            continue
        assignment = LengthAssignment(dict(zip(forms, map(float, lens))))
        cost = objective_cost(assignment, table, freq, spec)
        if cost < best_cost:
            best_cost = cost
            best = lens
    if best is None:
        raise ValidationError(f"no Kraft-feasible assignment with max_len={max_len}")
    return LengthAssignment(dict(zip(forms, map(float, best))))


def lengths_to_tsv(assignment: LengthAssignment, label: str) -> str:
    """Serialize lengths in the prediction TSV shape, labeled with an objective."""
    lines = [PREDICTIONS_HEADER]
    for form in sorted(assignment.per_word):
        lines.append(f"{form}\t{label}\t{assignment.per_word[form]:.17g}")
    return "\n".join(lines) + "\n"


def lengths_from_tsv(text: str) -> tuple[str, LengthAssignment]:
    lines = text.split("\n")
    if not lines or lines[0].rstrip("\r") != PREDICTIONS_HEADER:
        raise ParseError(f"expected header {PREDICTIONS_HEADER!r}", line_no=1)
    label: str | None = None
    per_word: dict[str, float] = {}
    for no, line in enumerate(lines[1:], start=2):
        line = line.rstrip("\r")
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"expected 3 tab-separated fields, got {len(parts)}", line_no=no)
        form, row_label, value_s = parts
        if label is None:
            label = row_label
        elif row_label != label:
            raise ValidationError(f"line {no}: mixed labels in one file")
        try:
            per_word[form] = float(value_s)
        except ValueError as exc:
            raise ParseError(f"bad length: {exc}", line_no=no) from exc
    if label is None:
        raise ValidationError("length file contains no rows")
    return label, LengthAssignment(per_word)
