"""End-to-end runs: ingest, estimate, predict, optimize, evaluate, report.

Artifacts are plain TSV/JSON/CSV files in the output directory; every file
round-trips through the matching parser in its module. Outputs are
deterministic for a fixed config and inputs, and partially written artifacts
are removed if a run fails.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import coder, corpus, costs, hypotheses, metrics, surprisal
from .corpus import CorpusConfig, FilterProtocol, FrequencyTable
from .costs import CostSpec, LengthAssignment
from .errors import LexoptError, ValidationError
from .hypotheses import Hypothesis, PredictionSet
from .metrics import EvalReport
from .surprisal import NgramLanguageModel, SurprisalTable

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = tuple(round(1.0 + 0.25 * i, 2) for i in range(17))  # 1.0 .. 5.0


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs."""

    train_path: Path
    test_path: Path
    out_dir: Path
    external_surprisal_path: Path | None = None
    alphabet_path: Path | None = None
    filter_protocol: FilterProtocol = FilterProtocol.ALL
    top_n_types: int | None = None
    lowercase: bool = False
    order: int = 2
    weights: tuple[float, ...] | None = None
    lambdas: tuple[float, ...] = (1.0,)
    capacity: float | None = None  # None fits capacity from the data
    optimize: bool = False
    code_k: int | None = None
    language: str = "corpus"

    def __post_init__(self):
        if not self.lambdas:
            raise ValidationError("lambda grid must not be empty")

    def corpus_config(self) -> CorpusConfig:
        alphabet: frozenset[str] = frozenset()
        if self.alphabet_path is not None:
            alphabet = corpus.read_alphabet(self.alphabet_path)
        return CorpusConfig(alphabet=alphabet,
                            filter_protocol=self.filter_protocol,
                            top_n_types=self.top_n_types,
                            lowercase=self.lowercase)

    def digest(self) -> str:
        # Input basenames rather than absolute paths, and no output paths:
        # identical inputs and knobs must digest identically anywhere.
        payload = {
            "train": self.train_path.name,
            "test": self.test_path.name,
            "external": self.external_surprisal_path.name
            if self.external_surprisal_path else None,
            "filter": self.filter_protocol.value,
            "top_n_types": self.top_n_types,
            "lowercase": self.lowercase,
            "order": self.order,
            "weights": list(self.weights) if self.weights else None,
            "lambdas": list(self.lambdas),
            "capacity": self.capacity,
            "code_k": self.code_k,
            "language": self.language,
        }
        return hypotheses.config_digest(payload)


@contextmanager
def _stage(name: str):
    try:
        yield
    except LexoptError as exc:
        first = exc.args[0] if exc.args else ""
        exc.args = (f"[{name}] {first}",) + exc.args[1:]
        raise


class _Artifacts:
    """Tracks written files so a failed run can remove its partial outputs."""

    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.created: list[Path] = []

    def write(self, name: str, content: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        path.write_text(content, encoding="utf-8", newline="")
        self.created.append(path)
        return path

    def discard(self) -> None:
        for path in self.created:
            try:
                path.unlink()
            except OSError:
                pass


def _read_tokens(path: Path, config: CorpusConfig) -> list[str]:
    with open(path, "rb") as fh:
        return corpus.ingest_and_filter(fh, config)


def _observed_lengths(freq: FrequencyTable) -> dict[str, float]:
    return {form: float(rec.length) for form, rec in freq.records.items()}


def _eval_weights(freq: FrequencyTable) -> dict[str, float]:
    return {form: rec.rel_freq for form, rec in freq.records.items()}


def _lengths_as_predictions(assignment: LengthAssignment, digest: str) -> PredictionSet:
    return PredictionSet(Hypothesis.CCH, dict(assignment.per_word), digest)


def _fit_or_fixed(config: RunConfig, table: SurprisalTable,
                  observed: LengthAssignment, freq: FrequencyTable,
                  lam: float) -> float:
    if config.capacity is not None:
        return config.capacity
    return costs.fit_capacity(table, observed, freq, lam)


def run_pipeline(config: RunConfig) -> EvalReport:
    """Run the full pipeline and write all artifacts under ``config.out_dir``."""
    artifacts = _Artifacts(config.out_dir)
    try:
        return _run(config, artifacts)
    except Exception:
        artifacts.discard()
        raise


def _run(config: RunConfig, artifacts: _Artifacts) -> EvalReport:
    digest = config.digest()
    cconf = config.corpus_config()

    with _stage("corpus"):
        train_tokens = _read_tokens(config.train_path, cconf)
        test_tokens = _read_tokens(config.test_path, cconf)
        freq_train = corpus.count_frequencies(train_tokens, cconf)
        freq_test = corpus.count_frequencies(test_tokens, cconf)
        if not freq_train.records or not freq_test.records:
            raise ValidationError("train or test corpus is empty after filtering")
        artifacts.write("frequency_train.tsv", freq_train.to_tsv())
        artifacts.write("frequency_test.tsv", freq_test.to_tsv())

    with _stage("surprisal"):
        if config.external_surprisal_path is not None:
            table = surprisal.ingest_external(
                config.external_surprisal_path.read_bytes())
        else:
            model = NgramLanguageModel(order=config.order,
                                       weights=config.weights).fit(train_tokens)
            table = surprisal.score_corpus(model, test_tokens)
        artifacts.write("surprisal.tsv", surprisal.surprisal_to_tsv(table))

    with _stage("hypotheses"):
        provenance = {"digest": digest}
        preds = [
            hypotheses.predict_zipf(freq_train, provenance),
            hypotheses.predict_cch_lower(table, provenance),
            hypotheses.predict_cch(table, provenance),
        ]
        for pred in preds:
            artifacts.write(f"predictions_{pred.hypothesis.value}.tsv",
                            hypotheses.predictions_to_tsv(pred))

    if config.code_k is not None:
        with _stage("coder"):
            book = coder.build_huffman_k(freq_train, config.code_k)
            artifacts.write("codebook.tsv", coder.codebook_to_tsv(book))

    if config.optimize:
        with _stage("costs"):
            observed = LengthAssignment(
                {f: float(freq_test.records[f].length)
                 for f in freq_test.records if f in table.per_word})
            for lam in config.lambdas:
                cap = _fit_or_fixed(config, table, observed, freq_test, lam)
                spec = CostSpec(capacity=cap, lam=lam, objective=Hypothesis.CCH)
                assignment = costs.optimize_lengths(table, spec)
                artifacts.write(f"lengths_lambda_{lam:g}.tsv",
                                costs.lengths_to_tsv(assignment, Hypothesis.CCH.value))

    with _stage("eval"):
        report = metrics.build_report(preds, _observed_lengths(freq_test),
                                      _eval_weights(freq_test), digest)
        artifacts.write("report.json", metrics.report_to_json(report))
        artifacts.write("report.txt", metrics.report_to_text(report))
        artifacts.write("report.csv", metrics.report_to_plot_csv(report, config.language))
    return report


def sweep_lambda(config: RunConfig,
                 lambdas: tuple[float, ...] | None = None) -> Path:
    """Optimize channel-deviation lengths over an asymmetry grid and score them.

    For each lambda the capacity is fitted (or fixed per config), lengths are
    optimized, and the resulting length predictions are evaluated against the
    observed lengths. Emits ``sweep_lambda.csv``.
    """
    grid = tuple(lambdas) if lambdas else config.lambdas
    if grid == (1.0,):
        grid = DEFAULT_LAMBDA_GRID
    artifacts = _Artifacts(config.out_dir)
    try:
        cconf = config.corpus_config()
        with _stage("corpus"):
            train_tokens = _read_tokens(config.train_path, cconf)
            test_tokens = _read_tokens(config.test_path, cconf)
            freq_test = corpus.count_frequencies(test_tokens, cconf)
        with _stage("surprisal"):
            if config.external_surprisal_path is not None:
                table = surprisal.ingest_external(
                    config.external_surprisal_path.read_bytes())
            else:
                model = NgramLanguageModel(order=config.order,
                                           weights=config.weights).fit(train_tokens)
                table = surprisal.score_corpus(model, test_tokens)

        observed_map = _observed_lengths(freq_test)
        weights_map = _eval_weights(freq_test)
        observed = LengthAssignment(
            {f: observed_map[f] for f in freq_test.records if f in table.per_word})

        lines = ["lambda,capacity,spearman,pearson,slope,weighted_mse,n_words"]
        digest = config.digest()
        with _stage("costs"):
            for lam in grid:
                cap = _fit_or_fixed(config, table, observed, freq_test, lam)
                spec = CostSpec(capacity=cap, lam=lam, objective=Hypothesis.CCH)
                assignment = costs.optimize_lengths(table, spec)
                m = metrics.evaluate_predictions(
                    _lengths_as_predictions(assignment, digest),
                    observed_map, weights_map)
                lines.append(f"{lam:g},{cap:.17g},{m.spearman:.17g},{m.pearson:.17g},"
                             f"{m.slope:.17g},{m.weighted_mse:.17g},{m.n_words}")
        return artifacts.write("sweep_lambda.csv", "\n".join(lines) + "\n")
    except Exception:
        artifacts.discard()
        raise


def default_train_sizes(n_train: int) -> tuple[int, ...]:
    """Half-decade grid from 10^3 to 10^6 tokens, capped at the corpus size."""
    sizes = [int(round(10.0 ** e)) for e in np.arange(3.0, 6.01, 0.5)]
    sizes = [s for s in sizes if s < n_train]
    sizes.append(n_train)
    return tuple(sizes)


def sweep_train_sizes(config: RunConfig,
                      sizes: tuple[int, ...] | None = None) -> Path:
    """Retrain on growing token prefixes and track model quality vs predictions.

    For each size the n-gram model and the unigram statistics are re-estimated
    on the first n training tokens; the model's cross-entropy on the test set
    and all three hypotheses' metrics are recorded. The n-gram vocabulary is
    held fixed at the full training set's types so the cross-entropies are
    comparable across sizes. Emits ``sweep_train_sizes.csv``.
    """
    artifacts = _Artifacts(config.out_dir)
    try:
        cconf = config.corpus_config()
        with _stage("corpus"):
            train_tokens = _read_tokens(config.train_path, cconf)
            test_tokens = _read_tokens(config.test_path, cconf)
            freq_test = corpus.count_frequencies(test_tokens, cconf)
        if sizes is None:
            sizes = default_train_sizes(len(train_tokens))
        bad = [s for s in sizes if not 1 <= s <= len(train_tokens)]
        if bad:
            raise ValidationError(
                f"train sizes {bad} out of range 1..{len(train_tokens)}")

        observed_map = _observed_lengths(freq_test)
        weights_map = _eval_weights(freq_test)
        digest = config.digest()
        vocab = frozenset(train_tokens)

        lines = ["n_train_tokens,cross_entropy_bits,hypothesis,"
                 "spearman,pearson,slope,weighted_mse,n_words"]
        for size in sizes:
            subset = train_tokens[:size]
            with _stage("surprisal"):
                model = NgramLanguageModel(order=config.order, weights=config.weights,
                                           vocab=vocab).fit(subset)
                ce = model.cross_entropy_bits(test_tokens)
                table = surprisal.score_corpus(model, test_tokens)
            with _stage("hypotheses"):
                freq_sub = corpus.count_frequencies(subset, cconf)
                preds = [
                    hypotheses.predict_zipf(freq_sub, {"digest": digest, "size": size}),
                    hypotheses.predict_cch_lower(table, {"digest": digest, "size": size}),
                    hypotheses.predict_cch(table, {"digest": digest, "size": size}),
                ]
            with _stage("eval"):
                for pred in preds:
                    m = metrics.evaluate_predictions(pred, observed_map, weights_map)
                    lines.append(
                        f"{size},{ce:.17g},{pred.hypothesis.value},"
                        f"{m.spearman:.17g},{m.pearson:.17g},{m.slope:.17g},"
                        f"{m.weighted_mse:.17g},{m.n_words}")
        return artifacts.write("sweep_train_sizes.csv", "\n".join(lines) + "\n")
    except Exception:
        artifacts.discard()
        raise
