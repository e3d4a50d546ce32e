"""Command-line interface.

Subcommands mirror the pipeline stages (count, train-lm, score, predict,
code, optimize, fit-capacity, evaluate) plus the composite ``run`` and the
sensitivity ``sweep``. All flags are long-form. Exit codes: 0 success,
1 usage/configuration error, 2 data or validation error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import coder, corpus, costs, hypotheses, metrics, pipeline, surprisal
from .corpus import CorpusConfig, FilterProtocol
from .costs import CostSpec, LengthAssignment
from .errors import ConfigError, DataError, LexoptError, NumericError
from .hypotheses import Hypothesis
from .pipeline import RunConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the documented usage code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_corpus_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--filter", choices=[f.value for f in FilterProtocol],
                   default=FilterProtocol.ALL.value,
                   help="word filtering protocol (default: all)")
    p.add_argument("--alphabet", type=Path, default=None,
                   help="alphabet file (required for --filter alpha)")
    p.add_argument("--top-n", type=int, default=None,
                   help="keep only the N most frequent word types")
    p.add_argument("--lowercase", action="store_true",
                   help="lowercase text before filtering and counting")


def _corpus_config(args) -> CorpusConfig:
    alphabet: frozenset[str] = frozenset()
    if args.alphabet is not None:
        alphabet = corpus.read_alphabet(args.alphabet)
    return CorpusConfig(alphabet=alphabet,
                        filter_protocol=FilterProtocol(args.filter),
                        top_n_types=args.top_n,
                        lowercase=args.lowercase)


def _parse_weights(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --weights value {text!r}: {exc}") from exc


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad numeric list {text!r}: {exc}") from exc


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}: {exc}") from exc


def _read_tokens(path: Path, config: CorpusConfig) -> list[str]:
    with open(path, "rb") as fh:
        return corpus.ingest_and_filter(fh, config)


def _write(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(content, encoding="utf-8", newline="")


def _cmd_count(args) -> int:
    config = _corpus_config(args)
    table = corpus.count_frequencies(_read_tokens(args.input, config), config)
    _write(args.output, table.to_tsv())
    return EXIT_OK


def _cmd_train_lm(args) -> int:
    config = _corpus_config(args)
    tokens = _read_tokens(args.input, config)
    model = surprisal.train_ngram(tokens, args.order,
                                  _parse_weights(args.weights)
                                  or tuple(1.0 / args.order for _ in range(args.order)))
    _write(args.output, model.to_json() + "\n")
    return EXIT_OK


def _cmd_score(args) -> int:
    config = _corpus_config(args)
    model = surprisal.NgramLanguageModel.from_json(
        args.model.read_text(encoding="utf-8"))
    table = surprisal.score_corpus(model, _read_tokens(args.input, config))
    _write(args.output, surprisal.surprisal_to_tsv(table))
    return EXIT_OK


def _cmd_predict(args) -> int:
    hypothesis = Hypothesis(args.hypothesis)
    if hypothesis is Hypothesis.ZIPF:
        if args.freq is None:
            raise ConfigError("--freq is required for the zipf hypothesis")
        freq = corpus.frequency_table_from_tsv(args.freq.read_text(encoding="utf-8"))
        pred = hypotheses.predict_zipf(freq)
    else:
        if args.surprisal is None:
            raise ConfigError(f"--surprisal is required for {hypothesis.value}")
        table = surprisal.ingest_external(args.surprisal.read_bytes())
        if hypothesis is Hypothesis.CCH_LOWER:
            pred = hypotheses.predict_cch_lower(table)
        else:
            pred = hypotheses.predict_cch(table)
    _write(args.output, hypotheses.predictions_to_tsv(pred))
    return EXIT_OK


def _cmd_code(args) -> int:
    freq = corpus.frequency_table_from_tsv(args.freq.read_text(encoding="utf-8"))
    book = coder.build_huffman_k(freq, args.k)
    _write(args.output, coder.codebook_to_tsv(book))
    return EXIT_OK


def _cmd_optimize(args) -> int:
    table = surprisal.ingest_external(args.surprisal.read_bytes())
    spec = CostSpec(capacity=args.capacity, lam=args.lam, objective=Hypothesis.CCH)
    assignment = costs.optimize_lengths(table, spec)
    _write(args.output, costs.lengths_to_tsv(assignment, Hypothesis.CCH.value))
    return EXIT_OK


def _cmd_fit_capacity(args) -> int:
    table = surprisal.ingest_external(args.surprisal.read_bytes())
    freq = corpus.frequency_table_from_tsv(args.freq.read_text(encoding="utf-8"))
    observed = LengthAssignment(
        {f: float(rec.length) for f, rec in freq.records.items() if f in table.per_word})
    cap = costs.fit_capacity(table, observed, freq, args.lam)
    print(f"{cap:.17g}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    freq = corpus.frequency_table_from_tsv(args.freq_eval.read_text(encoding="utf-8"))
    preds = [hypotheses.predictions_from_tsv(p.read_text(encoding="utf-8"))
             for p in args.predictions]
    observed = {f: float(rec.length) for f, rec in freq.records.items()}
    weights = {f: rec.rel_freq for f, rec in freq.records.items()}
    digest = hypotheses.config_digest(
        {"predictions": [p.name for p in args.predictions], "freq": args.freq_eval.name})
    report = metrics.build_report(preds, observed, weights, digest)
    out_dir: Path = args.out
    _write(out_dir / "report.json", metrics.report_to_json(report))
    _write(out_dir / "report.txt", metrics.report_to_text(report))
    _write(out_dir / "report.csv", metrics.report_to_plot_csv(report, args.language))
    print(metrics.report_to_text(report), end="")
    return EXIT_OK


def _run_config(args) -> RunConfig:
    return RunConfig(
        train_path=args.train,
        test_path=args.test,
        out_dir=args.out,
        external_surprisal_path=args.external_surprisal,
        alphabet_path=args.alphabet,
        filter_protocol=FilterProtocol(args.filter),
        top_n_types=args.top_n,
        lowercase=args.lowercase,
        order=args.order,
        weights=_parse_weights(args.weights),
        lambdas=_parse_floats(args.lambdas) if args.lambdas else (1.0,),
        capacity=args.capacity,
        optimize=getattr(args, "optimize", False),
        code_k=getattr(args, "code_k", None),
        language=args.language,
    )


def _cmd_run(args) -> int:
    report = pipeline.run_pipeline(_run_config(args))
    print(metrics.report_to_text(report), end="")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    if not (args.sweep_lambda or args.sweep_train_sizes):
        raise ConfigError("choose --sweep-lambda and/or --sweep-train-sizes")
    config = _run_config(args)
    if args.sweep_lambda:
        path = pipeline.sweep_lambda(
            config, _parse_floats(args.lambdas) if args.lambdas else None)
        print(f"wrote {path}")
    if args.sweep_train_sizes:
        sizes = _parse_ints(args.sizes) if args.sizes else None
        path = pipeline.sweep_train_sizes(config, sizes)
        print(f"wrote {path}")
    return EXIT_OK


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--train", type=Path, required=True, help="training text file")
    p.add_argument("--test", type=Path, required=True, help="evaluation text file")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--external-surprisal", type=Path, default=None,
                   help="use externally computed surprisals instead of the n-gram model")
    p.add_argument("--order", type=int, default=2, help="n-gram order (default: 2)")
    p.add_argument("--weights", default=None,
                   help="comma-separated interpolation weights (default: uniform)")
    p.add_argument("--lambdas", default=None,
                   help="comma-separated asymmetry values (default: 1.0)")
    p.add_argument("--capacity", type=float, default=None,
                   help="fixed channel capacity (default: fit from the data)")
    p.add_argument("--language", default="corpus", help="language label for the CSV report")
    _add_corpus_flags(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lexopt",
                     description="Word-length predictions from communicative-efficiency "
                                 "objectives, with optimal-code construction and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[], help="count word frequencies into a TSV")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    _add_corpus_flags(p)
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("train-lm", help="train the interpolated n-gram model")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--weights", default=None,
                   help="comma-separated interpolation weights (default: uniform)")
    _add_corpus_flags(p)
    p.set_defaults(func=_cmd_train_lm)

    p = sub.add_parser("score", help="score a corpus with a trained model")
    p.add_argument("--input", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--output", type=Path, required=True)
    _add_corpus_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("predict", help="compute per-word length predictions")
    p.add_argument("--hypothesis", choices=[h.value for h in Hypothesis], required=True)
    p.add_argument("--freq", type=Path, default=None, help="frequency TSV (zipf)")
    p.add_argument("--surprisal", type=Path, default=None,
                   help="surprisal TSV (cch, cch_lower)")
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("code", help="build the optimal K-ary prefix code")
    p.add_argument("--freq", type=Path, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=_cmd_code)

    p = sub.add_parser("optimize", help="numerically optimal lengths for a capacity")
    p.add_argument("--surprisal", type=Path, required=True)
    p.add_argument("--capacity", type=float, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--output", type=Path, required=True)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("fit-capacity", help="fit the channel capacity to observed lengths")
    p.add_argument("--surprisal", type=Path, required=True)
    p.add_argument("--freq", type=Path, required=True)
    p.add_argument("--lam", type=float, default=1.0)
    p.set_defaults(func=_cmd_fit_capacity)

    p = sub.add_parser("evaluate", help="score prediction TSVs against observed lengths")
    p.add_argument("--predictions", type=Path, action="append", required=True,
                   help="prediction TSV (repeat for several hypotheses)")
    p.add_argument("--freq-eval", type=Path, required=True,
                   help="evaluation-corpus frequency TSV")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--language", default="corpus")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("run", help="end-to-end pipeline")
    _add_run_flags(p)
    p.add_argument("--code-k", type=int, default=None,
                   help="also emit the optimal K-ary codebook")
    p.add_argument("--optimize", action="store_true",
                   help="also emit optimized lengths for each lambda")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="sensitivity sweeps")
    _add_run_flags(p)
    p.add_argument("--sweep-lambda", action="store_true",
                   help="sweep the asymmetry grid (default 1.0..5.0 step 0.25)")
    p.add_argument("--sweep-train-sizes", action="store_true",
                   help="retrain on growing token prefixes")
    p.add_argument("--sizes", default=None,
                   help="comma-separated training sizes (default: half-decade grid)")
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"lexopt: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"lexopt: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"lexopt: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LexoptError as exc:
        print(f"lexopt: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"lexopt: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
