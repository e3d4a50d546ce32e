"""lexopt: word-length predictions from communicative-efficiency objectives.

The package turns a text corpus (or externally computed surprisals) into
per-word length predictions under three hypotheses - frequency (Zipf's law of
abbreviation), mean contextual surprisal, and surprisal second-moment over
mean - builds optimal K-ary prefix codes, numerically optimizes lengths under
channel-deviation costs, and scores every prediction against the observed
lexicon.
"""

from .coder import CodeBook, HuffmanCoder, build_huffman_k, decode, encode, roundtrip
from .corpus import (CorpusConfig, FilterProtocol, FrequencyTable, WordRecord,
                     count_frequencies, ingest_and_filter)
from .costs import (CostSpec, LengthAssignment, bruteforce_lexicalization,
                    closed_form_cch_lengths, closed_form_cch_lower_lengths,
                    distance, fit_capacity, objective_cost, optimize_lengths)
from .errors import (ConfigError, CoverageError, DataError, DecodeError,
                     LexoptError, NumericError, ParseError, ValidationError)
from .hypotheses import (Hypothesis, PredictionSet, predict_cch,
                         predict_cch_lower, predict_zipf)
from .metrics import (EvalReport, HypothesisMetrics, evaluate_predictions,
                      pearson, spearman, weighted_fit)
from .pipeline import RunConfig, run_pipeline, sweep_lambda, sweep_train_sizes
from .surprisal import (NgramLanguageModel, Source, SurprisalSample,
                        SurprisalTable, ingest_external, score_corpus,
                        surprisal_to_tsv, train_ngram)

__version__ = "0.1.0"

__all__ = [
    "CodeBook", "HuffmanCoder", "build_huffman_k", "decode", "encode", "roundtrip",
    "CorpusConfig", "FilterProtocol", "FrequencyTable", "WordRecord",
    "count_frequencies", "ingest_and_filter",
    "CostSpec", "LengthAssignment", "bruteforce_lexicalization",
    "closed_form_cch_lengths", "closed_form_cch_lower_lengths", "distance",
    "fit_capacity", "objective_cost", "optimize_lengths",
    "ConfigError", "CoverageError", "DataError", "DecodeError", "LexoptError",
    "NumericError", "ParseError", "ValidationError",
    "Hypothesis", "PredictionSet", "predict_cch", "predict_cch_lower", "predict_zipf",
    "EvalReport", "HypothesisMetrics", "evaluate_predictions", "pearson",
    "spearman", "weighted_fit",
    "RunConfig", "run_pipeline", "sweep_lambda", "sweep_train_sizes",
    "NgramLanguageModel", "Source", "SurprisalSample", "SurprisalTable",
    "ingest_external", "score_corpus", "surprisal_to_tsv", "train_ngram",
    "__version__",
]
