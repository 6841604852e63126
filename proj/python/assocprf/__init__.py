"""Inverted-index retrieval with association-cluster pseudo-relevance feedback."""

from ._core import (
    AnalyzerConfig,
    Error,
    IndexFormatError,
    NoExpansionError,
    ParseError,
    PrfParams,
    Qrels,
    Query,
    UnicodeNormalization,
    association_matrix,
    build_index,
    classify,
    evaluate,
    evaluate_run,
    expand,
    fold_arabic,
    generate_synthetic,
    idf,
    index_texts,
    load_index,
    parse_qrels,
    report,
    run_combination,
    run_sweep,
    save_index,
    score,
    search,
    tokenize,
)

__version__ = "0.1.0"

__all__ = [
    "AnalyzerConfig",
    "Error",
    "IndexFormatError",
    "NoExpansionError",
    "ParseError",
    "PrfParams",
    "Qrels",
    "Query",
    "UnicodeNormalization",
    "association_matrix",
    "build_index",
    "classify",
    "evaluate",
    "evaluate_run",
    "expand",
    "fold_arabic",
    "generate_synthetic",
    "idf",
    "index_texts",
    "load_index",
    "parse_qrels",
    "report",
    "run_combination",
    "run_sweep",
    "save_index",
    "score",
    "search",
    "tokenize",
]
