"""Attention seq2seq translation and EN/FR/JP agent routing."""

from ._core import (
    CorpusError,
    DomainError,
    Hyperparams,
    IntentError,
    MockScriptError,
    Model,
    ModelError,
    OverLengthError,
    TransagentError,
    analyze_language,
    bleu,
    determine_intent,
    load_pairs,
    normalize_text,
    parse_pairs,
    route,
    tokenize,
)

__all__ = [
    "CorpusError",
    "DomainError",
    "Hyperparams",
    "IntentError",
    "MockScriptError",
    "Model",
    "ModelError",
    "OverLengthError",
    "TransagentError",
    "analyze_language",
    "bleu",
    "determine_intent",
    "load_pairs",
    "normalize_text",
    "parse_pairs",
    "route",
    "tokenize",
]
