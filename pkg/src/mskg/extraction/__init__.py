"""Two-stage text extraction of weighted manufacturer relations."""

from .evaluate import (
    ExtractionReport,
    evaluate_extraction,
    fixture_corpus_dir,
    load_fixture_corpus,
)
from .lexicon import ENTITY_TYPES, RELATION_FOR_TYPE, Lexicon, fold, fold_tokens, stem
from .pipeline import (
    Candidate,
    ExtractionConfig,
    ScoredRelation,
    build_relations,
    classify,
    coarse_filter,
    extract_document,
    relations_to_records,
)
from .ports import ChainClassifier, ClassifierPort, HttpClassifier, LexicalClassifier

__all__ = [
    "Candidate",
    "ChainClassifier",
    "ClassifierPort",
    "ENTITY_TYPES",
    "ExtractionConfig",
    "ExtractionReport",
    "HttpClassifier",
    "LexicalClassifier",
    "Lexicon",
    "RELATION_FOR_TYPE",
    "ScoredRelation",
    "build_relations",
    "classify",
    "coarse_filter",
    "evaluate_extraction",
    "extract_document",
    "fixture_corpus_dir",
    "fold",
    "fold_tokens",
    "load_fixture_corpus",
    "relations_to_records",
    "stem",
]
