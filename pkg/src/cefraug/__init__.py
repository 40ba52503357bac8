"""cefraug: CEFR-profiled synthetic essay generation and error injection."""

__version__ = "0.1.0"

from .corpus import (ASSESSABLE_LEVELS, CEFRLevel, Corpus, Essay, RaterTriple,
                     load_corpus, rounded_average_level, save_corpus, split_corpus)
from .profiling import (FeatureVector, LevelProfile, agreement,
                        assign_nearest_level, build_level_profile,
                        cosine_similarity, extract_features, split_sentences,
                        tokenize, type_token_ratio)

__all__ = [
    "ASSESSABLE_LEVELS", "CEFRLevel", "Corpus", "Essay", "RaterTriple",
    "load_corpus", "rounded_average_level", "save_corpus", "split_corpus",
    "FeatureVector", "LevelProfile", "agreement", "assign_nearest_level",
    "build_level_profile", "cosine_similarity", "extract_features",
    "split_sentences", "tokenize", "type_token_ratio",
]
