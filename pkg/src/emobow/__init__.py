"""Lexicon-conditioned bag-of-words models for review polarity classification."""

from .balance import RandomOverSampler, RandomUnderSampler, SamplingRegime, oversample, undersample
from .corpus import LabeledSet, PolarityClass, RawReview, parse_reviews, rating_to_class
from .features import FrequencyVectorizer, Vocabulary, build_vocabulary, vectorize
from .forest import RandomForest, best_split, entropy
from .lexicon import Category, Lexicon, load_lexicon, parse_lexicon
from .represent import GENERIC_TOKEN, LexiconTransformer, ModelKind, transform
from .textnorm import TextNormalizer, normalize

__version__ = "0.1.0"

__all__ = [
    "Category", "FrequencyVectorizer", "GENERIC_TOKEN", "LabeledSet", "Lexicon",
    "LexiconTransformer", "ModelKind", "PolarityClass", "RandomForest", "RandomOverSampler",
    "RandomUnderSampler", "RawReview", "SamplingRegime", "TextNormalizer", "Vocabulary",
    "best_split", "build_vocabulary", "entropy", "load_lexicon", "normalize", "oversample",
    "parse_lexicon", "parse_reviews", "rating_to_class", "transform", "undersample", "vectorize",
]
