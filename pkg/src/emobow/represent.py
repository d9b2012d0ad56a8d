"""Lexicon-conditioned bag-of-words representation models.

Every model rewrites a normalized token sequence using the categories the
lexicon assigns to each token:

======== =====================================================================
``m``     identity, all words
``es``    keep affect words (any category)
``s``     keep sentiment-bearing words
``e``     keep emotion-bearing words
``es+g``  affect words kept, every other word replaced by ``non_emotion``
``s+g``   sentiment words kept, others replaced by ``non_emotion``
``e+g``   emotion words kept, others replaced by ``non_emotion``
``ces+m`` affect words replaced by their category names, others kept
``cs+m``  sentiment words replaced by their sentiment names, others kept
``ce+m``  emotion words replaced by their emotion names, others kept
``m-es``  affect words removed
======== =====================================================================
"""

from __future__ import annotations

import enum
from collections.abc import Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .lexicon import (
    CATEGORY_ORDER,
    EMOTIONS,
    NO_CATEGORY,
    SENTIMENTS,
    Category,
    Lexicon,
    bears_emotion,
    bears_sentiment,
    category_name,
)

GENERIC_TOKEN = "non_emotion"


class ModelKind(enum.Enum):
    M = "m"
    ES = "es"
    S = "s"
    E = "e"
    ES_G = "es+g"
    S_G = "s+g"
    E_G = "e+g"
    CES_M = "ces+m"
    CS_M = "cs+m"
    CE_M = "ce+m"
    M_MINUS_ES = "m-es"

    @classmethod
    def parse(cls, value: "ModelKind | str") -> "ModelKind":
        if isinstance(value, ModelKind):
            return value
        try:
            return cls(value.lower())
        except ValueError:
            pass
        try:
            return cls[value.upper()]
        except KeyError:
            names = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown model {value!r}; expected one of {names}") from None


class ExpandMode(enum.Enum):
    ALL = "all"
    SENTIMENTS = "sentiments"
    EMOTIONS = "emotions"


_MODE_MASK = {
    ExpandMode.ALL: SENTIMENTS | EMOTIONS,
    ExpandMode.SENTIMENTS: SENTIMENTS,
    ExpandMode.EMOTIONS: EMOTIONS,
}


def expand_categories(cs: Category, mode: ExpandMode | str = ExpandMode.ALL) -> list[str]:
    mask = _MODE_MASK[ExpandMode(mode)]
    return [category_name(c) for c in CATEGORY_ORDER if c & cs & mask]


def check_lexicon(lex: Lexicon) -> Lexicon:
    if GENERIC_TOKEN in lex:
        raise ValueError(f"lexicon must not contain the generic token {GENERIC_TOKEN!r}")
    return lex


def _keep_any(cs):
    return cs != NO_CATEGORY


# (predicate selecting the words the model treats as affect words, what to do with them)
_RULES = {
    ModelKind.ES: _keep_any,
    ModelKind.S: bears_sentiment,
    ModelKind.E: bears_emotion,
    ModelKind.ES_G: _keep_any,
    ModelKind.S_G: bears_sentiment,
    ModelKind.E_G: bears_emotion,
    ModelKind.CES_M: _keep_any,
    ModelKind.CS_M: bears_sentiment,
    ModelKind.CE_M: bears_emotion,
    ModelKind.M_MINUS_ES: _keep_any,
}

_EXPAND = {
    ModelKind.CES_M: ExpandMode.ALL,
    ModelKind.CS_M: ExpandMode.SENTIMENTS,
    ModelKind.CE_M: ExpandMode.EMOTIONS,
}


def transform(doc: Sequence[str], lex: Lexicon, kind: ModelKind | str) -> list[str]:
    """Rewrite one normalized document under representation ``kind``."""
    kind = ModelKind.parse(kind)
    if kind is ModelKind.M:
        return list(doc)
    affect = _RULES[kind]
    out: list[str] = []
    if kind in (ModelKind.ES, ModelKind.S, ModelKind.E):
        out = [w for w in doc if affect(lex.categories(w))]
    elif kind in (ModelKind.ES_G, ModelKind.S_G, ModelKind.E_G):
        out = [w if affect(lex.categories(w)) else GENERIC_TOKEN for w in doc]
    elif kind is ModelKind.M_MINUS_ES:
        out = [w for w in doc if not affect(lex.categories(w))]
    else:
        mode = _EXPAND[kind]
        for w in doc:
            cs = lex.categories(w)
            if affect(cs):
                out.extend(expand_categories(cs, mode))
            else:
                out.append(w)
    return out


class LexiconTransformer(BaseEstimator, TransformerMixin):
    """Apply one representation model to a list of token sequences.

    Parameters
    ----------
    lexicon : Lexicon
        Word-affect lexicon; ``None`` is treated as an empty lexicon.
    model : str or ModelKind, default="m"
        Representation model name (see module docstring).
    """

    def __init__(self, lexicon=None, model="m"):
        self.lexicon = lexicon
        self.model = model

    def _resolved(self):
        lex = check_lexicon(self.lexicon if self.lexicon is not None else Lexicon())
        return lex, ModelKind.parse(self.model)

    def fit(self, X, y=None):
        self._resolved()
        return self

    def transform(self, X):
        lex, kind = self._resolved()
        return [transform(doc, lex, kind) for doc in X]

    def __sklearn_is_fitted__(self):
        return True
