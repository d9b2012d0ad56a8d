"""Text normalization shared by every representation model."""

from __future__ import annotations

import re
import unicodedata

from sklearn.base import BaseEstimator, TransformerMixin

_NON_TOKEN = re.compile(r"[^a-z0-9']+")
# apostrophes survive only between two alphanumerics ("doesn't")
_LOOSE_APOSTROPHE = re.compile(r"(?<![a-z0-9])'|'(?![a-z0-9])")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'"})


def normalize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into ``[a-z0-9']`` tokens.

    >>> normalize("Grisham, in this case, doesn't play 'his' hand.")
    ['grisham', 'in', 'this', 'case', "doesn't", 'play', 'his', 'hand']
    """
    text = unicodedata.normalize("NFC", text).translate(_APOSTROPHES).lower()
    text = _NON_TOKEN.sub(" ", text)
    text = _LOOSE_APOSTROPHE.sub(" ", text)
    return text.split()


class TextNormalizer(BaseEstimator, TransformerMixin):
    """Stateless transformer mapping raw strings to token lists.

    Items that are already token lists pass through untouched, so the
    normalizer can sit in front of cached, pre-tokenized corpora.
    """

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return [normalize(x) if isinstance(x, str) else list(x) for x in X]
