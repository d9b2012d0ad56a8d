"""Pruned vocabulary and sparse token-count vectors."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import IO

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted


class EmptyVocabulary(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    index: dict[str, int]
    doc_freq: dict[str, int]
    min_df: int

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def tokens(self) -> list[str]:
        return sorted(self.index, key=self.index.__getitem__)

    def to_tsv(self, stream: IO[str]) -> None:
        for token in self.tokens():
            stream.write(f"{token}\t{self.doc_freq[token]}\n")


def document_frequencies(docs: Iterable[Sequence[str]]) -> Counter:
    df: Counter = Counter()
    for doc in docs:
        df.update(set(doc))
    return df


def build_vocabulary(docs: Iterable[Sequence[str]], min_df: int = 2) -> Vocabulary:
    """Keep tokens found in at least ``min_df`` distinct documents.

    Indices follow lexicographic token order, so the result does not depend
    on document order. Counters from separate shards may be summed and passed
    through :func:`vocabulary_from_counts`.
    """
    if min_df < 1:
        raise ValueError(f"min_df must be >= 1, got {min_df}")
    return vocabulary_from_counts(document_frequencies(docs), min_df)


def vocabulary_from_counts(df: Counter, min_df: int) -> Vocabulary:
    kept = sorted(t for t, n in df.items() if n >= min_df)
    if not kept:
        raise EmptyVocabulary(f"no token occurs in >= {min_df} documents")
    return Vocabulary({t: i for i, t in enumerate(kept)}, {t: df[t] for t in kept}, min_df)


def vectorize(doc: Sequence[str], vocab: Vocabulary) -> dict[int, int]:
    """Sparse ``{feature index: count}``; out-of-vocabulary tokens are dropped."""
    counts: dict[int, int] = {}
    for token in doc:
        j = vocab.index.get(token)
        if j is not None:
            counts[j] = counts.get(j, 0) + 1
    return counts


def count_matrix(docs: Sequence[Sequence[str]], vocab: Vocabulary) -> sp.csr_matrix:
    indptr = [0]
    indices: list[int] = []
    data: list[int] = []
    for doc in docs:
        row = vectorize(doc, vocab)
        for j in sorted(row):
            indices.append(j)
            data.append(row[j])
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data, dtype=np.float64), np.asarray(indices, dtype=np.int32),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(docs), len(vocab)),
    )


class FrequencyVectorizer(BaseEstimator, TransformerMixin):
    """Token lists to a CSR count matrix over a document-frequency pruned vocabulary.

    Parameters
    ----------
    min_df : int, default=2
        Minimum number of training documents a token must occur in.

    Attributes
    ----------
    vocabulary_ : Vocabulary
    """

    def __init__(self, min_df=2):
        self.min_df = min_df

    def fit(self, X, y=None):
        self.vocabulary_ = build_vocabulary(X, self.min_df)
        self.n_features_out_ = len(self.vocabulary_)
        return self

    def transform(self, X):
        check_is_fitted(self, "vocabulary_")
        return count_matrix(list(X), self.vocabulary_)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "vocabulary_")
        return np.asarray(self.vocabulary_.tokens(), dtype=object)
