"""Synthetic review corpora with planted lexicon signal.

Every document of class ``c`` carries ``n_cues`` affect words and a Poisson
number of filler words that are absent from the lexicon. Each affect word is
of one of three kinds, drawn with ``kind_probs``:

* ``both``      sentiment and emotion categories,
* ``sentiment`` sentiment categories only,
* ``emotion``   emotion categories only.

Its *source class* is ``c`` with probability ``signal`` and otherwise uniform
over the three classes; the word is then drawn uniformly from the pool of
``(source class, kind)``. Pools are disjoint, so a word reveals its source
class. Filler words are uniform over ``filler_vocab`` words; the filler count
has mean ``filler_mean + signal * length_shift[c]``. With ``signal=0`` the
text is independent of the label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .corpus import LabeledSet, PolarityClass
from .lexicon import Lexicon

KINDS = ("both", "sentiment", "emotion")

_EMOTIONS = {
    PolarityClass.NEGATIVE: ("anger", "disgust", "fear", "sadness"),
    PolarityClass.NEUTRAL: ("surprise", "anticipation"),
    PolarityClass.POSITIVE: ("joy", "trust", "anticipation"),
}
_SENTIMENTS = {
    PolarityClass.NEGATIVE: ("negative",),
    PolarityClass.NEUTRAL: ("positive", "negative"),
    PolarityClass.POSITIVE: ("positive",),
}
_RATINGS = {PolarityClass.NEGATIVE: (1, 2), PolarityClass.NEUTRAL: (3,),
            PolarityClass.POSITIVE: (4, 5)}
_PREFIX = {PolarityClass.NEGATIVE: "neg", PolarityClass.NEUTRAL: "neu",
           PolarityClass.POSITIVE: "pos"}


@dataclass(frozen=True)
class SynthSpec:
    class_sizes: tuple[int, int, int] = (300, 300, 300)
    signal: float = 1.0
    n_cues: int = 5
    kind_probs: tuple[float, float, float] = (0.4, 0.35, 0.25)
    pool_size: int = 12
    filler_vocab: int = 3000
    filler_mean: float = 40.0
    length_shift: tuple[float, float, float] = (5.0, 0.0, -5.0)
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.signal <= 1.0:
            raise ValueError("signal must lie in [0, 1]")
        if len(self.class_sizes) != 3 or min(self.class_sizes) < 0:
            raise ValueError("class_sizes needs three non-negative sizes")
        if abs(sum(self.kind_probs) - 1.0) > 1e-9:
            raise ValueError("kind_probs must sum to 1")
        if self.n_cues < 0 or self.pool_size < 1 or self.filler_vocab < 1:
            raise ValueError("n_cues, pool_size and filler_vocab must be positive")
        for c in range(3):
            if self.filler_mean + self.signal * self.length_shift[c] <= 0:
                raise ValueError("filler means must stay positive")

    def source_probs(self, cls: int) -> np.ndarray:
        q = np.full(3, (1.0 - self.signal) / 3.0)
        q[cls] += self.signal
        return q

    def filler_rate(self, cls: int) -> float:
        return self.filler_mean + self.signal * self.length_shift[cls]


@dataclass
class SynthCorpus:
    spec: SynthSpec
    texts: list[str]
    labels: np.ndarray
    ratings: list[int]
    lexicon: Lexicon
    pools: dict = field(repr=False, default_factory=dict)

    def labeled(self) -> LabeledSet:
        return LabeledSet(self.texts, self.labels)

    def records(self):
        for text, rating, y in zip(self.texts, self.ratings, self.labels):
            yield {"text": text, "rating": rating, "class": PolarityClass(int(y)).label}


def word_pools(spec: SynthSpec) -> dict[tuple[int, str], list[str]]:
    return {(int(c), kind): [f"{_PREFIX[c]}{kind[:4]}{i:03d}" for i in range(spec.pool_size)]
            for c in PolarityClass for kind in KINDS}


def filler_words(spec: SynthSpec) -> list[str]:
    return [f"w{i:05d}" for i in range(spec.filler_vocab)]


def planted_lexicon(spec: SynthSpec) -> Lexicon:
    """Lexicon entries for every affect word; categories rotate through the class's lists."""
    words = {}
    for (c, kind), pool in word_pools(spec).items():
        emos = _EMOTIONS[PolarityClass(c)]
        sents = _SENTIMENTS[PolarityClass(c)]
        for i, word in enumerate(pool):
            labels = []
            if kind in ("both", "sentiment"):
                labels.append(sents[i % len(sents)])
            if kind in ("both", "emotion"):
                labels.append(emos[i % len(emos)])
            words[word] = labels
    return Lexicon.from_words(words)


def generate(spec: SynthSpec) -> SynthCorpus:
    rng = np.random.default_rng(spec.seed)
    pools = word_pools(spec)
    fillers = filler_words(spec)
    labels = np.repeat(np.arange(3), spec.class_sizes)
    rng.shuffle(labels)
    texts, ratings = [], []
    for y in labels:
        y = int(y)
        tokens = []
        for _ in range(spec.n_cues):
            kind = KINDS[rng.choice(3, p=spec.kind_probs)]
            source = int(rng.choice(3, p=spec.source_probs(y)))
            pool = pools[(source, kind)]
            tokens.append(pool[rng.integers(len(pool))])
        n_fill = rng.poisson(spec.filler_rate(y))
        tokens.extend(fillers[j] for j in rng.integers(0, len(fillers), n_fill))
        rng.shuffle(tokens)
        text = " ".join(tokens)
        texts.append(text[:1].upper() + text[1:] + ".")
        ratings.append(int(rng.choice(_RATINGS[PolarityClass(y)])))
    return SynthCorpus(spec, texts, labels.astype(np.int64), ratings, planted_lexicon(spec), pools)


def _poisson_pmf(lam: float, n_max: int) -> np.ndarray:
    k = np.arange(n_max + 1)
    return np.exp(k * math.log(lam) - lam - np.array([math.lgamma(i + 1) for i in k]))


def bayes_accuracy(spec: SynthSpec, *, use_length: bool = True, tail: float = 1e-15) -> float:
    """Accuracy of the Bayes-optimal classifier that sees every affect word.

    The source-class counts of the ``n_cues`` affect words are a sufficient
    statistic for the words (pools are disjoint and word choice inside a pool
    is label-free); with ``use_length`` the filler count is observed as well.
    The sum runs over all count vectors and filler counts up to a Poisson
    tail mass below ``tail``.
    """
    prior = np.asarray(spec.class_sizes, dtype=float)
    prior = prior / prior.sum()
    n = spec.n_cues
    vectors = [v for v in product(range(n + 1), repeat=3) if sum(v) == n]
    log_mult = math.lgamma(n + 1)
    cue_lik = np.empty((len(vectors), 3))
    for i, v in enumerate(vectors):
        coef = math.exp(log_mult - sum(math.lgamma(x + 1) for x in v))
        for c in range(3):
            q = spec.source_probs(c)
            cue_lik[i, c] = coef * np.prod([q[j] ** v[j] for j in range(3)])
    joint = cue_lik * prior
    if not use_length:
        return float(joint.max(axis=1).sum())
    rates = [spec.filler_rate(c) for c in range(3)]
    n_max = int(max(rates) + 12 * math.sqrt(max(rates)) + 50)
    while max(1 - _poisson_pmf(r, n_max).sum() for r in rates) > tail and n_max < 10**6:
        n_max *= 2
    len_lik = np.stack([_poisson_pmf(r, n_max) for r in rates], axis=1)  # (L, 3)
    full = joint[:, None, :] * len_lik[None, :, :]
    return float(full.max(axis=2).sum())
