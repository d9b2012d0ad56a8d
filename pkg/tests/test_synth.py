import numpy as np
import pytest

from emobow.corpus import PolarityClass, rating_to_class
from emobow.represent import transform
from emobow.synth import SynthSpec, bayes_accuracy, generate, planted_lexicon, word_pools
from emobow.textnorm import normalize


def test_full_signal_is_separable():
    assert bayes_accuracy(SynthSpec(signal=1.0)) == pytest.approx(1.0)


def test_zero_signal_is_chance():
    spec = SynthSpec(signal=0.0, class_sizes=(100, 100, 100))
    assert bayes_accuracy(spec) == pytest.approx(1 / 3)
    assert bayes_accuracy(SynthSpec(signal=0.0, class_sizes=(13, 9, 78))) == pytest.approx(0.78)


def test_zero_signal_text_independent_of_label():
    corpus = generate(SynthSpec(signal=0.0, class_sizes=(400, 400, 400), seed=2))
    lengths = np.array([len(normalize(t)) for t in corpus.texts])
    means = [lengths[corpus.labels == c].mean() for c in range(3)]
    assert max(means) - min(means) < 2.0
    # cue source classes are uniform whatever the label
    for c in range(3):
        cues = [w[:3] for t, y in zip(corpus.texts, corpus.labels) if y == c
                for w in transform(normalize(t), corpus.lexicon, "es")]
        shares = [cues.count(p) / len(cues) for p in ("neg", "neu", "pos")]
        assert max(abs(s - 1 / 3) for s in shares) < 0.05


def monte_carlo_bayes(spec, n, seed):
    """Apply the Bayes rule to fresh samples: count source classes, add length evidence."""
    rng = np.random.default_rng(seed)
    prior = np.asarray(spec.class_sizes, float) / sum(spec.class_sizes)
    correct = 0
    from scipy.stats import multinomial, poisson
    for _ in range(n):
        y = rng.choice(3, p=prior)
        counts = rng.multinomial(spec.n_cues, spec.source_probs(y))
        length = rng.poisson(spec.filler_rate(y))
        post = [prior[c] * multinomial.pmf(counts, spec.n_cues, spec.source_probs(c))
                * poisson.pmf(length, spec.filler_rate(c)) for c in range(3)]
        correct += int(np.argmax(post) == y)
    return correct / n


def test_half_signal_closed_form_matches_simulation():
    spec = SynthSpec(signal=0.5)
    exact = bayes_accuracy(spec)
    assert 1 / 3 < exact < 1
    assert monte_carlo_bayes(spec, 4000, 0) == pytest.approx(exact, abs=0.025)
    assert bayes_accuracy(spec, use_length=False) <= exact


def test_generation_is_deterministic_and_well_formed():
    spec = SynthSpec(class_sizes=(20, 30, 40), seed=5)
    a, b = generate(spec), generate(spec)
    assert a.texts == b.texts
    assert np.bincount(a.labels).tolist() == [20, 30, 40]
    assert generate(SynthSpec(class_sizes=(20, 30, 40), seed=6)).texts != a.texts
    for text, rating, y in zip(a.texts, a.ratings, a.labels):
        assert rating_to_class(rating) == PolarityClass(int(y))
        tokens = normalize(text)
        assert len(transform(tokens, a.lexicon, "es")) == spec.n_cues


def test_full_signal_cues_come_from_own_class():
    corpus = generate(SynthSpec(class_sizes=(30, 30, 30), seed=1))
    prefixes = {0: "neg", 1: "neu", 2: "pos"}
    for text, y in zip(corpus.texts, corpus.labels):
        cues = transform(normalize(text), corpus.lexicon, "es")
        assert all(w.startswith(prefixes[int(y)]) for w in cues)


def test_planted_lexicon_kinds():
    spec = SynthSpec()
    lex = planted_lexicon(spec)
    pools = word_pools(spec)
    assert len(lex) == 9 * spec.pool_size
    assert all(transform([w], lex, "e") == [] for w in pools[(0, "sentiment")])
    assert all(transform([w], lex, "s") == [] for w in pools[(2, "emotion")])
    assert all(transform([w], lex, "s") == [w] for w in pools[(1, "both")])
