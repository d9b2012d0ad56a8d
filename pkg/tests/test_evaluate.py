import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn import metrics as skm

from emobow.corpus import LabeledSet
from emobow.evaluate import (
    EmptyMatrix,
    ExperimentConfig,
    FoldError,
    StratifiedFolds,
    compute_metrics,
    confusion_matrix,
    derive_seed,
    format_table,
    read_csv_report,
    run_experiment,
    stratified_fold_ids,
    stratified_folds,
)
from emobow.lexicon import Lexicon
from emobow.synth import SynthSpec, generate


def labeled(counts):
    labels = np.repeat(np.arange(3), counts)
    return LabeledSet([f"review number {i}" for i in range(len(labels))], labels)


# --- folds -------------------------------------------------------------------------------------

def test_divisible_folds_hold_one_per_class():
    folds = stratified_folds(labeled([10, 10, 10]), k=10, seed=0)
    ds = labeled([10, 10, 10])
    for test in folds:
        assert sorted(ds.labels[test].tolist()) == [0, 1, 2]


def test_one_extra_item():
    ds = labeled([11, 10, 10])
    sizes = sorted(len(t) for t in stratified_folds(ds, k=10, seed=4))
    assert sizes == [3] * 9 + [4]


def test_small_class_raises_fold_error():
    with pytest.raises(FoldError) as info:
        stratified_folds(labeled([10, 3, 10]), k=10, seed=0)
    assert (info.value.cls, info.value.count, info.value.k) == (1, 3, 10)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(5, 40), min_size=3, max_size=3), st.integers(2, 5),
       st.integers(0, 1000))
def test_folds_partition_and_stratify(counts, k, seed):
    ds = labeled(counts)
    folds = stratified_folds(ds, k=k, seed=seed)
    joined = np.sort(np.concatenate(folds))
    np.testing.assert_array_equal(joined, np.arange(len(ds)))
    for c, n in enumerate(counts):
        per_fold = [int((ds.labels[t] == c).sum()) for t in folds]
        assert max(per_fold) - min(per_fold) <= 1
        assert abs(per_fold[0] - n / k) < 1


def test_fold_assignment_ignores_input_order():
    ds = labeled([12, 15, 20])
    perm = np.random.default_rng(1).permutation(len(ds))
    shuffled = ds.subset(perm)
    fold_of = {}
    for f, test in enumerate(stratified_folds(ds, 5, seed=9)):
        fold_of.update({ds.items[i]: f for i in test})
    for f, test in enumerate(stratified_folds(shuffled, 5, seed=9)):
        assert all(fold_of[shuffled.items[i]] == f for i in test)


def test_splitter_interface():
    ds = labeled([6, 6, 6])
    splits = list(StratifiedFolds(3, random_state=2).split(ds.items, ds.labels))
    assert len(splits) == 3
    for train, test in splits:
        assert len(set(train) & set(test)) == 0 and len(train) + len(test) == 18


def test_derived_seeds_differ_by_label():
    assert derive_seed(0, "folds") == derive_seed(0, "folds")
    assert len({derive_seed(0, "folds"), derive_seed(0, "forest", 0), derive_seed(0, "forest", 1),
                derive_seed(1, "folds")}) == 4


# --- metrics -----------------------------------------------------------------------------------

def test_diagonal_matrix_is_perfect():
    m = compute_metrics(np.diag([4, 2, 7]))
    for name in ("micro_p", "micro_r", "micro_f1", "macro_p", "macro_r", "macro_f1",
                 "weighted_p", "weighted_r", "weighted_f1"):
        assert getattr(m, name) == 1.0


def test_majority_prediction():
    m = compute_metrics([[0, 0, 13], [0, 0, 9], [0, 0, 78]])
    assert m.micro_p == m.micro_r == m.micro_f1 == pytest.approx(0.78)
    assert m.per_class_p == (0.0, 0.0, 0.78)


def test_hand_computed_matrix():
    m = compute_metrics([[5, 0, 0], [0, 0, 5], [0, 0, 5]])
    assert m.micro_f1 == pytest.approx(10 / 15)
    assert m.macro_r == pytest.approx(2 / 3)
    assert m.per_class_f1[1] == 0.0


def test_empty_matrix():
    with pytest.raises(EmptyMatrix):
        compute_metrics(np.zeros((3, 3)))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=60))
def test_metrics_agree_with_sklearn(pairs):
    y_true, y_pred = map(np.array, zip(*pairs))
    cm = confusion_matrix(y_true, y_pred)
    np.testing.assert_array_equal(cm, skm.confusion_matrix(y_true, y_pred, labels=[0, 1, 2]))
    m = compute_metrics(cm)
    assert m.micro_p == m.micro_r == m.micro_f1
    assert m.micro_f1 == pytest.approx(skm.accuracy_score(y_true, y_pred))
    for avg in ("macro", "weighted"):
        p, r, f, _ = skm.precision_recall_fscore_support(
            y_true, y_pred, labels=[0, 1, 2], average=avg, zero_division=0)
        assert getattr(m, f"{avg}_p") == pytest.approx(p)
        assert getattr(m, f"{avg}_r") == pytest.approx(r)
        assert getattr(m, f"{avg}_f1") == pytest.approx(f)
    for c in range(3):
        p, r, f = m.per_class_p[c], m.per_class_r[c], m.per_class_f1[c]
        assert f == pytest.approx(2 * p * r / (p + r) if p + r else 0.0)


# --- experiments -------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def small_corpus():
    return generate(SynthSpec(class_sizes=(60, 60, 60), seed=3))


def quick_config(**kw):
    base = dict(k=5, n_estimators=15, seed=1)
    base.update(kw)
    return ExperimentConfig(**base)


def test_planted_signal_separates_models(small_corpus):
    report = run_experiment(quick_config(models=["es", "m-es"]), small_corpus.labeled(),
                            small_corpus.lexicon)
    assert report.ok
    assert report.result("es").metrics.micro_f1 >= 0.9
    assert report.result("m-es").metrics.micro_f1 <= 0.6
    for r in report.results:
        assert r.n_docs == len(small_corpus.texts)
        assert sum(map(sum, r.confusion)) == r.n_docs
        assert len(r.fold_micro_f1) == 5 and len(r.vocab_sizes) == 5


def test_reports_are_reproducible(small_corpus, tmp_path):
    cfg = quick_config(models=["s", "e+g"], sampling="under")
    a = run_experiment(cfg, small_corpus.labeled(), small_corpus.lexicon)
    again = ExperimentConfig.from_dict(json.loads(json.dumps(a.config.to_dict())))
    b = run_experiment(again, small_corpus.labeled(), small_corpus.lexicon)
    assert a.to_csv() == b.to_csv()
    csv_path, json_path = a.write(str(tmp_path))
    rows = read_csv_report(csv_path)
    assert [r["model"] for r in rows] == ["s", "e+g"]
    assert rows[0]["seconds"] == ""
    assert "S" in format_table(rows)
    assert json.loads(open(json_path).read())["config"]["sampling"] == "under"


def test_global_resampling_counts(small_corpus):
    ds = small_corpus.labeled().subset(np.flatnonzero(small_corpus.labels != 1)[:70].tolist()
                                       + np.flatnonzero(small_corpus.labels == 1)[:20].tolist())
    cfg = quick_config(models=["es"], resample_scope="global", sampling="over")
    result = run_experiment(cfg, ds, small_corpus.lexicon).result("es")
    top = max(ds.class_counts.values())
    assert result.n_docs == 3 * top
    assert set(result.class_counts.values()) == {top}


def test_empty_lexicon_paths(small_corpus):
    report = run_experiment(quick_config(models=["es", "es+g", "m"]), small_corpus.labeled(),
                            Lexicon())
    assert not report.ok
    es, es_g, m = (report.result(x) for x in ("es", "es+g", "m"))
    assert es.status == "failed" and "EmptyVocabulary" in es.error
    assert es_g.status == "ok" and es_g.degenerate and es_g.vocab_size == 1
    assert m.status == "ok" and not m.degenerate
    assert report.to_csv().splitlines()[1].startswith("es,over,,")


def test_fold_error_is_reported(small_corpus):
    report = run_experiment(quick_config(models=["es"], k=100), small_corpus.labeled(),
                            small_corpus.lexicon)
    assert report.result("es").status == "failed"
    assert "FoldError" in report.result("es").error


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(sampling="sideways")
    with pytest.raises(ValueError):
        ExperimentConfig(models=["xyz"])
    with pytest.raises(ValueError):
        ExperimentConfig(k=1)
    with pytest.raises(ValueError):
        stratified_fold_ids([0, 1], 1, 0)
