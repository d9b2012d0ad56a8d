"""Stratified k-fold comparison of representation models."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import math
import os
import time
import zlib
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .balance import SamplingRegime, resample_indices
from .corpus import LabeledSet, PolarityClass, load_labeled
from .features import EmptyVocabulary, build_vocabulary, count_matrix
from .forest import RandomForest
from .lexicon import Lexicon, load_lexicon
from .represent import LexiconTransformer, ModelKind
from .textnorm import TextNormalizer

logger = logging.getLogger(__name__)

REPORT_SCHEMA = 1
CSV_COLUMNS = ["model", "sampling", "micro_p", "micro_r", "micro_f1", "macro_f1",
               "weighted_f1", "n_docs", "vocab_size", "seconds"]
N_CLASSES = len(PolarityClass)


class FoldError(ValueError):
    def __init__(self, cls, count: int, k: int):
        self.cls, self.count, self.k = cls, count, k
        super().__init__(f"class {cls} has {count} members, fewer than k={k} folds")


class EmptyMatrix(ValueError):
    pass


def derive_seed(seed: int, *labels) -> int:
    """Independent 32-bit seed for a labelled random stream (``"folds"``, ``"forest", 3`` ...)."""
    words = [zlib.crc32(str(label).encode()) for label in labels]
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *words]).generate_state(1)[0])


def stable_key(item, seed: int = 0) -> str:
    if isinstance(item, str):
        payload = item
    elif isinstance(item, (list, tuple)) and all(isinstance(t, str) for t in item):
        payload = "\x1f".join(item)
    else:
        payload = repr(item)
    return hashlib.sha256(f"{seed}\x00{payload}".encode()).hexdigest()


def stratified_fold_ids(labels, k: int, seed: int, keys: Sequence[str] | None = None) -> np.ndarray:
    """Fold number for every item.

    Within each class items are ordered by their stable hash key (then by
    position, for identical keys) and dealt round-robin; the dealing counter
    runs on across classes so that remainders land in different folds.
    """
    labels = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be >= 2")
    if keys is None:
        keys = [str(i) for i in range(len(labels))]
    salted = [hashlib.sha256(f"{seed}\x00{key}".encode()).hexdigest() for key in keys]
    fold = np.empty(len(labels), dtype=np.int64)
    dealt = 0
    for c in np.unique(labels):
        members = np.flatnonzero(labels == c)
        if len(members) < k:
            raise FoldError(c, len(members), k)
        order = sorted(members, key=lambda i: (salted[i], i))
        for i in order:
            fold[i] = dealt % k
            dealt += 1
    return fold


def stratified_folds(ds: LabeledSet, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """``k`` disjoint test index sets partitioning ``ds``; keys hash the items themselves."""
    ids = stratified_fold_ids(ds.labels, k, seed, [stable_key(x) for x in ds.items])
    return [np.flatnonzero(ids == f) for f in range(k)]


class StratifiedFolds:
    """``split(X, y)`` iterator in the style of scikit-learn's CV splitters."""

    def __init__(self, n_splits=10, random_state=0):
        self.n_splits = n_splits
        self.random_state = random_state

    def get_n_splits(self, X=None, y=None, groups=None):
        return self.n_splits

    def split(self, X, y, groups=None):
        ids = stratified_fold_ids(y, self.n_splits, self.random_state,
                                  [stable_key(x) for x in X])
        for f in range(self.n_splits):
            yield np.flatnonzero(ids != f), np.flatnonzero(ids == f)


def confusion_matrix(y_true, y_pred, n_classes: int = N_CLASSES) -> np.ndarray:
    """Rows are gold classes, columns predicted classes."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    return np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes) \
        .reshape(n_classes, n_classes)


def _ratio(num, den):
    return num / den if den else 0.0


@dataclass(frozen=True)
class Metrics:
    micro_p: float
    micro_r: float
    micro_f1: float
    macro_p: float
    macro_r: float
    macro_f1: float
    weighted_p: float
    weighted_r: float
    weighted_f1: float
    per_class_p: tuple
    per_class_r: tuple
    per_class_f1: tuple
    support: tuple

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v
                for k, v in dataclasses.asdict(self).items()}


def compute_metrics(cm) -> Metrics:
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total == 0:
        raise EmptyMatrix("confusion matrix is empty")
    tp = np.diag(cm)
    pred = cm.sum(axis=0)
    gold = cm.sum(axis=1)
    p = [_ratio(int(tp[c]), int(pred[c])) for c in range(len(cm))]
    r = [_ratio(int(tp[c]), int(gold[c])) for c in range(len(cm))]
    # 2TP / (2TP + FP + FN) equals the harmonic mean of P and R, and 0 when both are 0
    f = [_ratio(2 * int(tp[c]), 2 * int(tp[c]) + int(pred[c] - tp[c]) + int(gold[c] - tp[c]))
         for c in range(len(cm))]
    n_tp = int(tp.sum())
    micro_p = _ratio(n_tp, int(pred.sum()))
    micro_r = _ratio(n_tp, int(gold.sum()))
    micro_f1 = _ratio(2 * n_tp, 2 * n_tp + (total - n_tp) + (total - n_tp))
    assert micro_p == micro_r == micro_f1, "micro P/R/F1 must coincide for single-label data"
    weights = gold / total
    return Metrics(
        micro_p, micro_r, micro_f1,
        float(np.mean(p)), float(np.mean(r)), float(np.mean(f)),
        float(np.dot(weights, p)), float(np.dot(weights, r)), float(np.dot(weights, f)),
        tuple(p), tuple(r), tuple(f), tuple(int(g) for g in gold),
    )


@dataclass
class ExperimentConfig:
    corpus: str | None = None
    lexicon: str | None = None
    models: list[str] = field(default_factory=lambda: [m.value for m in ModelKind])
    sampling: str = "over"
    resample_scope: str = "per-fold"
    vocab_scope: str = "per-fold"
    k: int = 10
    seed: int = 0
    min_df: int = 2
    n_estimators: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str | int | float | None = "sqrt"
    bootstrap: bool = True
    threads: int = 1

    def __post_init__(self):
        self.models = [ModelKind.parse(m).value for m in self.models]
        SamplingRegime(self.sampling)
        if self.resample_scope not in ("per-fold", "global"):
            raise ValueError(f"resample_scope must be per-fold or global, got {self.resample_scope!r}")
        if self.vocab_scope not in ("per-fold", "global"):
            raise ValueError(f"vocab_scope must be per-fold or global, got {self.vocab_scope!r}")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.min_df < 1:
            raise ValueError("min_df must be >= 1")

    def forest_params(self) -> dict:
        return dict(n_estimators=self.n_estimators, max_depth=self.max_depth,
                    min_samples_split=self.min_samples_split,
                    min_samples_leaf=self.min_samples_leaf, max_features=self.max_features,
                    bootstrap=self.bootstrap)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class ModelResult:
    model: str
    sampling: str
    status: str = "ok"
    error: str | None = None
    metrics: Metrics | None = None
    confusion: list | None = None
    n_docs: int = 0
    class_counts: dict = field(default_factory=dict)
    vocab_sizes: list = field(default_factory=list)
    fold_micro_f1: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def vocab_size(self) -> int:
        return int(round(float(np.mean(self.vocab_sizes)))) if self.vocab_sizes else 0

    @property
    def degenerate(self) -> bool:
        """A single-token vocabulary carries no lexical information."""
        return self.status == "ok" and self.vocab_size <= 1

    @property
    def fold_se(self) -> float:
        s = self.fold_micro_f1
        if len(s) < 2:
            return 0.0
        return float(np.std(s, ddof=1) / math.sqrt(len(s)))

    def to_dict(self) -> dict:
        return {
            "model": self.model, "sampling": self.sampling, "status": self.status,
            "error": self.error, "degenerate": self.degenerate,
            "metrics": self.metrics.to_dict() if self.metrics else None,
            "confusion": self.confusion, "n_docs": self.n_docs,
            "class_counts": self.class_counts, "vocab_size": self.vocab_size,
            "vocab_sizes": self.vocab_sizes, "fold_micro_f1": self.fold_micro_f1,
            "fold_se": self.fold_se, "seconds": self.seconds,
        }


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    results: list[ModelResult]

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.results)

    def result(self, model: str | ModelKind) -> ModelResult:
        name = ModelKind.parse(model).value
        return next(r for r in self.results if r.model == name)

    def to_dict(self) -> dict:
        return {"schema": REPORT_SCHEMA, "version": __version__, "config": self.config.to_dict(),
                "complete": self.ok, "results": [r.to_dict() for r in self.results]}

    def to_csv(self, timing: bool = False) -> str:
        """Table with one row per (model, sampling); ``seconds`` left blank unless ``timing``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.results:
            if r.metrics is None:
                writer.writerow([r.model, r.sampling, "", "", "", "", "", r.n_docs, r.vocab_size,
                                 f"{r.seconds:.3f}" if timing else ""])
                continue
            m = r.metrics
            writer.writerow([r.model, r.sampling, f"{m.micro_p:.6f}", f"{m.micro_r:.6f}",
                             f"{m.micro_f1:.6f}", f"{m.macro_f1:.6f}", f"{m.weighted_f1:.6f}",
                             r.n_docs, r.vocab_size, f"{r.seconds:.3f}" if timing else ""])
        return buf.getvalue()

    def write(self, out_dir: str, timing: bool = False) -> tuple[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, "report.csv")
        json_path = os.path.join(out_dir, "report.json")
        _atomic_write(csv_path, self.to_csv(timing))
        _atomic_write(json_path, json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return csv_path, json_path


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _evaluate_model(kind: ModelKind, tokens: list, labels: np.ndarray, keys: list[str],
                    lexicon: Lexicon, config: ExperimentConfig) -> ModelResult:
    regime = SamplingRegime(config.sampling)
    result = ModelResult(kind.value, regime.value)
    started = time.perf_counter()
    docs = LexiconTransformer(lexicon, kind).transform(tokens)

    src = np.arange(len(docs))
    if config.resample_scope == "global":
        src = src[resample_indices(labels, regime, derive_seed(config.seed, "resample"))]
    y = labels[src]
    fold = stratified_fold_ids(y, config.k, derive_seed(config.seed, "folds"),
                               [keys[i] for i in src])
    result.class_counts = {c.label: int(n) for c, n in
                           zip(PolarityClass, np.bincount(y, minlength=N_CLASSES))}

    global_vocab = None
    if config.vocab_scope == "global":
        global_vocab = build_vocabulary((docs[i] for i in np.unique(src)), config.min_df)

    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for f in range(config.k):
        train = np.flatnonzero(fold != f)
        test = np.flatnonzero(fold == f)
        if config.resample_scope == "per-fold":
            train = train[resample_indices(y[train], regime, derive_seed(config.seed, "resample", f))]
        train_src = src[train]
        if global_vocab is None:
            distinct = np.unique(train_src)
            vocab = build_vocabulary((docs[i] for i in distinct), config.min_df)
            seen = set().union(*(docs[i] for i in distinct))
            assert seen.issuperset(vocab.index), "vocabulary leaked tokens from the test fold"
        else:
            vocab = global_vocab
        result.vocab_sizes.append(len(vocab))
        X_train = count_matrix([docs[i] for i in train_src], vocab)
        X_test = count_matrix([docs[i] for i in src[test]], vocab)
        forest = RandomForest(**config.forest_params(),
                              random_state=derive_seed(config.seed, "forest", f),
                              n_jobs=config.threads)
        pred = forest.fit(X_train, y[train]).predict(X_test)
        fold_cm = confusion_matrix(y[test], pred)
        result.fold_micro_f1.append(compute_metrics(fold_cm).micro_f1)
        cm += fold_cm
        logger.debug("%s fold %d: vocab=%d acc=%.4f", kind.value, f, len(vocab),
                     result.fold_micro_f1[-1])

    result.metrics = compute_metrics(cm)
    result.confusion = cm.tolist()
    result.n_docs = int(cm.sum())
    result.seconds = time.perf_counter() - started
    return result


def run_experiment(config: ExperimentConfig, data: LabeledSet | None = None,
                   lexicon: Lexicon | None = None) -> ExperimentReport:
    """Evaluate every configured model with stratified k-fold cross-validation.

    ``data`` and ``lexicon`` default to loading ``config.corpus`` (NDJSON) and
    ``config.lexicon`` (NRC TSV). Models failing with ``EmptyVocabulary`` or
    ``FoldError`` are recorded with ``status="failed"`` and the remaining
    models still run.
    """
    if data is None:
        data = load_labeled(config.corpus)
    if lexicon is None:
        lexicon = load_lexicon(config.lexicon) if config.lexicon else Lexicon()
    tokens = TextNormalizer().transform(data.items)
    keys = [stable_key(t) for t in tokens]
    results = []
    for name in config.models:
        kind = ModelKind.parse(name)
        try:
            result = _evaluate_model(kind, tokens, data.labels, keys, lexicon, config)
        except (EmptyVocabulary, FoldError) as exc:
            logger.warning("model %s failed: %s", kind.value, exc)
            result = ModelResult(kind.value, SamplingRegime(config.sampling).value,
                                 status="failed", error=f"{type(exc).__name__}: {exc}")
        results.append(result)
        if result.metrics:
            logger.info("%-6s micro-F1 %.4f (se %.4f) vocab %d  %.1fs", result.model,
                        result.metrics.micro_f1, result.fold_se, result.vocab_size, result.seconds)
    return ExperimentReport(config, results)


def load_report(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def read_csv_report(path: str) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def format_table(rows: Iterable[dict]) -> str:
    """Aligned text table: model, micro precision / recall / F-measure."""
    header = ["Model", "Sampling", "Micro-P", "Micro-R", "Micro-F1", "Macro-F1", "Weighted-F1",
              "Docs", "Vocab"]
    body = [[r["model"].upper(), r["sampling"], r["micro_p"] or "-", r["micro_r"] or "-",
             r["micro_f1"] or "-", r["macro_f1"] or "-", r["weighted_f1"] or "-",
             str(r["n_docs"]), str(r["vocab_size"])] for r in rows]
    widths = [max(len(str(x)) for x in col) for col in zip(header, *body)]
    lines = ["  ".join(str(x).ljust(w) for x, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(str(x).ljust(w) for x, w in zip(row, widths)) for row in body)
    return "\n".join(lines) + "\n"
