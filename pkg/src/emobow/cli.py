"""Command-line entry point: ``emobow <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .balance import SamplingRegime, resample_indices
from .corpus import (
    ParseStats,
    PolarityClass,
    XmlSyntaxError,
    class_distribution,
    read_ndjson,
    read_reviews,
    record_class,
    review_record,
    write_ndjson,
)
from .evaluate import (
    ExperimentConfig,
    FoldError,
    format_table,
    load_report,
    read_csv_report,
    run_experiment,
)
from .features import EmptyVocabulary, Vocabulary, build_vocabulary, count_matrix
from .forest import RandomForest
from .lexicon import Category, Lexicon, LexiconError, load_lexicon
from .represent import ModelKind, transform
from .synth import SynthSpec, bayes_accuracy, generate
from .textnorm import normalize

logger = logging.getLogger("emobow")

MODEL_FORMAT = "emobow-model"
MODEL_VERSION = 1
MODEL_CHOICES = [m.value for m in ModelKind]


class CliError(Exception):
    pass


def _max_features(value: str):
    if value in ("sqrt", "log2", "all"):
        return value
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid max-features {value!r}") from None


def _class_sizes(value: str) -> tuple[int, int, int]:
    parts = value.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected NEG,NEU,POS counts")
    return tuple(int(p) for p in parts)


def _print_distribution(labels, out=None) -> None:
    out = out or sys.stdout
    for cls, (n, share) in class_distribution(labels).items():
        print(f"{cls.label:<9} {n:>10}  {share:7.2%}", file=out)
    print(f"{'total':<9} {len(labels):>10}", file=out)


def _load_docs(path: str, model: str | None, lexicon: Lexicon):
    """Token docs, labels and model kind for an NDJSON file.

    Records written by ``transform`` are already rewritten; they are used as
    they are and must agree with ``model`` when one is given.
    """
    records = list(read_ndjson(path))
    labels = np.array([int(record_class(r)) for r in records if "class" in r or "rating" in r],
                      dtype=np.int64)
    cached = {r.get("model") for r in records}
    if records and cached != {None}:
        if len(cached) != 1 or None in cached:
            raise CliError(f"{path}: records mix transformed and raw documents")
        kind = ModelKind.parse(cached.pop())
        if model is not None and ModelKind.parse(model) is not kind:
            raise CliError(f"{path} holds {kind.value} documents, --model asks for {model}")
        return [r["tokens"] for r in records], labels, kind
    kind = ModelKind.parse(model or "m")
    docs = [transform(r["tokens"] if "tokens" in r else normalize(r["text"]), lexicon, kind)
            for r in records]
    return docs, labels, kind


def _lexicon(path: str | None) -> Lexicon:
    return load_lexicon(path) if path else Lexicon()


# --- subcommands -------------------------------------------------------------------------------

def cmd_ingest(args) -> int:
    if not os.path.exists(args.xml):
        raise CliError(f"{args.xml}: no such file or directory")
    stats = ParseStats()
    labels = []

    def records():
        for review in read_reviews(args.xml, stats, review_tag=args.review_tag,
                                   content_tag=args.content_tag, rating_tag=args.rating_tag):
            labels.append(int(review.polarity))
            yield review_record(review)

    n = write_ndjson(records(), args.out)
    print(f"wrote {n} reviews to {args.out} ({stats.skipped} skipped)")
    _print_distribution(labels)
    return 0


def cmd_transform(args) -> int:
    lexicon = _lexicon(args.lexicon)
    kind = ModelKind.parse(args.model)

    def records():
        for rec in read_ndjson(args.input):
            tokens = rec["tokens"] if "tokens" in rec else normalize(rec["text"])
            yield {"tokens": transform(tokens, lexicon, kind), "class": record_class(rec).label,
                   "model": kind.value}

    n = write_ndjson(records(), args.out)
    print(f"wrote {n} {kind.value} documents to {args.out}")
    return 0


def cmd_balance(args) -> int:
    records = list(read_ndjson(args.input))
    labels = np.array([int(record_class(r)) for r in records], dtype=np.int64)
    idx = resample_indices(labels, args.sampling, args.seed)
    write_ndjson((records[i] for i in idx), args.out)
    print(f"wrote {len(idx)} records to {args.out}")
    _print_distribution(labels[idx])
    return 0


def cmd_train(args) -> int:
    lexicon = _lexicon(args.lexicon)
    docs, labels, kind = _load_docs(args.corpus, args.model, lexicon)
    if len(labels) != len(docs):
        raise CliError(f"{args.corpus}: every record needs a class or rating to train")
    vocab = build_vocabulary(docs, args.min_df)
    forest = RandomForest(
        n_estimators=args.n_estimators, max_depth=args.max_depth,
        min_samples_split=args.min_samples_split, min_samples_leaf=args.min_samples_leaf,
        max_features=args.max_features, bootstrap=not args.no_bootstrap,
        random_state=args.seed, n_jobs=args.threads,
    ).fit(count_matrix(docs, vocab), labels)
    doc = {
        "format": MODEL_FORMAT, "version": MODEL_VERSION, "emobow": __version__,
        "model": kind.value, "min_df": args.min_df,
        "lexicon": {w: int(cs) for w, cs in sorted(lexicon.items())},
        "vocabulary": [[t, vocab.doc_freq[t]] for t in vocab.tokens()],
        "forest": forest.to_dict(),
    }
    tmp = f"{args.out}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
    os.replace(tmp, args.out)
    print(f"trained {kind.value} forest on {len(docs)} documents, {len(vocab)} features "
          f"-> {args.out}")
    return 0


def cmd_predict(args) -> int:
    with open(args.model_file, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise CliError(f"{args.model_file}: not a {MODEL_FORMAT} v{MODEL_VERSION} file")
    lexicon = Lexicon({w: Category(v) for w, v in doc["lexicon"].items()})
    vocab = Vocabulary({t: i for i, (t, _) in enumerate(doc["vocabulary"])},
                       {t: df for t, df in doc["vocabulary"]}, doc["min_df"])
    forest = RandomForest.from_dict(doc["forest"])
    forest.n_jobs = args.threads
    records = list(read_ndjson(args.input))
    docs, _, _ = _load_docs(args.input, doc["model"], lexicon)
    shares = forest.predict_proba(count_matrix(docs, vocab))
    predicted = forest.classes_[np.argmax(shares, axis=1)]

    def out_records():
        for rec, p, s in zip(records, predicted, shares):
            rec = dict(rec)
            rec["predicted"] = PolarityClass(int(p)).label
            rec["votes"] = {PolarityClass(int(c)).label: float(v)
                            for c, v in zip(forest.classes_, s)}
            yield rec

    write_ndjson(out_records(), args.out)
    gold = [r for r in records if "class" in r or "rating" in r]
    if len(gold) == len(records) and records:
        acc = np.mean([int(record_class(r)) == int(p) for r, p in zip(records, predicted)])
        print(f"accuracy {acc:.4f} on {len(records)} documents")
    print(f"wrote {len(records)} predictions to {args.out}")
    return 0


def _config_from_args(args) -> ExperimentConfig:
    if args.from_report:
        snapshot = load_report(args.from_report)["config"]
        snapshot["threads"] = args.threads
        return ExperimentConfig.from_dict(snapshot)
    if not args.corpus:
        raise CliError("evaluate needs --corpus (or --from-report)")
    return ExperimentConfig(
        corpus=args.corpus, lexicon=args.lexicon, models=args.model or MODEL_CHOICES,
        sampling=args.sampling, resample_scope=args.resample_scope,
        vocab_scope=args.vocab_scope, k=args.k, seed=args.seed, min_df=args.min_df,
        n_estimators=args.n_estimators, max_depth=args.max_depth,
        min_samples_split=args.min_samples_split, min_samples_leaf=args.min_samples_leaf,
        max_features=args.max_features, bootstrap=not args.no_bootstrap, threads=args.threads,
    )


def cmd_evaluate(args) -> int:
    config = _config_from_args(args)
    report = run_experiment(config)
    csv_path, json_path = report.write(args.out, timing=args.csv_timing)
    print(format_table(read_csv_report(csv_path)), end="")
    for r in report.results:
        if r.status != "ok":
            print(f"FAILED {r.model}: {r.error}", file=sys.stderr)
        elif r.degenerate:
            print(f"warning: {r.model} has a degenerate vocabulary of size {r.vocab_size}",
                  file=sys.stderr)
    print(f"report written to {csv_path} and {json_path}")
    return 0 if report.ok else 1


def cmd_report(args) -> int:
    print(format_table(read_csv_report(args.csv)), end="")
    return 0


def cmd_synth(args) -> int:
    spec = SynthSpec(class_sizes=args.sizes, signal=args.signal, n_cues=args.cues,
                     pool_size=args.pool_size, filler_vocab=args.filler_vocab,
                     filler_mean=args.filler_mean, seed=args.seed)
    corpus = generate(spec)
    write_ndjson(corpus.records(), args.out)
    tmp = f"{args.lexicon_out}.tmp{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        corpus.lexicon.to_tsv(fh)
    os.replace(tmp, args.lexicon_out)
    print(f"wrote {len(corpus.texts)} documents to {args.out} and "
          f"{len(corpus.lexicon)} lexicon words to {args.lexicon_out}")
    print(f"bayes accuracy {bayes_accuracy(spec):.4f} "
          f"(affect words only {bayes_accuracy(spec, use_length=False):.4f})")
    return 0


# --- parser ------------------------------------------------------------------------------------

def _add_forest_flags(p) -> None:
    g = p.add_argument_group("forest")
    g.add_argument("--n-estimators", type=int, default=100)
    g.add_argument("--max-depth", type=int, default=None)
    g.add_argument("--min-samples-split", type=int, default=2)
    g.add_argument("--min-samples-leaf", type=int, default=1)
    g.add_argument("--max-features", type=_max_features, default="sqrt",
                   help="sqrt, log2, all, an int or a fraction (default: sqrt)")
    g.add_argument("--no-bootstrap", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emobow", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="XML reviews -> NDJSON cache")
    p.add_argument("xml", help="XML file or directory of *.xml / *.xml.gz")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--review-tag", default="review")
    p.add_argument("--content-tag", default="content")
    p.add_argument("--rating-tag", default="rating")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("transform", help="rewrite documents with a representation model")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--model", choices=MODEL_CHOICES, default="m")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("balance", help="resample an NDJSON corpus")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--sampling", choices=[r.value for r in SamplingRegime], default="over")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("train", help="fit a forest on a corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--model", choices=MODEL_CHOICES, default=None,
                   help="default: m, or the model of a transformed cache")
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    _add_forest_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify documents with a trained model")
    p.add_argument("model_file")
    p.add_argument("input")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="cross-validate representation models")
    p.add_argument("--corpus")
    p.add_argument("--lexicon")
    p.add_argument("--model", action="append", choices=MODEL_CHOICES,
                   help="repeatable; default: all eleven")
    p.add_argument("--sampling", choices=[r.value for r in SamplingRegime], default="over")
    p.add_argument("--resample-scope", choices=["per-fold", "global"], default="per-fold")
    p.add_argument("--vocab-scope", choices=["per-fold", "global"], default="per-fold")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-df", type=int, default=2)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-o", "--out", default="report")
    p.add_argument("--csv-timing", action="store_true",
                   help="fill the seconds column (makes the CSV run-dependent)")
    p.add_argument("--from-report", help="rerun the configuration stored in a report.json")
    _add_forest_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="print a report CSV as a table")
    p.add_argument("csv")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="write a synthetic corpus and its lexicon")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--lexicon-out", required=True)
    p.add_argument("--sizes", type=_class_sizes, default=(300, 300, 300), help="NEG,NEU,POS")
    p.add_argument("--signal", type=float, default=1.0)
    p.add_argument("--cues", type=int, default=5)
    p.add_argument("--pool-size", type=int, default=12)
    p.add_argument("--filler-vocab", type=int, default=3000)
    p.add_argument("--filler-mean", type=float, default=40.0)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else \
        logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CliError, LexiconError, XmlSyntaxError, EmptyVocabulary, FoldError, OSError,
            ValueError) as exc:
        print(f"emobow: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
