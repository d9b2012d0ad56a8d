"""Review ingestion from Amazon / Social Book Search XML dumps."""

from __future__ import annotations

import enum
import gzip
import json
import logging
import math
import os
import xml.etree.ElementTree as ET
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from typing import IO, Any

import numpy as np

logger = logging.getLogger(__name__)


class PolarityClass(enum.IntEnum):
    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value) -> "PolarityClass":
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                return cls(int(value))
        return cls(int(value))


class OutOfRange(ValueError):
    def __init__(self, rating):
        self.rating = rating
        super().__init__(f"rating {rating!r} outside 1..5")


class XmlSyntaxError(ValueError):
    def __init__(self, source: str, position: tuple[int, int] | None, msg: str):
        self.source = source
        self.position = position
        where = f"{source}:{position[0]}:{position[1]}" if position else source
        super().__init__(f"{where}: {msg}")


@dataclass(frozen=True)
class RawReview:
    content: str
    rating: int
    source_id: str

    @property
    def polarity(self) -> PolarityClass:
        return rating_to_class(self.rating)


@dataclass
class ParseStats:
    emitted: int = 0
    skipped: int = 0

    @property
    def seen(self) -> int:
        return self.emitted + self.skipped


def rating_to_class(rating: int) -> PolarityClass:
    if isinstance(rating, bool) or rating not in (1, 2, 3, 4, 5):
        raise OutOfRange(rating)
    if rating <= 2:
        return PolarityClass.NEGATIVE
    if rating == 3:
        return PolarityClass.NEUTRAL
    return PolarityClass.POSITIVE


def _parse_rating(text: str | None) -> int | None:
    if text is None:
        return None
    try:
        value = float(text.strip())
    except ValueError:
        return None
    if not math.isfinite(value) or value != int(value) or not 1 <= value <= 5:
        return None
    return int(value)


def parse_reviews(reader: IO[bytes], *, source: str = "<stream>", review_tag: str = "review",
                  content_tag: str = "content", rating_tag: str = "rating",
                  stats: ParseStats | None = None) -> Iterator[RawReview]:
    """Stream :class:`RawReview` objects out of an XML byte stream.

    The document is read incrementally; each ``review_tag`` element is
    detached from its parent once consumed, so only one review is held in
    memory. Markup nested inside ``content_tag`` is flattened to its text.
    Reviews without content or without an integral rating in 1..5 are skipped
    and tallied in ``stats``.
    """
    stats = stats if stats is not None else ParseStats()
    stack: list[ET.Element] = []
    ordinal = 0
    try:
        for event, elem in ET.iterparse(reader, events=("start", "end")):
            if event == "start":
                stack.append(elem)
                continue
            stack.pop()
            if elem.tag != review_tag:
                if stack and not any(e.tag == review_tag for e in stack):
                    # outside any review: detach finished subtrees as we go
                    stack[-1].remove(elem)
                    elem.clear()
                continue
            ordinal += 1
            content_el = elem.find(content_tag)
            rating = _parse_rating(elem.findtext(rating_tag))
            content = "".join(content_el.itertext()).strip() if content_el is not None else ""
            if stack:
                stack[-1].remove(elem)
            elem.clear()
            if not content or rating is None:
                stats.skipped += 1
                logger.debug("skipped review %s#%d", source, ordinal)
                continue
            stats.emitted += 1
            yield RawReview(content=content, rating=rating, source_id=f"{source}#{ordinal}")
    except ET.ParseError as exc:
        raise XmlSyntaxError(source, getattr(exc, "position", None), str(exc)) from exc


def _open_binary(path: str) -> IO[bytes]:
    if path.endswith(".gz"):
        return gzip.open(path, "rb")
    return open(path, "rb")


def iter_xml_files(path: str) -> list[str]:
    if os.path.isfile(path):
        return [path]
    found = []
    for root, _dirs, files in os.walk(path):
        for name in files:
            if name.endswith((".xml", ".xml.gz")):
                found.append(os.path.join(root, name))
    return sorted(found)


def read_reviews(path: str, stats: ParseStats | None = None, **tags) -> Iterator[RawReview]:
    """Reviews from one XML file or every ``*.xml``/``*.xml.gz`` below a directory."""
    for file in iter_xml_files(path):
        with _open_binary(file) as fh:
            yield from parse_reviews(fh, source=file, stats=stats, **tags)


@dataclass
class LabeledSet:
    """Documents paired with polarity classes.

    ``items`` may be raw strings, token lists or anything else the next
    pipeline stage accepts; duplicated items are shared references.
    """

    items: list
    labels: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self):
        self.items = list(self.items)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if len(self.items) != len(self.labels):
            raise ValueError(f"{len(self.items)} items but {len(self.labels)} labels")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def class_counts(self) -> dict[PolarityClass, int]:
        counts = np.bincount(self.labels, minlength=len(PolarityClass))
        return {c: int(counts[c]) for c in PolarityClass}

    def subset(self, indices: Sequence[int]) -> "LabeledSet":
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledSet([self.items[i] for i in indices], self.labels[indices])


def class_distribution(ds: LabeledSet | Iterable[int]) -> dict[PolarityClass, tuple[int, float]]:
    labels = ds.labels if isinstance(ds, LabeledSet) else np.fromiter(ds, dtype=np.int64)
    counts = np.bincount(labels, minlength=len(PolarityClass)) if len(labels) else np.zeros(3, int)
    total = int(counts.sum())
    return {c: (int(counts[c]), counts[c] / total if total else 0.0) for c in PolarityClass}


def review_record(review: RawReview) -> dict[str, Any]:
    return {"text": review.content, "rating": review.rating,
            "class": review.polarity.label, "source": review.source_id}


def write_ndjson(records: Iterable[dict], path: str) -> int:
    """Write records atomically (temp file + rename). Returns the record count."""
    tmp = f"{path}.tmp{os.getpid()}"
    n = 0
    with open(tmp, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")
            n += 1
    os.replace(tmp, path)
    return n


def read_ndjson(path: str) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line.strip():
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ValueError(f"{path}:{line_no}: {exc}") from exc


def record_class(rec: dict) -> PolarityClass:
    if "class" in rec and rec["class"] is not None:
        return PolarityClass.parse(rec["class"])
    return rating_to_class(int(rec["rating"]))


def load_labeled(path: str) -> LabeledSet:
    """Load an NDJSON cache; items are ``tokens`` lists when present, else ``text``."""
    items, labels = [], []
    for rec in read_ndjson(path):
        items.append(rec["tokens"] if "tokens" in rec else rec["text"])
        labels.append(int(record_class(rec)))
    return LabeledSet(items, np.asarray(labels, dtype=np.int64))
