"""Word-affect association lexicon (NRC TSV format).

Each line of the source file is ``word<TAB>category<TAB>flag``. A word is
associated with every category flagged ``1``; words whose flags are all ``0``
are dropped, so looking them up behaves exactly like an unknown word.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Mapping
from types import MappingProxyType
from typing import IO


class Category(enum.IntFlag):
    ANGER = 1 << 0
    ANTICIPATION = 1 << 1
    DISGUST = 1 << 2
    FEAR = 1 << 3
    JOY = 1 << 4
    SADNESS = 1 << 5
    SURPRISE = 1 << 6
    TRUST = 1 << 7
    POSITIVE = 1 << 8
    NEGATIVE = 1 << 9


# Expansion order used whenever a category set is written out as tokens.
CATEGORY_ORDER: tuple[Category, ...] = (
    Category.ANGER,
    Category.ANTICIPATION,
    Category.DISGUST,
    Category.FEAR,
    Category.JOY,
    Category.SADNESS,
    Category.SURPRISE,
    Category.TRUST,
    Category.POSITIVE,
    Category.NEGATIVE,
)

NO_CATEGORY = Category(0)
SENTIMENTS = Category.POSITIVE | Category.NEGATIVE
EMOTIONS = Category(0)
for _c in CATEGORY_ORDER[:8]:
    EMOTIONS |= _c
del _c

LABELS: dict[str, Category] = {c.name.lower(): c for c in CATEGORY_ORDER}


class LexiconError(ValueError):
    pass


class MalformedLine(LexiconError):
    def __init__(self, line_no: int, line: str, reason: str = "expected word<TAB>category<TAB>0|1"):
        self.line_no = line_no
        self.line = line
        super().__init__(f"line {line_no}: {reason}: {line!r}")


class UnknownCategory(LexiconError):
    def __init__(self, line_no: int, label: str):
        self.line_no = line_no
        self.label = label
        super().__init__(f"line {line_no}: unknown category {label!r}")


def members(cs: Category) -> list[Category]:
    """Categories contained in ``cs``, in :data:`CATEGORY_ORDER`."""
    return [c for c in CATEGORY_ORDER if c & cs]


def category_name(c: Category) -> str:
    return c.name.lower()


def bears_sentiment(cs: Category) -> bool:
    return bool(cs & SENTIMENTS)


def bears_emotion(cs: Category) -> bool:
    return bool(cs & EMOTIONS)


class Lexicon(Mapping):
    """Immutable mapping ``word -> Category`` set.

    Only words with at least one category are stored. Use :meth:`categories`
    for lookups that must never fail.
    """

    def __init__(self, entries: Mapping[str, Category] | None = None, *,
                 source_line_count: int = 0, duplicate_count: int = 0):
        clean = {}
        for word, cs in (entries or {}).items():
            if not word or word != word.lower() or any(ch.isspace() for ch in word):
                raise LexiconError(f"invalid lexicon key {word!r}")
            cs = Category(cs)
            if cs:
                clean[word] = cs
        self._entries = MappingProxyType(clean)
        self.source_line_count = source_line_count
        self.duplicate_count = duplicate_count

    @classmethod
    def from_words(cls, words: Mapping[str, Iterable[str]]) -> "Lexicon":
        """Build from ``{"death": ["anger", "fear"], ...}`` style category names."""
        entries = {}
        for word, labels in words.items():
            cs = NO_CATEGORY
            for label in labels:
                cs |= LABELS[label]
            entries[word.lower()] = cs
        return cls(entries)

    def __getitem__(self, word: str) -> Category:
        return self._entries[word]

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __repr__(self) -> str:
        return f"Lexicon({len(self)} words)"

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Lexicon):
            return dict(self._entries) == dict(other._entries)
        return NotImplemented

    __hash__ = None

    def __reduce__(self):
        return (_rebuild_lexicon, (dict(self._entries), self.source_line_count, self.duplicate_count))

    def __copy__(self) -> "Lexicon":
        return self

    def __deepcopy__(self, memo) -> "Lexicon":
        return self

    def categories(self, token: str) -> Category:
        return self._entries.get(token, NO_CATEGORY)

    def to_tsv(self, stream: IO[str]) -> None:
        """Write every word with all ten flags, words sorted."""
        for word in sorted(self._entries):
            cs = self._entries[word]
            for c in sorted(CATEGORY_ORDER, key=category_name):
                stream.write(f"{word}\t{category_name(c)}\t{int(bool(c & cs))}\n")


def _rebuild_lexicon(entries, source_line_count, duplicate_count) -> Lexicon:
    return Lexicon(entries, source_line_count=source_line_count, duplicate_count=duplicate_count)


def categories(lex: Lexicon, token: str) -> Category:
    return lex.categories(token)


def parse_lexicon(reader: Iterable[str], aliases: Mapping[str, str] | None = None) -> Lexicon:
    """Parse NRC-style TSV lines into a :class:`Lexicon`.

    Blank lines are ignored and both LF and CRLF endings are accepted. When a
    ``word category`` pair occurs more than once the last flag wins and
    ``duplicate_count`` on the result is incremented.

    Parameters
    ----------
    reader : iterable of str
        Open text stream or any iterable of lines.
    aliases : mapping, optional
        Extra category labels mapped onto the canonical English names.

    Raises
    ------
    MalformedLine
        Wrong number of fields, whitespace inside the word or a flag other
        than ``0``/``1``.
    UnknownCategory
        Category label not among the ten known ones (after aliases).
    """
    labels = dict(LABELS)
    for alias, target in (aliases or {}).items():
        labels[alias.lower()] = LABELS[target.lower()]

    flags: dict[str, dict[Category, bool]] = {}
    duplicates = 0
    line_no = 0
    for line_no, raw in enumerate(reader, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise MalformedLine(line_no, line)
        word, label, flag = (f.strip() for f in fields)
        if not word or any(ch.isspace() for ch in word):
            raise MalformedLine(line_no, line, "word is empty or contains whitespace")
        if flag not in ("0", "1"):
            raise MalformedLine(line_no, line, "flag must be 0 or 1")
        category = labels.get(label.lower())
        if category is None:
            raise UnknownCategory(line_no, label)
        word_flags = flags.setdefault(word.lower(), {})
        if category in word_flags:
            duplicates += 1
        word_flags[category] = flag == "1"

    entries = {}
    for word, word_flags in flags.items():
        cs = NO_CATEGORY
        for category, on in word_flags.items():
            if on:
                cs |= category
        if cs:
            entries[word] = cs
    return Lexicon(entries, source_line_count=line_no, duplicate_count=duplicates)


def load_lexicon(path, aliases: Mapping[str, str] | None = None) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh, aliases)
