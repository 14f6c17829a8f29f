"""Bilingual corpus and class-lexicon I/O.

Corpora are pre-tokenized and pre-aligned at the sentence level: one pair
per line, ``french tokens<TAB>english tokens``, tokens separated by single
spaces.  Punctuation is an ordinary token.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from transdictate.errors import InputError, ParseError

log = logging.getLogger(__name__)

NULL_TOKEN = "<NULL>"

DEFAULT_CLASSES = (
    "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "PREP", "CONJ",
    "NUM", "AUX", "PROPER", "INTERJ", "PART", "PUNCT", "OTHER",
)


def _check_tokens(tokens: Sequence[str], side: str) -> tuple[str, ...]:
    tokens = tuple(tokens)
    if not tokens:
        raise InputError(f"{side} side is empty")
    for tok in tokens:
        if not tok or any(ch.isspace() for ch in tok):
            raise InputError(f"bad {side} token {tok!r}")
    return tokens


@dataclass(frozen=True)
class SentencePair:
    french: tuple[str, ...]
    english: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "french", _check_tokens(self.french, "French"))
        object.__setattr__(self, "english", _check_tokens(self.english, "English"))
        if NULL_TOKEN in self.english:
            raise InputError(f"{NULL_TOKEN} is reserved and cannot appear in an English sentence")

    def to_line(self) -> str:
        return " ".join(self.french) + "\t" + " ".join(self.english)


@dataclass(frozen=True)
class Lexicon:
    """Word -> admissible class ids, plus the ordered class inventory."""

    class_names: tuple[str, ...]
    entries: Mapping[str, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        names = tuple(self.class_names)
        object.__setattr__(self, "class_names", names)
        if len(names) < 2:
            raise InputError("a lexicon needs at least 2 classes")
        if len(set(names)) != len(names):
            raise InputError("duplicate class names in lexicon header")
        C = len(names)
        entries = {}
        for word, classes in self.entries.items():
            classes = frozenset(int(c) for c in classes)
            if not classes:
                raise InputError(f"empty class set for {word!r}")
            if not all(0 <= c < C for c in classes):
                raise InputError(f"class id out of range for {word!r}")
            entries[word] = classes
        object.__setattr__(self, "entries", entries)

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def class_id(self, name: str) -> int:
        try:
            return self.class_names.index(name)
        except ValueError:
            raise InputError(f"unknown class label {name!r}") from None

    def classes_of(self, word: str) -> frozenset[int] | None:
        return self.entries.get(word)

    def __contains__(self, word) -> bool:
        return word in self.entries

    def to_text(self) -> str:
        lines = ["#CLASSES\t" + ",".join(self.class_names)]
        for word in sorted(self.entries):
            labels = ",".join(self.class_names[c] for c in sorted(self.entries[word]))
            lines.append(f"{word}\t{labels}")
        return "\n".join(lines) + "\n"


def _read_lines(path):
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    chunks = raw.split(b"\n")
    if chunks and chunks[-1] == b"":
        chunks.pop()
    for lineno, chunk in enumerate(chunks, 1):
        try:
            yield lineno, chunk.decode("utf-8")
        except UnicodeDecodeError:
            raise ParseError("invalid UTF-8", path, lineno) from None


def parse_pair(line: str) -> SentencePair:
    if line.count("\t") != 1:
        raise InputError("expected exactly one tab separating French and English")
    fr, en = line.split("\t")
    if not fr or not en:
        raise InputError("empty side")
    return SentencePair(tuple(fr.split(" ")), tuple(en.split(" ")))


def load_bitext(path) -> list[SentencePair]:
    pairs = []
    for lineno, line in _read_lines(path):
        try:
            pairs.append(parse_pair(line))
        except ParseError:
            raise
        except InputError as exc:
            raise ParseError(str(exc), path, lineno) from None
    return pairs


def format_bitext(pairs: Iterable[SentencePair]) -> str:
    return "".join(p.to_line() + "\n" for p in pairs)


def write_bitext(pairs: Iterable[SentencePair], path) -> None:
    Path(path).write_text(format_bitext(pairs), encoding="utf-8")


def filter_pairs(pairs: Sequence[SentencePair], max_tokens: int = 40) -> list[SentencePair]:
    """Keep pairs whose sides both have at most ``max_tokens`` tokens."""
    if max_tokens < 1:
        raise InputError("max_tokens must be >= 1")
    kept = [p for p in pairs if len(p.french) <= max_tokens and len(p.english) <= max_tokens]
    log.info("filter_pairs: retained %d, dropped %d (max_tokens=%d)",
             len(kept), len(pairs) - len(kept), max_tokens)
    return kept


def load_lexicon(path) -> Lexicon:
    class_names = None
    entries: dict[str, set[int]] = {}
    for lineno, line in _read_lines(path):
        if class_names is None:
            head, _, rest = line.partition("\t")
            if head != "#CLASSES" or not rest:
                raise ParseError("first line must be '#CLASSES<TAB>NAME,...'", path, lineno)
            class_names = tuple(rest.split(","))
            index = {name: i for i, name in enumerate(class_names)}
            continue
        if not line.strip():
            continue
        word, tab, labels = line.partition("\t")
        if not tab or not word:
            raise ParseError("expected 'word<TAB>CLASS[,CLASS...]'", path, lineno)
        if not labels:
            raise ParseError(f"empty class list for {word!r}", path, lineno)
        ids = set()
        for label in labels.split(","):
            if label not in index:
                raise ParseError(f"unknown class label {label!r}", path, lineno)
            ids.add(index[label])
        entries.setdefault(word, set()).update(ids)
    if class_names is None:
        raise ParseError("empty lexicon file", path)
    try:
        return Lexicon(class_names, entries)
    except InputError as exc:
        raise ParseError(str(exc), path) from None


def write_lexicon(lexicon: Lexicon, path) -> None:
    Path(path).write_text(lexicon.to_text(), encoding="utf-8")
