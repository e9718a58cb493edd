"""Corpus I/O, tokenization and bitext length/ratio filtering."""

from __future__ import annotations

import os
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Union

PathLike = Union[str, os.PathLike]

# Split off the ends of whitespace chunks, one character per token.
EDGE_PUNCT = frozenset('.,;:!?"()[]')


class CorpusError(ValueError):
    pass


def tokenize(raw: str) -> list:
    """Whitespace split, then peel leading/trailing punctuation into single-char tokens.

    Intra-word apostrophes and hyphens are kept: ``"l'editore"`` stays whole.
    """
    tokens = []
    for chunk in raw.split():
        start, end = 0, len(chunk)
        while start < end and chunk[start] in EDGE_PUNCT:
            start += 1
        while end > start and chunk[end - 1] in EDGE_PUNCT:
            end -= 1
        tokens.extend(chunk[:start])
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(chunk[end:])
    return tokens


@dataclass(frozen=True)
class Sentence:
    raw: str
    tokens: tuple
    line_no: int = 1

    @classmethod
    def from_text(cls, raw: str, line_no: int = 1) -> "Sentence":
        if line_no < 1:
            raise ValueError("line_no is 1-based")
        return cls(raw, tuple(tokenize(raw)), line_no)

    def __len__(self):
        return len(self.tokens)


class Origin(str, Enum):
    ORIGINAL = "original"
    PSEUDO_FEM = "pseudo_fem"
    PSEUDO_MSC = "pseudo_msc"
    PSEUDO_RANDOM = "pseudo_random"


@dataclass(frozen=True)
class ParallelPair:
    src: Sentence
    trg: Sentence
    origin: Origin = Origin.ORIGINAL

    def with_origin(self, origin: Origin) -> "ParallelPair":
        return ParallelPair(self.src, self.trg, origin)


@dataclass
class Corpus(Sequence):
    """Ordered sentences or pairs plus provenance metadata (languages, paths)."""

    items: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return self.derive(self.items[index])
        return self.items[index]

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def derive(self, items: Iterable) -> "Corpus":
        return Corpus(list(items), dict(self.meta))


def derive(source, items: Iterable) -> Corpus:
    """Build a Corpus from ``items``, inheriting metadata if ``source`` is a Corpus."""
    if isinstance(source, Corpus):
        return source.derive(items)
    return Corpus(list(items))


def _read_raw_lines(path: PathLike) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        return [line.rstrip("\r\n") for line in fh]


def sentences_from_lines(lines: Iterable[str]) -> list:
    return [Sentence.from_text(line, n) for n, line in enumerate(lines, start=1) if line.strip()]


def load_mono(path: PathLike, lang: Optional[str] = None) -> Corpus:
    """One Sentence per nonempty line; blank lines are skipped but still counted in line_no."""
    return Corpus(sentences_from_lines(_read_raw_lines(path)), {"lang": lang, "path": str(path)})


def load_parallel(src_path: PathLike, trg_path: PathLike,
                  src_lang: Optional[str] = None, trg_lang: Optional[str] = None,
                  origin: Origin = Origin.ORIGINAL) -> Corpus:
    """Line-aligned bitext.

    Lines blank on both sides are skipped. A pair with only one blank side is
    kept so that ``preprocess_bitext`` can count it as empty.
    """
    src_lines = _read_raw_lines(src_path)
    trg_lines = _read_raw_lines(trg_path)
    if len(src_lines) != len(trg_lines):
        raise CorpusError(
            f"line count mismatch: {src_path} has {len(src_lines)} lines, "
            f"{trg_path} has {len(trg_lines)}")
    pairs = []
    for n, (s, t) in enumerate(zip(src_lines, trg_lines), start=1):
        if not s.strip() and not t.strip():
            continue
        pairs.append(ParallelPair(Sentence.from_text(s, n), Sentence.from_text(t, n), origin))
    meta = {"src_lang": src_lang, "trg_lang": trg_lang,
            "src_path": str(src_path), "trg_path": str(trg_path)}
    return Corpus(pairs, meta)


def _check_line(text: str) -> str:
    if "\n" in text or "\r" in text:
        raise CorpusError(f"sentence contains a line break: {text!r}")
    return text


def write_mono(path: PathLike, sentences: Iterable) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sentences:
            fh.write(_check_line(s.raw if isinstance(s, Sentence) else s) + "\n")
            n += 1
    return n


def write_parallel(src_path: PathLike, trg_path: PathLike, pairs: Iterable[ParallelPair]) -> int:
    n = 0
    with open(src_path, "w", encoding="utf-8", newline="\n") as fs, \
            open(trg_path, "w", encoding="utf-8", newline="\n") as ft:
        for p in pairs:
            fs.write(_check_line(p.src.raw) + "\n")
            ft.write(_check_line(p.trg.raw) + "\n")
            n += 1
    return n


@dataclass
class FilterReport:
    kept: int = 0
    removed_length: int = 0
    removed_ratio: int = 0
    removed_empty: int = 0

    @property
    def total(self) -> int:
        return self.kept + self.removed_length + self.removed_ratio + self.removed_empty

    def to_dict(self) -> dict:
        return {"kept": self.kept, "removed_length": self.removed_length,
                "removed_ratio": self.removed_ratio, "removed_empty": self.removed_empty}


def removal_reason(pair: ParallelPair, max_len: int = 250, max_ratio: float = 1.5) -> Optional[str]:
    ns, nt = len(pair.src.tokens), len(pair.trg.tokens)
    if ns == 0 or nt == 0:
        return "empty"
    if max(ns, nt) > max_len:
        return "length"
    if max(ns / nt, nt / ns) > max_ratio:
        return "ratio"
    return None


def preprocess_bitext(corpus, max_len: int = 250, max_ratio: float = 1.5):
    """Drop pairs longer than ``max_len`` tokens or with a side ratio above ``max_ratio``.

    Token counts are post-tokenization. Returns ``(kept_corpus, FilterReport)``;
    reasons are checked in the order empty, length, ratio.
    """
    report = FilterReport()
    kept = []
    for pair in corpus:
        reason = removal_reason(pair, max_len, max_ratio)
        if reason is None:
            kept.append(pair)
            report.kept += 1
        else:
            setattr(report, f"removed_{reason}", getattr(report, f"removed_{reason}") + 1)
    return derive(corpus, kept), report
