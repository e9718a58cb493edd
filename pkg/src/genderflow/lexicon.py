"""Source-language gender lexicon: pronoun sets and paired gendered words."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Union

PathLike = Union[str, os.PathLike]

DEFAULT_FEM_PRONOUNS = frozenset({"she", "her", "hers", "herself"})
DEFAULT_MSC_PRONOUNS = frozenset({"he", "him", "his", "himself"})

PRONOUNS_FILE = "pronouns.txt"
PAIRS_FILE = "pairs.tsv"


class LexiconError(ValueError):
    """A lexicon file is malformed or violates the lexicon invariants."""

    def __init__(self, message: str, path: Optional[PathLike] = None, row: Optional[int] = None):
        where = ""
        if path is not None:
            where = f"{path}"
            if row is not None:
                where += f":{row}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.row = row


class TokenClass(str, Enum):
    FEM_PRONOUN = "fem_pronoun"
    MSC_PRONOUN = "msc_pronoun"
    FEM_WORD = "fem_word"
    MSC_WORD = "msc_word"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class GenderLexicon:
    fem_pronouns: frozenset
    msc_pronouns: frozenset
    word_pairs: tuple = ()
    fem_words: frozenset = field(init=False)
    msc_words: frozenset = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "fem_pronouns", frozenset(self.fem_pronouns))
        object.__setattr__(self, "msc_pronouns", frozenset(self.msc_pronouns))
        object.__setattr__(self, "word_pairs", tuple(tuple(p) for p in self.word_pairs))
        object.__setattr__(self, "fem_words", frozenset(f for f, _ in self.word_pairs))
        object.__setattr__(self, "msc_words", frozenset(m for _, m in self.word_pairs))
        self.validate()

    def validate(self) -> None:
        for token in self.fem_pronouns | self.msc_pronouns | self.fem_words | self.msc_words:
            _check_entry(token)
        clash = self.fem_pronouns & self.msc_pronouns
        if clash:
            raise LexiconError(f"pronouns listed as both fem and msc: {sorted(clash)}")
        clash = self.fem_words & self.msc_words
        if clash:
            raise LexiconError(f"words listed on both sides of the pair list: {sorted(clash)}")

    def classify(self, token: str) -> TokenClass:
        return classify_token(self, token)


def _check_entry(token: str) -> None:
    if not token or token != token.lower() or len(token.split()) != 1 or token != token.strip():
        raise LexiconError(f"lexicon entries must be nonempty lowercase single tokens, got {token!r}")


def classify_token(lex: GenderLexicon, token: str) -> TokenClass:
    t = token.lower()
    if t in lex.fem_pronouns:
        return TokenClass.FEM_PRONOUN
    if t in lex.msc_pronouns:
        return TokenClass.MSC_PRONOUN
    if t in lex.fem_words:
        return TokenClass.FEM_WORD
    if t in lex.msc_words:
        return TokenClass.MSC_WORD
    return TokenClass.NEUTRAL


def _content_lines(lines: Iterable[str]):
    for row, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield row, line


def parse_pairs(lines: Iterable[str], path: Optional[PathLike] = None) -> list:
    pairs = []
    seen = set()
    fem_rows, msc_rows = {}, {}
    for row, line in _content_lines(lines):
        cols = line.split("\t")
        if len(cols) != 2:
            raise LexiconError(f"expected 2 tab-separated columns, got {len(cols)}", path, row)
        fem, msc = (c.strip().lower() for c in cols)
        for tok in (fem, msc):
            try:
                _check_entry(tok)
            except LexiconError as exc:
                raise LexiconError(str(exc), path, row) from None
        if fem == msc or fem in msc_rows or msc in fem_rows:
            raise LexiconError(f"token on both sides of the pair list: {fem!r}/{msc!r}", path, row)
        fem_rows.setdefault(fem, row)
        msc_rows.setdefault(msc, row)
        if (fem, msc) not in seen:
            seen.add((fem, msc))
            pairs.append((fem, msc))
    return pairs


def parse_pronouns(lines: Iterable[str], path: Optional[PathLike] = None):
    sections = {"fem": set(), "msc": set()}
    current = None
    for row, line in _content_lines(lines):
        line = line.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip().lower()
            if current not in sections:
                raise LexiconError(f"unknown section [{current}]", path, row)
            continue
        if current is None:
            raise LexiconError("pronoun entry outside a [fem]/[msc] section", path, row)
        token = line.lower()
        if len(token.split()) != 1:
            raise LexiconError(f"expected one token per line, got {line!r}", path, row)
        other = "msc" if current == "fem" else "fem"
        if token in sections[other]:
            raise LexiconError(f"pronoun {token!r} listed as both fem and msc", path, row)
        sections[current].add(token)
    return frozenset(sections["fem"]), frozenset(sections["msc"])


def _read_lines(path: PathLike) -> list:
    with open(path, encoding="utf-8") as fh:
        return fh.readlines()


def load_lexicon(pronoun_path: Optional[PathLike] = None, pairs_path: Optional[PathLike] = None) -> GenderLexicon:
    """Load a lexicon from a pronoun file and a pair TSV.

    A missing ``pronoun_path`` selects the built-in English pronoun sets; a
    missing ``pairs_path`` gives an empty word list.
    """
    if pronoun_path is None:
        fem_p, msc_p = DEFAULT_FEM_PRONOUNS, DEFAULT_MSC_PRONOUNS
    else:
        fem_p, msc_p = parse_pronouns(_read_lines(pronoun_path), pronoun_path)
    pairs = parse_pairs(_read_lines(pairs_path), pairs_path) if pairs_path is not None else []
    return GenderLexicon(fem_p, msc_p, tuple(pairs))


def load_lexicon_dir(directory: Optional[PathLike] = None) -> GenderLexicon:
    """Load ``pronouns.txt`` and ``pairs.tsv`` from a directory.

    Either file may be absent; absent files fall back to the built-in defaults.
    ``None`` loads the packaged default lexicon.
    """
    if directory is None:
        return default_lexicon()
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"lexicon directory not found: {directory}")
    pron = directory / PRONOUNS_FILE
    pairs = directory / PAIRS_FILE
    if not pairs.exists():
        data = resources.files("genderflow") / "data" / PAIRS_FILE
        lines = data.read_text(encoding="utf-8").splitlines()
        fem_p, msc_p = (parse_pronouns(_read_lines(pron), pron) if pron.exists()
                        else (DEFAULT_FEM_PRONOUNS, DEFAULT_MSC_PRONOUNS))
        return GenderLexicon(fem_p, msc_p, tuple(parse_pairs(lines, PAIRS_FILE)))
    return load_lexicon(pron if pron.exists() else None, pairs)


def default_lexicon() -> GenderLexicon:
    data = resources.files("genderflow") / "data"
    fem_p, msc_p = parse_pronouns((data / PRONOUNS_FILE).read_text(encoding="utf-8").splitlines())
    pairs = parse_pairs((data / PAIRS_FILE).read_text(encoding="utf-8").splitlines())
    return GenderLexicon(fem_p, msc_p, tuple(pairs))
