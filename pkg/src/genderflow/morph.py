"""Declarative target-language gender analyzer: dictionary lookup, then ordered suffix rules.

Spec file format (UTF-8)::

    [meta]
    lang=de has_neuter=true
    [dict]
    freund	m
    freundin	f
    sie	f	pron
    [suffix]
    in	f
    ung	f

Gender codes are ``f``, ``m``, ``n`` and ``-`` (explicitly ungendered). An
optional third ``pron`` column in ``[dict]`` marks pronoun surfaces. A
surface listed with two different genders is treated as ambiguous and tags
as no gender.
"""

from __future__ import annotations

import os
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Optional, Union

from genderflow.corpus import Sentence
from genderflow.gender import Gender

PathLike = Union[str, os.PathLike]


class MorphSpecError(ValueError):
    pass


class TagSource(str, Enum):
    DICTIONARY = "dictionary"
    SUFFIX_RULE = "suffix"
    DEFAULT = "default"


@dataclass(frozen=True)
class MorphTag:
    gender: Gender
    source: TagSource
    pronoun: bool = False


_DEFAULT_TAG = MorphTag(Gender.NONE, TagSource.DEFAULT)


@dataclass(frozen=True)
class MorphAnalyzerSpec:
    lang: str
    has_neuter: bool = False
    dictionary: Mapping = field(default_factory=dict)
    suffix_rules: tuple = ()
    pronouns: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "dictionary", {k.lower(): v for k, v in dict(self.dictionary).items()})
        object.__setattr__(self, "suffix_rules", tuple((s.lower(), g) for s, g in self.suffix_rules))
        object.__setattr__(self, "pronouns", frozenset(p.lower() for p in self.pronouns))
        genders = list(self.dictionary.values()) + [g for _, g in self.suffix_rules]
        if not self.has_neuter and Gender.NEUT in genders:
            raise MorphSpecError(f"language {self.lang!r} has no neuter gender but the analyzer file uses it")
        missing = self.pronouns - self.dictionary.keys()
        if missing:
            raise MorphSpecError(f"pronouns missing from the dictionary: {sorted(missing)}")

    def analyze(self, token: str) -> MorphTag:
        return analyze_token(self, token)


def analyze_token(spec: MorphAnalyzerSpec, token: str) -> MorphTag:
    """Dictionary hit wins; otherwise the first matching suffix rule; otherwise no gender.

    A suffix rule only fires on tokens containing a letter and strictly
    longer than the suffix.
    """
    t = token.lower()
    g = spec.dictionary.get(t)
    if g is not None:
        return MorphTag(g, TagSource.DICTIONARY, t in spec.pronouns)
    if any(ch.isalpha() for ch in t):
        for suffix, gender in spec.suffix_rules:
            if len(t) > len(suffix) and t.endswith(suffix):
                return MorphTag(gender, TagSource.SUFFIX_RULE)
    return _DEFAULT_TAG


def tag_tokens(spec: MorphAnalyzerSpec, tokens: Iterable[str]) -> list:
    return [(t, analyze_token(spec, t)) for t in tokens]


def sentence_genders(spec: MorphAnalyzerSpec, s) -> Counter:
    """Multiset of grammatical genders in a sentence, NoGender excluded."""
    tokens = s.tokens if isinstance(s, Sentence) else s
    c = Counter(analyze_token(spec, t).gender for t in tokens)
    c.pop(Gender.NONE, None)
    return c


_CODES = {"f": Gender.FEM, "m": Gender.MSC, "n": Gender.NEUT, "-": Gender.NONE}


def _parse_code(code: str, path, row) -> Gender:
    try:
        return _CODES[code.strip().lower()]
    except KeyError:
        raise MorphSpecError(f"{path}:{row}: unknown gender code {code!r}") from None


def parse_spec(lines: Iterable[str], path: Optional[PathLike] = "<spec>") -> MorphAnalyzerSpec:
    meta = {}
    entries = {}
    ambiguous = set()
    pronouns = set()
    rules = []
    section = None
    for row, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        stripped = line.strip()
        if stripped.startswith("[") and stripped.endswith("]"):
            section = stripped[1:-1].strip().lower()
            if section not in ("meta", "dict", "suffix"):
                raise MorphSpecError(f"{path}:{row}: unknown section [{section}]")
            continue
        if section == "meta":
            for item in stripped.split():
                key, sep, value = item.partition("=")
                if not sep:
                    raise MorphSpecError(f"{path}:{row}: expected key=value, got {item!r}")
                meta[key.strip().lower()] = value.strip()
        elif section == "dict":
            cols = line.split("\t")
            if len(cols) not in (2, 3) or not cols[0].strip():
                raise MorphSpecError(f"{path}:{row}: expected surface<TAB>gender[<TAB>pron]")
            surface = cols[0].strip().lower()
            gender = _parse_code(cols[1], path, row)
            if len(cols) == 3:
                if cols[2].strip().lower() != "pron":
                    raise MorphSpecError(f"{path}:{row}: third column must be 'pron'")
                pronouns.add(surface)
            if surface in entries and entries[surface] is not gender:
                ambiguous.add(surface)
            entries.setdefault(surface, gender)
        elif section == "suffix":
            cols = line.split("\t")
            if len(cols) != 2 or not cols[0].strip():
                raise MorphSpecError(f"{path}:{row}: expected suffix<TAB>gender")
            rules.append((cols[0].strip().lower(), _parse_code(cols[1], path, row)))
        else:
            raise MorphSpecError(f"{path}:{row}: entry outside any section")
    for surface in ambiguous:
        entries[surface] = Gender.NONE
    if "lang" not in meta:
        raise MorphSpecError(f"{path}: [meta] must declare lang=")
    has_neuter = meta.get("has_neuter", "false").lower() in ("1", "true", "yes")
    return MorphAnalyzerSpec(meta["lang"], has_neuter, entries, tuple(rules), frozenset(pronouns))


def load_spec(path: PathLike) -> MorphAnalyzerSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh, path)
