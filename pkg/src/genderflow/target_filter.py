"""Target-side morphological gender filtering of pseudo-parallel data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from genderflow._parallel import ordered_map
from genderflow.corpus import Corpus, ParallelPair, derive
from genderflow.gender import Gender
from genderflow.morph import MorphAnalyzerSpec, MorphSpecError, analyze_token


@dataclass(frozen=True)
class Removal:
    pair: ParallelPair
    evidence: tuple  # ((token, Gender), ...)

    def evidence_str(self) -> str:
        return " ".join(f"{tok}:{g.value}" for tok, g in self.evidence)


@dataclass
class TargetFilterResult:
    kept: Corpus
    removed: list = field(default_factory=list)

    @property
    def removed_corpus(self) -> Corpus:
        return derive(self.kept, [r.pair for r in self.removed])

    @property
    def retention(self) -> float:
        total = len(self.kept) + len(self.removed)
        return len(self.kept) / total if total else 0.0

    def summary(self) -> dict:
        return {
            "input": len(self.kept) + len(self.removed),
            "kept": len(self.kept),
            "removed": len(self.removed),
            "retention": self.retention,
            "removed_line_nos": [r.pair.src.line_no for r in self.removed],
        }


def opposing_evidence(spec: MorphAnalyzerSpec, tokens, gen: Gender) -> tuple:
    """Tokens tagged with the gender opposite to ``gen``. Neuter never counts."""
    bad = gen.opposite()
    return tuple((t, bad) for t in tokens if analyze_token(spec, t).gender is bad)


def filter_trg(spec: MorphAnalyzerSpec, pairs, gen: Gender, workers: int = 1) -> TargetFilterResult:
    """Remove pairs whose target has any token of the opposite grammatical gender."""
    pairs_list = list(pairs)
    evidence = ordered_map(lambda p: opposing_evidence(spec, p.trg.tokens, gen), pairs_list, workers)
    kept, removed = [], []
    for pair, ev in zip(pairs_list, evidence):
        if ev:
            removed.append(Removal(pair, ev))
        else:
            kept.append(pair)
    return TargetFilterResult(derive(pairs, kept), removed)


def _keep_mono(spec: MorphAnalyzerSpec, tokens, gen: Gender) -> bool:
    bad = gen.opposite()
    has_pronoun = False
    for t in tokens:
        tag = analyze_token(spec, t)
        if tag.gender is bad:
            return False
        if tag.pronoun and tag.gender is gen:
            has_pronoun = True
    return has_pronoun


def filter_trg_mono(spec: MorphAnalyzerSpec, corpus, gen: Gender, workers: int = 1) -> Corpus:
    """Back-translation pre-filter on target monolingual text.

    Keeps sentences with no opposite-gender tag and at least one pronoun of
    gender ``gen``.
    """
    if not any(spec.dictionary.get(p) is gen for p in spec.pronouns):
        raise MorphSpecError(
            f"analyzer spec for {spec.lang!r} lists no {gen.value} pronouns; "
            "mark them with a 'pron' column in [dict]")
    sentences = list(corpus)
    keep = ordered_map(lambda s: _keep_mono(spec, s.tokens, gen), sentences, workers)
    return derive(corpus, [s for s, k in zip(sentences, keep) if k])


def filter_confusion(kept: Sequence[bool], preserved: Sequence[bool]) -> dict:
    """Percent TP/TN/FP/FN of a filter against human "gender preserved" labels.

    Positive means kept by the filter: a false positive is a kept pair whose
    translation did not preserve the source gender.
    """
    if len(kept) != len(preserved):
        raise ValueError(f"{len(kept)} filter decisions but {len(preserved)} annotations")
    n = len(kept)
    if n == 0:
        raise ValueError("no annotated pairs")
    cells = {"tp": 0, "tn": 0, "fp": 0, "fn": 0}
    for k, p in zip(kept, preserved):
        key = ("t" if k == p else "f") + ("p" if k else "n")
        cells[key] += 1
    out = {f"{k}_pct": 100.0 * v / n for k, v in cells.items()}
    out.update(cells)
    out["n"] = n
    return out
