"""Source-side lexical gender filtering of monolingual data."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum

from genderflow._parallel import ordered_map
from genderflow.corpus import Corpus, Sentence, derive
from genderflow.gender import Gender
from genderflow.lexicon import GenderLexicon, TokenClass, classify_token


class SourceLabel(str, Enum):
    FEM = "fem"
    MSC = "msc"
    MIXED_OR_NEUTRAL = "mixed"


def token_classes(lex: GenderLexicon, tokens) -> Counter:
    return Counter(classify_token(lex, t) for t in tokens)


def _label_from_counts(c: Counter) -> SourceLabel:
    # masculine: >=1 msc pronoun, no fem pronoun, no fem word; feminine mirrors it
    if c[TokenClass.MSC_PRONOUN] and not c[TokenClass.FEM_PRONOUN] and not c[TokenClass.FEM_WORD]:
        return SourceLabel.MSC
    if c[TokenClass.FEM_PRONOUN] and not c[TokenClass.MSC_PRONOUN] and not c[TokenClass.MSC_WORD]:
        return SourceLabel.FEM
    return SourceLabel.MIXED_OR_NEUTRAL


def classify_source(lex: GenderLexicon, s: Sentence) -> SourceLabel:
    return _label_from_counts(token_classes(lex, s.tokens))


def _label_for(gen: Gender) -> SourceLabel:
    if gen is Gender.FEM:
        return SourceLabel.FEM
    if gen is Gender.MSC:
        return SourceLabel.MSC
    raise ValueError(f"source filtering needs fem or msc, got {gen}")


def filter_src(lex: GenderLexicon, corpus, gen: Gender, workers: int = 1) -> Corpus:
    """Sentences whose source label equals ``gen``, in input order."""
    want = _label_for(gen)
    sentences = list(corpus)
    labels = ordered_map(lambda s: classify_source(lex, s), sentences, workers)
    return derive(corpus, [s for s, lab in zip(sentences, labels) if lab is want])


@dataclass
class GenderStats:
    n: int
    fem: int
    msc: int
    mixed: int
    no_cue: int

    @property
    def mixed_or_neutral(self) -> int:
        return self.mixed + self.no_cue

    @property
    def fem_pct(self) -> float:
        return 100.0 * self.fem / self.n

    @property
    def msc_pct(self) -> float:
        return 100.0 * self.msc / self.n

    @property
    def mixed_pct(self) -> float:
        return 100.0 * self.mixed_or_neutral / self.n

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "fem_pct": round(self.fem_pct, 1),
            "msc_pct": round(self.msc_pct, 1),
            "mixed_pct": round(self.mixed_pct, 1),
            "counts": {"fem": self.fem, "msc": self.msc, "mixed": self.mixed_or_neutral},
            # diagnostic split of the Mix bucket
            "mix_breakdown": {"mixed": self.mixed, "no_cue": self.no_cue},
        }


def corpus_gender_stats(lex: GenderLexicon, corpus, workers: int = 1) -> GenderStats:
    """Fem/Msc/Mix distribution over source sentences.

    ``corpus`` may hold Sentences or ParallelPairs; for pairs only the source
    side is inspected.
    """
    sentences = [getattr(x, "src", x) for x in corpus]
    if not sentences:
        raise ValueError("cannot compute gender statistics of an empty corpus")
    counts = ordered_map(lambda s: token_classes(lex, s.tokens), sentences, workers)
    fem = msc = mixed = no_cue = 0
    for c in counts:
        label = _label_from_counts(c)
        if label is SourceLabel.FEM:
            fem += 1
        elif label is SourceLabel.MSC:
            msc += 1
        elif set(c) <= {TokenClass.NEUTRAL}:
            no_cue += 1
        else:
            mixed += 1
    return GenderStats(len(sentences), fem, msc, mixed, no_cue)
