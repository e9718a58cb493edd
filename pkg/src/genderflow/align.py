"""IBM Model 1 word alignment (EM training, Viterbi alignment, entity projection).

Tokens are lowercased before training and alignment. Alignments are lists
with one entry per target position holding a 0-based source index, or
``None`` for the NULL word.
"""

from __future__ import annotations

import math
import os
from collections import defaultdict
from typing import Iterable, List, Optional, Sequence, Union

from genderflow.corpus import ParallelPair

PathLike = Union[str, os.PathLike]

NULL = "<null>"
PROB_FLOOR = 1e-12

Alignment = List[Optional[int]]


def _tokens(pair) -> tuple:
    if isinstance(pair, ParallelPair):
        src, trg = pair.src.tokens, pair.trg.tokens
    else:
        src, trg = pair
        src = getattr(src, "tokens", src)
        trg = getattr(trg, "tokens", trg)
    return [t.lower() for t in src], [t.lower() for t in trg]


class TranslationTable:
    """Lexical translation probabilities t(f|e), NULL included as a source token."""

    def __init__(self, probs: Optional[dict] = None, floor: float = PROB_FLOOR):
        self.probs = dict(probs or {})
        self.floor = floor
        self.log_likelihoods: list = []

    def prob(self, f: str, e: str) -> float:
        return self.probs.get((e, f), self.floor)

    def source_vocab(self) -> set:
        return {e for e, _ in self.probs}

    def row_sums(self) -> dict:
        sums = defaultdict(float)
        for (e, _), p in self.probs.items():
            sums[e] += p
        return dict(sums)

    def __len__(self):
        return len(self.probs)

    def save(self, path: PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for (e, f), p in sorted(self.probs.items()):
                fh.write(f"{e}\t{f}\t{p!r}\n")

    @classmethod
    def load(cls, path: PathLike) -> "TranslationTable":
        probs = {}
        with open(path, encoding="utf-8") as fh:
            for row, line in enumerate(fh, start=1):
                line = line.rstrip("\r\n")
                if not line:
                    continue
                cols = line.split("\t")
                if len(cols) != 3:
                    raise ValueError(f"{path}:{row}: expected src<TAB>tgt<TAB>prob")
                p = float(cols[2])
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"{path}:{row}: probability {p} outside [0, 1]")
                probs[(cols[0], cols[1])] = p
        return cls(probs)


def _prepare(pairs) -> list:
    data = []
    for pair in pairs:
        src, trg = _tokens(pair)
        data.append(([NULL] + src, trg))
    return data


def _e_step(t: dict, data: list):
    """One pass of expected counts; returns (counts, totals, log-likelihood under ``t``)."""
    counts = defaultdict(float)
    totals = defaultdict(float)
    ll = 0.0
    for e_sent, f_sent in data:
        log_l = math.log(len(e_sent))
        for f in f_sent:
            probs = [t[(e, f)] for e in e_sent]
            denom = math.fsum(probs)
            ll += math.log(denom) - log_l
            for e, p in zip(e_sent, probs):
                c = p / denom
                counts[(e, f)] += c
                totals[e] += c
    return counts, totals, ll


def train_model1(pairs: Iterable, iterations: int = 10) -> TranslationTable:
    """EM training of IBM Model 1 from a uniform initialisation.

    ``pairs`` holds ParallelPairs or ``(src_tokens, trg_tokens)`` tuples.
    The returned table carries ``log_likelihoods``: the corpus log-likelihood
    before each iteration and after the last one (``iterations + 1`` values).
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    data = _prepare(pairs)
    if not data:
        raise ValueError("cannot train an alignment model on an empty corpus")
    f_vocab = {f for _, f_sent in data for f in f_sent}
    if not f_vocab:
        raise ValueError("training corpus has no target tokens")
    uniform = 1.0 / len(f_vocab)
    t = defaultdict(lambda: uniform)
    history = []
    for _ in range(iterations):
        counts, totals, ll = _e_step(t, data)
        history.append(ll)
        t = {key: c / totals[key[0]] for key, c in counts.items()}
    history.append(_e_step(t, data)[2])
    tt = TranslationTable(t)
    tt.log_likelihoods = history
    return tt


def log_likelihood(tt: TranslationTable, pairs: Iterable) -> float:
    data = _prepare(pairs)
    total = 0.0
    for e_sent, f_sent in data:
        for f in f_sent:
            total += math.log(math.fsum(tt.prob(f, e) for e in e_sent)) - math.log(len(e_sent))
    return total


def viterbi_align(tt: TranslationTable, pair) -> Alignment:
    """Best source position per target token; ties go to the smallest index, NULL loses ties."""
    src, trg = _tokens(pair)
    alignment = []
    for f in trg:
        best_i, best_p = None, -1.0
        for i, e in enumerate(src):
            p = tt.prob(f, e)
            if p > best_p:
                best_i, best_p = i, p
        if best_i is None or tt.prob(f, NULL) > best_p:
            best_i = None
        alignment.append(best_i)
    return alignment


def project_entity(tt: TranslationTable, pair, src_index: int) -> set:
    """Target positions aligned to source position ``src_index``; empty if the entity was dropped."""
    src, _ = _tokens(pair)
    if not 0 <= src_index < len(src):
        raise IndexError(f"source index {src_index} out of range for {len(src)} tokens")
    return {j for j, i in enumerate(viterbi_align(tt, pair)) if i == src_index}


def format_pharaoh(alignment: Sequence[Optional[int]]) -> str:
    return " ".join(f"{i}-{j}" for j, i in enumerate(alignment) if i is not None)


def parse_pharaoh(line: str, trg_len: int) -> Alignment:
    alignment: Alignment = [None] * trg_len
    for item in line.split():
        i, _, j = item.partition("-")
        alignment[int(j)] = int(i)
    return alignment
