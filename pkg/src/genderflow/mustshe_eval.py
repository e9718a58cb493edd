"""MuST-SHE category-2 gender accuracy and ΔAcc against gender-swapped references."""

from __future__ import annotations

import csv
import logging
import os
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Sequence, Union

from genderflow.corpus import Sentence
from genderflow.gender import binary_gender, Gender

log = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

HEADER = ("id", "src", "ref_correct", "ref_wrong", "gender", "category", "terms")


class MuSTSHEDataError(ValueError):
    pass


class Against(str, Enum):
    CORRECT = "correct"
    WRONG = "wrong"


@dataclass(frozen=True)
class MuSTSHEInstance:
    id: str
    src: Sentence
    ref_correct: Sentence
    ref_wrong: Sentence
    gender: Gender
    category: int
    gendered_terms: tuple  # ((correct_term, wrong_term), ...)

    def swapped(self) -> "MuSTSHEInstance":
        """Exchange the correct and wrong references, term pairs included."""
        return replace(self, ref_correct=self.ref_wrong, ref_wrong=self.ref_correct,
                       gendered_terms=tuple((w, c) for c, w in self.gendered_terms))


def diff_terms(ref_correct: Sentence, ref_wrong: Sentence) -> tuple:
    """Position-wise differing tokens of two equal-length references."""
    if len(ref_correct.tokens) != len(ref_wrong.tokens):
        raise MuSTSHEDataError("cannot derive gendered terms from references of different length")
    return tuple((c, w) for c, w in zip(ref_correct.tokens, ref_wrong.tokens) if c != w)


def parse_terms(text: str) -> tuple:
    terms = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        correct, sep, wrong = item.partition("|")
        if not sep or not correct.strip() or not wrong.strip():
            raise MuSTSHEDataError(f"malformed term pair {item!r}; expected correct|wrong")
        terms.append((correct.strip(), wrong.strip()))
    return tuple(terms)


def load_mustshe(path: PathLike) -> list:
    """CSV with header ``id,src,ref_correct,ref_wrong,gender,category,terms``.

    An empty ``terms`` cell is filled from the token differences between the
    two references.
    """
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(f.strip() for f in reader.fieldnames) != HEADER:
            raise MuSTSHEDataError(f"{path}: header must be {','.join(HEADER)}")
        for row, rec in enumerate(reader, start=2):
            try:
                ref_c = Sentence.from_text(rec["ref_correct"], row)
                ref_w = Sentence.from_text(rec["ref_wrong"], row)
                terms = parse_terms(rec["terms"] or "") or diff_terms(ref_c, ref_w)
                inst = MuSTSHEInstance(rec["id"], Sentence.from_text(rec["src"], row), ref_c, ref_w,
                                       binary_gender(rec["gender"]), int(rec["category"]), terms)
            except (ValueError, KeyError) as exc:
                raise MuSTSHEDataError(f"{path}:{row}: {exc}") from None
            if inst.category not in (1, 2):
                raise MuSTSHEDataError(f"{path}:{row}: category must be 1 or 2")
            if inst.category == 2 and not inst.gendered_terms:
                raise MuSTSHEDataError(f"{path}:{row}: category-2 instance without gendered terms")
            out.append(inst)
    return out


def write_mustshe(path: PathLike, instances: Sequence[MuSTSHEInstance]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(HEADER)
        for i in instances:
            w.writerow([i.id, i.src.raw, i.ref_correct.raw, i.ref_wrong.raw, i.gender.value,
                        i.category, ";".join(f"{c}|{w_}" for c, w_ in i.gendered_terms)])


def term_accuracy(inst: MuSTSHEInstance, hypothesis: Sentence, against: Against = Against.CORRECT,
                  sentence_level: bool = False) -> Optional[float]:
    """Fraction of gendered terms whose chosen form occurs in the hypothesis.

    Matching is case-insensitive and each hypothesis token is consumed at most
    once. With ``sentence_level`` the result is 1.0 only if every term
    matches. Category-1 instances return ``None``.
    """
    if inst.category != 2:
        log.warning("skipping category-%s instance %s", inst.category, inst.id)
        return None
    side = 0 if Against(against) is Against.CORRECT else 1
    pool = Counter(t.lower() for t in hypothesis.tokens)
    hits = 0
    for pair in inst.gendered_terms:
        term = pair[side].lower()
        if pool[term] > 0:
            pool[term] -= 1
            hits += 1
    frac = hits / len(inst.gendered_terms)
    if sentence_level:
        return 1.0 if hits == len(inst.gendered_terms) else 0.0
    return frac


def score_mustshe(instances: Sequence[MuSTSHEInstance], hypotheses: Sequence[Sentence],
                  sentence_level: bool = False) -> dict:
    """Per-gender Acc (vs correct references) and ΔAcc = Acc(correct) - Acc(wrong), in percent.

    A gender with no category-2 instances reports ``None``.
    """
    if len(instances) != len(hypotheses):
        raise MuSTSHEDataError(f"{len(instances)} instances but {len(hypotheses)} hypotheses")
    per = {Gender.FEM: ([], []), Gender.MSC: ([], [])}
    skipped = 0
    for inst, hyp in zip(instances, hypotheses):
        if inst.category != 2:
            skipped += 1
            continue
        per[inst.gender][0].append(term_accuracy(inst, hyp, Against.CORRECT, sentence_level))
        per[inst.gender][1].append(term_accuracy(inst, hyp, Against.WRONG, sentence_level))
    if not per[Gender.FEM][0] and not per[Gender.MSC][0]:
        raise MuSTSHEDataError("no category-2 instances to score")
    if skipped:
        log.warning("skipped %d category-1 instances", skipped)
    out = {"n_fem": len(per[Gender.FEM][0]), "n_msc": len(per[Gender.MSC][0]),
           "skipped": skipped, "level": "sentence" if sentence_level else "term"}
    for g, name in ((Gender.FEM, "fem"), (Gender.MSC, "msc")):
        vs_c, vs_w = per[g]
        if not vs_c:
            out[f"acc_{name}"] = out[f"acc_wrong_{name}"] = out[f"delta_acc_{name}"] = None
            continue
        acc_c = 100.0 * sum(vs_c) / len(vs_c)
        acc_w = 100.0 * sum(vs_w) / len(vs_w)
        out[f"acc_{name}"] = acc_c
        out[f"acc_wrong_{name}"] = acc_w
        out[f"delta_acc_{name}"] = acc_c - acc_w
    return out
