"""WinoMT-style gender accuracy: entity projection, gender prediction, Acc/F1/ΔG/ΔS/ΔR.

Predictions use :class:`Gender` with ``Gender.NONE`` meaning "unknown".
"""

from __future__ import annotations

import csv
import os
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from enum import Enum
from itertools import combinations
from typing import Iterable, Optional, Sequence, Union

from genderflow.align import TranslationTable, project_entity
from genderflow.corpus import ParallelPair, Sentence
from genderflow.gender import Gender
from genderflow.morph import MorphAnalyzerSpec, analyze_token

PathLike = Union[str, os.PathLike]

GOLD_CLASSES = (Gender.FEM, Gender.MSC, Gender.NEUT)


class WinoDataError(ValueError):
    pass


class Stereotype(str, Enum):
    PRO = "pro"
    ANTI = "anti"
    NONE = "none"


@dataclass(frozen=True)
class WinoMTInstance:
    gold_gender: Gender
    entity_src_index: int
    src_sentence: Sentence
    entity_surface: str
    stereotype: Stereotype = Stereotype.NONE

    def __post_init__(self):
        if self.gold_gender not in GOLD_CLASSES:
            raise WinoDataError(f"gold gender must be fem, msc or neutral, got {self.gold_gender}")
        toks = self.src_sentence.tokens
        if not 0 <= self.entity_src_index < len(toks):
            raise WinoDataError(f"entity index {self.entity_src_index} outside {len(toks)} tokens")
        if toks[self.entity_src_index].lower() != self.entity_surface.lower():
            raise WinoDataError(
                f"token {self.entity_src_index} is {toks[self.entity_src_index]!r}, "
                f"expected {self.entity_surface!r}")
        if self.gold_gender is Gender.NEUT and self.stereotype is not Stereotype.NONE:
            raise WinoDataError("neutral instances carry no stereotype annotation")


def load_winomt(path: PathLike) -> list:
    """TSV ``gold_gender, entity_src_index, src_sentence, entity_surface, stereotype``."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row, cols in enumerate(csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE), start=1):
            if not cols or (len(cols) == 1 and not cols[0].strip()):
                continue
            if len(cols) != 5:
                raise WinoDataError(f"{path}:{row}: expected 5 columns, got {len(cols)}")
            try:
                out.append(WinoMTInstance(
                    Gender.parse(cols[0]), int(cols[1]), Sentence.from_text(cols[2], row),
                    cols[3], Stereotype(cols[4].strip().lower() or "none")))
            except ValueError as exc:
                raise WinoDataError(f"{path}:{row}: {exc}") from None
    return out


def vote(tags: Iterable[Gender]) -> Gender:
    """Majority over gendered tags. Any tie, or no gendered tag, is unknown."""
    c = Counter(g for g in tags if g is not Gender.NONE)
    if not c:
        return Gender.NONE
    ranked = c.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return Gender.NONE
    return ranked[0][0]


def predict_gender(tt: TranslationTable, spec: MorphAnalyzerSpec, inst: WinoMTInstance,
                   hypothesis: Sentence) -> Gender:
    pair = ParallelPair(inst.src_sentence, hypothesis)
    positions = project_entity(tt, pair, inst.entity_src_index)
    return vote(analyze_token(spec, hypothesis.tokens[j]).gender for j in sorted(positions))


def _pct(num: float, den: float) -> float:
    return 100.0 * num / den if den else 0.0


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int
    predicted: int


@dataclass
class MetricsReport:
    acc: float
    f1_fem: float
    f1_msc: float
    delta_g: float
    delta_s: float
    delta_r: float
    n_instances: int
    per_class: dict = field(default_factory=dict)
    confusion: dict = field(default_factory=dict)
    acc_pro: float = 0.0
    acc_anti: float = 0.0
    include_neutral: bool = True

    @property
    def recall_fem(self) -> float:
        return self.per_class["fem"]["recall"]

    @property
    def recall_msc(self) -> float:
        return self.per_class["msc"]["recall"]

    def to_dict(self) -> dict:
        return asdict(self)


def score(instances: Sequence[WinoMTInstance], predictions: Sequence[Gender],
          include_neutral: bool = True) -> MetricsReport:
    """Corpus metrics, all as percentages.

    Precision of a class counts every instance predicted as that class,
    neutral-gold ones included. ΔR compares recalls, which never involve
    neutral-gold instances. ΔS is accuracy on pro-stereotypical minus
    accuracy on anti-stereotypical instances. ``include_neutral=False``
    drops neutral-gold instances from Acc only.
    """
    if len(instances) != len(predictions):
        raise ValueError(f"{len(instances)} instances but {len(predictions)} predictions")
    golds = [inst.gold_gender for inst in instances]
    preds = [Gender(p) for p in predictions]

    confusion = defaultdict(Counter)
    for g, p in zip(golds, preds):
        confusion[g.value][p.value] += 1

    acc_pairs = [(g, p) for g, p in zip(golds, preds) if include_neutral or g is not Gender.NEUT]
    acc = _pct(sum(g is p for g, p in acc_pairs), len(acc_pairs))

    per_class = {}
    for cls in GOLD_CLASSES:
        tp = sum(g is cls and p is cls for g, p in zip(golds, preds))
        support = sum(g is cls for g in golds)
        predicted = sum(p is cls for p in preds)
        if cls is Gender.NEUT and not support and not predicted:
            continue
        prec, rec = _pct(tp, predicted), _pct(tp, support)
        per_class[cls.value] = asdict(ClassScores(prec, rec, _f1(prec, rec), support, predicted))

    def subset_acc(kind: Stereotype) -> float:
        sub = [(i.gold_gender, p) for i, p in zip(instances, preds)
               if i.stereotype is kind and i.gold_gender is not Gender.NEUT]
        return _pct(sum(g is p for g, p in sub), len(sub))

    acc_pro, acc_anti = subset_acc(Stereotype.PRO), subset_acc(Stereotype.ANTI)
    f1_fem, f1_msc = per_class["fem"]["f1"], per_class["msc"]["f1"]
    return MetricsReport(
        acc=acc, f1_fem=f1_fem, f1_msc=f1_msc,
        delta_g=f1_msc - f1_fem,
        delta_s=acc_pro - acc_anti,
        delta_r=per_class["msc"]["recall"] - per_class["fem"]["recall"],
        n_instances=len(instances),
        per_class=per_class,
        confusion={g: dict(c) for g, c in sorted(confusion.items())},
        acc_pro=acc_pro, acc_anti=acc_anti,
        include_neutral=include_neutral,
    )


def evaluate(tt: TranslationTable, spec: MorphAnalyzerSpec, instances: Sequence[WinoMTInstance],
             hypotheses: Sequence[Sentence], include_neutral: bool = True):
    """Predict every instance and score; returns ``(report, predictions)``."""
    if len(instances) != len(hypotheses):
        raise ValueError(f"{len(instances)} instances but {len(hypotheses)} hypotheses")
    preds = [predict_gender(tt, spec, i, h) for i, h in zip(instances, hypotheses)]
    return score(instances, preds, include_neutral), preds


# -- human annotations ------------------------------------------------------

HUMAN_LABELS = ("masculine", "feminine", "inconsistent", "ambiguous", "na")
_LABEL_ALIASES = {"n/a": "na", "n.a.": "na", "none": "na"}
_LABEL_GENDER = {"masculine": Gender.MSC, "feminine": Gender.FEM}


def normalize_label(label: str) -> str:
    key = label.strip().lower()
    key = _LABEL_ALIASES.get(key, key)
    if key not in HUMAN_LABELS:
        raise WinoDataError(f"unknown human label {label!r}; expected one of {HUMAN_LABELS}")
    return key


def human_label_correct(label: str, gold: Gender) -> bool:
    """Ambiguous counts as correct; inconsistent, N/A and the wrong gender count as incorrect."""
    key = normalize_label(label)
    if key == "ambiguous":
        return True
    return _LABEL_GENDER.get(key) is gold


@dataclass(frozen=True)
class HumanLabel:
    instance_id: int
    label: str
    annotator: str


def load_human_labels(path: PathLike) -> list:
    """TSV ``instance_id<TAB>label<TAB>annotator_id``; ids are 0-based dataset rows."""
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row, cols in enumerate(csv.reader(fh, delimiter="\t", quoting=csv.QUOTE_NONE), start=1):
            if not cols or (len(cols) == 1 and not cols[0].strip()):
                continue
            if len(cols) != 3:
                raise WinoDataError(f"{path}:{row}: expected 3 columns, got {len(cols)}")
            try:
                iid = int(cols[0])
            except ValueError:
                if row == 1:
                    continue  # header
                raise WinoDataError(f"{path}:{row}: bad instance id {cols[0]!r}") from None
            try:
                out.append(HumanLabel(iid, normalize_label(cols[1]), cols[2].strip()))
            except WinoDataError as exc:
                raise WinoDataError(f"{path}:{row}: {exc}") from None
    return out


def ingest_human_labels(labels: Sequence[HumanLabel], instances: Sequence[WinoMTInstance]) -> dict:
    """Map human labels to correctness and report accuracy per annotator.

    ``agreement`` is raw percent label agreement averaged over annotator
    pairs, on the instances both annotators labelled.
    """
    by_annot = defaultdict(dict)
    correct = defaultdict(dict)
    for lab in labels:
        if not 0 <= lab.instance_id < len(instances):
            raise WinoDataError(f"instance id {lab.instance_id} outside the dataset")
        by_annot[lab.annotator][lab.instance_id] = lab.label
        correct[lab.annotator][lab.instance_id] = human_label_correct(
            lab.label, instances[lab.instance_id].gold_gender)
    per_annot = {}
    for a in sorted(correct):
        vals = list(correct[a].values())
        counts = Counter(by_annot[a].values())
        per_annot[a] = {
            "n": len(vals),
            "accuracy": _pct(sum(vals), len(vals)),
            "label_pct": {lab: _pct(counts[lab], len(vals)) for lab in HUMAN_LABELS},
        }
    report = {
        "annotators": per_annot,
        "accuracy": (sum(v["accuracy"] for v in per_annot.values()) / len(per_annot)) if per_annot else 0.0,
        "correct": {a: {str(k): v for k, v in sorted(c.items())} for a, c in sorted(correct.items())},
    }
    pair_scores = []
    for a, b in combinations(sorted(by_annot), 2):
        shared = by_annot[a].keys() & by_annot[b].keys()
        if shared:
            pair_scores.append(_pct(sum(by_annot[a][i] == by_annot[b][i] for i in shared), len(shared)))
    report["agreement"] = sum(pair_scores) / len(pair_scores) if pair_scores else None
    return report
