import random

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import FIXTURES
from genderflow.align import TranslationTable, train_model1
from genderflow.corpus import Sentence
from genderflow.gender import Gender
from genderflow.morph import load_spec
from genderflow.wino_eval import (
    HumanLabel, Stereotype, WinoDataError, WinoMTInstance, human_label_correct, ingest_human_labels,
    load_human_labels, load_winomt, predict_gender, score, vote,
)

IT = load_spec(FIXTURES / "it.spec")
GUARD_SRC = "The guard saved the editor from the criminals because he was on duty ."
GUARD_TRG = "La guardia ha salvato l'editore dai criminali perché era in dovere ."


def inst(gold="msc", st_="pro", text=GUARD_SRC, idx=1, surface="guard"):
    return WinoMTInstance(Gender.parse(gold), idx, Sentence.from_text(text), surface, Stereotype(st_))


def guard_table():
    src = GUARD_SRC.lower().split()
    trg = GUARD_TRG.lower().split()
    corpus = [(src, trg), (["the", "guard"], ["la", "guardia"]), (["guard"], ["guardia"]),
              (["the", "editor"], ["l'editore"]), (["because", "he", "was", "on", "duty"],
                                                   ["perché", "era", "in", "dovere"])]
    return train_model1(corpus, 15)


def test_guard_example_is_marked_incorrect():
    tt = guard_table()
    pred = predict_gender(tt, IT, inst(), Sentence.from_text(GUARD_TRG))
    assert pred is Gender.FEM


def test_unanimous_article_and_noun():
    tt = TranslationTable({("guard", "la"): 0.9, ("guard", "guardia"): 0.9})
    hyp = Sentence.from_text("la guardia")
    assert predict_gender(tt, IT, inst(text="The guard", surface="guard"), hyp) is Gender.FEM


def test_dropped_entity_is_unknown():
    tt = TranslationTable({("the", "la"): 0.9})
    assert predict_gender(tt, IT, inst(text="The guard", surface="guard"), Sentence.from_text("la")) \
        is Gender.NONE


def test_vote():
    assert vote([Gender.FEM, Gender.FEM, Gender.MSC]) is Gender.FEM
    assert vote([Gender.FEM, Gender.MSC]) is Gender.NONE
    assert vote([Gender.NONE, Gender.NONE]) is Gender.NONE
    assert vote([]) is Gender.NONE
    assert vote([Gender.NEUT, Gender.NEUT, Gender.MSC]) is Gender.NEUT


def test_instance_validation():
    with pytest.raises(WinoDataError):
        inst(idx=2)
    with pytest.raises(WinoDataError):
        inst(gold="neutral", st_="pro")
    with pytest.raises(WinoDataError):
        WinoMTInstance(Gender.NONE, 1, Sentence.from_text("The guard"), "guard")


def test_perfect_predictions():
    insts = [inst("msc", "pro"), inst("fem", "anti"), inst("neutral", "none"), inst("fem", "pro")]
    r = score(insts, [i.gold_gender for i in insts])
    assert (r.acc, r.delta_g, r.delta_r, r.delta_s) == (100.0, 0.0, 0.0, 0.0)


def test_model_a_hand_values():
    golds = ["msc", "msc", "fem", "fem", "neutral", "neutral"]
    insts = [inst(g, "none") for g in golds]
    r = score(insts, [Gender.MSC, Gender.MSC, Gender.FEM, Gender.FEM, Gender.MSC, Gender.MSC])
    assert r.delta_r == 0.0
    assert r.delta_g == pytest.approx(-100 / 3)
    assert r.acc == pytest.approx(400 / 6)
    assert round(r.delta_g, 1) == -33.3


def test_exclude_neutral_affects_acc_only():
    insts = [inst("msc"), inst("fem"), inst("neutral", "none")]
    preds = [Gender.MSC, Gender.MSC, Gender.MSC]
    a = score(insts, preds)
    b = score(insts, preds, include_neutral=False)
    assert a.acc == pytest.approx(100 / 3) and b.acc == 50.0
    assert a.delta_g == b.delta_g


def test_count_mismatch():
    with pytest.raises(ValueError):
        score([inst()], [])


def test_report_serializes():
    import json
    r = score([inst("msc"), inst("fem", "anti")], [Gender.MSC, Gender.NONE])
    d = r.to_dict()
    json.dumps(d)
    assert {"acc", "delta_g", "delta_s", "delta_r", "per_class", "confusion"} <= set(d)


def test_load_winomt(tmp_path):
    p = tmp_path / "w.tsv"
    p.write_text("female\t1\tThe nurse said she left .\tnurse\tanti\n\n"
                 "neutral\t1\tThe nurse left .\tnurse\t\n", encoding="utf-8")
    rows = load_winomt(p)
    assert rows[0].gold_gender is Gender.FEM and rows[1].stereotype is Stereotype.NONE
    p.write_text("female\tx\tThe nurse\tnurse\tpro\n", encoding="utf-8")
    with pytest.raises(WinoDataError):
        load_winomt(p)


labels = st.sampled_from(["fem", "msc", "neut", "none"])


@settings(max_examples=200)
@given(st.lists(st.tuples(st.sampled_from(["fem", "msc", "neut"]), labels,
                          st.sampled_from(["pro", "anti", "none"])), min_size=1, max_size=30),
       st.randoms(use_true_random=False))
def test_metric_properties(rows, rnd):
    rows = [(g, p, "none" if g == "neut" else s) for g, p, s in rows]
    golds, preds, stereos = zip(*rows)
    insts = [inst("neutral" if g == "neut" else g, s) for g, _, s in rows]
    r = score(insts, [Gender.parse(p) for p in preds])
    ref = oracles.recount(list(golds), list(preds), list(stereos))
    assert r.acc == pytest.approx(ref["acc"], abs=1e-9)
    assert 0.0 <= r.acc <= 100.0
    assert r.delta_g == pytest.approx(r.f1_msc - r.f1_fem)
    # Acc is the support-weighted mean of class recalls
    weighted = sum(v["recall"] * v["support"] for v in r.per_class.values()) / len(rows)
    assert r.acc == pytest.approx(weighted, abs=1e-9)
    # changing predictions on neutral-gold instances leaves the recall gap alone
    alt = [rnd.choice(["fem", "msc", "neut", "none"]) if g == "neut" else p for g, p in zip(golds, preds)]
    assert score(insts, [Gender.parse(p) for p in alt]).delta_r == pytest.approx(r.delta_r, abs=1e-12)
    order = list(range(len(rows)))
    rnd.shuffle(order)
    perm = score([insts[i] for i in order], [Gender.parse(preds[i]) for i in order])
    assert perm.acc == pytest.approx(r.acc) and perm.delta_s == pytest.approx(r.delta_s)


def test_human_label_examples():
    assert human_label_correct("ambiguous", Gender.FEM)
    assert not human_label_correct("inconsistent", Gender.FEM)
    assert human_label_correct("Masculine", Gender.MSC)
    assert not human_label_correct("N/A", Gender.MSC)
    with pytest.raises(WinoDataError):
        human_label_correct("maybe", Gender.MSC)


def test_ingest_human_labels(tmp_path):
    insts = [inst("msc"), inst("fem"), inst("fem")]
    p = tmp_path / "h.tsv"
    p.write_text("instance_id\tlabel\tannotator_id\n"
                 "0\tmasculine\ta\n1\tambiguous\ta\n2\tmasculine\ta\n"
                 "0\tmasculine\tb\n1\tinconsistent\tb\n2\tna\tb\n", encoding="utf-8")
    rep = ingest_human_labels(load_human_labels(p), insts)
    assert rep["annotators"]["a"]["accuracy"] == pytest.approx(200 / 3)
    assert rep["annotators"]["b"]["accuracy"] == pytest.approx(100 / 3)
    assert rep["accuracy"] == pytest.approx(50.0)
    assert rep["agreement"] == pytest.approx(100 / 3)
    assert rep["correct"]["a"] == {"0": True, "1": True, "2": False}
    with pytest.raises(WinoDataError):
        ingest_human_labels([HumanLabel(5, "na", "a")], insts)
    p.write_text("0\tweird\ta\n", encoding="utf-8")
    with pytest.raises(WinoDataError):
        load_human_labels(p)
