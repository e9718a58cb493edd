"""Gender-filtered self-training: balancing, upsampling and corpus assembly.

``run_pipeline`` drives the whole procedure from a plan:

* forward modes: filter source by gender, translate, filter targets,
  balance, then assemble (retrain), mix with original data (mixed
  fine-tuning), or swap in an unfiltered random sample of the same size
  (random control);
* back-translation: filter target monolingual text, translate it into the
  source language, filter the resulting sources, balance and assemble.

All randomness comes from one ``random.Random(seed)`` stream consumed in a
fixed stage order, so results do not depend on the worker count.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
from dataclasses import asdict, dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Union

from genderflow.corpus import (
    Corpus, Origin, ParallelPair, Sentence, derive, load_mono, load_parallel,
    preprocess_bitext, write_mono, write_parallel,
)
from genderflow.gender import Gender
from genderflow.lexicon import load_lexicon_dir
from genderflow.morph import load_spec
from genderflow.source_filter import SourceLabel, classify_source, filter_src
from genderflow.target_filter import filter_trg, filter_trg_mono
from genderflow.translate import TranslatorHandle, make_translator, translate_corpus

log = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

GENDERS = (Gender.FEM, Gender.MSC)
PSEUDO_ORIGIN = {Gender.FEM: Origin.PSEUDO_FEM, Gender.MSC: Origin.PSEUDO_MSC}


class Mode(str, Enum):
    RETRAIN = "retrain"
    MIXED_FINE_TUNE = "mixed_finetune"
    RANDOM_CONTROL = "random_control"
    BACK_TRANSLATION = "back_translation"


class PlanError(ValueError):
    pass


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def sample_sorted(rng: random.Random, n: int, k: int) -> list:
    """``k`` distinct indices from ``range(n)``, uniformly, in increasing order."""
    return sorted(rng.sample(range(n), k))


def subsample(corpus, k: int, seed) -> Corpus:
    items = list(corpus)
    if k > len(items):
        raise ValueError(f"cannot sample {k} items from {len(items)}")
    return derive(corpus, [items[i] for i in sample_sorted(_rng(seed), len(items), k)])


def balance(fem, msc, seed):
    """Subsample the larger corpus down to the size of the smaller one.

    The smaller corpus is returned unchanged; the sample keeps the original
    relative order.
    """
    nf, nm = len(fem), len(msc)
    if (nf == 0) != (nm == 0):
        raise ValueError(f"cannot balance an empty corpus against a nonempty one ({nf} fem, {nm} msc)")
    rng = _rng(seed)
    if nf > nm:
        return subsample(fem, nm, rng), derive(msc, msc)
    if nm > nf:
        return derive(fem, fem), subsample(msc, nf, rng)
    return derive(fem, fem), derive(msc, msc)


def _tagged(pairs, origin: Origin) -> list:
    return [p.with_origin(origin) for p in pairs]


def assemble(d_par, fem, msc, upsample_factor: int = 1) -> Corpus:
    """``d_par + fem * k + msc * k`` with origin tags on the pseudo-parallel pairs."""
    if upsample_factor < 1:
        raise ValueError("upsample_factor must be >= 1")
    items = list(d_par)
    items += _tagged(fem, Origin.PSEUDO_FEM) * upsample_factor
    items += _tagged(msc, Origin.PSEUDO_MSC) * upsample_factor
    return derive(d_par, items)


def assemble_finetune(d_par, fem, msc, seed) -> Corpus:
    """Mixed fine-tuning set: the gendered pairs plus as many sampled original pairs."""
    need = len(fem) + len(msc)
    if len(d_par) < need:
        raise ValueError(f"mixed fine-tuning needs {need} original pairs but only {len(d_par)} are available")
    sample = subsample(d_par, need, seed)
    items = _tagged(fem, Origin.PSEUDO_FEM) + _tagged(msc, Origin.PSEUDO_MSC)
    items += _tagged(sample, Origin.ORIGINAL)
    return derive(d_par, items)


def sample_random_pseudo(d_src, n: int, seed, handle: TranslatorHandle, translator=None,
                         max_inflight: Optional[int] = None):
    """Translate ``n`` uniformly sampled source sentences without any gender filtering.

    Returns ``(pairs, translation_manifest)``.
    """
    if n > len(d_src):
        raise ValueError(f"cannot sample {n} sentences from a corpus of {len(d_src)}")
    picked = subsample(d_src, n, seed)
    if n == 0:
        return derive(d_src, []), {"lines": 0, "requests": 0}
    trg, manifest = translate_corpus(handle, picked, translator, max_inflight)
    pairs = [ParallelPair(s, t, Origin.PSEUDO_RANDOM) for s, t in zip(picked, trg)]
    return derive(d_src, pairs), manifest


def origin_counts(corpus) -> dict:
    counts = {o.value: 0 for o in Origin}
    for p in corpus:
        counts[p.origin.value] += 1
    return counts


# -- plan -------------------------------------------------------------------

@dataclass
class AugmentPlan:
    par_src: str
    par_trg: str
    mono: str
    analyzer: str
    translator: dict
    out_dir: str = "augment_out"
    lexicon: Optional[str] = None
    seed: int = 0
    upsample_factor: int = 1
    mode: Mode = Mode.RETRAIN
    src_lang: str = "en"
    trg_lang: str = "de"
    preprocess: bool = True
    max_len: int = 250
    max_ratio: float = 1.5
    max_pairs_per_gender: Optional[int] = None
    cap_stage: str = "after_balance"
    resume: bool = True

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.upsample_factor < 1:
            raise PlanError("upsample_factor must be >= 1")
        if self.cap_stage not in ("before_balance", "after_balance"):
            raise PlanError("cap_stage must be before_balance or after_balance")
        if self.max_pairs_per_gender is not None and self.max_pairs_per_gender < 0:
            raise PlanError("max_pairs_per_gender must be >= 0")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise PlanError("seed must be a non-negative integer")
        handle = dict(self.translator)
        # a mock translator without its own seed draws from the plan seed
        handle.setdefault("seed", self.seed)
        self.translator_handle = TranslatorHandle.from_dict(handle)

    @classmethod
    def from_dict(cls, d: dict, base_dir: Optional[PathLike] = None) -> "AugmentPlan":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise PlanError(f"unknown plan fields: {sorted(unknown)}")
        d = dict(d)
        if base_dir is not None:
            base = Path(base_dir)
            for key in ("par_src", "par_trg", "mono", "analyzer", "lexicon", "out_dir"):
                if d.get(key) is not None:
                    d[key] = str(base / d[key])
            tr = dict(d.get("translator", {}))
            for key in ("table", "flip_table"):
                if tr.get(key) is not None:
                    tr[key] = str(base / tr[key])
            d["translator"] = tr
        try:
            return cls(**d)
        except TypeError as exc:
            raise PlanError(str(exc)) from None

    @classmethod
    def load(cls, path: PathLike) -> "AugmentPlan":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), Path(path).parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        return d

    def fingerprint(self) -> str:
        """Identity of the translation setup; a resumed run reuses translations only if it matches."""
        d = self.translator_handle.identity()
        d.pop("max_inflight", None)
        for key in ("table", "flip_table"):
            if d.get(key) and os.path.isfile(d[key]):
                d[key + "_sha256"] = hashlib.sha256(Path(d[key]).read_bytes()).hexdigest()
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


# -- pipeline ---------------------------------------------------------------

class _Stages:
    """Writes intermediate corpora as ``<stage>.<gender>.<side>.txt`` plus completion markers."""

    def __init__(self, out_dir: Path, fingerprint: str, resume: bool):
        self.out = out_dir
        self.fingerprint = fingerprint
        self.resume = resume
        out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, stage: str, gender: str, side: str) -> Path:
        return self.out / f"{stage}.{gender}.{side}.txt"

    def marker(self, stage: str, gender: str) -> Path:
        return self.out / f"{stage}.{gender}.done"

    def done(self, stage: str, gender: str) -> Optional[dict]:
        m = self.marker(stage, gender)
        if not (self.resume and m.exists()):
            return None
        info = json.loads(m.read_text(encoding="utf-8"))
        return info if info.get("fingerprint") == self.fingerprint else None

    def mark(self, stage: str, gender: str, **info) -> None:
        info["fingerprint"] = self.fingerprint
        self.marker(stage, gender).write_text(json.dumps(info, sort_keys=True) + "\n", encoding="utf-8")

    def write_pairs(self, stage: str, gender: str, pairs) -> None:
        write_parallel(self.path(stage, gender, "src"), self.path(stage, gender, "trg"), pairs)

    def clear(self, stage: str, gender: str) -> None:
        self.marker(stage, gender).unlink(missing_ok=True)


def _read_lines(path: Path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        return [line.rstrip("\r\n") for line in fh]


def _translate_stage(stages: _Stages, g: str, sources: list, side: str, handle, translator, inflight):
    """Translate ``sources``, or reload a finished translation of exactly these lines."""
    src_digest = hashlib.sha256("\n".join(s.raw for s in sources).encode("utf-8")).hexdigest()
    done = stages.done("translate", g)
    path = stages.path("translate", g, side)
    if done is not None and done.get("sources") == src_digest and path.exists():
        lines = _read_lines(path)
        if len(lines) == len(sources):
            log.info("resuming: reusing %s", path)
            return [Sentence.from_text(t, s.line_no) for s, t in zip(sources, lines)], done["translation"]
    stages.clear("translate", g)
    trg, manifest = translate_corpus(handle, sources, translator, inflight)
    write_mono(path, trg)
    manifest = {"lines": manifest["lines"], "requests": manifest["requests"]}
    stages.mark("translate", g, translation=manifest, sources=src_digest)
    return list(trg), manifest


def _cap(fem, msc, cap: Optional[int], rng: random.Random):
    if cap is None:
        return fem, msc
    out = []
    for c in (fem, msc):
        out.append(subsample(c, cap, rng) if len(c) > cap else c)
    return tuple(out)


def run_pipeline(plan: AugmentPlan, workers: int = 1) -> dict:
    """Run every stage of ``plan`` and write ``manifest.json``; returns the manifest."""
    out_dir = Path(plan.out_dir)
    stages = _Stages(out_dir, plan.fingerprint(), plan.resume)
    lex = load_lexicon_dir(plan.lexicon) if plan.lexicon else load_lexicon_dir(None)
    spec = load_spec(plan.analyzer)
    handle = plan.translator_handle
    translator = make_translator(handle)
    inflight = workers if workers > 1 else None
    rng = random.Random(plan.seed)

    d_par = load_parallel(plan.par_src, plan.par_trg, plan.src_lang, plan.trg_lang)
    manifest: dict = {
        "mode": plan.mode.value,
        "seed": plan.seed,
        "upsample_factor": plan.upsample_factor,
        "src_lang": plan.src_lang,
        "trg_lang": plan.trg_lang,
        "translator": {k: v for k, v in handle.identity().items() if k != "max_inflight"},
        "stages": {},
    }
    st = manifest["stages"]
    st["d_par"] = {"input": len(d_par)}
    if plan.preprocess:
        d_par, report = preprocess_bitext(d_par, plan.max_len, plan.max_ratio)
        st["d_par"].update(report.to_dict())
    st["d_par"]["output"] = len(d_par)

    mono_lang = plan.trg_lang if plan.mode is Mode.BACK_TRANSLATION else plan.src_lang
    mono = load_mono(plan.mono, mono_lang)
    st["mono"] = len(mono)

    pseudo = {}
    for gen in GENDERS:
        g = gen.value
        info: dict = {}
        if plan.mode is Mode.BACK_TRANSLATION:
            trg_gen = filter_trg_mono(spec, mono, gen, workers)
            write_mono(stages.path("filter_trg_mono", g, "trg"), trg_gen)
            stages.mark("filter_trg_mono", g, size=len(trg_gen))
            info["filter_trg_mono"] = len(trg_gen)
            src_out, tr = _translate_stage(stages, g, list(trg_gen), "src", handle, translator, inflight)
            info["translate"] = len(src_out)
            info["translation"] = tr
            want = SourceLabel(g)
            pairs = [ParallelPair(s, t, PSEUDO_ORIGIN[gen]) for s, t in zip(src_out, trg_gen)
                     if classify_source(lex, s) is want]
            stages.write_pairs("filter_src", g, pairs)
            stages.mark("filter_src", g, size=len(pairs))
            info["filter_src"] = len(pairs)
            info["retention"] = len(pairs) / len(trg_gen) if len(trg_gen) else 0.0
            pseudo[gen] = derive(mono, pairs)
        else:
            src_gen = filter_src(lex, mono, gen, workers)
            write_mono(stages.path("filter_src", g, "src"), src_gen)
            stages.mark("filter_src", g, size=len(src_gen))
            info["filter_src"] = len(src_gen)
            trg_gen, tr = _translate_stage(stages, g, list(src_gen), "trg", handle, translator, inflight)
            info["translate"] = len(trg_gen)
            info["translation"] = tr
            pairs = derive(mono, [ParallelPair(s, t, PSEUDO_ORIGIN[gen]) for s, t in zip(src_gen, trg_gen)])
            result = filter_trg(spec, pairs, gen, workers)
            stages.write_pairs("filter_trg", g, result.kept)
            stages.write_pairs("filter_trg_removed", g, result.removed_corpus)
            with open(out_dir / f"filter_trg_removed.{g}.evidence.tsv", "w", encoding="utf-8") as fh:
                for r in result.removed:
                    fh.write(f"{r.pair.src.line_no}\t{r.evidence_str()}\n")
            stages.mark("filter_trg", g, kept=len(result.kept), removed=len(result.removed))
            info["filter_trg"] = {"kept": len(result.kept), "removed": len(result.removed),
                                  "retention": result.retention}
            pseudo[gen] = result.kept
        st[g] = info

    fem, msc = pseudo[Gender.FEM], pseudo[Gender.MSC]
    if plan.cap_stage == "before_balance":
        fem, msc = _cap(fem, msc, plan.max_pairs_per_gender, rng)
    fem, msc = balance(fem, msc, rng)
    if plan.cap_stage == "after_balance":
        fem, msc = _cap(fem, msc, plan.max_pairs_per_gender, rng)
    for gen, c in ((Gender.FEM, fem), (Gender.MSC, msc)):
        stages.write_pairs("balance", gen.value, c)
        st[gen.value]["balance"] = len(c)

    if plan.mode is Mode.MIXED_FINE_TUNE:
        assembled = assemble_finetune(d_par, fem, msc, rng)
    elif plan.mode is Mode.RANDOM_CONTROL:
        n = len(fem) + len(msc)
        rand, tr = sample_random_pseudo(mono, n, rng, handle, translator, inflight)
        stages.write_pairs("random", "all", rand)
        st["random"] = {"size": len(rand), "translation": {"lines": tr["lines"], "requests": tr["requests"]}}
        items = list(d_par) + list(rand) * plan.upsample_factor
        assembled = derive(d_par, items)
    else:
        assembled = assemble(d_par, fem, msc, plan.upsample_factor)

    stages.write_pairs("assembled", "all", assembled)
    write_mono(stages.path("assembled", "all", "origin"), [p.origin.value for p in assembled])
    manifest["assembled"] = {"total": len(assembled), "by_origin": origin_counts(assembled)}

    mono_key = "D_trg" if plan.mode is Mode.BACK_TRANSLATION else "D_src"
    first = "filter_trg_mono" if plan.mode is Mode.BACK_TRANSLATION else "filter_src"
    last = "filter_src" if plan.mode is Mode.BACK_TRANSLATION else "filter_trg"

    def final(info):
        v = info[last]
        return v["kept"] if isinstance(v, dict) else v

    manifest["corpus_sizes"] = {
        "D_par": len(d_par),
        f"{mono_key}^fem": st["fem"][first],
        "D_par^fem": final(st["fem"]),
        f"{mono_key}^msc": st["msc"][first],
        "D_par^msc": final(st["msc"]),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                           encoding="utf-8")
    return manifest
