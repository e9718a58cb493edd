"""``genderflow`` command line: one entry point, one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error, 3 external-service error.
Option values resolve as command-line flag, then ``--config`` JSON (a
top-level key, or a key under the subcommand's name), then the built-in
default. ``GENDERFLOW_SEED`` is the lowest-precedence seed source.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from genderflow.corpus import load_mono, load_parallel, write_mono, write_parallel
from genderflow.gender import binary_gender
from genderflow.translate import TranslationServiceError

log = logging.getLogger("genderflow")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SERVICE = 0, 1, 2, 3
SEED_ENV = "GENDERFLOW_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False)


def _emit(obj, path: Optional[str] = None) -> None:
    text = _dump(obj)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    print(text)


# -- option resolution ------------------------------------------------------

DEFAULTS = {
    "workers": 1,
    "iterations": 10,
    "batch_size": 64,
    "max_inflight": 1,
    "kind": "dict_mock",
    "src_lang": "en",
    "tgt_lang": "de",
    "error_rate": 0.0,
    "timeout": 60.0,
    "retries": 3,
}


class Options:
    """Merged view of flags, config file and defaults for one subcommand."""

    def __init__(self, args: argparse.Namespace, config: dict, command: str):
        self._args = vars(args)
        self._config = {k.replace("-", "_"): v for k, v in config.items() if not isinstance(v, dict)}
        self._config.update({k.replace("-", "_"): v for k, v in config.get(command, {}).items()})

    def get(self, name: str, default=None):
        if self._args.get(name) is not None:
            return self._args[name]
        if name in self._config:
            return self._config[name]
        return DEFAULTS.get(name, default)

    def require(self, name: str):
        value = self.get(name)
        if value is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")
        return value

    def seed(self, fallback: Optional[int] = None) -> int:
        for value in (self._args.get("seed"), self._config.get("seed"), fallback, os.environ.get(SEED_ENV)):
            if value is not None:
                try:
                    return int(value)
                except (TypeError, ValueError):
                    raise UsageError(f"seed must be an integer, got {value!r}") from None
        return 0


# -- subcommands ------------------------------------------------------------

def _lexicon(opts: Options):
    from genderflow.lexicon import load_lexicon_dir
    return load_lexicon_dir(opts.get("lexicon"))


def cmd_filter_src(opts: Options) -> dict:
    from genderflow.source_filter import corpus_gender_stats, filter_src

    lex = _lexicon(opts)
    gen = binary_gender(opts.require("gender"))
    corpus = load_mono(opts.require("input"))
    out = filter_src(lex, corpus, gen, int(opts.get("workers")))
    write_mono(opts.require("out"), out)
    summary = {"gender": gen.value, "input": len(corpus), "kept": len(out)}
    if opts.get("stats"):
        stats = corpus_gender_stats(lex, corpus).to_dict() if len(corpus) else {"n": 0}
        Path(opts.get("stats")).write_text(_dump(stats) + "\n", encoding="utf-8")
        summary["stats"] = stats
    return summary


def cmd_filter_trg(opts: Options) -> dict:
    from genderflow.morph import load_spec
    from genderflow.target_filter import filter_trg

    spec = load_spec(opts.require("spec"))
    gen = binary_gender(opts.require("gender"))
    pairs = load_parallel(opts.require("src"), opts.require("trg"))
    result = filter_trg(spec, pairs, gen, int(opts.get("workers")))
    kept_p, removed_p = opts.require("kept_prefix"), opts.require("removed_prefix")
    write_parallel(f"{kept_p}.src.txt", f"{kept_p}.trg.txt", result.kept)
    write_parallel(f"{removed_p}.src.txt", f"{removed_p}.trg.txt", result.removed_corpus)
    with open(f"{removed_p}.evidence.tsv", "w", encoding="utf-8") as fh:
        for r in result.removed:
            fh.write(f"{r.pair.src.line_no}\t{r.evidence_str()}\n")
    report = {"gender": gen.value, **result.summary(),
              "sizes": {f"D_src^{gen.value}": len(pairs), f"D_par^{gen.value}": len(result.kept)}}
    if opts.get("report"):
        Path(opts.get("report")).write_text(_dump(report) + "\n", encoding="utf-8")
    return report


def _handle(opts: Options):
    from genderflow.translate import TranslatorHandle

    if opts.get("handle"):
        with open(opts.get("handle"), encoding="utf-8") as fh:
            d = json.load(fh)
        base = Path(opts.get("handle")).parent
        for key in ("table", "flip_table"):
            if d.get(key):
                d[key] = str(base / d[key])
    else:
        d = {k: opts.get(k) for k in ("kind", "endpoint", "command", "table", "flip_table", "error_rate",
                                      "src_lang", "tgt_lang", "batch_size", "max_inflight", "timeout",
                                      "retries")}
        d = {k: v for k, v in d.items() if v is not None}
    for key in ("batch_size", "max_inflight"):
        if opts._args.get(key) is not None:
            d[key] = opts._args[key]
    d["seed"] = opts.seed(d.get("seed"))
    return TranslatorHandle.from_dict(d)


def cmd_translate(opts: Options) -> dict:
    from genderflow.translate import translate_corpus

    handle = _handle(opts)
    corpus = load_mono(opts.require("input"))
    workers = int(opts.get("workers"))
    out, manifest = translate_corpus(handle, corpus, max_inflight=workers if workers > 1 else None)
    write_mono(opts.require("out"), out)
    if opts.get("manifest"):
        Path(opts.get("manifest")).write_text(_dump(manifest) + "\n", encoding="utf-8")
    return manifest


def cmd_augment_run(opts: Options) -> dict:
    from genderflow.augment import AugmentPlan, run_pipeline

    plan_path = opts.require("plan")
    with open(plan_path, encoding="utf-8") as fh:
        raw = json.load(fh)
    raw["seed"] = opts.seed(raw.get("seed"))
    plan = AugmentPlan.from_dict(raw, Path(plan_path).parent)
    if opts.get("out_dir"):
        plan.out_dir = opts.get("out_dir")
    if opts.get("no_resume"):
        plan.resume = False
    return run_pipeline(plan, int(opts.get("workers")))


def cmd_stats(opts: Options) -> dict:
    from genderflow.source_filter import corpus_gender_stats

    stats = corpus_gender_stats(_lexicon(opts), load_mono(opts.require("input")),
                                int(opts.get("workers"))).to_dict()
    if opts.get("out"):
        Path(opts.get("out")).write_text(_dump(stats) + "\n", encoding="utf-8")
    return stats


def cmd_align_train(opts: Options) -> dict:
    from genderflow.align import train_model1

    pairs = load_parallel(opts.require("src"), opts.require("trg"))
    tt = train_model1(pairs, int(opts.get("iterations")))
    tt.save(opts.require("out"))
    return {"pairs": len(pairs), "iterations": int(opts.get("iterations")), "entries": len(tt),
            "log_likelihoods": tt.log_likelihoods}


def cmd_align_project(opts: Options) -> dict:
    from genderflow.align import TranslationTable, format_pharaoh, viterbi_align

    tt = TranslationTable.load(opts.require("table"))
    pairs = load_parallel(opts.require("src"), opts.require("trg"))
    lines = [format_pharaoh(viterbi_align(tt, p)) for p in pairs]
    write_mono(opts.require("out"), lines)
    return {"pairs": len(pairs), "aligned_links": sum(len(x.split()) for x in lines)}


def cmd_eval_winomt(opts: Options) -> dict:
    from genderflow.align import TranslationTable, train_model1
    from genderflow.corpus import Sentence
    from genderflow.morph import load_spec
    from genderflow.wino_eval import evaluate, load_winomt

    instances = load_winomt(opts.require("data"))
    with open(opts.require("hyp"), encoding="utf-8", newline="") as fh:
        hyp_lines = [line.rstrip("\r\n") for line in fh]
    if len(hyp_lines) != len(instances):
        raise ValueError(f"{len(instances)} instances but {len(hyp_lines)} hypothesis lines")
    hyps = [Sentence.from_text(h, n) for n, h in enumerate(hyp_lines, start=1)]
    spec = load_spec(opts.require("spec"))
    if opts.get("table"):
        tt = TranslationTable.load(opts.get("table"))
    else:
        # train on the evaluation set itself plus any supplied bitext
        train = [(i.src_sentence, h) for i, h in zip(instances, hyps)]
        if opts.get("bitext_src") and opts.get("bitext_trg"):
            train += list(load_parallel(opts.get("bitext_src"), opts.get("bitext_trg")))
        tt = train_model1(train, int(opts.get("iterations")))
    report, preds = evaluate(tt, spec, instances, hyps, include_neutral=not opts.get("exclude_neutral"))
    out = report.to_dict()
    if opts.get("predictions"):
        write_mono(opts.get("predictions"), [p.value for p in preds])
    if opts.get("out"):
        Path(opts.get("out")).write_text(_dump(out) + "\n", encoding="utf-8")
    return out


def cmd_eval_mustshe(opts: Options) -> dict:
    from genderflow.corpus import Sentence
    from genderflow.mustshe_eval import load_mustshe, score_mustshe

    instances = load_mustshe(opts.require("data"))
    with open(opts.require("hyp"), encoding="utf-8", newline="") as fh:
        hyps = [Sentence.from_text(line.rstrip("\r\n"), n) for n, line in enumerate(fh, start=1)]
    out = score_mustshe(instances, hyps, sentence_level=bool(opts.get("sentence_level")))
    if opts.get("out"):
        Path(opts.get("out")).write_text(_dump(out) + "\n", encoding="utf-8")
    return out


def _read_annotations(path: str) -> dict:
    truth = {"1": True, "yes": True, "true": True, "y": True,
             "0": False, "no": False, "false": False, "n": False}
    out = {}
    with open(path, encoding="utf-8") as fh:
        for row, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2 or cols[1].strip().lower() not in truth:
                raise ValueError(f"{path}:{row}: expected line_no<TAB>preserved(1/0)")
            out[int(cols[0])] = truth[cols[1].strip().lower()]
    return out


def cmd_report(opts: Options) -> dict:
    modes = [m for m in ("manifest", "human_labels", "filter_report") if opts.get(m)]
    if len(modes) != 1:
        raise UsageError("report needs exactly one of --manifest, --human-labels, --filter-report")
    if opts.get("manifest"):
        with open(opts.get("manifest"), encoding="utf-8") as fh:
            manifest = json.load(fh)
        sizes = manifest.get("corpus_sizes", {})
        for k, v in sizes.items():
            print(f"{k:>12}  {v}", file=sys.stderr)
        stages = manifest.get("stages", {})
        retention = {g: stages[g].get("filter_trg", stages[g]).get("retention")
                     for g in ("fem", "msc") if g in stages}
        return {"sizes": sizes, "retention": retention, "assembled": manifest.get("assembled")}
    if opts.get("human_labels"):
        from genderflow.wino_eval import ingest_human_labels, load_human_labels, load_winomt
        report = ingest_human_labels(load_human_labels(opts.get("human_labels")),
                                     load_winomt(opts.require("data")))
    else:
        from genderflow.target_filter import filter_confusion
        with open(opts.get("filter_report"), encoding="utf-8") as fh:
            freport = json.load(fh)
        removed = set(freport["removed_line_nos"])
        ann = _read_annotations(opts.require("annotations"))
        lines = sorted(ann)
        report = filter_confusion([n not in removed for n in lines], [ann[n] for n in lines])
    if opts.get("out"):
        Path(opts.get("out")).write_text(_dump(report) + "\n", encoding="utf-8")
    return report


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="genderflow",
                     description="Gender-filtered self-training corpora and gender accuracy evaluation.")
    parser.add_argument("--config", help="JSON file with option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func, cmd_name=name)
        return p

    def workers(p):
        p.add_argument("--workers", type=int, help="worker threads for per-sentence stages")

    p = add("filter-src", cmd_filter_src, "keep source sentences of one gender")
    p.add_argument("--lexicon", help="directory with pronouns.txt and pairs.tsv")
    p.add_argument("--gender", choices=["fem", "msc"])
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--stats", help="write the input's gender distribution here")
    workers(p)

    p = add("filter-trg", cmd_filter_trg, "drop pairs whose target shows the opposite gender")
    p.add_argument("--spec")
    p.add_argument("--gender", choices=["fem", "msc"])
    p.add_argument("--src")
    p.add_argument("--trg")
    p.add_argument("--kept-prefix")
    p.add_argument("--removed-prefix")
    p.add_argument("--report")
    workers(p)

    p = add("translate", cmd_translate, "translate a corpus with a configured translator")
    p.add_argument("--handle", help="translator handle JSON")
    p.add_argument("--kind", choices=["http", "subprocess", "dict_mock"])
    p.add_argument("--endpoint")
    p.add_argument("--command")
    p.add_argument("--table")
    p.add_argument("--flip-table")
    p.add_argument("--error-rate", type=float)
    p.add_argument("--src-lang")
    p.add_argument("--tgt-lang")
    p.add_argument("--batch-size", type=int)
    p.add_argument("--max-inflight", type=int)
    p.add_argument("--timeout", type=float)
    p.add_argument("--retries", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    p.add_argument("--manifest")
    workers(p)

    p = add("augment", None, "self-training pipeline")
    asub = p.add_subparsers(dest="augment_command", parser_class=_Parser)
    run = asub.add_parser("run", help="run a plan end to end")
    run.set_defaults(func=cmd_augment_run, cmd_name="augment")
    run.add_argument("--plan")
    run.add_argument("--seed", type=int)
    run.add_argument("--out-dir")
    run.add_argument("--no-resume", action="store_true", default=None)
    workers(run)

    p = add("stats", cmd_stats, "Fem/Msc/Mix distribution of a source corpus")
    p.add_argument("--lexicon")
    p.add_argument("--in", dest="input")
    p.add_argument("--out")
    workers(p)

    p = add("align", None, "IBM Model 1 alignment")
    alsub = p.add_subparsers(dest="align_command", parser_class=_Parser)
    tr = alsub.add_parser("train", help="train a translation table")
    tr.set_defaults(func=cmd_align_train, cmd_name="align")
    tr.add_argument("--src")
    tr.add_argument("--trg")
    tr.add_argument("--iterations", type=int)
    tr.add_argument("--out")
    pr = alsub.add_parser("project", help="write Pharaoh alignments")
    pr.set_defaults(func=cmd_align_project, cmd_name="align")
    pr.add_argument("--table")
    pr.add_argument("--src")
    pr.add_argument("--trg")
    pr.add_argument("--out")

    p = add("eval", None, "gender accuracy evaluation")
    esub = p.add_subparsers(dest="eval_command", parser_class=_Parser)
    w = esub.add_parser("winomt", help="WinoMT Acc/ΔG/ΔS/ΔR")
    w.set_defaults(func=cmd_eval_winomt, cmd_name="eval")
    w.add_argument("--data")
    w.add_argument("--hyp")
    w.add_argument("--spec")
    w.add_argument("--table")
    w.add_argument("--bitext-src")
    w.add_argument("--bitext-trg")
    w.add_argument("--iterations", type=int)
    w.add_argument("--exclude-neutral", action="store_true", default=None)
    w.add_argument("--predictions")
    w.add_argument("--out")
    m = esub.add_parser("mustshe", help="MuST-SHE Acc/ΔAcc")
    m.set_defaults(func=cmd_eval_mustshe, cmd_name="eval")
    m.add_argument("--data")
    m.add_argument("--hyp")
    m.add_argument("--sentence-level", action="store_true", default=None)
    m.add_argument("--out")

    p = add("report", cmd_report, "summaries: pipeline sizes, human labels, filter confusion")
    p.add_argument("--manifest")
    p.add_argument("--human-labels")
    p.add_argument("--data", help="WinoMT TSV matching --human-labels")
    p.add_argument("--filter-report", help="filter-trg report JSON")
    p.add_argument("--annotations", help="TSV line_no<TAB>preserved(1/0)")
    p.add_argument("--out")
    return parser


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError(parser.format_help())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        opts = Options(args, _load_config(args.config), args.cmd_name)
        result = args.func(opts)
    except UsageError as exc:
        print(str(exc).rstrip(), file=sys.stderr)
        return EXIT_USAGE
    except TranslationServiceError as exc:
        print(f"genderflow: translation service error: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except (ValueError, OSError, KeyError) as exc:
        print(f"genderflow: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    _emit(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
