"""Standalone recomputation of a retrain-mode pipeline run from its plan.

Deliberately imports nothing from the package under test. Usage::

    python3 oracle_pipeline.py plan.json  > expected.json
"""

import hashlib
import json
import random
import re
import sys
from pathlib import Path

PUNCT = re.escape('.,;:!?"()[]')
CHUNK = re.compile(rf"^([{PUNCT}]*)(.*?)([{PUNCT}]*)$", re.S)


def tokens(line):
    out = []
    for chunk in line.split():
        lead, core, trail = CHUNK.match(chunk).groups()
        out += list(lead) + ([core] if core else []) + list(trail)
    return out


def read(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return [line.rstrip("\r\n") for line in fh]


def rows(path):
    for line in read(path):
        if line.strip() and not line.lstrip().startswith("#"):
            yield line


def lexicon(directory):
    pron = {"fem": set(), "msc": set()}
    section = None
    for line in rows(Path(directory) / "pronouns.txt"):
        line = line.strip()
        if line.startswith("["):
            section = line[1:-1]
        else:
            pron[section].add(line.lower())
    words = {"fem": set(), "msc": set()}
    for line in rows(Path(directory) / "pairs.tsv"):
        f, m = line.split("\t")
        words["fem"].add(f.strip().lower())
        words["msc"].add(m.strip().lower())
    return pron, words


def source_label(toks, pron, words):
    low = [t.lower() for t in toks]
    has = {k: any(t in v for t in low) for k, v in pron.items()}
    word = {k: any(t in v and t not in pron["fem"] | pron["msc"] for t in low) for k, v in words.items()}
    if has["msc"] and not has["fem"] and not word["fem"]:
        return "msc"
    if has["fem"] and not has["msc"] and not word["msc"]:
        return "fem"
    return "mixed"


def analyzer(path):
    entries, rules, section = {}, [], None
    codes = {"f": "fem", "m": "msc", "n": "neut", "-": None}
    for line in rows(path):
        s = line.strip()
        if s.startswith("["):
            section = s[1:-1]
            continue
        cols = line.split("\t")
        if section == "dict":
            entries[cols[0].strip().lower()] = codes[cols[1].strip()]
        elif section == "suffix":
            rules.append((cols[0].strip().lower(), codes[cols[1].strip()]))

    def tag(tok):
        t = tok.lower()
        if t in entries:
            return entries[t]
        if re.search(r"[^\W\d_]", t):
            for suf, g in rules:
                if len(t) > len(suf) and t.endswith(suf):
                    return g
        return None
    return tag


def table(path):
    out = {}
    for line in rows(path):
        a, b = line.split("\t")
        out[a.strip().lower()] = b.strip()
    return out


def mock(line, tab, flips, rate, seed):
    out = [tab.get(t.lower(), t) for t in tokens(line)]
    if flips and rate > 0:
        h = hashlib.sha256(f"{seed}\x00{line}".encode("utf-8")).digest()
        rng = random.Random(int.from_bytes(h[:8], "big"))
        for i, t in enumerate(out):
            if t.lower() in flips and rng.random() < rate:
                out[i] = flips[t.lower()]
    return " ".join(out)


def run(plan_path):
    plan_path = Path(plan_path)
    base = plan_path.parent
    plan = json.loads(plan_path.read_text(encoding="utf-8"))
    res = lambda p: base / p  # noqa: E731
    seed = plan.get("seed", 0)
    k = plan.get("upsample_factor", 1)
    tr = plan["translator"]
    tseed = tr.get("seed", seed)
    tab = table(res(tr["table"]))
    flips = {}
    if tr.get("flip_table"):
        for a, b in table(res(tr["flip_table"])).items():
            flips.setdefault(a, b.lower())
            flips.setdefault(b.lower(), a)
    rate = tr.get("error_rate", 0.0)

    # D_par preprocessing
    ps, pt = read(res(plan["par_src"])), read(res(plan["par_trg"]))
    d_par, drop = [], {"empty": 0, "length": 0, "ratio": 0}
    n_in = 0
    for s, t in zip(ps, pt):
        if not s.strip() and not t.strip():
            continue
        n_in += 1
        a, b = len(tokens(s)), len(tokens(t))
        if a == 0 or b == 0:
            drop["empty"] += 1
        elif max(a, b) > plan.get("max_len", 250):
            drop["length"] += 1
        elif max(a / b, b / a) > plan.get("max_ratio", 1.5):
            drop["ratio"] += 1
        else:
            d_par.append((s, t, "original"))

    pron, words = lexicon(res(plan["lexicon"]))
    tag = analyzer(res(plan["analyzer"]))
    mono = [line for line in read(res(plan["mono"])) if line.strip()]

    sizes, kept = {}, {}
    for g, other in (("fem", "msc"), ("msc", "fem")):
        src = [s for s in mono if source_label(tokens(s), pron, words) == g]
        trg = [mock(s, tab, flips, rate, tseed) for s in src]
        ok = [(s, t) for s, t in zip(src, trg) if not any(tag(x) == other for x in tokens(t))]
        sizes[g] = {"filter_src": len(src), "translate": len(trg), "kept": len(ok),
                    "removed": len(src) - len(ok)}
        kept[g] = ok

    rng = random.Random(seed)
    nf, nm = len(kept["fem"]), len(kept["msc"])
    if nf > nm:
        idx = sorted(rng.sample(range(nf), nm))
        kept["fem"] = [kept["fem"][i] for i in idx]
    elif nm > nf:
        idx = sorted(rng.sample(range(nm), nf))
        kept["msc"] = [kept["msc"][i] for i in idx]
    for g in ("fem", "msc"):
        sizes[g]["balance"] = len(kept[g])

    assembled = list(d_par)
    for g in ("fem", "msc"):
        assembled += [(s, t, "pseudo_" + g) for s, t in kept[g]] * k
    return {
        "d_par": {"input": n_in, "output": len(d_par), "removed_empty": drop["empty"],
                  "removed_length": drop["length"], "removed_ratio": drop["ratio"]},
        "mono": len(mono),
        "genders": sizes,
        "assembled_total": len(assembled),
        "assembled_src": [a[0] for a in assembled],
        "assembled_trg": [a[1] for a in assembled],
        "assembled_origin": [a[2] for a in assembled],
    }


if __name__ == "__main__":
    print(json.dumps(run(sys.argv[1]), indent=2, ensure_ascii=False))
