"""Independent straight-line replay of the lbap-core-ic50-assay recipe.

Run once to (re)create the golden fixture::

    python3 tests/reference/make_golden.py

Only molecule keys and legality come from ``oodcurator.chem``; filtering,
merging, thresholding and splitting are re-implemented here from the rules
without touching the pipeline modules.
"""

import json
import math
import random
import sys
from collections import defaultdict
from pathlib import Path

from oodcurator.chem import analyze_smiles
from oodcurator.ingest import SyntheticSpec, generate_synthetic_source

HERE = Path(__file__).resolve().parent
GOLDEN = HERE.parent / "fixtures" / "golden"
SOURCE = GOLDEN / "source.jsonl"
OUT = GOLDEN / "lbap-core-ic50-assay"
NAME = "lbap-core-ic50-assay"
SEED = 7
SPEC = SyntheticSpec(
    n_assays=40, molecules_per_assay=(30, 150), n_targets=4, n_molecules=300,
    measurement_types=("IC50", "Ki"),
)
SPLITS = ("train", "iid_val", "iid_test", "ood_val", "ood_test")


def load_rows(path):
    rows = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            row = json.loads(line)
            rows.setdefault(row["activity_id"], row)
    return [rows[k] for k in sorted(rows)]


def replay(rows):
    # sample screening
    screened = []
    for r in rows:
        if r["standard_type"] != "IC50":
            continue
        v, u, rel, smi = r["standard_value"], r["standard_units"], r["standard_relation"], r["smiles"]
        if v is None or u is None or rel is None or smi is None:
            continue
        if u not in ("nM", "uM"):
            continue
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            continue
        if rel not in ("=", "~"):
            continue
        info = analyze_smiles(smi)
        if not info.legal:
            continue
        screened.append((r, info.key))

    # assay screening on distinct surviving molecules
    per_assay = defaultdict(set)
    for r, key in screened:
        per_assay[r["assay_id"]].add(key)
    kept = []
    for r, key in screened:
        n = len(per_assay[r["assay_id"]])
        conf = r["confidence_score"]
        if not 50 <= n <= 3000:
            continue
        if conf is None or conf < 9:
            continue
        if r["target_type"] != "SINGLE PROTEIN":
            continue
        kept.append((r, key))

    # pValues and merging
    groups = defaultdict(list)
    for r, key in kept:
        nm = r["standard_value"] * (1000.0 if r["standard_units"] == "uM" else 1.0)
        groups[key].append((r["activity_id"], 9.0 - math.log10(nm), r))
    samples = []
    for key, members in groups.items():
        members.sort(key=lambda m: m[0])
        samples.append({
            "key": key,
            "smiles": members[0][2]["smiles"],
            "pvalue": math.fsum(m[1] for m in members) / len(members),
            "n": len(members),
            "domain": min(m[2]["assay_id"] for m in members),
        })

    # threshold over every sample
    pv = sorted(s["pvalue"] for s in samples)
    mid = len(pv) // 2
    med = pv[mid] if len(pv) % 2 else (pv[mid - 1] + pv[mid]) / 2
    threshold = med if 4 <= med <= 6 else 5.0
    for s in samples:
        s["label"] = 1 if s["pvalue"] >= threshold else 0

    # domains: capacity descending, key ascending
    by_domain = defaultdict(list)
    for s in samples:
        by_domain[s["domain"]].append(s)
    order = sorted(by_domain, key=lambda k: (-len(by_domain[k]), k))
    for i, k in enumerate(order):
        for s in by_domain[k]:
            s["domain_id"] = i

    # greedy OOD split, 6:2:2 in integer arithmetic
    total = len(samples)
    parts = {name: [] for name in SPLITS}
    side = []
    running = 0
    for k in order:
        if running * 10 < 6 * total:
            side.append(k)
        elif running * 10 < 8 * total:
            parts["ood_val"].extend(by_domain[k])
        else:
            parts["ood_test"].extend(by_domain[k])
        running += len(by_domain[k])

    # ID split per train-side domain
    for k in side:
        members = sorted(by_domain[k], key=lambda s: s["key"])
        n = len(members)
        if n < 3:
            parts["train"].extend(members)
            continue
        n_val = (2 * n) // 10
        n_test = (2 * n) // 10
        random.Random(f"0:{k}").shuffle(members)
        parts["iid_val"].extend(members[:n_val])
        parts["iid_test"].extend(members[n_val:n_val + n_test])
        parts["train"].extend(members[n_val + n_test:])
    return parts, threshold


def write(parts, threshold, out):
    out.mkdir(parents=True, exist_ok=True)
    stats = {"name": NAME, "splits": {}}
    keys = set()
    for name in SPLITS:
        rows = sorted(parts[name], key=lambda s: (s["domain_id"], s["key"]))
        with open(out / f"{name}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for s in rows:
                fh.write(json.dumps({
                    "smiles": s["smiles"], "pvalue": s["pvalue"], "label": s["label"],
                    "domain_key": s["domain"], "domain_id": s["domain_id"],
                    "n_measurements": s["n"], "input_key": [s["key"]],
                }) + "\n")
        pos = sum(s["label"] for s in rows)
        stats["splits"][name] = {
            "domain_count": len({s["domain"] for s in rows}),
            "sample_count": len(rows),
            "positive_count": pos,
            "negative_count": len(rows) - pos,
            "positive_ratio": pos / len(rows) if rows else 0.0,
        }
        keys |= {s["domain"] for s in rows}
    stats["threshold"] = threshold
    stats["total_domains"] = len(keys)
    stats["total_samples"] = sum(v["sample_count"] for v in stats["splits"].values())
    (out / "stats.json").write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
    return stats


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    generate_synthetic_source(SPEC, SEED, SOURCE)
    parts, threshold = replay(load_rows(SOURCE))
    stats = write(parts, threshold, OUT)
    json.dump({k: v["sample_count"] for k, v in stats["splits"].items()}, sys.stdout)
    print()


if __name__ == "__main__":
    main()
