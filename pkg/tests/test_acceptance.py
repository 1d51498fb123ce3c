"""Gating acceptance criteria, one test each, run at their stated tolerances and time limits.

A summary line per criterion is printed at the end of the pytest run.
"""

import math
import random
import statistics
import time
from collections import Counter

import pytest

from conftest import GOLDEN_DATASET, GOLDEN_SOURCE, VALID_SMILES
from oodcurator.chem import analyze_smiles, murcko_scaffold, parse_smiles, prune_terminal_atoms, random_smiles
from oodcurator.cli import main
from oodcurator.config import resolve_preset
from oodcurator.curation import DEFAULT_DELTA, apply_filters, compute_threshold, noise_preset, offset_uncertain, sample_passes
from oodcurator.errors import EmptyDatasetError
from oodcurator.ingest import (
    MEASUREMENT_TYPES,
    SyntheticSpec,
    generate_synthetic_source,
    open_source,
    read_activity_records,
)
from oodcurator.pipeline import curate
from oodcurator.report import write_dataset
from oodcurator.split import SPLIT_NAMES
from oracles import connected_induced_subsets, naive_prune, on_ring_path

LEVELS = ("core", "refined", "general")


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def large_records(tmp_path_factory):
    path = tmp_path_factory.mktemp("large") / "large.jsonl"
    spec = SyntheticSpec(n_assays=150, molecules_per_assay=(20, 150), n_molecules=900)
    generate_synthetic_source(spec, 11, path)
    return list(read_activity_records(open_source(path, "flat_dump"), "lbap"))


def test_criterion_1_noise_monotonicity(large_records, record_property):
    record_property("criterion", "1 noise monotonicity")
    assert len(large_records) >= 10_000
    start = time.perf_counter()
    cfgs = [noise_preset(level, MEASUREMENT_TYPES) for level in LEVELS]
    violations = 0
    for rec in large_records:
        info = analyze_smiles(rec.smiles)
        legality = info.legal if info.parsable else None
        core, refined, general = (sample_passes(rec, c, legality) for c in cfgs)
        violations += (core and not refined) + (refined and not general)
    survivors = [{r.activity_id for r in apply_filters(large_records, c)[0]} for c in cfgs]
    elapsed = time.perf_counter() - start
    assert violations == 0
    assert survivors[0] <= survivors[1] <= survivors[2]
    assert survivors[0] and len(survivors[0]) < len(survivors[2])
    assert elapsed < 10, f"{elapsed:.1f}s"


def expected_sample_count(cfg, source):
    kept, _ = apply_filters(read_activity_records(source, cfg.task), cfg.noise)
    if cfg.task.value == "lbap":
        return len({analyze_smiles(r.smiles).key for r in kept})
    return len({(analyze_smiles(r.smiles).key, r.target_id) for r in kept})


def test_criterion_2_split_soundness(tmp_path, record_property):
    record_property("criterion", "2 split soundness")
    rng = random.Random(2024)
    start = time.perf_counter()
    done = attempts = 0
    while done < 50:
        attempts += 1
        assert attempts <= 150, f"only {done} curations produced data"
        path = tmp_path / f"src{attempts}.jsonl"
        spec = SyntheticSpec(
            n_assays=rng.randint(8, 24), molecules_per_assay=(10, rng.randint(40, 90)),
            n_targets=rng.randint(2, 8), n_molecules=rng.randint(80, 250), measurement_types=("IC50",),
        )
        generate_synthetic_source(spec, rng.randrange(10**6), path)
        task = rng.choice(["lbap", "sbap"])
        kinds = ["assay", "scaffold", "size"] + (["protein", "protein_family"] if task == "sbap" else [])
        cfg = resolve_preset(task, rng.choice(LEVELS), "IC50", rng.choice(kinds), seed=rng.randrange(1000))
        source = open_source(path, "flat_dump")
        try:
            ds = curate(cfg, source)
        except EmptyDatasetError:
            continue
        done += 1

        keys = {name: {s.domain_key for s in ds.splits[name]} for name in SPLIT_NAMES}
        side = keys["train"] | keys["iid_val"] | keys["iid_test"]
        assert not side & keys["ood_val"]
        assert not side & keys["ood_test"]
        assert not keys["ood_val"] & keys["ood_test"]

        ids = Counter(s.input_key for s in ds.all_samples())
        assert all(c == 1 for c in ids.values())
        n = len(ids)
        assert n == expected_sample_count(cfg, source)

        sizes = Counter((s.domain_id, s.domain_key) for s in ds.all_samples())
        side_ids = sorted(i for i, k in sizes if k in side)
        ood_ids = sorted(i for i, k in sizes if k not in side)
        size_of = {i: c for (i, _), c in sizes.items()}
        boundary = max(size_of[side_ids[-1]], size_of[ood_ids[0]] if ood_ids else 0)
        side_count = sum(len(ds.splits[s]) for s in ("train", "iid_val", "iid_test"))
        assert abs(side_count / n - 0.6) <= boundary / n

        assert keys["iid_val"] | keys["iid_test"] <= keys["train"]
    elapsed = time.perf_counter() - start
    assert elapsed < 30, f"{elapsed:.1f}s"


def test_criterion_3_scaffold_oracle(record_property):
    record_property("criterion", "3 scaffold oracle")
    start = time.perf_counter()
    graphs = 0
    for smiles in VALID_SMILES:
        mol = parse_smiles(smiles)
        for subset in connected_induced_subsets(mol, 12):
            sub = mol.subgraph(subset)
            got = prune_terminal_atoms(sub)
            assert got == naive_prune(sub) == on_ring_path(sub), (smiles, sorted(subset))
            graphs += 1
    assert graphs > 10_000
    rng = random.Random(5)
    for smiles in VALID_SMILES:
        mol = parse_smiles(smiles)
        expected = murcko_scaffold(mol).key
        for _ in range(100):
            assert murcko_scaffold(parse_smiles(random_smiles(mol, rng))).key == expected, smiles
    elapsed = time.perf_counter() - start
    assert elapsed < 60, f"{elapsed:.1f}s"


def test_criterion_4_threshold_and_labels(record_property):
    record_property("criterion", "4 threshold and labels")
    rng = random.Random(4)
    balanced_checks = 0
    for _ in range(1000):
        size = rng.randint(1, 60)
        center = rng.uniform(2.5, 7.5)
        values = [round(rng.gauss(center, 1.0), rng.choice([1, 2, 6])) for _ in range(size)]
        med = statistics.median(values)
        expected = med if 4 <= med <= 6 else 5.0
        t = compute_threshold(values)
        assert t == expected
        if 4 <= med <= 6 and values.count(med) <= 1:
            actives = sum(v >= t for v in values)
            assert abs(actives - (size - actives)) <= 1
            balanced_checks += 1
    assert balanced_checks > 100


def test_criterion_5_uncertainty_offsets(record_property):
    record_property("criterion", "5 uncertainty offsets")
    rng = random.Random(5)
    values = [10 ** rng.uniform(-4, 7) for _ in range(10_000)]
    deltas = dict(DEFAULT_DELTA, **{"=": 0, "~": 0})
    for relation, delta in deltas.items():
        worst = max(abs(math.log10(offset_uncertain(v, relation) / v) - delta) for v in values)
        assert worst < 1e-12, (relation, worst)


def test_criterion_6_determinism(tmp_path, capsys, record_property):
    record_property("criterion", "6 determinism")
    base = ["curate", "--preset", "lbap,core,IC50,assay", "--source", str(GOLDEN_SOURCE), "--seed", "3"]
    runs = [("run1", 1), ("run2", 1), ("run3", 1), ("jobs4", 4), ("jobs8", 8)]
    trees, outputs = [], []
    for label, jobs in runs:
        assert main(base + ["--out", str(tmp_path / label), "--jobs", str(jobs)]) == 0
        outputs.append(capsys.readouterr().out)
        trees.append(tree_bytes(tmp_path / label))
    assert len(trees[0]) == 8
    assert all(t == trees[0] for t in trees)
    assert all(o == outputs[0] for o in outputs)


TABLE_1 = {
    "core": dict(molecules_per_assay=(50, 3000), min_confidence=9,
                 allowed_target_types={"SINGLE PROTEIN"}, allowed_relations={"=", "~"},
                 allowed_units={"nM", "uM"}),
    "refined": dict(molecules_per_assay=(32, 5000), min_confidence=3,
                    allowed_target_types={"SINGLE PROTEIN", "PROTEIN COMPLEX", "PROTEIN FAMILY"},
                    allowed_relations={"=", "~", ">=", "<="}, allowed_units={"nM", "uM"}),
    "general": dict(molecules_per_assay=(10, 5000), min_confidence=None, allowed_target_types=None,
                    allowed_relations={"=", "~", ">", "<", ">=", "<="}, allowed_units={"nM", "uM"}),
}


def test_criterion_7_preset_fidelity(capsys, record_property):
    record_property("criterion", "7 preset fidelity")
    for task, domain in (("lbap", "assay"), ("sbap", "protein")):
        for level, row in TABLE_1.items():
            for mtype in MEASUREMENT_TYPES:
                noise = resolve_preset(task, level, mtype, domain).noise
                got = {field: getattr(noise, field) for field in row}
                got = {k: set(v) if isinstance(v, frozenset) else v for k, v in got.items()}
                assert got == row, (task, level)
                assert noise.measurement_types == {mtype}
    assert main(["presets"]) == 0
    ids = capsys.readouterr().out.splitlines()
    assert len(ids) == 96 == len(set(ids))


def test_criterion_8_golden_pipeline(tmp_path, record_property):
    record_property("criterion", "8 golden pipeline")
    ds = curate(resolve_preset("lbap", "core", "IC50", "assay"), open_source(GOLDEN_SOURCE, "flat_dump"))
    counts = {name: len(ds.splits[name]) for name in SPLIT_NAMES}
    assert counts == {"train": 126, "iid_val": 40, "iid_test": 40, "ood_val": 26, "ood_test": 35}
    for name in SPLIT_NAMES:
        assert counts[name] == len((GOLDEN_DATASET / f"{name}.jsonl").read_text().splitlines())
    write_dataset(ds, tmp_path / "ds")
    assert (tmp_path / "ds" / "stats.json").read_bytes() == (GOLDEN_DATASET / "stats.json").read_bytes()
