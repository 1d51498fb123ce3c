import json
import random

import pytest

from conftest import GOLDEN_DATASET, GOLDEN_SOURCE
from oodcurator.config import resolve_preset
from oodcurator.errors import EmptyDatasetError
from oodcurator.ingest import open_source, write_flat_dump
from oodcurator.pipeline import curate, precompute_molecules
from oodcurator.report import dataset_problems, read_dataset, write_dataset
from oodcurator.split import SPLIT_NAMES


def check_invariants(ds):
    keys = {name: {s.domain_key for s in ds.splits[name]} for name in SPLIT_NAMES}
    side = keys["train"] | keys["iid_val"] | keys["iid_test"]
    assert not side & keys["ood_val"] and not side & keys["ood_test"] and not keys["ood_val"] & keys["ood_test"]
    ids = [s.input_key for s in ds.all_samples()]
    assert len(ids) == len(set(ids))
    assert all(s.label == int(s.pvalue >= ds.threshold) for s in ds.all_samples())
    id_of = {}
    for s in ds.all_samples():
        assert id_of.setdefault(s.domain_key, s.domain_id) == s.domain_id


def test_golden_split_counts(golden_dataset):
    for name in SPLIT_NAMES:
        expected = len((GOLDEN_DATASET / f"{name}.jsonl").read_text().splitlines())
        assert len(golden_dataset.splits[name]) == expected
    check_invariants(golden_dataset)


def test_golden_files_byte_identical(golden_dataset, tmp_path):
    write_dataset(golden_dataset, tmp_path / "ds")
    for name in [f"{s}.jsonl" for s in SPLIT_NAMES] + ["stats.json"]:
        assert (tmp_path / "ds" / name).read_bytes() == (GOLDEN_DATASET / name).read_bytes(), name


@pytest.mark.parametrize("preset", [
    ("lbap", "general", "IC50", "scaffold"),
    ("lbap", "refined", "EC50", "size"),
    ("sbap", "general", "Ki", "protein"),
    ("sbap", "refined", "IC50", "protein_family"),
    ("sbap", "general", "Potency", "assay"),
])
def test_presets_satisfy_dataset_invariants(small_source, preset, tmp_path):
    ds = curate(resolve_preset(*preset), open_source(small_source, "flat_dump"))
    check_invariants(ds)
    write_dataset(ds, tmp_path / "ds")
    assert dataset_problems(read_dataset(tmp_path / "ds")) == []


def test_noisier_levels_hold_more_samples(small_source):
    counts = []
    for level in ("core", "refined", "general"):
        try:
            ds = curate(resolve_preset("lbap", level, "IC50", "assay"), open_source(small_source, "flat_dump"))
            counts.append(sum(len(v) for v in ds.splits.values()))
        except EmptyDatasetError:
            counts.append(0)
    assert counts == sorted(counts) and counts[-1] > counts[0]


def test_no_survivors_is_an_error(tmp_path):
    path = tmp_path / "ki.jsonl"
    row = {"activity_id": 1, "assay_id": "A", "smiles": "CCO", "standard_type": "Ki", "standard_value": 5.0,
           "standard_units": "nM", "standard_relation": "=", "confidence_score": 9,
           "target_type": "SINGLE PROTEIN", "target_id": "T", "protein_sequence": "M", "protein_class_path": ["E"]}
    write_flat_dump([row], path)
    with pytest.raises(EmptyDatasetError):
        curate(resolve_preset("lbap", "core", "IC50", "assay"), open_source(path, "flat_dump"))


def test_row_order_in_source_does_not_matter(tmp_path):
    rows = GOLDEN_SOURCE.read_text().splitlines()
    random.Random(2).shuffle(rows)
    shuffled = tmp_path / "shuffled.jsonl"
    shuffled.write_text("\n".join(rows) + "\n")
    cfg = resolve_preset("lbap", "core", "IC50", "assay")
    a = curate(cfg, open_source(GOLDEN_SOURCE, "flat_dump"))
    b = curate(cfg, open_source(shuffled, "flat_dump"))
    assert a.splits == b.splits and a.threshold == b.threshold


def test_config_source_is_used(tmp_path):
    from oodcurator.config import SourceSpec
    cfg = resolve_preset("lbap", "core", "IC50", "assay", source=SourceSpec(str(GOLDEN_SOURCE)))
    assert sum(len(v) for v in curate(cfg).splits.values()) > 0
    with pytest.raises(ValueError):
        curate(resolve_preset("lbap", "core", "IC50", "assay"))


def test_parallel_analysis_matches_serial():
    smiles = sorted({json.loads(x)["smiles"] for x in GOLDEN_SOURCE.read_text().splitlines()} - {None})[:300]
    assert precompute_molecules(smiles, jobs=1) == precompute_molecules(smiles, jobs=3)


def test_seed_changes_only_id_membership(golden_dataset):
    cfg = resolve_preset("lbap", "core", "IC50", "assay").with_seed(5)
    other = curate(cfg, open_source(GOLDEN_SOURCE, "flat_dump"))
    assert other.splits["ood_val"] == golden_dataset.splits["ood_val"]
    assert other.splits["ood_test"] == golden_dataset.splits["ood_test"]
    assert other.splits["iid_val"] != golden_dataset.splits["iid_val"]
    assert other.config_digest != golden_dataset.config_digest
