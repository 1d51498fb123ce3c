import json
import sqlite3
from dataclasses import replace

import pytest

from oodcurator.errors import InvalidSpecError, MalformedSchemaError, MissingFileError
from oodcurator.ingest import (
    RELATIONS,
    IngestReport,
    RowDecodeError,
    SourceKind,
    SyntheticSpec,
    Task,
    decode_record,
    generate_synthetic_source,
    open_source,
    read_activity_records,
    write_flat_dump,
    write_relational_export,
)

ROW = {
    "activity_id": 1, "assay_id": "A1", "smiles": "CCO", "standard_type": "IC50",
    "standard_value": 100.0, "standard_units": "nM", "standard_relation": "=",
    "confidence_score": 9, "target_type": "SINGLE PROTEIN", "target_id": "T1",
    "protein_sequence": "MKV", "protein_class_path": ["Enzyme", "Kinase"],
}


def rows_with(**changes):
    return [dict(ROW, activity_id=i + 1, **changes) for i in range(3)]


def test_open_flat_dump(tmp_path):
    path = tmp_path / "a.jsonl"
    write_flat_dump([ROW], path)
    handle = open_source(path, "flat_dump")
    assert handle.kind is SourceKind.FLAT_DUMP and handle.location == str(path)


def test_missing_file(tmp_path):
    with pytest.raises(MissingFileError):
        open_source(tmp_path / "nope.jsonl", "flat_dump")


def test_flat_dump_without_column_names_it(tmp_path):
    path = tmp_path / "a.jsonl"
    row = dict(ROW)
    del row["standard_type"]
    write_flat_dump([row], path)
    with pytest.raises(MalformedSchemaError) as info:
        open_source(path, "flat_dump")
    assert info.value.missing == "standard_type"


def test_relational_export_without_table_names_it(tmp_path):
    path = tmp_path / "x.db"
    write_relational_export([ROW], path)
    conn = sqlite3.connect(path)
    conn.execute("DROP TABLE target_dictionary")
    conn.commit()
    conn.close()
    with pytest.raises(MalformedSchemaError) as info:
        open_source(path, "relational_export")
    assert info.value.missing == "target_dictionary"


def test_synthetic_row_count_matches_manifest(tmp_path):
    spec = SyntheticSpec(n_assays=2, molecules_per_assay=(50, 50), n_molecules=80)
    manifest = generate_synthetic_source(spec, 7, tmp_path / "s.jsonl")
    assert manifest.rows == 100
    records = list(read_activity_records(open_source(manifest.path, "flat_dump"), "sbap"))
    assert len(records) == 100


def test_empty_smiles_passes_through(tmp_path):
    path = tmp_path / "a.jsonl"
    write_flat_dump([dict(ROW, smiles="")], path)
    (rec,) = read_activity_records(open_source(path, "flat_dump"), "lbap")
    assert rec.smiles is None


def test_unparseable_value_is_skipped_and_counted(tmp_path):
    path = tmp_path / "a.jsonl"
    rows = rows_with()
    rows[1]["standard_value"] = "n/a"
    write_flat_dump(rows, path)
    report = IngestReport()
    records = list(read_activity_records(open_source(path, "flat_dump"), "lbap", report))
    assert [r.activity_id for r in records] == [1, 3]
    assert report.rows_read == 3 and report.rows_skipped == 1
    assert report.to_dict()["skip_reasons"] == {"bad_standard_value": 1}


def test_records_come_in_activity_id_order_without_duplicates(tmp_path):
    path = tmp_path / "a.jsonl"
    rows = [dict(ROW, activity_id=i) for i in (5, 2, 9, 2, 1)]
    write_flat_dump(rows, path)
    report = IngestReport()
    ids = [r.activity_id for r in read_activity_records(open_source(path, "flat_dump"), "lbap", report)]
    assert ids == [1, 2, 5, 9]
    assert report.skip_reasons["duplicate_activity_id"] == 1


def test_lbap_drops_protein_fields():
    rec = decode_record(ROW, Task.LBAP)
    assert rec.protein_sequence is None and rec.protein_class_path is None
    rec = decode_record(ROW, Task.SBAP)
    assert rec.protein_class_path == ("Enzyme", "Kinase")


@pytest.mark.parametrize("change,reason", [
    ({"extra": 1}, "unknown_field"),
    ({"activity_id": "7"}, "bad_activity_id"),
    ({"confidence_score": 12}, "bad_confidence_score"),
    ({"protein_class_path": ["Enzyme", ""]}, "bad_protein_class_path"),
    ({"assay_id": None}, "missing_assay_id"),
])
def test_decode_rejects_bad_rows(change, reason):
    with pytest.raises(RowDecodeError) as info:
        decode_record(dict(ROW, **change))
    assert info.value.reason == reason


def test_synthetic_generation_is_deterministic(tmp_path):
    spec = SyntheticSpec(n_assays=6)
    a, b, c = (tmp_path / n for n in ("a.jsonl", "b.jsonl", "c.jsonl"))
    generate_synthetic_source(spec, 7, a)
    generate_synthetic_source(spec, 7, b)
    generate_synthetic_source(spec, 8, c)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


@pytest.mark.parametrize("change", [{"n_assays": 0}, {"n_molecules": -1}, {"molecules_per_assay": (5, 2)},
                                    {"censored_rate": 1.5}, {"measurement_types": ()}])
def test_invalid_synthetic_spec(tmp_path, change):
    with pytest.raises(InvalidSpecError):
        generate_synthetic_source(replace(SyntheticSpec(), **change), 0, tmp_path / "x.jsonl")


def test_synthetic_source_covers_every_filter_branch(small_source):
    rows = [json.loads(line) for line in small_source.read_text().splitlines()]
    assert {r["standard_relation"] for r in rows} == set(RELATIONS)
    assert {"nM", "uM"} <= {r["standard_units"] for r in rows}
    assert {r["confidence_score"] for r in rows} - {None} == set(range(10))
    assert None in {r["confidence_score"] for r in rows}
    assert len({r["target_type"] for r in rows}) >= 3
    assert any(r["protein_class_path"] for r in rows)
    assert any(r["standard_value"] is None for r in rows)
    assert any(r["smiles"] is None for r in rows)


def test_relational_export_reads_like_flat_dump(tmp_path, small_source):
    rows = [json.loads(line) for line in small_source.read_text().splitlines()]
    db = tmp_path / "x.db"
    write_relational_export(rows, db)
    flat = list(read_activity_records(open_source(small_source, "flat_dump"), "sbap"))
    rel = list(read_activity_records(open_source(db, "relational_export"), "sbap"))
    assert flat == rel


def test_reading_does_not_modify_source(small_source):
    before = small_source.read_bytes()
    list(read_activity_records(open_source(small_source, "flat_dump"), "sbap"))
    assert small_source.read_bytes() == before
