"""Reading bioactivity records from ChEMBL exports and JSON Lines dumps.

Records are always yielded in ascending ``activity_id`` order. Rows that
cannot be decoded are skipped and tallied in an :class:`IngestReport`
rather than aborting the read.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import os
import random
import sqlite3
from collections import Counter
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator, Mapping, Optional

from .chem import parse_smiles, random_smiles
from .errors import InvalidSpecError, MalformedSchemaError, MissingFileError, SourceError

log = logging.getLogger(__name__)

RELATIONS = ("=", "~", ">", "<", ">=", "<=")


class SourceKind(str, enum.Enum):
    RELATIONAL_EXPORT = "relational_export"
    FLAT_DUMP = "flat_dump"
    SYNTHETIC = "synthetic"


class Task(str, enum.Enum):
    LBAP = "lbap"
    SBAP = "sbap"


@dataclass(frozen=True, slots=True)
class RawActivityRecord:
    activity_id: int
    assay_id: str
    smiles: Optional[str]
    standard_type: Optional[str]
    standard_value: Optional[float] = None
    standard_units: Optional[str] = None
    standard_relation: Optional[str] = None
    confidence_score: Optional[int] = None
    target_type: Optional[str] = None
    target_id: Optional[str] = None
    protein_sequence: Optional[str] = None
    protein_class_path: Optional[tuple[str, ...]] = None

    def to_json(self) -> str:
        data = asdict(self)
        if self.protein_class_path is not None:
            data["protein_class_path"] = list(self.protein_class_path)
        return json.dumps(data, ensure_ascii=False)


RECORD_FIELDS = tuple(f.name for f in fields(RawActivityRecord))
# columns a flat dump must carry; the rest default to null
REQUIRED_FLAT_COLUMNS = (
    "activity_id", "assay_id", "smiles", "standard_type",
    "standard_value", "standard_units", "standard_relation",
)

REQUIRED_TABLES: dict[str, tuple[str, ...]] = {
    "activities": (
        "activity_id", "assay_id", "molregno", "standard_type",
        "standard_value", "standard_units", "standard_relation",
    ),
    "assays": ("assay_id", "chembl_id", "tid", "confidence_score"),
    "compound_structures": ("molregno", "canonical_smiles"),
    "target_dictionary": ("tid", "target_type", "chembl_id"),
    "protein_classification": ("protein_class_id", "parent_id", "pref_name", "class_level"),
}
COMPONENT_TABLES: dict[str, tuple[str, ...]] = {
    "target_components": ("tid", "component_id"),
    "component_sequences": ("component_id", "sequence"),
    "component_class": ("component_id", "protein_class_id"),
}


@dataclass(frozen=True)
class SourceHandle:
    kind: SourceKind
    location: str


@dataclass
class IngestReport:
    rows_read: int = 0
    rows_skipped: int = 0
    skip_reasons: Counter = field(default_factory=Counter)

    def skip(self, reason: str, activity_id: Any = None) -> None:
        self.rows_skipped += 1
        self.skip_reasons[reason] += 1
        log.warning("skipping row (activity_id=%s): %s", activity_id, reason)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_skipped": self.rows_skipped,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
        }


class RowDecodeError(ValueError):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


def open_source(location: str | os.PathLike, kind: SourceKind | str) -> SourceHandle:
    """Validate that ``location`` exists and has the expected schema."""
    kind = SourceKind(kind)
    path = Path(location)
    if not path.is_file():
        raise MissingFileError(f"source not found: {path}")
    if not os.access(path, os.R_OK):
        raise MissingFileError(f"source not readable: {path}")
    if kind is SourceKind.RELATIONAL_EXPORT:
        _check_relational_schema(path)
    else:
        _check_flat_schema(path)
    return SourceHandle(kind, str(path))


def _check_flat_schema(path: Path) -> None:
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            try:
                first = json.loads(line)
            except json.JSONDecodeError:
                raise MalformedSchemaError("a JSON object on its first line", str(path)) from None
            if not isinstance(first, dict):
                raise MalformedSchemaError("a JSON object on its first line", str(path))
            for column in REQUIRED_FLAT_COLUMNS:
                if column not in first:
                    raise MalformedSchemaError(column, f"flat dump {path}")
            return


def _table_columns(conn: sqlite3.Connection, table: str) -> set[str]:
    return {row[1] for row in conn.execute(f"PRAGMA table_info({table})")}


def _check_relational_schema(path: Path) -> None:
    try:
        conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
        try:
            for table, columns in REQUIRED_TABLES.items():
                present = _table_columns(conn, table)
                if not present:
                    raise MalformedSchemaError(table, f"relational export {path}")
                for column in columns:
                    if column not in present:
                        raise MalformedSchemaError(f"{table}.{column}", f"relational export {path}")
        finally:
            conn.close()
    except sqlite3.DatabaseError as exc:
        raise SourceError(f"cannot read {path} as SQLite: {exc}") from exc


# --- decoding -------------------------------------------------------------

def _opt_str(value: Any, name: str) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return str(value)
    if not isinstance(value, str):
        raise RowDecodeError(f"bad_{name}")
    return value or None


def _decode_value(value: Any) -> Optional[float]:
    if value is None or value == "":
        return None
    if isinstance(value, bool):
        raise RowDecodeError("bad_standard_value")
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise RowDecodeError("bad_standard_value") from None
    if not math.isfinite(number):
        raise RowDecodeError("bad_standard_value")
    return number


def _decode_confidence(value: Any) -> Optional[int]:
    if value is None or value == "":
        return None
    try:
        score = int(value)
    except (TypeError, ValueError):
        raise RowDecodeError("bad_confidence_score") from None
    if isinstance(value, float) and score != value or not 0 <= score <= 9:
        raise RowDecodeError("bad_confidence_score")
    return score


def decode_record(row: Mapping[str, Any], task: Task = Task.SBAP) -> RawActivityRecord:
    """Build a record from a mapping keyed by field name; raises RowDecodeError."""
    for key in row:
        if key not in RECORD_FIELDS:
            raise RowDecodeError("unknown_field")
    aid = row.get("activity_id")
    if isinstance(aid, bool) or not isinstance(aid, int):
        raise RowDecodeError("bad_activity_id")
    assay_id = _opt_str(row.get("assay_id"), "assay_id")
    if assay_id is None:
        raise RowDecodeError("missing_assay_id")
    path = row.get("protein_class_path")
    if path is not None:
        if not isinstance(path, (list, tuple)) or not all(isinstance(p, str) and p for p in path):
            raise RowDecodeError("bad_protein_class_path")
        path = tuple(path) or None
    sequence = _opt_str(row.get("protein_sequence"), "protein_sequence")
    if task is Task.LBAP:
        sequence, path = None, None
    return RawActivityRecord(
        activity_id=aid,
        assay_id=assay_id,
        smiles=_opt_str(row.get("smiles"), "smiles"),
        standard_type=_opt_str(row.get("standard_type"), "standard_type"),
        standard_value=_decode_value(row.get("standard_value")),
        standard_units=_opt_str(row.get("standard_units"), "standard_units"),
        standard_relation=_opt_str(row.get("standard_relation"), "standard_relation"),
        confidence_score=_decode_confidence(row.get("confidence_score")),
        target_type=_opt_str(row.get("target_type"), "target_type"),
        target_id=_opt_str(row.get("target_id"), "target_id"),
        protein_sequence=sequence,
        protein_class_path=path,
    )


# --- readers --------------------------------------------------------------

def read_activity_records(
    source: SourceHandle,
    task: Task | str,
    report: Optional[IngestReport] = None,
) -> Iterator[RawActivityRecord]:
    """Stream every decodable row of ``source`` in ascending activity_id order."""
    task = Task(task)
    if report is None:
        report = IngestReport()
    if source.kind is SourceKind.RELATIONAL_EXPORT:
        yield from _read_relational(Path(source.location), task, report)
    else:
        yield from _read_flat(Path(source.location), task, report)


def _read_flat(path: Path, task: Task, report: IngestReport) -> Iterator[RawActivityRecord]:
    # index pass keeps only (activity_id, offset) so rows can be served in id order
    index: list[tuple[int, int]] = []
    with path.open("rb") as fh:
        offset = 0
        for raw in fh:
            here, offset = offset, offset + len(raw)
            if not raw.strip():
                continue
            report.rows_read += 1
            try:
                obj = json.loads(raw)
            except (json.JSONDecodeError, UnicodeDecodeError):
                report.skip("json_decode")
                continue
            aid = obj.get("activity_id") if isinstance(obj, dict) else None
            if isinstance(aid, bool) or not isinstance(aid, int):
                report.skip("bad_activity_id", aid)
                continue
            index.append((aid, here))
    index.sort()
    with path.open("rb") as fh:
        last = None
        for aid, here in index:
            if aid == last:
                report.skip("duplicate_activity_id", aid)
                continue
            last = aid
            fh.seek(here)
            obj = json.loads(fh.readline())
            try:
                yield decode_record(obj, task)
            except RowDecodeError as exc:
                report.skip(exc.reason, aid)


def _class_paths(conn: sqlite3.Connection) -> dict[int, tuple[str, ...]]:
    nodes = {
        row[0]: (row[1], row[2], row[3])
        for row in conn.execute(
            "SELECT protein_class_id, parent_id, pref_name, class_level FROM protein_classification"
        )
    }
    paths: dict[int, tuple[str, ...]] = {}
    for cid in nodes:
        chain: list[str] = []
        cur, seen = cid, set()
        while cur in nodes and cur not in seen:
            seen.add(cur)
            parent, name, level = nodes[cur]
            if level is not None and int(level) > 0 and name:
                chain.append(name)
            cur = parent
        paths[cid] = tuple(reversed(chain))
    return paths


def _read_relational(path: Path, task: Task, report: IngestReport) -> Iterator[RawActivityRecord]:
    conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
    try:
        has_components = all(
            set(cols) <= _table_columns(conn, table) for table, cols in COMPONENT_TABLES.items()
        )
        class_paths = _class_paths(conn) if task is Task.SBAP else {}

        @lru_cache(maxsize=None)
        def target_info(tid) -> tuple[Optional[str], Optional[tuple[str, ...]]]:
            if tid is None or not has_components or task is Task.LBAP:
                return None, None
            seq = conn.execute(
                "SELECT cs.sequence FROM target_components tc "
                "JOIN component_sequences cs ON tc.component_id = cs.component_id "
                "WHERE tc.tid = ? AND cs.sequence IS NOT NULL "
                "ORDER BY tc.component_id LIMIT 1",
                (tid,),
            ).fetchone()
            cls = conn.execute(
                "SELECT cc.protein_class_id FROM target_components tc "
                "JOIN component_class cc ON tc.component_id = cc.component_id "
                "WHERE tc.tid = ? ORDER BY tc.component_id, cc.protein_class_id LIMIT 1",
                (tid,),
            ).fetchone()
            class_path = class_paths.get(cls[0]) if cls else None
            return (seq[0] if seq else None), (class_path or None)

        rows = conn.execute(
            "SELECT act.activity_id, a.chembl_id, act.assay_id, cs.canonical_smiles, "
            "act.standard_type, act.standard_value, act.standard_units, act.standard_relation, "
            "a.confidence_score, td.target_type, td.chembl_id, a.tid "
            "FROM activities act "
            "LEFT JOIN assays a ON act.assay_id = a.assay_id "
            "LEFT JOIN compound_structures cs ON act.molregno = cs.molregno "
            "LEFT JOIN target_dictionary td ON a.tid = td.tid "
            "ORDER BY act.activity_id"
        )
        last = None
        for (aid, assay_chembl, assay_pk, smiles, stype, svalue, sunits, srel,
             conf, ttype, target_chembl, tid) in rows:
            report.rows_read += 1
            if aid == last:
                report.skip("duplicate_activity_id", aid)
                continue
            last = aid
            sequence, class_path = target_info(tid)
            row = {
                "activity_id": aid,
                "assay_id": assay_chembl if assay_chembl is not None else assay_pk,
                "smiles": smiles,
                "standard_type": stype,
                "standard_value": svalue,
                "standard_units": sunits,
                "standard_relation": srel,
                "confidence_score": conf,
                "target_type": ttype,
                "target_id": target_chembl,
                "protein_sequence": sequence,
                "protein_class_path": class_path,
            }
            try:
                yield decode_record(row, task)
            except RowDecodeError as exc:
                report.skip(exc.reason, aid)
    finally:
        conn.close()


def write_flat_dump(records, path: str | os.PathLike) -> int:
    """Write records (or plain mappings) as JSON Lines; returns the row count."""
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() if isinstance(rec, RawActivityRecord) else json.dumps(rec, ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def write_relational_export(rows, path: str | os.PathLike) -> None:
    """Materialize flat rows as a minimal ChEMBL-shaped SQLite database."""
    path = Path(path)
    if path.exists():
        path.unlink()
    conn = sqlite3.connect(path)
    try:
        conn.executescript(
            """
            CREATE TABLE activities (activity_id INTEGER PRIMARY KEY, assay_id INTEGER,
                molregno INTEGER, standard_type TEXT, standard_value, standard_units TEXT,
                standard_relation TEXT);
            CREATE TABLE assays (assay_id INTEGER PRIMARY KEY, chembl_id TEXT, tid INTEGER,
                confidence_score INTEGER);
            CREATE TABLE compound_structures (molregno INTEGER PRIMARY KEY, canonical_smiles TEXT);
            CREATE TABLE target_dictionary (tid INTEGER PRIMARY KEY, target_type TEXT, chembl_id TEXT);
            CREATE TABLE target_components (tid INTEGER, component_id INTEGER);
            CREATE TABLE component_sequences (component_id INTEGER PRIMARY KEY, sequence TEXT);
            CREATE TABLE component_class (component_id INTEGER, protein_class_id INTEGER);
            CREATE TABLE protein_classification (protein_class_id INTEGER PRIMARY KEY,
                parent_id INTEGER, pref_name TEXT, class_level INTEGER);
            INSERT INTO protein_classification VALUES (0, NULL, 'Protein class', 0);
            """
        )
        assays: dict[str, int] = {}
        molecules: dict[str, int] = {}
        targets: dict[str, int] = {}
        classes: dict[tuple[str, ...], int] = {(): 0}

        def class_id(path_: tuple[str, ...]) -> int:
            for depth in range(1, len(path_) + 1):
                prefix = path_[:depth]
                if prefix not in classes:
                    classes[prefix] = len(classes)
                    conn.execute(
                        "INSERT INTO protein_classification VALUES (?,?,?,?)",
                        (classes[prefix], classes[prefix[:-1]], prefix[-1], depth),
                    )
            return classes[path_]

        for row in rows:
            r = row if isinstance(row, Mapping) else json.loads(row.to_json())
            tid = None
            if r.get("target_id") is not None:
                tid = targets.get(r["target_id"])
                if tid is None:
                    tid = targets[r["target_id"]] = len(targets) + 1
                    conn.execute(
                        "INSERT INTO target_dictionary VALUES (?,?,?)",
                        (tid, r.get("target_type"), r["target_id"]),
                    )
                    if r.get("protein_sequence") is not None or r.get("protein_class_path"):
                        conn.execute("INSERT INTO target_components VALUES (?,?)", (tid, tid))
                        conn.execute(
                            "INSERT INTO component_sequences VALUES (?,?)",
                            (tid, r.get("protein_sequence")),
                        )
                        if r.get("protein_class_path"):
                            conn.execute(
                                "INSERT INTO component_class VALUES (?,?)",
                                (tid, class_id(tuple(r["protein_class_path"]))),
                            )
            aid = assays.get(r["assay_id"])
            if aid is None:
                aid = assays[r["assay_id"]] = len(assays) + 1
                conn.execute(
                    "INSERT INTO assays VALUES (?,?,?,?)",
                    (aid, r["assay_id"], tid, r.get("confidence_score")),
                )
            molregno = None
            if r.get("smiles"):
                molregno = molecules.get(r["smiles"])
                if molregno is None:
                    molregno = molecules[r["smiles"]] = len(molecules) + 1
                    conn.execute(
                        "INSERT INTO compound_structures VALUES (?,?)", (molregno, r["smiles"])
                    )
            conn.execute(
                "INSERT INTO activities VALUES (?,?,?,?,?,?,?)",
                (r["activity_id"], aid, molregno, r.get("standard_type"), r.get("standard_value"),
                 r.get("standard_units"), r.get("standard_relation")),
            )
        conn.commit()
    finally:
        conn.close()


# --- synthetic mini-ChEMBL ------------------------------------------------

MEASUREMENT_TYPES = ("IC50", "EC50", "Ki", "Potency")
TARGET_TYPES = (
    ("SINGLE PROTEIN", 0.55),
    ("PROTEIN COMPLEX", 0.12),
    ("PROTEIN FAMILY", 0.11),
    ("ORGANISM", 0.11),
    ("CELL-LINE", 0.11),
)
CLASS_PATHS = (
    ("Enzyme", "Kinase", "Protein Kinase", "CMGC"),
    ("Enzyme", "Kinase", "Protein Kinase", "TK"),
    ("Enzyme", "Protease", "Serine protease"),
    ("Enzyme", "Oxidoreductase"),
    ("Membrane receptor", "Family A G protein-coupled receptor", "Small molecule receptor"),
    ("Membrane receptor", "Family C G protein-coupled receptor"),
    ("Ion channel", "Voltage-gated ion channel"),
    ("Ion channel", "Ligand-gated ion channel"),
    ("Transporter", "Electrochemical transporter"),
    ("Epigenetic regulator", "Reader"),
    ("Transcription factor", "Nuclear receptor"),
)
_PREFIXES = ("", "C", "CC", "CO", "N#C", "FC(F)(F)", "Cl", "CC(C)", "OC(=O)", "CCN(CC)C", "NC(=O)", "O")
_CORES = (
    "c1ccc({S})cc1",
    "c1ccc({S})nc1",
    "C1CCN({S})CC1",
    "c1ccc2cc({S})ccc2c1",
    "c1cc({S})sc1",
    "C1CCC({S})CC1",
    "c1ccc2[nH]c({S})cc2c1",
    "c1ccc(-c2ccc({S})cc2)cc1",
    "c1cnc({S})nc1",
    "C1CC(=O)N({S})C1",
    "c1cc({S})co1",
)
_SUBSTITUENTS = (
    "C", "F", "Cl", "O", "N", "OC", "C(=O)O", "C(F)(F)F", "CC", "C(=O)N",
    "S(=O)(=O)N", "C#N", "Cc1ccccc1", "Oc1ccncc1", "C1CC1", "N1CCOCC1", "CCc1ccc(F)cc1",
)
_ACYCLIC = (
    "CCCCO", "CC(C)CC(=O)O", "NCCCCN", "CCOC(=O)CC", "CC(=O)NCCS", "OCC(O)CO",
    "CCCCCCCC(=O)O", "CN(C)CCOC", "NC(CCC(=O)O)C(=O)O", "CC(C)(C)OC(=O)N",
)
INVALID_SMILES = (
    "C1CC", "CC(C)(C)(C)C", "c1ccccc1(", "N(C)(C)(C)C", "C)C", "O=O=O", "CC[Zz]", "C1CCC2CC1",
)
_AMINO = "ACDEFGHIKLMNPQRSTVWY"


@dataclass(frozen=True)
class SyntheticSpec:
    n_assays: int = 40
    molecules_per_assay: tuple[int, int] = (20, 120)
    measurement_types: tuple[str, ...] = MEASUREMENT_TYPES
    n_targets: int = 12
    n_molecules: int = 400
    censored_rate: float = 0.15
    approx_rate: float = 0.03
    missing_value_rate: float = 0.02
    missing_smiles_rate: float = 0.01
    illegal_smiles_rate: float = 0.02
    odd_units_rate: float = 0.03
    micromolar_rate: float = 0.3
    missing_confidence_rate: float = 0.03
    corrupt_rate: float = 0.0
    respell_rate: float = 0.5
    acyclic_rate: float = 0.08

    def validate(self) -> None:
        lo, hi = self.molecules_per_assay
        for name in ("n_assays", "n_targets", "n_molecules"):
            if getattr(self, name) <= 0:
                raise InvalidSpecError(f"{name} must be positive, got {getattr(self, name)}")
        if lo <= 0 or hi < lo:
            raise InvalidSpecError(f"molecules_per_assay must be a positive range, got {(lo, hi)}")
        if not self.measurement_types:
            raise InvalidSpecError("measurement_types must not be empty")
        for f in fields(self):
            if f.name.endswith("_rate") and not 0.0 <= getattr(self, f.name) <= 1.0:
                raise InvalidSpecError(f"{f.name} must lie in [0, 1]")


@dataclass(frozen=True)
class SyntheticManifest:
    path: str
    seed: int
    rows: int
    n_assays: int
    n_targets: int
    n_molecules: int


def _molecule_pool(spec: SyntheticSpec, rng: random.Random) -> list[str]:
    pool: list[str] = []
    seen: set[str] = set()
    attempts = 0
    while len(pool) < spec.n_molecules and attempts < spec.n_molecules * 50:
        attempts += 1
        if rng.random() < spec.acyclic_rate:
            smi = rng.choice(_ACYCLIC)
        else:
            smi = rng.choice(_PREFIXES) + rng.choice(_CORES).format(S=rng.choice(_SUBSTITUENTS))
        if smi not in seen:
            seen.add(smi)
            pool.append(smi)
    return pool


def _weighted(rng: random.Random, options) -> str:
    x = rng.random() * sum(w for _, w in options)
    for value, weight in options:
        x -= weight
        if x < 0:
            return value
    return options[-1][0]


def generate_synthetic_source(
    spec: SyntheticSpec, seed: int, path: str | os.PathLike
) -> SyntheticManifest:
    """Write a deterministic mini-ChEMBL flat dump covering every filter branch."""
    spec.validate()
    rng = random.Random(seed)
    pool = _molecule_pool(spec, rng)
    graphs = [parse_smiles(s) for s in pool]
    potency = [rng.gauss(6.0, 1.1) for _ in pool]

    targets = []
    for t in range(spec.n_targets):
        ttype = "SINGLE PROTEIN" if t < 2 else _weighted(rng, TARGET_TYPES)
        protein = ttype in ("SINGLE PROTEIN", "PROTEIN COMPLEX", "PROTEIN FAMILY")
        targets.append({
            "target_id": f"TGT{t + 1:04d}",
            "target_type": ttype,
            "protein_sequence": "".join(rng.choice(_AMINO) for _ in range(rng.randint(40, 90))) if protein else None,
            "protein_class_path": list(rng.choice(CLASS_PATHS)) if protein else None,
            "shift": rng.gauss(0.0, 0.5),
        })

    rows = []
    relations_censored = (">", "<", ">=", "<=")
    # the first ten assays take every confidence score once
    spread = list(range(10))
    rng.shuffle(spread)
    for a in range(spec.n_assays):
        target = targets[rng.randrange(len(targets))]
        mtype = rng.choice(spec.measurement_types)
        if a < len(spread):
            confidence = spread[a]
        elif rng.random() < spec.missing_confidence_rate:
            confidence = None
        elif rng.random() < 0.5:
            confidence = 9
        else:
            confidence = rng.randint(0, 8)
        lo, hi = spec.molecules_per_assay
        size = min(rng.randint(lo, hi), len(pool))
        assay_shift = rng.gauss(0.0, 0.3)
        for m in rng.sample(range(len(pool)), size):
            p = potency[m] + target["shift"] + assay_shift + rng.gauss(0.0, 0.25)
            value = 10 ** (9.0 - p)
            units: Optional[str] = "nM"
            if rng.random() < spec.micromolar_rate:
                units, value = "uM", value / 1000.0
            value = float(f"{value:.4g}")
            if rng.random() < spec.odd_units_rate:
                units = rng.choice(("%", None, "ug.mL-1"))
            relation = "="
            r = rng.random()
            if r < spec.censored_rate:
                relation = rng.choice(relations_censored)
            elif r < spec.censored_rate + spec.approx_rate:
                relation = "~"
            smiles: Optional[str] = pool[m]
            if rng.random() < spec.respell_rate:
                smiles = random_smiles(graphs[m], rng)
            if rng.random() < spec.illegal_smiles_rate:
                smiles = rng.choice(INVALID_SMILES)
            if rng.random() < spec.missing_smiles_rate:
                smiles = None
            stored_value: Any = value
            if rng.random() < spec.missing_value_rate:
                stored_value = None
            if rng.random() < spec.corrupt_rate:
                stored_value = "n/a"
            rows.append({
                "activity_id": len(rows) + 1,
                "assay_id": f"ASSAY{a + 1:04d}",
                "smiles": smiles,
                "standard_type": mtype,
                "standard_value": stored_value,
                "standard_units": units,
                "standard_relation": relation,
                "confidence_score": confidence,
                "target_type": target["target_type"],
                "target_id": target["target_id"],
                "protein_sequence": target["protein_sequence"],
                "protein_class_path": target["protein_class_path"],
            })
    n = write_flat_dump(rows, path)
    return SyntheticManifest(str(path), seed, n, spec.n_assays, spec.n_targets, len(pool))
