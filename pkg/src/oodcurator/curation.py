"""Noise filtering, uncertainty offsets, measurement merging and adaptive labels."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .chem import MoleculeInfo, analyze_smiles
from .errors import InvariantViolationError
from .ingest import RELATIONS, RawActivityRecord, Task

DEFAULT_DELTA = {"<": -1, "<=": -1, ">": 1, ">=": 1}
UNIT_TO_NM = {"nM": 1.0, "uM": 1000.0}
NOISE_LEVELS = ("core", "refined", "general")

# drop criteria, in the order they are checked
SAMPLE_CRITERIA = (
    "measurement_type", "missing_value", "units", "invalid_value", "relation", "illegal_smiles",
)
ASSAY_CRITERIA = ("molecule_count", "confidence_score", "target_type")


@dataclass(frozen=True)
class NoiseFilterConfig:
    measurement_types: frozenset[str]
    molecules_per_assay: Optional[tuple[int, int]] = None
    allowed_units: frozenset[str] = frozenset(UNIT_TO_NM)
    min_confidence: Optional[int] = None
    allowed_target_types: Optional[frozenset[str]] = None
    allowed_relations: frozenset[str] = frozenset(RELATIONS)
    require_value: bool = True
    require_legal_smiles: bool = True
    # sbap also needs the target identity, sequence and family
    require_target: bool = False

    def __post_init__(self):
        if self.molecules_per_assay is not None:
            lo, hi = self.molecules_per_assay
            if lo < 1 or hi < lo:
                raise InvariantViolationError(
                    f"molecules_per_assay must satisfy 1 <= lower <= upper, got {self.molecules_per_assay}"
                )
        extra = set(self.allowed_relations) - set(RELATIONS)
        if extra:
            raise InvariantViolationError(f"unknown value relations {sorted(extra)}")
        if not self.require_value:
            raise InvariantViolationError("activity values are needed for pValues; require_value must be true")


# Table values per noise level; measurement type is filled per dataset
NOISE_TABLE: dict[str, dict] = {
    "core": dict(
        molecules_per_assay=(50, 3000),
        allowed_units=frozenset({"nM", "uM"}),
        min_confidence=9,
        allowed_target_types=frozenset({"SINGLE PROTEIN"}),
        allowed_relations=frozenset({"=", "~"}),
    ),
    "refined": dict(
        molecules_per_assay=(32, 5000),
        allowed_units=frozenset({"nM", "uM"}),
        min_confidence=3,
        allowed_target_types=frozenset({"SINGLE PROTEIN", "PROTEIN COMPLEX", "PROTEIN FAMILY"}),
        allowed_relations=frozenset({"=", "~", ">=", "<="}),
    ),
    "general": dict(
        molecules_per_assay=(10, 5000),
        allowed_units=frozenset({"nM", "uM"}),
        min_confidence=None,
        allowed_target_types=None,
        allowed_relations=frozenset(RELATIONS),
    ),
}


def noise_preset(level: str, measurement_types: Iterable[str], task: Task | str = Task.LBAP) -> NoiseFilterConfig:
    if level not in NOISE_TABLE:
        raise InvariantViolationError(f"unknown noise level {level!r}; expected one of {NOISE_LEVELS}")
    return NoiseFilterConfig(
        measurement_types=frozenset(measurement_types),
        require_target=Task(task) is Task.SBAP,
        **NOISE_TABLE[level],
    )


@dataclass(frozen=True)
class AssaySummary:
    measurement_type: Optional[str]
    molecule_count: int
    confidence_score: Optional[int]
    target_type: Optional[str]


def assay_failure(summary: AssaySummary, cfg: NoiseFilterConfig) -> Optional[str]:
    """Name of the first assay criterion ``summary`` fails, or None."""
    if summary.measurement_type not in cfg.measurement_types:
        return "measurement_type"
    if cfg.molecules_per_assay is not None:
        lo, hi = cfg.molecules_per_assay
        if not lo <= summary.molecule_count <= hi:
            return "molecule_count"
    if cfg.min_confidence is not None:
        if summary.confidence_score is None or summary.confidence_score < cfg.min_confidence:
            return "confidence_score"
    if cfg.allowed_target_types is not None and summary.target_type not in cfg.allowed_target_types:
        return "target_type"
    return None


def assay_passes(summary: AssaySummary, cfg: NoiseFilterConfig) -> bool:
    return assay_failure(summary, cfg) is None


def sample_failure(record: RawActivityRecord, cfg: NoiseFilterConfig, legality: Optional[bool]) -> Optional[str]:
    """Name of the first sample criterion ``record`` fails, or None.

    ``legality`` is the chemistry verdict for the record's SMILES (None when
    it could not be parsed at all).
    """
    if record.standard_type not in cfg.measurement_types:
        return "measurement_type"
    if (
        record.standard_value is None
        or record.standard_units is None
        or record.standard_relation is None
        or not record.smiles
    ):
        return "missing_value"
    if cfg.require_target and (
        record.target_id is None or record.protein_sequence is None or record.protein_class_path is None
    ):
        return "missing_value"
    if record.standard_units not in cfg.allowed_units or record.standard_units not in UNIT_TO_NM:
        return "units"
    if record.standard_value <= 0:
        return "invalid_value"
    if record.standard_relation not in cfg.allowed_relations:
        return "relation"
    if legality is None or (cfg.require_legal_smiles and not legality):
        return "illegal_smiles"
    return None


def sample_passes(record: RawActivityRecord, cfg: NoiseFilterConfig, legality: Optional[bool]) -> bool:
    return sample_failure(record, cfg, legality) is None


def _legality(info: MoleculeInfo) -> Optional[bool]:
    return info.legal if info.parsable else None


@dataclass
class FilterReport:
    input_count: int = 0
    output_count: int = 0
    dropped: Counter = field(default_factory=Counter)

    def to_dict(self) -> dict:
        return {
            "input_count": self.input_count,
            "output_count": self.output_count,
            "dropped": {c: self.dropped.get(c, 0) for c in SAMPLE_CRITERIA + ASSAY_CRITERIA},
        }


MoleculeLookup = Callable[[Optional[str]], MoleculeInfo]


def apply_filters(
    records: Iterable[RawActivityRecord],
    cfg: NoiseFilterConfig,
    molecules: MoleculeLookup = analyze_smiles,
) -> tuple[list[RawActivityRecord], FilterReport]:
    """Two-pass noise filter.

    Pass 1 screens each record and tallies distinct surviving molecules per
    assay; pass 2 drops every record of an assay that fails the assay
    criteria evaluated on those tallies.
    """
    report = FilterReport()
    survivors: list[RawActivityRecord] = []
    molecules_in: dict[str, set[str]] = defaultdict(set)
    types_in: dict[str, set[str]] = defaultdict(set)
    for rec in records:
        report.input_count += 1
        info = molecules(rec.smiles)
        reason = sample_failure(rec, cfg, _legality(info))
        if reason:
            report.dropped[reason] += 1
            continue
        survivors.append(rec)
        molecules_in[rec.assay_id].add(info.key)
        types_in[rec.assay_id].add(rec.standard_type)

    verdicts: dict[str, Optional[str]] = {}
    kept: list[RawActivityRecord] = []
    for rec in survivors:
        if rec.assay_id not in verdicts:
            summary = AssaySummary(
                measurement_type=min(types_in[rec.assay_id]),
                molecule_count=len(molecules_in[rec.assay_id]),
                confidence_score=rec.confidence_score,
                target_type=rec.target_type,
            )
            verdicts[rec.assay_id] = assay_failure(summary, cfg)
        reason = verdicts[rec.assay_id]
        if reason:
            report.dropped[reason] += 1
        else:
            kept.append(rec)
    report.output_count = len(kept)
    return kept, report


# --- uncertainty and units --------------------------------------------------

def offset_uncertain(value: float, relation: str, delta_map: Mapping[str, int] = DEFAULT_DELTA) -> float:
    """Shift a censored value by ``10 ** delta`` in linear space; '=' and '~' pass through."""
    if relation in ("=", "~"):
        return value
    if relation not in delta_map or relation not in RELATIONS:
        raise ValueError(f"unknown value relation {relation!r}")
    delta = delta_map[relation]
    return value * 10 ** delta if delta >= 0 else value / 10 ** (-delta)


def to_pvalue(value: float, units: str) -> float:
    """-log10 of the molar activity: 9 - log10(value in nM)."""
    if units not in UNIT_TO_NM:
        raise ValueError(f"unknown unit {units!r}; expected one of {sorted(UNIT_TO_NM)}")
    if not value > 0:
        raise ValueError(f"activity value must be positive, got {value}")
    return 9.0 - math.log10(value * UNIT_TO_NM[units])


# --- merging --------------------------------------------------------------

@dataclass(frozen=True)
class ScoredRecord:
    """A filtered record with its offset-resolved pValue and molecule key."""

    molecule_key: str
    pvalue: float
    record: RawActivityRecord


@dataclass(frozen=True)
class MergedSample:
    input_key: tuple[str, ...]
    smiles: str
    pvalue: float
    n_measurements: int
    assay_ids: frozenset[str]
    protein_sequence: Optional[str] = None
    target_id: Optional[str] = None
    protein_class_path: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class LabeledSample(MergedSample):
    label: int = 0
    threshold_used: float = 0.0


def score_records(
    records: Iterable[RawActivityRecord],
    delta_map: Mapping[str, int] = DEFAULT_DELTA,
    molecules: MoleculeLookup = analyze_smiles,
) -> list[ScoredRecord]:
    out = []
    for rec in records:
        value = offset_uncertain(rec.standard_value, rec.standard_relation, delta_map)
        out.append(ScoredRecord(molecules(rec.smiles).key, to_pvalue(value, rec.standard_units), rec))
    return out


def merge_measurements(
    records: Sequence[ScoredRecord], task: Task | str, average: bool = True
) -> list[MergedSample]:
    """Group by molecule (lbap) or molecule-target pair (sbap) and average pValues.

    The mean uses exactly rounded summation, so it does not depend on record
    order. Representative fields come from the lowest activity_id. With
    ``average`` off every record stays its own sample.
    """
    task = Task(task)
    groups: dict[tuple, list[ScoredRecord]] = defaultdict(list)
    for sr in records:
        if task is Task.LBAP:
            key: tuple = (sr.molecule_key,)
        else:
            key = (sr.molecule_key, sr.record.target_id)
        if not average:
            key = key + (str(sr.record.activity_id),)
        groups[key].append(sr)
    merged = []
    for key in sorted(groups):
        members = sorted(groups[key], key=lambda s: s.record.activity_id)
        first = members[0].record
        merged.append(MergedSample(
            input_key=key,
            smiles=first.smiles,
            pvalue=math.fsum(m.pvalue for m in members) / len(members),
            n_measurements=len(members),
            assay_ids=frozenset(m.record.assay_id for m in members),
            protein_sequence=first.protein_sequence if task is Task.SBAP else None,
            target_id=first.target_id if task is Task.SBAP else None,
            protein_class_path=first.protein_class_path if task is Task.SBAP else None,
        ))
    return merged


def merge_samples(samples: Sequence[MergedSample]) -> list[MergedSample]:
    """Re-merge already merged samples by input key (measurement-weighted)."""
    groups: dict[tuple, list[MergedSample]] = defaultdict(list)
    for s in samples:
        groups[s.input_key].append(s)
    out = []
    for key in sorted(groups):
        members = groups[key]
        if len(members) == 1:
            out.append(members[0])
            continue
        n = sum(m.n_measurements for m in members)
        out.append(replace(
            members[0],
            pvalue=math.fsum(m.pvalue * m.n_measurements for m in members) / n,
            n_measurements=n,
            assay_ids=frozenset().union(*(m.assay_ids for m in members)),
        ))
    return out


# --- labels ---------------------------------------------------------------

def median(values: Sequence[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    return ordered[mid] if n % 2 else (ordered[mid - 1] + ordered[mid]) / 2


def compute_threshold(pvalues: Sequence[float], lower: float = 4.0, upper: float = 6.0, fix: float = 5.0) -> float:
    """Median pValue when it lies in [lower, upper], otherwise the fixed value."""
    if len(pvalues) == 0:
        raise ValueError("cannot compute a threshold from no pValues")
    m = median(pvalues)
    return m if lower <= m <= upper else fix


def assign_labels(samples: Iterable[MergedSample], threshold: float) -> list[LabeledSample]:
    """Active (1) iff pValue >= threshold; ties go active."""
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    out = []
    for s in samples:
        base = {f: getattr(s, f) for f in MergedSample.__dataclass_fields__}
        out.append(LabeledSample(**base, label=int(s.pvalue >= threshold), threshold_used=threshold))
    return out
