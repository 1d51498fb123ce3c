"""Domain annotation and the five-way OOD/ID partition."""

from __future__ import annotations

import enum
import logging
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .chem import analyze_smiles, heavy_atom_count, parse_smiles
from .curation import LabeledSample, MoleculeLookup
from .errors import IncompatibleCombinationError, InvariantViolationError, MissingDomainFieldError
from .ingest import Task

log = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "iid_val", "iid_test", "ood_val", "ood_test")


class DomainKind(str, enum.Enum):
    ASSAY = "assay"
    SCAFFOLD = "scaffold"
    SIZE = "size"
    PROTEIN = "protein"
    PROTEIN_FAMILY = "protein_family"


class Descriptor(str, enum.Enum):
    DOMAIN_CAPACITY = "domain_capacity"
    MOLECULAR_SIZE = "molecular_size"


class SortOrder(str, enum.Enum):
    DESCENDING = "descending"
    ASCENDING = "ascending"


SBAP_ONLY = frozenset({DomainKind.PROTEIN, DomainKind.PROTEIN_FAMILY})
DEFAULT_DESCRIPTOR = {
    DomainKind.ASSAY: Descriptor.DOMAIN_CAPACITY,
    DomainKind.PROTEIN: Descriptor.DOMAIN_CAPACITY,
    DomainKind.PROTEIN_FAMILY: Descriptor.DOMAIN_CAPACITY,
    DomainKind.SCAFFOLD: Descriptor.MOLECULAR_SIZE,
    DomainKind.SIZE: Descriptor.MOLECULAR_SIZE,
}


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind
    descriptor: Optional[Descriptor] = None
    sort_order: SortOrder = SortOrder.DESCENDING

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        object.__setattr__(self, "sort_order", SortOrder(self.sort_order))
        desc = DEFAULT_DESCRIPTOR[self.kind] if self.descriptor is None else Descriptor(self.descriptor)
        object.__setattr__(self, "descriptor", desc)
        if desc is Descriptor.MOLECULAR_SIZE and self.kind not in (DomainKind.SIZE, DomainKind.SCAFFOLD):
            raise InvariantViolationError(
                f"molecular_size descriptor only applies to size and scaffold domains, not {self.kind.value}"
            )

    def check_task(self, task: Task | str) -> None:
        if self.kind in SBAP_ONLY and Task(task) is not Task.SBAP:
            raise IncompatibleCombinationError(f"{self.kind.value} domains require the sbap task")


@dataclass(frozen=True)
class SplitConfig:
    train_fraction_ood: float = 0.6
    val_fraction_ood: float = 0.2
    iid_train_fraction: float = 0.6
    iid_val_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction_ood <= 1:
            raise InvariantViolationError("train_fraction_ood must lie in (0, 1]")
        if not 0 <= self.val_fraction_ood < 1:
            raise InvariantViolationError("val_fraction_ood must lie in [0, 1)")
        if self.train_fraction_ood + self.val_fraction_ood > 1 + 1e-12:
            raise InvariantViolationError("train_fraction_ood + val_fraction_ood must not exceed 1")
        if not (0 <= self.iid_train_fraction <= 1 and 0 <= self.iid_val_fraction <= 1):
            raise InvariantViolationError("ID fractions must lie in [0, 1]")
        if self.iid_train_fraction + self.iid_val_fraction > 1 + 1e-12:
            raise InvariantViolationError("iid_train_fraction + iid_val_fraction must not exceed 1")


@dataclass(frozen=True)
class DomainAnnotatedSample(LabeledSample):
    domain_key: str = ""
    domain_id: int = -1


@dataclass
class Domain:
    key: str
    members: list
    descriptor: float = 0.0
    domain_id: int = -1

    def __len__(self) -> int:
        return len(self.members)


@dataclass
class CuratedDataset:
    splits: dict[str, list[DomainAnnotatedSample]]
    threshold: float
    config_digest: str
    seed: int
    task: Task = Task.LBAP
    name: str = "dataset"
    warnings: list[str] = field(default_factory=list)
    filter_report: Optional[dict] = None
    ingest_report: Optional[dict] = None

    def all_samples(self) -> Iterable[DomainAnnotatedSample]:
        for name in SPLIT_NAMES:
            yield from self.splits[name]


# --- annotation -------------------------------------------------------------

def domain_key_for(sample: LabeledSample, kind: DomainKind, molecules: MoleculeLookup = analyze_smiles) -> str:
    kind = DomainKind(kind)
    if kind is DomainKind.ASSAY:
        if not sample.assay_ids:
            raise MissingDomainFieldError(f"sample {sample.input_key} has no assay id")
        # merged molecules measured in several assays go to the smallest id
        return min(sample.assay_ids)
    if kind in (DomainKind.SCAFFOLD, DomainKind.SIZE):
        info = molecules(sample.smiles)
        if not info.parsable:
            raise MissingDomainFieldError(f"sample {sample.input_key} has no parsable SMILES")
        return info.scaffold_key if kind is DomainKind.SCAFFOLD else str(info.heavy_atoms)
    if kind is DomainKind.PROTEIN:
        if sample.target_id is None:
            raise MissingDomainFieldError(f"sample {sample.input_key} has no target id")
        return sample.target_id
    if not sample.protein_class_path:
        raise MissingDomainFieldError(f"sample {sample.input_key} has no protein class path")
    return sample.protein_class_path[0]


def domain_descriptor(domain: Domain, spec: DomainSpec) -> float:
    if spec.descriptor is Descriptor.DOMAIN_CAPACITY:
        return float(len(domain.members))
    if spec.kind is DomainKind.SIZE:
        return float(int(domain.key))
    # scaffold keys are canonical SMILES; the empty scaffold has no atoms
    if not domain.key:
        return 0.0
    return float(heavy_atom_count(parse_smiles(domain.key, validate=False)))


def sort_domains(domains: Iterable[Domain], spec: DomainSpec) -> list[Domain]:
    """Order by descriptor (desc by default), ties by key ascending; assign dense ids."""
    sign = -1 if spec.sort_order is SortOrder.DESCENDING else 1
    ordered = sorted(domains, key=lambda d: (sign * d.descriptor, d.key))
    for i, d in enumerate(ordered):
        d.domain_id = i
    return ordered


def build_domains(
    samples: Sequence[LabeledSample], spec: DomainSpec, molecules: MoleculeLookup = analyze_smiles
) -> list[Domain]:
    grouped: dict[str, list] = defaultdict(list)
    for s in samples:
        grouped[domain_key_for(s, spec.kind, molecules)].append(s)
    domains = []
    for key, members in grouped.items():
        members.sort(key=lambda s: s.input_key)
        d = Domain(key, members)
        d.descriptor = domain_descriptor(d, spec)
        domains.append(d)
    ordered = sort_domains(domains, spec)
    for d in ordered:
        d.members = [_annotate(s, d) for s in d.members]
    return ordered


def _annotate(sample: LabeledSample, domain: Domain) -> DomainAnnotatedSample:
    base = {f: getattr(sample, f) for f in LabeledSample.__dataclass_fields__}
    return DomainAnnotatedSample(**base, domain_key=domain.key, domain_id=domain.domain_id)


def assign_domains(
    samples: Sequence[LabeledSample], spec: DomainSpec, molecules: MoleculeLookup = analyze_smiles
) -> list[DomainAnnotatedSample]:
    return [s for d in build_domains(samples, spec, molecules) for s in d.members]


# --- splitting ---------------------------------------------------------------

def ood_split(
    domains: Sequence[Domain], cfg: SplitConfig, warnings: Optional[list[str]] = None
) -> tuple[list[Domain], list[Domain], list[Domain]]:
    """Walk sorted domains, filling train, then OOD-val, then OOD-test.

    A domain joins train while the running count is below the train target
    and OOD-val while below the train+val target; domains are never split.
    """
    total = sum(len(d) for d in domains)
    if total <= 0:
        raise ValueError("cannot split an empty dataset")
    train_target = Fraction(str(cfg.train_fraction_ood)) * total
    val_target = (Fraction(str(cfg.train_fraction_ood)) + Fraction(str(cfg.val_fraction_ood))) * total
    train, val, test = [], [], []
    running = 0
    for d in domains:
        if running < train_target:
            train.append(d)
        elif running < val_target:
            val.append(d)
        else:
            test.append(d)
        running += len(d)
    for name, part in (("ood_val", val), ("ood_test", test)):
        if not part and not (name == "ood_val" and cfg.val_fraction_ood == 0):
            msg = f"degenerate split: {name} is empty"
            log.warning(msg)
            if warnings is not None:
                warnings.append(msg)
    return train, val, test


def id_split(
    domains: Sequence[Domain], cfg: SplitConfig
) -> tuple[list, list, list]:
    """Carve ID-val and ID-test out of every intermediate-train domain.

    Per domain of size n: floor(iid_val * n) to val, floor(test share * n)
    to test, remainder to train; domains with fewer than 3 samples stay in
    train. Membership comes from a shuffle seeded by (seed, domain key).
    """
    val_frac = Fraction(str(cfg.iid_val_fraction))
    test_frac = 1 - Fraction(str(cfg.iid_train_fraction)) - val_frac
    train, val, test = [], [], []
    for d in domains:
        members = sorted(d.members, key=lambda s: s.input_key)
        n = len(members)
        if n < 3:
            train.extend(members)
            continue
        n_val = math.floor(val_frac * n)
        n_test = math.floor(test_frac * n)
        random.Random(f"{cfg.seed}:{d.key}").shuffle(members)
        val.extend(members[:n_val])
        test.extend(members[n_val:n_val + n_test])
        train.extend(members[n_val + n_test:])
    return train, val, test
