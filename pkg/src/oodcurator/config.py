"""Curation recipes: strict JSON/YAML parsing, canonical digests and built-in presets.

A recipe mirrors the nested layout of the reference curator configuration::

    {
      "task": "lbap",
      "chembl": "chembl_29.db",              # or "source": {"path": ..., "kind": ...}
      "save_dir": "data",
      "filter": {
        "noise_level": "core",               # optional; seeds the fields below
        "assay_filter": {"measurement_type": ["EC50"], "assay_value_units": ["nM", "uM"],
                         "molecules_number": [50, 3000], "confidence_score": 9,
                         "target_type": ["SINGLE PROTEIN"]},
        "sample_filter": {"filter_none": true, "smile_exist": true, "smile_legal": true,
                          "value_relation": ["=", "~"]}
      },
      "uncertainty": {"multiple_measurement_average": true,
                      "uncertainty_delta": {"<": -1, "<=": -1, ">": 1, ">=": 1},
                      "binary_threshold": {"lower_bound": 4, "upper_bound": 6, "fix_value": 5}},
      "split": {"domain": {"domain_generate_field": "assay_id", "domain_name": "assay",
                           "sort_func": "domain_capacity", "sort_order": "descending"},
                "fractions": {"train_fraction_ood": 0.6, "val_fraction_ood": 0.2,
                              "IID_train_sample_fractions": 0.6, "IID_val_sample_fractions": 0.2},
                "seed": 0}
    }

Defaults: units {nM, uM}; molecule count, confidence and target type
unrestricted; all six relations; delta map as above; threshold 4/6/5;
fractions 0.6/0.2/0.6/0.2; seed 0. Without ``noise_level`` the only required
keys are ``task``, ``filter.assay_filter.measurement_type`` and
``split.domain.domain_name``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import yaml

from .curation import DEFAULT_DELTA, NOISE_LEVELS, NOISE_TABLE, NoiseFilterConfig
from .errors import (
    ConfigError,
    IncompatibleCombinationError,
    InvariantViolationError,
    MissingKeyError,
    UnknownKeyError,
)
from .ingest import RELATIONS, MEASUREMENT_TYPES, SourceKind, Task
from .split import Descriptor, DomainKind, DomainSpec, SortOrder, SplitConfig

DOMAIN_FIELDS = {
    DomainKind.ASSAY: "assay_id",
    DomainKind.SCAFFOLD: "smiles",
    DomainKind.SIZE: "smiles",
    DomainKind.PROTEIN: "target_id",
    DomainKind.PROTEIN_FAMILY: "protein_class_path",
}
TASK_DOMAINS = {
    Task.LBAP: (DomainKind.ASSAY, DomainKind.SCAFFOLD, DomainKind.SIZE),
    Task.SBAP: (DomainKind.ASSAY, DomainKind.PROTEIN, DomainKind.PROTEIN_FAMILY,
                DomainKind.SCAFFOLD, DomainKind.SIZE),
}


class ConfigSyntaxError(ConfigError):
    pass


@dataclass(frozen=True)
class SourceSpec:
    path: str
    kind: SourceKind = SourceKind.FLAT_DUMP

    @classmethod
    def infer(cls, path: str) -> "SourceSpec":
        suffix = Path(path).suffix.lower()
        kind = SourceKind.RELATIONAL_EXPORT if suffix in (".db", ".sqlite", ".sqlite3") else SourceKind.FLAT_DUMP
        return cls(str(path), kind)


@dataclass(frozen=True)
class ThresholdConfig:
    lower: float = 4.0
    upper: float = 6.0
    fix: float = 5.0

    def __post_init__(self):
        if not self.lower <= self.fix <= self.upper:
            raise InvariantViolationError(
                f"threshold bounds must satisfy lower <= fix <= upper, got "
                f"{self.lower} / {self.fix} / {self.upper}"
            )


@dataclass(frozen=True)
class CurationConfig:
    task: Task
    noise: NoiseFilterConfig
    domain: DomainSpec
    split: SplitConfig = field(default_factory=SplitConfig)
    threshold: ThresholdConfig = field(default_factory=ThresholdConfig)
    average_multiple: bool = True
    delta_map: dict = field(default_factory=lambda: dict(DEFAULT_DELTA))
    noise_level: Optional[str] = None
    source: Optional[SourceSpec] = None
    save_dir: str = "data"
    name: Optional[str] = None

    def __post_init__(self):
        self.domain.check_task(self.task)

    @property
    def dataset_name(self) -> str:
        if self.name:
            return self.name
        mtypes = "+".join(sorted(t.lower() for t in self.noise.measurement_types))
        return "-".join((
            self.task.value,
            self.noise_level or "custom",
            mtypes,
            self.domain.kind.value.replace("_", "-"),
        ))

    @property
    def digest(self) -> str:
        return config_digest(self)

    def with_seed(self, seed: int) -> "CurationConfig":
        return replace(self, split=replace(self.split, seed=seed))


# --- strict parsing ---------------------------------------------------------

def _take(obj: Any, where: str, allowed: set[str]) -> dict:
    if obj is None:
        return {}
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    for key in obj:
        if key not in allowed:
            raise UnknownKeyError(key, where)
    return obj


def _str_list(value: Any, where: str) -> list[str]:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where} must be a list of strings")
    return value


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(value)


def _bool(value: Any, where: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{where} must be true or false")
    return value


def _noise_from(raw: dict, task: Task) -> tuple[NoiseFilterConfig, Optional[str]]:
    flt = _take(raw, "filter", {"noise_level", "assay_filter", "sample_filter"})
    level = flt.get("noise_level")
    if level is not None and level not in NOISE_LEVELS:
        raise InvariantViolationError(f"filter.noise_level must be one of {NOISE_LEVELS}, got {level!r}")
    af = _take(flt.get("assay_filter"), "filter.assay_filter",
               {"measurement_type", "assay_value_units", "molecules_number", "confidence_score", "target_type"})
    sf = _take(flt.get("sample_filter"), "filter.sample_filter",
               {"filter_none", "smile_exist", "smile_legal", "value_relation"})
    base: dict = dict(NOISE_TABLE[level]) if level else {}

    if "measurement_type" not in af:
        raise MissingKeyError("measurement_type", "filter.assay_filter")
    mtypes = _str_list(af["measurement_type"], "filter.assay_filter.measurement_type")
    if not mtypes:
        raise InvariantViolationError("filter.assay_filter.measurement_type must not be empty")
    if "assay_value_units" in af:
        base["allowed_units"] = frozenset(_str_list(af["assay_value_units"], "assay_value_units"))
    if "molecules_number" in af:
        rng = af["molecules_number"]
        if rng is None:
            base["molecules_per_assay"] = None
        elif (isinstance(rng, list) and len(rng) == 2
              and all(isinstance(v, int) and not isinstance(v, bool) for v in rng)):
            base["molecules_per_assay"] = (rng[0], rng[1])
        else:
            raise ConfigError("filter.assay_filter.molecules_number must be [lower, upper] or null")
    if "confidence_score" in af:
        score = af["confidence_score"]
        if score is not None and (isinstance(score, bool) or not isinstance(score, int) or not 0 <= score <= 9):
            raise InvariantViolationError("filter.assay_filter.confidence_score must be an integer 0-9 or null")
        base["min_confidence"] = score
    if "target_type" in af:
        tt = af["target_type"]
        base["allowed_target_types"] = None if tt is None else frozenset(_str_list(tt, "target_type"))
    if "value_relation" in sf:
        base["allowed_relations"] = frozenset(_str_list(sf["value_relation"], "value_relation"))
    if not _bool(sf.get("smile_exist", True), "filter.sample_filter.smile_exist"):
        raise InvariantViolationError("smile_exist must be true: samples need a molecule")
    base["require_value"] = _bool(sf.get("filter_none", True), "filter.sample_filter.filter_none")
    base["require_legal_smiles"] = _bool(sf.get("smile_legal", True), "filter.sample_filter.smile_legal")
    return NoiseFilterConfig(
        measurement_types=frozenset(mtypes), require_target=task is Task.SBAP, **base
    ), level


def config_from_dict(raw: Any) -> CurationConfig:
    top = _take(raw, "config", {"task", "chembl", "source", "save_dir", "name", "filter", "uncertainty", "split"})
    if "task" not in top:
        raise MissingKeyError("task")
    try:
        task = Task(top["task"])
    except ValueError:
        raise InvariantViolationError(f"task must be 'lbap' or 'sbap', got {top['task']!r}") from None

    source = None
    if "chembl" in top and "source" in top:
        raise ConfigError("give either 'chembl' or 'source', not both")
    if "chembl" in top:
        if not isinstance(top["chembl"], str):
            raise ConfigError("chembl must be a path string")
        source = SourceSpec.infer(top["chembl"])
    elif top.get("source") is not None:
        src = _take(top["source"], "source", {"path", "kind"})
        if "path" not in src:
            raise MissingKeyError("path", "source")
        try:
            source = SourceSpec(str(src["path"]), SourceKind(src.get("kind", "flat_dump")))
        except ValueError:
            raise InvariantViolationError(f"unknown source kind {src.get('kind')!r}") from None

    if "filter" not in top:
        raise MissingKeyError("filter")
    noise, level = _noise_from(top["filter"], task)

    unc = _take(top.get("uncertainty"), "uncertainty",
                {"multiple_measurement_average", "uncertainty_delta", "binary_threshold"})
    average = _bool(unc.get("multiple_measurement_average", True), "uncertainty.multiple_measurement_average")
    delta = unc.get("uncertainty_delta", DEFAULT_DELTA)
    if not isinstance(delta, dict):
        raise ConfigError("uncertainty.uncertainty_delta must be an object")
    for rel, shift in delta.items():
        if rel not in RELATIONS or rel in ("=", "~"):
            raise InvariantViolationError(f"uncertainty_delta has an unsupported relation {rel!r}")
        if isinstance(shift, bool) or not isinstance(shift, int):
            raise ConfigError(f"uncertainty_delta[{rel!r}] must be an integer")
    thr = _take(unc.get("binary_threshold"), "uncertainty.binary_threshold",
                {"lower_bound", "upper_bound", "fix_value"})
    threshold = ThresholdConfig(
        lower=_number(thr.get("lower_bound", 4), "lower_bound"),
        upper=_number(thr.get("upper_bound", 6), "upper_bound"),
        fix=_number(thr.get("fix_value", 5), "fix_value"),
    )

    sp = _take(top.get("split"), "split", {"domain", "fractions", "seed"})
    dom = _take(sp.get("domain"), "split.domain",
                {"domain_generate_field", "domain_name", "sort_func", "sort_order"})
    if "domain_name" not in dom:
        raise MissingKeyError("domain_name", "split.domain")
    try:
        kind = DomainKind(dom["domain_name"])
        descriptor = Descriptor(dom["sort_func"]) if dom.get("sort_func") is not None else None
        order = SortOrder(dom.get("sort_order", "descending"))
    except ValueError as exc:
        raise InvariantViolationError(f"split.domain: {exc}") from None
    gen_field = dom.get("domain_generate_field")
    if gen_field is not None and gen_field != DOMAIN_FIELDS[kind]:
        raise InvariantViolationError(
            f"domain_generate_field for {kind.value} must be {DOMAIN_FIELDS[kind]!r}, got {gen_field!r}"
        )
    domain = DomainSpec(kind, descriptor, order)

    fr = _take(sp.get("fractions"), "split.fractions",
               {"train_fraction_ood", "val_fraction_ood", "IID_train_sample_fractions", "IID_val_sample_fractions"})
    seed = sp.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("split.seed must be an integer")
    split = SplitConfig(
        train_fraction_ood=_number(fr.get("train_fraction_ood", 0.6), "train_fraction_ood"),
        val_fraction_ood=_number(fr.get("val_fraction_ood", 0.2), "val_fraction_ood"),
        iid_train_fraction=_number(fr.get("IID_train_sample_fractions", 0.6), "IID_train_sample_fractions"),
        iid_val_fraction=_number(fr.get("IID_val_sample_fractions", 0.2), "IID_val_sample_fractions"),
        seed=seed,
    )

    save_dir = top.get("save_dir", "data")
    name = top.get("name")
    if not isinstance(save_dir, str) or (name is not None and not isinstance(name, str)):
        raise ConfigError("save_dir and name must be strings")
    return CurationConfig(
        task=task, noise=noise, domain=domain, split=split, threshold=threshold,
        average_multiple=average, delta_map=dict(delta), noise_level=level,
        source=source, save_dir=save_dir, name=name,
    )


def parse_config(text: str, fmt: str = "json") -> CurationConfig:
    """Parse a recipe; ``fmt`` is "json" (canonical) or "yaml"."""
    try:
        raw = yaml.safe_load(text) if fmt == "yaml" else json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigSyntaxError(f"cannot parse {fmt} config: {exc}") from None
    return config_from_dict(raw)


def load_config(path: str | Path) -> CurationConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    fmt = "yaml" if path.suffix.lower() in (".yaml", ".yml") else "json"
    return parse_config(text, fmt)


# --- serialization ------------------------------------------------------------

def _recipe(cfg: CurationConfig) -> dict:
    n = cfg.noise
    filt: dict = {}
    if cfg.noise_level:
        filt["noise_level"] = cfg.noise_level
    filt["assay_filter"] = {
        "measurement_type": sorted(n.measurement_types),
        "assay_value_units": sorted(n.allowed_units),
        "molecules_number": list(n.molecules_per_assay) if n.molecules_per_assay else None,
        "confidence_score": n.min_confidence,
        "target_type": sorted(n.allowed_target_types) if n.allowed_target_types is not None else None,
    }
    filt["sample_filter"] = {
        "filter_none": n.require_value,
        "smile_exist": True,
        "smile_legal": n.require_legal_smiles,
        "value_relation": sorted(n.allowed_relations),
    }
    return {
        "task": cfg.task.value,
        "filter": filt,
        "uncertainty": {
            "multiple_measurement_average": cfg.average_multiple,
            "uncertainty_delta": dict(sorted(cfg.delta_map.items())),
            "binary_threshold": {
                "lower_bound": cfg.threshold.lower,
                "upper_bound": cfg.threshold.upper,
                "fix_value": cfg.threshold.fix,
            },
        },
        "split": {
            "domain": {
                "domain_generate_field": DOMAIN_FIELDS[cfg.domain.kind],
                "domain_name": cfg.domain.kind.value,
                "sort_func": cfg.domain.descriptor.value,
                "sort_order": cfg.domain.sort_order.value,
            },
            "fractions": {
                "train_fraction_ood": cfg.split.train_fraction_ood,
                "val_fraction_ood": cfg.split.val_fraction_ood,
                "IID_train_sample_fractions": cfg.split.iid_train_fraction,
                "IID_val_sample_fractions": cfg.split.iid_val_fraction,
            },
            "seed": cfg.split.seed,
        },
    }


def config_to_dict(cfg: CurationConfig) -> dict:
    out = _recipe(cfg)
    if cfg.source is not None:
        out["source"] = {"path": cfg.source.path, "kind": cfg.source.kind.value}
    out["save_dir"] = cfg.save_dir
    if cfg.name is not None:
        out["name"] = cfg.name
    return out


def serialize_config(cfg: CurationConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def config_digest(cfg: CurationConfig) -> str:
    """SHA-256 over the canonical recipe; paths and names do not contribute."""
    canonical = json.dumps(_recipe(cfg), sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --- presets ------------------------------------------------------------------

@dataclass(frozen=True)
class PresetId:
    task: Task
    noise_level: str
    measurement_type: str
    domain: DomainKind

    def __str__(self) -> str:
        return ",".join((self.task.value, self.noise_level, self.measurement_type, self.domain.value))

    @property
    def dataset_name(self) -> str:
        return "-".join((self.task.value, self.noise_level, self.measurement_type.lower(),
                         self.domain.value.replace("_", "-")))


def list_presets() -> list[PresetId]:
    """All built-in presets in a stable order (task, noise level, type, domain)."""
    return [
        PresetId(task, level, mtype, kind)
        for task in (Task.LBAP, Task.SBAP)
        for level in NOISE_LEVELS
        for mtype in MEASUREMENT_TYPES
        for kind in TASK_DOMAINS[task]
    ]


def parse_preset_id(text: str) -> PresetId:
    """Accept ``lbap,core,IC50,assay`` or the dataset-name form ``lbap-core-ic50-assay``."""
    lookup = {}
    for p in list_presets():
        lookup[str(p).lower()] = p
        lookup[p.dataset_name] = p
    found = lookup.get(text.strip().lower())
    if found is None:
        parts = [s.strip() for s in text.split(",")]
        if len(parts) == 4:
            try:
                task, kind = Task(parts[0].lower()), DomainKind(parts[3].lower())
            except ValueError:
                pass
            else:
                if kind not in TASK_DOMAINS[task]:
                    raise IncompatibleCombinationError(f"{kind.value} domains require the sbap task")
        raise ConfigError(f"unknown preset {text!r}")
    return found


def resolve_preset(
    task: Task | str,
    noise_level: str,
    measurement_type: str,
    domain_kind: DomainKind | str,
    source: Optional[SourceSpec] = None,
    save_dir: str = "data",
    seed: int = 0,
) -> CurationConfig:
    task = Task(task)
    kind = DomainKind(domain_kind)
    if kind not in TASK_DOMAINS[task]:
        raise IncompatibleCombinationError(f"{kind.value} domains require the sbap task")
    if noise_level not in NOISE_LEVELS:
        raise InvariantViolationError(f"unknown noise level {noise_level!r}")
    mtypes = {m.lower(): m for m in MEASUREMENT_TYPES}
    if measurement_type.lower() not in mtypes:
        raise InvariantViolationError(f"unknown measurement type {measurement_type!r}")
    mtype = mtypes[measurement_type.lower()]
    noise = NoiseFilterConfig(
        measurement_types=frozenset({mtype}),
        require_target=task is Task.SBAP,
        **NOISE_TABLE[noise_level],
    )
    return CurationConfig(
        task=task,
        noise=noise,
        domain=DomainSpec(kind),
        split=SplitConfig(seed=seed),
        noise_level=noise_level,
        source=source,
        save_dir=save_dir,
    )
