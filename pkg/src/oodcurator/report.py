"""Dataset persistence, on-disk validation and split statistics."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from .errors import DatasetExistsError, DatasetInvariantError, MalformedSchemaError, MissingFileError
from .ingest import Task
from .split import SPLIT_NAMES, CuratedDataset

FORMAT_VERSION = 1
STAT_FIELDS = ("domain_count", "sample_count", "positive_count", "negative_count", "positive_ratio")
OVERALL_FIELDS = ("threshold", "total_domains", "total_samples")
TABLE_HEADINGS = {
    "train": "Train", "iid_val": "ID Val", "iid_test": "ID Test",
    "ood_val": "OOD Val", "ood_test": "OOD Test",
}


@dataclass(frozen=True)
class SplitStats:
    domain_count: int
    sample_count: int
    positive_count: int
    negative_count: int
    positive_ratio: float


@dataclass(frozen=True)
class StatsReport:
    """Per-split counts plus overall totals.

    ``total_samples`` is the sum over splits. ``total_domains`` counts
    distinct domain keys, since train and the ID splits share domains.
    """

    name: str
    splits: dict
    threshold: float
    total_domains: int
    total_samples: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "splits": {k: asdict(self.splits[k]) for k in SPLIT_NAMES},
            "threshold": self.threshold,
            "total_domains": self.total_domains,
            "total_samples": self.total_samples,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "StatsReport":
        return cls(
            name=raw["name"],
            splits={k: SplitStats(**raw["splits"][k]) for k in SPLIT_NAMES},
            threshold=raw["threshold"],
            total_domains=raw["total_domains"],
            total_samples=raw["total_samples"],
        )


def _split_stats(rows) -> SplitStats:
    """``rows`` yields (domain_key, label) pairs."""
    domains, pos, n = set(), 0, 0
    for key, label in rows:
        domains.add(key)
        pos += label
        n += 1
    # an empty split reports a ratio of 0.0 rather than NaN
    return SplitStats(len(domains), n, pos, n - pos, pos / n if n else 0.0)


def _stats_from_rows(name: str, threshold: float, rows_by_split: dict) -> StatsReport:
    splits = {k: _split_stats(rows_by_split[k]) for k in SPLIT_NAMES}
    keys = {key for k in SPLIT_NAMES for key, _ in rows_by_split[k]}
    return StatsReport(
        name=name,
        splits=splits,
        threshold=threshold,
        total_domains=len(keys),
        total_samples=sum(s.sample_count for s in splits.values()),
    )


def compute_stats(dataset: CuratedDataset) -> StatsReport:
    rows = {k: [(s.domain_key, s.label) for s in dataset.splits[k]] for k in SPLIT_NAMES}
    return _stats_from_rows(dataset.name, dataset.threshold, rows)


# --- rendering -----------------------------------------------------------------

def _render_table(report: StatsReport) -> str:
    name_w = max(len("Data subset"), len(report.name))
    cell = 8
    head1 = "Data subset".ljust(name_w) + "".join(
        f"  {TABLE_HEADINGS[k]:^{2 * cell + 1}}" for k in SPLIT_NAMES)
    head2 = " " * name_w + "".join(f"  {'D#':>{cell}} {'C#':>{cell}}" for _ in SPLIT_NAMES)
    body = report.name.ljust(name_w) + "".join(
        f"  {report.splits[k].domain_count:>{cell}} {report.splits[k].sample_count:>{cell}}"
        for k in SPLIT_NAMES)
    ratio = "positive ratio".ljust(name_w) + "".join(
        f"  {'':>{cell}} {report.splits[k].positive_ratio:>{cell}.4f}" for k in SPLIT_NAMES)
    rule = "-" * len(head1.rstrip())
    footer = (f"threshold {report.threshold!r}; {report.total_domains} domains; "
              f"{report.total_samples} samples")
    return "\n".join(line.rstrip() for line in (head1, head2, rule, body, ratio, rule, footer)) + "\n"


def _render_csv(report: StatsReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("name", "split") + STAT_FIELDS + OVERALL_FIELDS)
    for k in SPLIT_NAMES:
        s = report.splits[k]
        writer.writerow([report.name, k] + [repr(getattr(s, f)) for f in STAT_FIELDS]
                        + [repr(report.threshold), report.total_domains, report.total_samples])
    return buf.getvalue()


def render_stats(report: StatsReport, fmt: str = "json") -> str:
    """Render as "json", "csv" (one row per split) or "table-text"."""
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        return _render_csv(report)
    if fmt in ("table-text", "table", "text"):
        return _render_table(report)
    raise ValueError(f"unknown stats format {fmt!r}")


def parse_stats(text: str, fmt: str = "json") -> StatsReport:
    """Inverse of :func:`render_stats` for the machine formats."""
    if fmt == "json":
        return StatsReport.from_dict(json.loads(text))
    if fmt != "csv":
        raise ValueError(f"cannot parse stats format {fmt!r}")
    rows = list(csv.DictReader(io.StringIO(text)))
    if [r["split"] for r in rows] != list(SPLIT_NAMES):
        raise ValueError("csv stats must hold one row per split in canonical order")
    splits = {
        r["split"]: SplitStats(*(int(r[f]) for f in STAT_FIELDS[:4]), float(r["positive_ratio"]))
        for r in rows
    }
    first = rows[0]
    return StatsReport(first["name"], splits, float(first["threshold"]),
                       int(first["total_domains"]), int(first["total_samples"]))


# --- persistence ------------------------------------------------------------

def sample_line(sample, task: Task) -> str:
    row = {"smiles": sample.smiles}
    if task is Task.SBAP:
        row["protein_sequence"] = sample.protein_sequence
    row.update(
        pvalue=sample.pvalue,
        label=sample.label,
        domain_key=sample.domain_key,
        domain_id=sample.domain_id,
        n_measurements=sample.n_measurements,
        input_key=list(sample.input_key),
    )
    return json.dumps(row, ensure_ascii=True)


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def dataset_metadata(dataset: CuratedDataset) -> dict:
    return {
        "name": dataset.name,
        "task": Task(dataset.task).value,
        "threshold": dataset.threshold,
        "seed": dataset.seed,
        "config_digest": dataset.config_digest,
        "counts": {k: len(dataset.splits[k]) for k in SPLIT_NAMES},
        "tool_version": __version__,
        "format_version": FORMAT_VERSION,
        "warnings": list(dataset.warnings),
    }


def write_dataset(dataset: CuratedDataset, directory: str | os.PathLike, force: bool = False) -> list[Path]:
    """Write the five split files plus metadata, stats and filter report.

    Rewriting a directory produced by the same recipe is allowed; a
    directory holding a different recipe, or unrelated files, needs ``force``.
    """
    out = Path(directory)
    meta_path = out / "metadata.json"
    if out.exists() and not force:
        if meta_path.exists():
            try:
                existing = json.loads(meta_path.read_text(encoding="utf-8")).get("config_digest")
            except (OSError, json.JSONDecodeError, AttributeError):
                existing = None
            if existing != dataset.config_digest:
                raise DatasetExistsError(
                    f"{out} holds a dataset from a different config (digest {existing}); use force to overwrite"
                )
        elif any(out.iterdir()):
            raise DatasetExistsError(f"{out} exists and is not a dataset directory; use force to overwrite")
    out.mkdir(parents=True, exist_ok=True)

    task = Task(dataset.task)
    written = []
    for name in SPLIT_NAMES:
        samples = sorted(dataset.splits[name], key=lambda s: (s.domain_id, s.input_key))
        path = out / f"{name}.jsonl"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for s in samples:
                fh.write(sample_line(s, task) + "\n")
        written.append(path)
    _dump_json(meta_path, dataset_metadata(dataset))
    (out / "stats.json").write_text(render_stats(compute_stats(dataset), "json"), encoding="utf-8")
    _dump_json(out / "filter_report.json", {
        "filter": dataset.filter_report or {},
        "ingest": dataset.ingest_report or {},
    })
    written += [meta_path, out / "stats.json", out / "filter_report.json"]
    return written


@dataclass
class StoredDataset:
    metadata: dict
    splits: dict


def read_dataset(directory: str | os.PathLike) -> StoredDataset:
    out = Path(directory)
    meta_path = out / "metadata.json"
    if not meta_path.is_file():
        raise MissingFileError(f"{meta_path} not found")
    try:
        metadata = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedSchemaError("valid JSON", str(meta_path)) from exc
    for key in ("threshold", "counts", "config_digest", "seed"):
        if key not in metadata:
            raise MalformedSchemaError(key, str(meta_path))
    splits = {}
    for name in SPLIT_NAMES:
        path = out / f"{name}.jsonl"
        if not path.is_file():
            raise MissingFileError(f"{path} not found")
        rows = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError:
                    raise MalformedSchemaError(f"valid JSON on line {lineno}", str(path)) from None
        splits[name] = rows
    return StoredDataset(metadata, splits)


def dataset_problems(stored: StoredDataset) -> list[str]:
    """Every invariant violation found, in a stable order; empty when sound."""
    problems: list[str] = []
    meta = stored.metadata
    threshold = meta["threshold"]
    required = ("smiles", "pvalue", "label", "domain_key", "domain_id", "n_measurements", "input_key")
    for name in SPLIT_NAMES:
        rows = stored.splits[name]
        if meta["counts"].get(name) != len(rows):
            problems.append(f"{name}: metadata count {meta['counts'].get(name)} != {len(rows)} lines")
        for i, row in enumerate(rows):
            missing = [f for f in required if f not in row]
            if missing:
                problems.append(f"{name} line {i + 1}: missing fields {missing}")
                continue
            if row["label"] != int(row["pvalue"] >= threshold):
                problems.append(f"{name} line {i + 1}: label {row['label']} disagrees with threshold {threshold}")

    ids: dict = {}
    seen: dict = {}
    keysets = {name: set() for name in SPLIT_NAMES}
    for name in SPLIT_NAMES:
        for row in stored.splits[name]:
            if "input_key" not in row:
                continue
            key, dom = row["domain_key"], row["domain_id"]
            keysets[name].add(key)
            if ids.setdefault(key, dom) != dom:
                problems.append(f"domain {key!r} carries ids {ids[key]} and {dom}")
            sample = tuple(row["input_key"])
            if sample in seen:
                problems.append(f"sample {list(sample)} appears in both {seen[sample]} and {name}")
            else:
                seen[sample] = name

    side = keysets["train"] | keysets["iid_val"] | keysets["iid_test"]
    pairs = (("train-side", side, "ood_val", keysets["ood_val"]),
             ("train-side", side, "ood_test", keysets["ood_test"]),
             ("ood_val", keysets["ood_val"], "ood_test", keysets["ood_test"]))
    for a, ka, b, kb in pairs:
        shared = sorted(ka & kb)
        if shared:
            problems.append(f"domain {shared[0]!r} leaks between {a} and {b}")
    return problems


def validate_dataset_dir(directory: str | os.PathLike) -> StoredDataset:
    """Re-check the stored dataset; raise on the first violated invariant."""
    stored = read_dataset(directory)
    problems = dataset_problems(stored)
    if problems:
        raise DatasetInvariantError(problems[0])
    return stored


def stats_from_stored(stored: StoredDataset) -> StatsReport:
    rows = {k: [(r["domain_key"], r["label"]) for r in stored.splits[k]] for k in SPLIT_NAMES}
    return _stats_from_rows(stored.metadata.get("name", "dataset"), stored.metadata["threshold"], rows)
