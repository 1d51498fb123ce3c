"""Command-line entry point: curate, presets, stats, synth, validate.

Exit status: 0 success, 2 config error, 3 source error, 4 empty dataset,
5 dataset invariant violation, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import tempfile
from pathlib import Path

from .config import SourceSpec, list_presets, load_config, parse_preset_id, resolve_preset
from .errors import ConfigError, CurationError
from .ingest import SourceKind, SyntheticSpec, generate_synthetic_source, open_source, write_relational_export
from .pipeline import curate
from .report import compute_stats, render_stats, stats_from_stored, validate_dataset_dir, write_dataset

log = logging.getLogger("oodcurator")


class _Parser(argparse.ArgumentParser):
    """Usage errors are config errors (exit 2), reported on stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def _source_spec(path: str, kind: str | None) -> SourceSpec:
    return SourceSpec(path, SourceKind(kind)) if kind else SourceSpec.infer(path)


def cmd_curate(args) -> int:
    if args.config:
        cfg = load_config(args.config)
    else:
        pid = parse_preset_id(args.preset)
        cfg = resolve_preset(pid.task, pid.noise_level, pid.measurement_type, pid.domain)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    if args.source:
        source = _source_spec(args.source, args.source_kind)
    elif cfg.source is not None:
        source = cfg.source
    else:
        raise ConfigError("no source: pass --source or set one in the config")
    handle = open_source(source.path, source.kind)
    dataset = curate(cfg, handle, jobs=args.jobs)
    out = Path(args.out if args.out else cfg.save_dir) / dataset.name
    write_dataset(dataset, out, force=args.force)
    for warning in dataset.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {out}", file=sys.stderr)
    sys.stdout.write(render_stats(compute_stats(dataset), args.format))
    return 0


def cmd_presets(args) -> int:
    for preset in list_presets():
        print(preset.dataset_name if args.names else str(preset))
    return 0


def cmd_stats(args) -> int:
    stored = validate_dataset_dir(args.dir)
    sys.stdout.write(render_stats(stats_from_stored(stored), args.format))
    return 0


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_assays=args.n_assays,
        molecules_per_assay=tuple(args.molecules_per_assay),
        measurement_types=tuple(args.measurement_types),
        n_targets=args.n_targets,
        n_molecules=args.n_molecules,
    )
    out = Path(args.out)
    if args.format == "jsonl":
        manifest = generate_synthetic_source(spec, args.seed, out)
    else:
        with tempfile.TemporaryDirectory() as tmp:
            flat = Path(tmp) / "rows.jsonl"
            manifest = generate_synthetic_source(spec, args.seed, flat)
            with open(flat, encoding="utf-8") as fh:
                write_relational_export([json.loads(line) for line in fh], out)
    print(f"wrote {manifest.rows} rows to {out}", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    stored = validate_dataset_dir(args.dir)
    total = sum(len(rows) for rows in stored.splits.values())
    print(f"ok: {args.dir} ({total} samples)", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oodcurator", description="Curate domain-shifted bioactivity benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("curate", help="run a recipe and write the dataset")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--config", help="JSON or YAML recipe file")
    which.add_argument("--preset", help="preset id, e.g. lbap,core,IC50,assay or lbap-core-ic50-assay")
    p.add_argument("--source", help="activity source (.jsonl flat dump or .db/.sqlite export)")
    p.add_argument("--source-kind", choices=[k.value for k in SourceKind if k is not SourceKind.SYNTHETIC])
    p.add_argument("--out", help="parent directory for the dataset (default: the config's save_dir)")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for molecule analysis")
    p.add_argument("--force", action="store_true", help="overwrite a dataset from a different recipe")
    p.add_argument("--format", default="table-text", choices=["table-text", "json", "csv"])
    p.set_defaults(func=cmd_curate)

    p = sub.add_parser("presets", help="list the built-in presets")
    p.add_argument("--names", action="store_true", help="print dataset names instead of comma ids")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("stats", help="print statistics of a written dataset")
    p.add_argument("--dir", required=True)
    p.add_argument("--format", default="table-text", choices=["table-text", "json", "csv"])
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("synth", help="generate a synthetic activity source")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="jsonl", choices=["jsonl", "sqlite"])
    p.add_argument("--n-assays", type=int, default=SyntheticSpec.n_assays)
    p.add_argument("--n-molecules", type=int, default=SyntheticSpec.n_molecules)
    p.add_argument("--n-targets", type=int, default=SyntheticSpec.n_targets)
    p.add_argument("--molecules-per-assay", type=int, nargs=2, metavar=("LO", "HI"),
                   default=list(SyntheticSpec.molecules_per_assay))
    p.add_argument("--measurement-types", nargs="+", default=list(SyntheticSpec.measurement_types))
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", help="re-check the invariants of a written dataset")
    p.add_argument("--dir", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else ConfigError.exit_code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CurationError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error (io): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
