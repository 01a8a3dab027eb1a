"""Command-line entry point: ``homoverlap <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import __version__, experiments
from .config import RunConfig, load_config
from .countsio import ingest_counts
from .mcsim import Mixing

MANIFEST_NAME = "manifest.json"


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _pairs(text):
    try:
        out = []
        for item in text.split(","):
            a, b = item.split(":")
            out.append((float(a), float(b)))
        return tuple(out)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected pairs like 0.2:0.4,0.6:0.8, got {text!r}")


def _mixing(text):
    aliases = {"density": Mixing.DENSITY_MATRIX, "component": Mixing.PER_PERIOD_COMPONENT}
    try:
        return aliases.get(text) or Mixing(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown mixing mode {text!r}")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value configuration file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--periods", type=int, help="one-second periods per measurement")
    common.add_argument("--out", type=Path, help="artifact directory")
    common.add_argument("--format", choices=("csv", "json"), help="table format")
    common.add_argument("--correct-visibility", type=float, metavar="V",
                        help="divide overlap estimates by this effective visibility")
    common.add_argument("--jobs", type=int, default=1, help="worker threads per scan")

    parser = argparse.ArgumentParser(
        prog="homoverlap",
        description="Simulate beam-splitter measurements of overlap, fidelity and purity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dip", parents=[common], help="coincidence rate versus delay")
    p.add_argument("--delays", type=_floats, default=experiments.DEFAULT_DIP_DELAYS)

    p = sub.add_parser("pure-overlap", parents=[common], help="|V> versus rotated linear state")
    p.add_argument("--thetas", type=_floats, default=experiments.DEFAULT_PURE_THETAS)

    p = sub.add_parser("parallel-perp", parents=[common],
                       help="parallel and perpendicular scans with sin^2(2 theta) fits")
    p.add_argument("--thetas", type=_floats, default=experiments.DEFAULT_PARPERP_THETAS)

    for name, default in (("fidelity", experiments.DEFAULT_FIDELITY_PS),
                          ("purity", experiments.DEFAULT_PURITY_PS)):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--p-grid", type=_floats, default=default)
        p.add_argument("--mixing", type=_mixing, default=Mixing.DENSITY_MATRIX)

    p = sub.add_parser("mixed-table", parents=[common], help="overlap and distance of mixed pairs")
    p.add_argument("--pairs", type=_pairs, default=experiments.DEFAULT_PAIRS)
    p.add_argument("--mixing", type=_mixing, default=Mixing.DENSITY_MATRIX)

    p = sub.add_parser("multimeter", parents=[common], help="programmable multimeter fidelity")
    p.add_argument("--thetas", type=_floats, default=experiments.DEFAULT_PROGRAM_THETAS)
    p.add_argument("--no-compensate-phase", dest="compensate_phase", action="store_false",
                   help="keep the fiber phase on the program arm")

    p = sub.add_parser("ingest", parents=[common], help="estimate from a counts CSV file")
    p.add_argument("path", type=Path)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.periods is not None:
        changes["periods"] = args.periods
    if args.format is not None:
        changes["format"] = args.format
    if args.out is not None:
        changes["output_dir"] = str(args.out)
    else:
        changes["output_dir"] = str(Path(cfg.output_dir) / args.command)
    return cfg.replace(**changes)


def run_command(args, cfg: RunConfig) -> experiments.ExperimentResult:
    cv = args.correct_visibility
    jobs = max(1, args.jobs)
    cmd = args.command
    if cmd == "dip":
        return experiments.run_dip(cfg, args.delays, jobs)
    if cmd == "pure-overlap":
        return experiments.run_pure_overlap(cfg, args.thetas, jobs, cv)
    if cmd == "parallel-perp":
        return experiments.run_parallel_perp(cfg, args.thetas, jobs, cv)
    if cmd == "fidelity":
        return experiments.run_fidelity(cfg, args.p_grid, jobs, cv, args.mixing)
    if cmd == "purity":
        return experiments.run_purity(cfg, args.p_grid, jobs, cv, args.mixing)
    if cmd == "mixed-table":
        return experiments.run_mixed_table(cfg, args.pairs, jobs, cv, args.mixing)
    if cmd == "multimeter":
        return experiments.run_multimeter(cfg, args.thetas, jobs, args.compensate_phase)
    if cmd == "ingest":
        series = ingest_counts(args.path, cfg.shoulder_delay_um, cfg.apparatus())
        result = experiments.analyse_series(series, cfg.seed, cv)
        result.inputs["path"] = str(args.path)
        return result
    raise ValueError(f"unknown command {cmd!r}")


def _dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _format_table(table, fmt):
    if fmt == "json":
        return _dump_json(table.records())
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def render(result, cfg: RunConfig):
    """Map of file name to file contents, manifest included."""
    files = {}
    for name, table in result.tables.items():
        files[f"{name}.{cfg.format}"] = _format_table(table, cfg.format)
    for name, doc in result.documents.items():
        files[f"{name}.json"] = _dump_json(doc)
    manifest = {
        "artifact_files": sorted(files),
        "command": result.command,
        "config_snapshot": cfg.to_dict(),
        "inputs": result.inputs,
        "seed": cfg.seed,
        "tool_version": __version__,
    }
    files[MANIFEST_NAME] = _dump_json(manifest)
    return files


def write_artifacts(files, out_dir) -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(files[name])
        written.append(path)
    return written


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        result = run_command(args, cfg)
        paths = write_artifacts(render(result, cfg), cfg.output_dir)
    except (ValueError, OSError, RuntimeError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"homoverlap {args.command}: error: {msg}", file=sys.stderr)
        return 1
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
