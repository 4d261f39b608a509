"""Command-line entry point.

Subcommands:
  generate         photo + landmarks -> fabrication file set
  analyze-stackup  laminate bend-radius comparison (table, CSV, figure)
  simulate         press-script -> crossbar frame stream + peak summary
  analyze-frames   frame stream + press intervals -> heatmaps + CSV

Exit codes: 0 success, 1 pipeline/invariant failure (stage-tagged on
stderr), 2 usage or input error.  Config precedence: CLI flag > config
file > built-in default.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import mechanics, pipeline, readout
from .config import load_config
from .errors import (AssemblyError, CalibrationError, ConfigError,
                     ExportError, GeometryError, HandfabError, RoutingError,
                     SchemaError, SegmentationError, SimulationError,
                     SynthesisError)

log = logging.getLogger("handfab")

_STAGE = {
    CalibrationError: "capture",
    SegmentationError: "capture",
    SchemaError: "input",
    SynthesisError: "layout",
    RoutingError: "routing",
    AssemblyError: "layers",
    ExportError: "export",
    SimulationError: "simulate",
    GeometryError: "geometry",
    ConfigError: "config",
}


class UsageError(Exception):
    """Invalid invocation or unreadable input (exit code 2)."""


def _stage_of(exc: HandfabError) -> str:
    for cls, stage in _STAGE.items():
        if isinstance(exc, cls):
            return stage
    return "pipeline"


def _require_file(path: str, label: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{label}: file not found: {path}")
    return p


def _load_cfg(args):
    overrides = {}
    for item in getattr(args, "set", None) or []:
        try:
            dotted, value = item.split("=", 1)
            section, key = dotted.split(".", 1)
        except ValueError:
            raise UsageError(f"--set expects section.key=value, got {item!r}")
        overrides.setdefault(section, {})[key] = json.loads(value)
    path = getattr(args, "config", None)
    if path is not None:
        _require_file(path, "config")
    return load_config(path, overrides or None)


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args) -> int:
    image = _require_file(args.image, "image")
    landmarks = _require_file(args.landmarks, "landmarks")
    cfg = _load_cfg(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    existing = set(p.name for p in out.iterdir())
    try:
        pipeline.generate(image, landmarks, out, cfg, hand_id=args.hand_id)
    except Exception:
        for p in out.iterdir():
            if p.name not in existing and p.is_file():
                p.unlink()
        raise
    log.info("wrote fabrication set to %s", out)
    return 0


# ---------------------------------------------------------------------------
# analyze-stackup


def cmd_analyze_stackup(args) -> int:
    materials = mechanics.load_materials(args.materials)
    stackups = mechanics.load_stackups(args.stackups)
    try:
        reports, notes = mechanics.compare_stackups(stackups, materials)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(mechanics.report_text(reports, notes))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "stackups.csv").write_text(mechanics.report_csv(reports))
        _stackup_figure(reports, out / "stackups.png")
        log.info("wrote stackups.csv and stackups.png to %s", out)
    return 0


def _stackup_figure(reports, path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    names = [r.name for r in reports]
    radii = [r.min_bend_radius_mm for r in reports]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.barh(names, radii, color="#4a7ab5")
    ax.set_xlabel("minimum bend radius (mm)")
    ax.invert_yaxis()
    for y, r in enumerate(radii):
        ax.text(r, y, f" {r:.1f}", va="center")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# simulate


DEFAULT_TAXELS = {
    "all": [[i, j] for i in range(16) for j in range(16)],
    "center": [[i, j] for i in range(6, 10) for j in range(6, 10)],
}


def cmd_simulate(args) -> int:
    cfg = _load_cfg(args)
    if args.taxels:
        taxel_path = _require_file(args.taxels, "taxels")
        raw = json.loads(taxel_path.read_text())
    else:
        raw = DEFAULT_TAXELS
    taxel_map = {name: [tuple(t) for t in taxels]
                 for name, taxels in raw.items()}
    script_path = _require_file(args.script, "script")
    script = readout.load_script(script_path)
    frames = readout.press_script(taxel_map, script, cfg.readout)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "frames.jsonl").write_text(readout.frames_to_jsonl(frames))
    peaks = readout.detect_peaks(frames)
    _peaks_outputs(frames, peaks, out)
    log.info("wrote %d frames (%d peaks) to %s", len(frames), len(peaks), out)
    return 0


def _peaks_outputs(frames, peaks, out: Path) -> None:
    import csv as _csv
    import io as _io

    means = [float(f.counts.mean()) for f in frames]
    buf = _io.StringIO()
    w = _csv.writer(buf, lineterminator="\n")
    w.writerow(["peak", "frame", "t", "max_count", "mean_count"])
    for k, idx in enumerate(peaks):
        w.writerow([k, idx, f"{frames[idx].timestamp:.4f}",
                    int(frames[idx].counts.max()), f"{means[idx]:.3f}"])
    (out / "peaks.csv").write_text(buf.getvalue())

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    times = [f.timestamp for f in frames]
    fig, ax = plt.subplots(figsize=(8, 3))
    ax.plot(times, means, lw=0.8)
    ax.plot([times[i] for i in peaks], [means[i] for i in peaks],
            "r.", ms=4)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("mean count")
    fig.tight_layout()
    fig.savefig(out / "peaks.png", dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# analyze-frames


def cmd_analyze_frames(args) -> int:
    frames_path = _require_file(args.frames, "frames")
    presses_path = _require_file(args.presses, "presses")
    frames = readout.frames_from_jsonl(frames_path)
    try:
        raw = json.loads(presses_path.read_text())
        presses = [(float(a), float(b)) for a, b in raw]
    except (ValueError, TypeError) as exc:
        raise UsageError(f"presses: malformed interval list: {exc}") from exc
    stats = readout.press_window_stats(frames, presses)
    files = readout.write_stats(stats, args.out)
    log.info("wrote %d analytics files to %s", len(files), args.out)
    return 0


# ---------------------------------------------------------------------------
# parser / dispatch


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="handfab",
        description="Hand-conforming tactile-sensor design toolchain")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for any randomized behavior (default 0)")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="info-level logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="photo -> fabrication files")
    p.add_argument("--image", required=True, help="hand photo on the "
                   "reference sheet")
    p.add_argument("--landmarks", required=True, help="21-landmark JSON")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="override one config value (repeatable)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--hand-id", help="basename for output files")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("analyze-stackup", help="laminate bend analysis")
    p.add_argument("--stackups", help="stackup definitions JSON "
                   "(default: bundled designs)")
    p.add_argument("--materials", help="materials JSON (default: bundled)")
    p.add_argument("--out", help="directory for CSV + figure")
    p.set_defaults(func=cmd_analyze_stackup)

    p = sub.add_parser("simulate", help="press script -> frame stream")
    p.add_argument("--script", required=True, help="press script JSON")
    p.add_argument("--taxels", help="region -> [[row, col], ...] JSON map "
                   "(default: built-in full/center regions)")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                   help="override one config value (repeatable)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze-frames", help="press-window analytics")
    p.add_argument("--frames", required=True, help="JSON-lines frame stream")
    p.add_argument("--presses", required=True,
                   help="JSON list of [t_start, t_end] press intervals")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_analyze_frames)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code or 0)
    logging.basicConfig(
        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
        level=logging.INFO if args.verbose else logging.WARNING)
    random.seed(args.seed)
    np.random.seed(args.seed % (2 ** 32))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, ConfigError) as exc:
        print(f"error [{_stage_of(exc)}]: {exc}", file=sys.stderr)
        return 2
    except HandfabError as exc:
        print(f"error [{_stage_of(exc)}]: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
