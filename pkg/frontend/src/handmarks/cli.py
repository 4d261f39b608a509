"""Command line interface for landmark extraction.

``handmarks extract <image> <out.json>`` writes a landmark JSON file in the
schema consumed by the sensor layout generator.  On failure an error record
is written instead and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .estimator import EstimationError, estimate


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="handmarks",
        description="Estimate 21 hand landmarks from a flatbed hand scan.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    extract = sub.add_parser("extract", help="extract landmarks from a hand photo")
    extract.add_argument("image", help="input hand photo (any OpenCV-readable format)")
    extract.add_argument("output", help="output landmark JSON path")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.output)
    if not Path(args.image).is_file():
        print(f"error: image not found: {args.image}", file=sys.stderr)
        return 2
    try:
        result = estimate(args.image)
    except EstimationError as exc:
        out.write_text(json.dumps({"error": str(exc)}, indent=1) + "\n")
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out.write_text(json.dumps(result, indent=1) + "\n")
    print(f"wrote {len(result['landmarks'])} landmarks to {out}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
