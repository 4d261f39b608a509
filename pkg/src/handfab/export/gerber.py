"""Gerber RS-274X emission and an independent parser for verification.

Writer: mm units, 4.6 coordinate format, circle apertures for trace
draws, G36/G37 region fills (holes via LPC), M02 terminator.  One file
per layer per side: copper .gtl/.gbl, coverlay mask .gts/.gbs, adhesive
.gm2, edge cuts .gm1.

Parser: a from-scratch reader of the subset the writer emits (plus
nothing writer-specific), used to rasterize the files back for the
geometry comparison oracle.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ExportError
from ..layers import BoardDesign
from ._util import atomic_write

SCALE = 10 ** 6               # 4.6 format: 1 unit = 1e-6 mm

LAYER_EXT = {
    ("copper", "front"): "gtl",
    ("copper", "back"): "gbl",
    ("coverlay", "front"): "gts",
    ("coverlay", "back"): "gbs",
    ("adhesive", "front"): "gm2",
    ("adhesive", "back"): "gm2",
    ("edge-cuts", "front"): "gm1",
    ("edge-cuts", "back"): "gm1",
}


def _coord(v: float) -> int:
    return round(v * SCALE)


class _Writer:
    def __init__(self, name: str, bounds_limit=None):
        self.lines = [f"G04 {name}*", "%FSLAX46Y46*%", "%MOMM*%"]
        self.apertures: dict[float, int] = {}
        self.body: list[str] = []
        self.limit = bounds_limit

    def _check(self, x: float, y: float) -> None:
        if self.limit is not None:
            x0, y0, x1, y1 = self.limit
            if not (x0 <= x <= x1 and y0 <= y <= y1):
                raise ExportError(
                    f"coordinate ({x:.3f}, {y:.3f}) outside the page "
                    f"limit {self.limit}")

    def aperture(self, diameter: float) -> int:
        key = round(diameter, 6)
        if key not in self.apertures:
            self.apertures[key] = 10 + len(self.apertures)
        return self.apertures[key]

    def polyline(self, vertices, width: float) -> None:
        code = self.aperture(width)
        self.body.append(f"D{code}*")
        (x0, y0), rest = vertices[0], vertices[1:]
        self._check(x0, y0)
        self.body.append(f"X{_coord(x0)}Y{_coord(y0)}D02*")
        for x, y in rest:
            self._check(x, y)
            self.body.append(f"X{_coord(x)}Y{_coord(y)}D01*")

    def _ring(self, ring) -> None:
        (x0, y0) = ring[0]
        self.body.append("G36*")
        self.body.append(f"X{_coord(x0)}Y{_coord(y0)}D02*")
        for x, y in list(ring[1:]) + [ring[0]]:
            self._check(x, y)
            self.body.append(f"X{_coord(x)}Y{_coord(y)}D01*")
        self.body.append("G37*")

    def region(self, poly) -> None:
        self._ring(poly.exterior)
        for hole in poly.holes:
            self.body.append("%LPC*%")
            self._ring(hole)
            self.body.append("%LPD*%")

    def outline(self, poly, width: float) -> None:
        for ring in [poly.exterior] + list(poly.holes):
            self.polyline(list(ring) + [ring[0]], width)

    def render(self) -> bytes:
        ad = [f"%ADD{code}C,{dia:.6f}*%"
              for dia, code in sorted(self.apertures.items(),
                                      key=lambda kv: kv[1])]
        return ("\n".join(self.lines + ad + ["%LPD*%"] + self.body
                          + ["M02*"]) + "\n").encode()


def _copper_layer(design: BoardDesign, limit) -> bytes:
    w = _Writer(f"{design.side} copper", limit)
    for net in design.routing.nets:
        for pl in net.polylines:
            w.polyline(pl.vertices, pl.width)
        w.region(net.pad)
    for pad in design.routing.anchor_pads:
        w.region(pad)
    return w.render()


def _fill_layer(name: str, polys, limit) -> bytes:
    w = _Writer(name, limit)
    for p in polys:
        w.region(p)
    return w.render()


def _edge_layer(design: BoardDesign, limit) -> bytes:
    w = _Writer(f"{design.side} edge cuts", limit)
    w.outline(design.outer_cut, 0.1)
    for cut in design.inner_cuts:
        w.outline(cut, 0.1)
    return w.render()


def emit_gerber(design: BoardDesign, out_dir, hand_id: str,
                page_w: float, page_h: float) -> dict[str, str]:
    """Write one side's four layer files; returns layer -> file name."""
    out_dir = Path(out_dir)
    limit = (-5.0, -5.0, page_w + 5.0, page_h + 5.0)
    payload = {
        "copper": _copper_layer(design, limit),
        "coverlay": _fill_layer(f"{design.side} coverlay mask",
                                design.coverlay_mask, limit),
        "adhesive": _fill_layer(f"{design.side} adhesive",
                                design.adhesive, limit),
        "edge-cuts": _edge_layer(design, limit),
    }
    files = {}
    for layer, data in payload.items():
        ext = LAYER_EXT[(layer, design.side)]
        name = f"{hand_id}_{design.side}_{layer}.{ext}"
        atomic_write(out_dir / name, data)
        files[layer] = name
    return files


def write_manifest(out_dir, hand_id: str, sides: dict[str, dict[str, str]],
                   extra_files: dict[str, str] | None = None) -> str:
    """Manifest JSON: every emitted file with its sha256."""
    out_dir = Path(out_dir)
    entries = []
    for side in sorted(sides):
        for layer in sorted(sides[side]):
            name = sides[side][layer]
            digest = hashlib.sha256((out_dir / name).read_bytes()).hexdigest()
            entries.append({"side": side, "layer": layer, "file": name,
                            "sha256": digest})
    doc = {"hand_id": hand_id, "files": entries,
           "extra": dict(sorted((extra_files or {}).items()))}
    name = f"{hand_id}_manifest.json"
    atomic_write(out_dir / name,
                 (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode())
    return name


# ---------------------------------------------------------------------------
# independent parser

@dataclass
class GerberStroke:
    width: float
    points: list[tuple[float, float]]


@dataclass
class GerberRegion:
    polarity: str                      # "dark" | "clear"
    points: list[tuple[float, float]]


@dataclass
class GerberImage:
    unit: str = "mm"
    int_digits: int = 4
    frac_digits: int = 6
    apertures: dict[int, float] = field(default_factory=dict)
    strokes: list[GerberStroke] = field(default_factory=list)
    regions: list[GerberRegion] = field(default_factory=list)
    terminated: bool = False


def parse_gerber(path) -> GerberImage:
    """Parse the RS-274X subset used for these boards."""
    img = GerberImage()
    cur_ap: float | None = None
    polarity = "dark"
    in_region = False
    region_pts: list[tuple[float, float]] = []
    pos = (0.0, 0.0)
    stroke: GerberStroke | None = None

    def flush_stroke():
        nonlocal stroke
        if stroke is not None and len(stroke.points) >= 2:
            img.strokes.append(stroke)
        stroke = None

    text = Path(path).read_text()
    tokens = []
    for chunk in text.replace("\n", "").split("%"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if chunk.endswith("*") and (chunk.startswith("FS")
                                    or chunk.startswith("MO")
                                    or chunk.startswith("AD")
                                    or chunk.startswith("LP")):
            tokens.append(("ext", chunk.rstrip("*")))
        else:
            tokens.extend(("cmd", c) for c in chunk.split("*") if c)

    for kind, tok in tokens:
        if kind == "ext":
            if tok.startswith("FSLA"):
                img.int_digits = int(tok[5])
                img.frac_digits = int(tok[6])
            elif tok.startswith("MO"):
                img.unit = tok[2:].lower()
            elif tok.startswith("ADD"):
                body = tok[3:]
                code_end = next(i for i, c in enumerate(body)
                                if not c.isdigit())
                code = int(body[:code_end])
                shape = body[code_end:]
                if not shape.startswith("C,"):
                    raise ExportError(f"unsupported aperture {tok!r}")
                img.apertures[code] = float(shape[2:])
            elif tok.startswith("LP"):
                flush_stroke()
                polarity = "dark" if tok[2] == "D" else "clear"
            continue
        if tok.startswith("G04"):
            continue
        if tok == "G36":
            flush_stroke()
            in_region, region_pts = True, []
            continue
        if tok == "G37":
            if region_pts:
                img.regions.append(GerberRegion(polarity, region_pts))
            in_region, region_pts = False, []
            continue
        if tok == "M02":
            flush_stroke()
            img.terminated = True
            continue
        if tok.startswith("D") and tok[1:].isdigit():
            flush_stroke()
            code = int(tok[1:])
            if code not in img.apertures:
                raise ExportError(f"draw references undefined aperture "
                                  f"D{code}")
            cur_ap = img.apertures[code]
            continue
        if tok.startswith("X"):
            yi = tok.index("Y")
            di = tok.index("D")
            x = int(tok[1:yi]) / 10 ** img.frac_digits
            y = int(tok[yi + 1:di]) / 10 ** img.frac_digits
            op = tok[di:]
            if in_region:
                if op == "D02":
                    region_pts = [(x, y)]
                else:
                    region_pts.append((x, y))
            elif op == "D02":
                flush_stroke()
                pos = (x, y)
            elif op == "D01":
                if cur_ap is None:
                    raise ExportError("draw before aperture selection")
                if stroke is None:
                    stroke = GerberStroke(cur_ap, [pos])
                stroke.points.append((x, y))
                pos = (x, y)
            else:
                raise ExportError(f"unsupported operation {tok!r}")
            continue
        raise ExportError(f"unsupported Gerber token {tok!r}")
    if not img.terminated:
        raise ExportError(f"{path}: missing M02 terminator")
    return img
