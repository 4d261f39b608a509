"""SVG preview emitter: one file per side, four named layer groups."""
from __future__ import annotations

from pathlib import Path

from ..layers import BoardDesign
from ._util import atomic_write, fmt

LAYER_COLORS = {
    "copper": "#b87333",
    "coverlay": "#1b5e20",
    "adhesive": "#9aa7b0",
    "edge-cuts": "#111111",
}


def _path_d(poly) -> str:
    rings = [poly.exterior] + list(poly.holes)
    parts = []
    for ring in rings:
        coords = " L ".join(f"{fmt(x, 4)} {fmt(y, 4)}" for x, y in ring)
        parts.append(f"M {coords} Z")
    return " ".join(parts)


def _group(name: str, polys, fill: str, stroke: str | None = None) -> str:
    style = (f'fill="{fill}" fill-rule="evenodd"' if stroke is None else
             f'fill="none" stroke="{stroke}" stroke-width="0.1"')
    paths = "\n".join(f'    <path d="{_path_d(p)}"/>' for p in polys)
    return f'  <g id="{name}" {style}>\n{paths}\n  </g>'


def emit_svg(design: BoardDesign, path, page_w: float,
             page_h: float) -> None:
    """Write one side's preview.  mm user units, origin bottom-left with
    y up (wrapped in a flip transform), deterministic bytes."""
    groups = [
        _group("copper", design.copper, LAYER_COLORS["copper"]),
        _group("coverlay", design.coverlay_mask, LAYER_COLORS["coverlay"]),
        _group("adhesive", design.adhesive, LAYER_COLORS["adhesive"]),
        _group("edge-cuts", [design.outer_cut] + list(design.inner_cuts),
               "none", stroke=LAYER_COLORS["edge-cuts"]),
    ]
    body = "\n".join(groups)
    svg = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{fmt(page_w, 2)}mm" height="{fmt(page_h, 2)}mm" '
        f'viewBox="0 0 {fmt(page_w, 2)} {fmt(page_h, 2)}">\n'
        f'<g transform="translate(0,{fmt(page_h, 2)}) scale(1,-1)">\n'
        f'{body}\n'
        '</g>\n'
        '</svg>\n'
    )
    atomic_write(Path(path), svg.encode())
