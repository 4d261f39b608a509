"""Fabrication output emitters: SVG previews, Gerber layers, BOM."""
from .bom import bom_csv, bom_lines, bom_text
from .gerber import emit_gerber, parse_gerber
from .svgout import emit_svg

__all__ = ["bom_csv", "bom_lines", "bom_text", "emit_gerber",
           "parse_gerber", "emit_svg"]
