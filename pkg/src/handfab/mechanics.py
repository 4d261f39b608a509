"""Laminate bending analysis for flex stackups.

Transformed-section neutral axis, copper fiber stress at a bend radius,
and the minimum bend radius before the conductor exceeds its allowable
stress.  Bending to radius R imposes strain c/R at distance c from the
neutral axis, so conductor stress is E_cu * c / R.
"""

from __future__ import annotations

import csv
import json
import io
from dataclasses import dataclass
from importlib import resources

from .errors import ConfigError

# Empirical durability observations attached to comparison reports as
# annotations; these are reported data, not computed results.
DATA_NOTES = (
    "RA-foil traces endure averaging 330 bends to a tight fist before "
    "failure; wider traces more than double cycle life.",
    "A silicone-embedded RA glove survived 10,000 cycles at a 2.5 mm "
    "bending radius with no observed fractures.",
)


@dataclass(frozen=True)
class Material:
    modulus_gpa: float
    allowable_stress_mpa: float | None = None
    conductor: bool = False


@dataclass(frozen=True)
class Stackup:
    """Ordered bottom-to-top laminate: (material id, thickness um)."""

    name: str
    layers: tuple[tuple[str, float], ...]

    def total_thickness_um(self) -> float:
        return sum(t for _, t in self.layers)


@dataclass(frozen=True)
class BendReport:
    name: str
    neutral_axis_um: float
    copper_fiber_um: float
    min_bend_radius_mm: float
    total_thickness_um: float


def load_materials(path=None) -> dict[str, Material]:
    if path is None:
        raw = resources.files("handfab.data").joinpath("materials.json").read_text()
    else:
        raw = open(path).read()
    doc = json.loads(raw)
    out = {}
    for mid, spec in doc["materials"].items():
        out[mid] = Material(
            modulus_gpa=float(spec["modulus_gpa"]),
            allowable_stress_mpa=spec.get("allowable_stress_mpa"),
            conductor=bool(spec.get("conductor", False)),
        )
    return out


def load_stackups(path=None) -> list[Stackup]:
    if path is None:
        raw = resources.files("handfab.data").joinpath("stackups.json").read_text()
    else:
        raw = open(path).read()
    doc = json.loads(raw)
    out = []
    for s in doc["stackups"]:
        layers = tuple((mid, float(t)) for mid, t in s["layers"])
        out.append(Stackup(name=s["name"], layers=layers))
    return out


def _check(stackup: Stackup, materials: dict[str, Material]) -> None:
    conductors = 0
    for mid, t in stackup.layers:
        if mid not in materials:
            raise ConfigError(f"stackup {stackup.name!r}: unknown material {mid!r}")
        if t <= 0:
            raise ConfigError(f"stackup {stackup.name!r}: non-positive thickness for {mid}")
        if materials[mid].conductor:
            conductors += 1
    if conductors != 1:
        raise ConfigError(
            f"stackup {stackup.name!r}: expected exactly one conductor layer, found {conductors}")


def neutral_axis(stackup: Stackup, materials: dict[str, Material]) -> float:
    """Transformed-section neutral axis, um from the bottom surface."""
    _check(stackup, materials)
    y = 0.0
    et = 0.0
    ety = 0.0
    for mid, t in stackup.layers:
        e = materials[mid].modulus_gpa
        ety += e * t * (y + t / 2.0)
        et += e * t
        y += t
    return ety / et


def copper_fiber_distance(stackup: Stackup, materials: dict[str, Material]) -> float:
    """Max distance (um) of either conductor surface from the neutral axis."""
    nb = neutral_axis(stackup, materials)
    y = 0.0
    for mid, t in stackup.layers:
        if materials[mid].conductor:
            return max(abs(nb - y), abs(nb - (y + t)))
        y += t
    raise ConfigError(f"stackup {stackup.name!r} has no conductor layer")


def fiber_stress(stackup: Stackup, materials: dict[str, Material], radius_mm: float) -> float:
    """Conductor stress (MPa) when bent to the given centreline radius."""
    if radius_mm <= 0:
        raise ConfigError(f"bend radius must be positive, got {radius_mm}")
    c_um = copper_fiber_distance(stackup, materials)
    e_mpa = _conductor(stackup, materials).modulus_gpa * 1e3
    return e_mpa * (c_um * 1e-3) / radius_mm


def min_bend_radius(stackup: Stackup, materials: dict[str, Material]) -> float:
    """Smallest radius (mm) before conductor stress reaches its allowable."""
    mat = _conductor(stackup, materials)
    if mat.allowable_stress_mpa is None:
        raise ConfigError(
            f"stackup {stackup.name!r}: conductor has no allowable stress configured")
    c_um = copper_fiber_distance(stackup, materials)
    return mat.modulus_gpa * 1e3 * (c_um * 1e-3) / mat.allowable_stress_mpa


def _conductor(stackup: Stackup, materials: dict[str, Material]) -> Material:
    _check(stackup, materials)
    for mid, _ in stackup.layers:
        if materials[mid].conductor:
            return materials[mid]
    raise ConfigError("unreachable")


def compare_stackups(stackups, materials) -> tuple[list[BendReport], tuple[str, ...]]:
    """Per-stackup bend report, sorted by min bend radius (worst first)."""
    if not stackups:
        raise ConfigError("no stackups to compare")
    reports = []
    for s in stackups:
        reports.append(BendReport(
            name=s.name,
            neutral_axis_um=neutral_axis(s, materials),
            copper_fiber_um=copper_fiber_distance(s, materials),
            min_bend_radius_mm=min_bend_radius(s, materials),
            total_thickness_um=s.total_thickness_um(),
        ))
    reports.sort(key=lambda r: -r.min_bend_radius_mm)
    return reports, DATA_NOTES


def report_text(reports, notes) -> str:
    lines = []
    lines.append(f"{'stackup':<28} {'neutral axis':>12} {'fiber c':>9} {'R_min':>8}")
    lines.append(f"{'':<28} {'(um)':>12} {'(um)':>9} {'(mm)':>8}")
    lines.append("-" * 60)
    for r in reports:
        lines.append(f"{r.name:<28} {r.neutral_axis_um:>12.2f} "
                     f"{r.copper_fiber_um:>9.3f} {r.min_bend_radius_mm:>8.2f}")
    lines.append("")
    lines.append("data notes (reported measurements, not computed):")
    for n in notes:
        lines.append(f"  - {n}")
    return "\n".join(lines) + "\n"


def report_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["stackup", "neutral_axis_um", "copper_fiber_um",
                "min_bend_radius_mm", "total_thickness_um"])
    for r in reports:
        w.writerow([r.name, f"{r.neutral_axis_um:.4f}", f"{r.copper_fiber_um:.4f}",
                    f"{r.min_bend_radius_mm:.4f}", f"{r.total_thickness_um:.4f}"])
    return buf.getvalue()
