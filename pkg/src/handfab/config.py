"""Central configuration for the design pipeline.

All tunable constants live here with their built-in defaults.  A JSON config
file can override any field, and the CLI can override on top of that
(flag > file > default).
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from .errors import ConfigError

MM_PER_INCH = 25.4


@dataclass(frozen=True)
class CaptureConfig:
    """Sheet calibration and hand-segmentation parameters."""
    sheet_width_in: float = 8.5
    sheet_height_in: float = 11.0
    # HSV skin band (OpenCV ranges: H 0-179, S/V 0-255).  Broad default;
    # tune per lighting setup.
    hsv_lo: tuple[int, int, int] = (0, 40, 60)
    hsv_hi: tuple[int, int, int] = (25, 255, 255)
    min_mask_area_mm2: float = 2000.0
    # luminance percentile used to find the bright reference sheet
    sheet_percentile: float = 90.0
    # contour simplification / densification (mm)
    contour_tolerance: float = 0.1
    contour_max_spacing: float = 1.0

    @property
    def sheet_width_mm(self) -> float:
        return self.sheet_width_in * MM_PER_INCH

    @property
    def sheet_height_mm(self) -> float:
        return self.sheet_height_in * MM_PER_INCH


@dataclass(frozen=True)
class LayoutConfig:
    """Sensing-region and electrode placement parameters."""
    finger_pad_grid: tuple[int, int] = (3, 2)      # rows, cols
    thumb_top_grid: tuple[int, int] = (4, 3)
    thumb_mid_grid: tuple[int, int] = (4, 2)
    palm_grid: tuple[int, int] = (7, 11)
    trace_width: float = 0.1                       # mm
    min_pitch: float = 0.3                         # mm, densest legal sampling
    edge_clearance: float = 0.5                    # mm, copper to board edge
    # proximal-region length as a fraction of the MCP->PIP segment,
    # index / middle / ring / little
    proximal_ratios: tuple[float, float, float, float] = (0.45, 0.46, 0.46, 0.44)
    # palm vertices sit at this fraction of the distance from each anchor
    # landmark to the hand contour
    palm_projection: float = 0.85
    min_segment_length: float = 2.0                # mm


@dataclass(frozen=True)
class RoutingConfig:
    """Contour-ring routing and connector parameters."""
    trace_width: float = 0.1        # mm
    ring_pitch: float = 0.2         # mm
    ring_count: int = 16
    clearance: float = 0.1          # mm, between distinct nets
    edge_clearance: float = 0.5     # mm
    # connector: generic 16-pin 0.5 mm pitch FFC receptacle footprint
    pad_width: float = 0.3          # mm
    pad_length: float = 1.5         # mm
    pad_pitch: float = 0.5          # mm
    pin_count: int = 16
    anchor_pad_size: float = 1.2    # mm, square mechanical anchors
    # front connector sits this far along the wrist from the back one
    connector_offset: float = 6.0   # mm
    # half-width of the ring opening at the wrist
    gap_half_width: float = 6.0     # mm


@dataclass(frozen=True)
class LayerConfig:
    """Coverlay / adhesive / edge-cut construction parameters."""
    coverlay_inset: float = 6.0       # mm, contour inward offset for the mask
    cut_copper_margin: float = 0.5    # mm, copper dilation before subtraction
    cut_min_area: float = 0.5         # mm^2, sliver filter on inner cuts
    kerf_inset: float = 0.1           # mm, laser kerf compensation


@dataclass(frozen=True)
class ReadoutConfig:
    """Zero-potential scan circuit and frame-stream parameters."""
    rows: int = 16
    cols: int = 16
    v_drive: float = 1.0       # V
    r_feedback: float = 1000.0 # ohm
    r_off: float = 1200.0      # ohm, unpressed sheet resistance
    adc_bits: int = 12
    full_scale: float = 2.2    # V, matches the readout board's ADC span
    frame_rate: float = 50.0 / 1.3  # Hz (50-frame window spans 1.3 s)
    # piezoresistive response: two log-linear segments, approximate
    # read-offs from the characterization plot axes
    r_at_zero: float = 1200.0      # ohm at 0 N
    r_at_break: float = 650.0      # ohm at the breakpoint force
    r_at_max: float = 500.0        # ohm at full load
    break_force: float = 50.0      # N
    max_force: float = 200.0       # N
    hysteresis: float = 40.0       # ohm added on unloading


@dataclass(frozen=True)
class DesignConfig:
    """Top-level bundle handed to the pipeline."""
    capture: CaptureConfig = field(default_factory=CaptureConfig)
    layout: LayoutConfig = field(default_factory=LayoutConfig)
    routing: RoutingConfig = field(default_factory=RoutingConfig)
    layers: LayerConfig = field(default_factory=LayerConfig)
    readout: ReadoutConfig = field(default_factory=ReadoutConfig)


_SECTIONS = {
    "capture": CaptureConfig,
    "layout": LayoutConfig,
    "routing": RoutingConfig,
    "layers": LayerConfig,
    "readout": ReadoutConfig,
}


def _apply(section_cls, base, overrides: dict):
    valid = {f.name for f in dataclasses.fields(section_cls)}
    bad = set(overrides) - valid
    if bad:
        raise ConfigError(f"unknown config keys: {sorted(bad)}")
    coerced = {}
    for key, value in overrides.items():
        if isinstance(value, list):
            value = tuple(value)
        coerced[key] = value
    return dataclasses.replace(base, **coerced)


def load_config(path: str | None = None,
                overrides: dict | None = None) -> DesignConfig:
    """Build a DesignConfig from defaults, an optional JSON file, and an
    optional override mapping (applied last, e.g. from CLI flags).

    The file/override format is ``{"section": {"key": value, ...}, ...}``.
    """
    cfg = DesignConfig()
    for source in (path, overrides):
        if source is None:
            continue
        if isinstance(source, str):
            try:
                with open(source) as fh:
                    data = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config file: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed config file: {exc}") from exc
        else:
            data = source
        if not isinstance(data, dict):
            raise ConfigError("config root must be an object")
        updates = {}
        for name, section in data.items():
            if name not in _SECTIONS:
                raise ConfigError(f"unknown config section: {name!r}")
            if not isinstance(section, dict):
                raise ConfigError(f"config section {name!r} must be an object")
            updates[name] = _apply(_SECTIONS[name], getattr(cfg, name), section)
        cfg = dataclasses.replace(cfg, **updates)
    return cfg
