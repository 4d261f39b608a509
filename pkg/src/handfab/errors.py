"""Exception types raised by the handfab pipeline stages."""


class HandfabError(Exception):
    """Base class for all pipeline errors."""


class GeometryError(HandfabError):
    """Invalid polygon/polyline input or degenerate geometric operation."""


class CalibrationError(HandfabError):
    """Sheet detection or px-to-mm scale estimation failed."""


class SegmentationError(HandfabError):
    """Hand mask extraction failed."""


class SchemaError(HandfabError):
    """An input file does not match its documented schema."""


class SynthesisError(HandfabError):
    """Sensing-region or electrode construction failed."""


class RoutingError(HandfabError):
    """Connecting-trace routing failed or violated clearance."""


class AssemblyError(HandfabError):
    """Board layer assembly violated a design invariant."""


class ExportError(HandfabError):
    """Fabrication file emission failed."""


class ConfigError(HandfabError):
    """Invalid configuration value."""


class SimulationError(HandfabError):
    """Invalid crossbar state, press script, or frame analytics input."""
