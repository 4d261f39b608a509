"""handfab: hand-photo to flexible-PCB tactile sensor design toolchain."""

__version__ = "0.1.0"
