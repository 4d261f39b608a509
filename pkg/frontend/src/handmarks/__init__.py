"""Hand landmark estimation from flatbed scans.

Detects the hand silhouette in a scanned photo and places the 21 standard
hand landmarks (wrist + 4 joints per digit) from silhouette geometry.  The
output JSON matches the landmark schema consumed by the sensor layout
generator.
"""

from .estimator import EstimationError, estimate

__all__ = ["EstimationError", "estimate"]
__version__ = "0.1.0"
