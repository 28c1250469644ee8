"""1.5xIQR outlier marking on sampled streams.

Quantiles use linear interpolation of order statistics (type 7,
h = (n-1)p) so results are reproducible across implementations.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from ..model import SampledStream

log = logging.getLogger(__name__)

IQR_FACTOR = 1.5


@dataclass
class OutlierMark:
    stream_name: str
    t: int
    value: float
    fence: str  # "low" | "high"

    def to_json(self) -> dict:
        return {"stream_name": self.stream_name, "t": int(self.t), "value": float(self.value), "fence": self.fence}


def quantile_type7(values: list[float], p: float) -> float:
    """Type-7 quantile of unsorted values, 0 <= p <= 1."""
    xs = sorted(values)
    n = len(xs)
    if n == 0:
        raise ValueError("quantile of empty sequence")
    h = (n - 1) * p
    lo = math.floor(h)
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return xs[lo] + frac * (xs[hi] - xs[lo])


def detect_outliers(stream: SampledStream) -> list[OutlierMark]:
    """Samples strictly outside [Q1 - 1.5*IQR, Q3 + 1.5*IQR]."""
    if len(stream.samples) < 4:
        log.warning("stream %r has %d samples, need >= 4 for outlier fences", stream.name, len(stream.samples))
        return []
    values = stream.values()
    q1 = quantile_type7(values, 0.25)
    q3 = quantile_type7(values, 0.75)
    iqr = q3 - q1
    lo = q1 - IQR_FACTOR * iqr
    hi = q3 + IQR_FACTOR * iqr
    marks = []
    for t, v in stream.samples:
        if v < lo:
            marks.append(OutlierMark(stream.name, t, v, "low"))
        elif v > hi:
            marks.append(OutlierMark(stream.name, t, v, "high"))
    return marks
