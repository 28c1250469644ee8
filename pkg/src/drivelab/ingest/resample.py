"""Stream resampling onto a uniform grid.

Output points lie exactly on segments of the input polyline, never beyond
its ends. Input segments wider than twice the input's nominal period are
treated as gaps: the grid emits nothing inside them.
"""

from __future__ import annotations

from bisect import bisect_left

from ..model import SampledStream

GAP_PERIODS = 2.0


def gap_threshold_ms(rate_hz: float) -> float:
    return GAP_PERIODS * 1000.0 / rate_hz


def find_gaps(samples: list[tuple[int, float]], rate_hz: float) -> list[tuple[int, int]]:
    """Inter-sample spans wider than the gap threshold."""
    thr = gap_threshold_ms(rate_hz)
    return [
        (t1, t2)
        for (t1, _), (t2, _) in zip(samples, samples[1:])
        if t2 - t1 > thr
    ]


def resample(stream: SampledStream, target_hz: float) -> SampledStream:
    if target_hz <= 0:
        raise ValueError(f"target rate must be positive, got {target_hz}")
    if len(stream.samples) < 2:
        raise ValueError("resampling needs at least 2 samples")

    times = [t for t, _ in stream.samples]
    values = [v for _, v in stream.samples]
    first, last = times[0], times[-1]
    step = 1000.0 / target_hz
    thr = gap_threshold_ms(stream.rate_hz)

    out: list[tuple[int, float]] = []
    k = 0
    prev_t: int | None = None
    while True:
        raw = first + k * step
        k += 1
        if raw > last + 1e-9:
            break
        t = round(raw)
        if t > last:
            break
        if t == prev_t:
            continue
        prev_t = t
        i = bisect_left(times, t)
        if i < len(times) and times[i] == t:
            out.append((t, values[i]))
            continue
        lo, hi = i - 1, i
        if times[hi] - times[lo] > thr:
            continue  # inside a gap: emit nothing
        u = (t - times[lo]) / (times[hi] - times[lo])
        out.append((t, values[lo] + u * (values[hi] - values[lo])))

    return SampledStream(
        name=stream.name,
        unit=stream.unit,
        rate_hz=float(target_hz),
        samples=out,
        gaps=find_gaps(stream.samples, stream.rate_hz),
    )
