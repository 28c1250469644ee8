import logging
import math
import random

import pytest

from drivelab.ingest import detect_outliers, quantile_type7, resample
from drivelab.model import SampledStream


def _stream(values, dt=250, rate=4.0, name="eda"):
    return SampledStream(name=name, unit="uS", rate_hz=rate, samples=[(i * dt, float(v)) for i, v in enumerate(values)])


# -- outliers -----------------------------------------------------------------


def _oracle_quantile(sorted_vals, p):
    # independent type-7: h = (n-1)p, linear interpolation of order stats
    n = len(sorted_vals)
    h = (n - 1) * p
    lo = int(math.floor(h))
    hi = min(lo + 1, n - 1)
    return sorted_vals[lo] * (1 - (h - lo)) + sorted_vals[hi] * (h - lo)


def _oracle_marks(stream):
    vals = sorted(v for _, v in stream.samples)
    q1 = _oracle_quantile(vals, 0.25)
    q3 = _oracle_quantile(vals, 0.75)
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    out = []
    for t, v in stream.samples:
        if v < lo:
            out.append((t, v, "low"))
        elif v > hi:
            out.append((t, v, "high"))
    return out


def test_hand_computed_case():
    # [1,2,3,4,100]: Q1 = 2, Q3 = 4, IQR = 2, fences [-1, 7]
    s = _stream([1, 2, 3, 4, 100])
    assert quantile_type7(s.values(), 0.25) == 2.0
    assert quantile_type7(s.values(), 0.75) == 4.0
    marks = detect_outliers(s)
    assert len(marks) == 1
    assert marks[0].value == 100.0 and marks[0].fence == "high" and marks[0].t == 1000


def test_constant_stream_has_no_marks():
    assert detect_outliers(_stream([5, 5, 5, 5])) == []


def test_too_few_samples_warns_and_returns_empty(caplog):
    with caplog.at_level(logging.WARNING):
        assert detect_outliers(_stream([1, 2, 3])) == []
    assert any("need >= 4" in r.message for r in caplog.records)


def test_outliers_match_bruteforce_oracle():
    rng = random.Random(123)
    for _ in range(300):
        n = rng.randint(4, 400)
        values = [rng.gauss(0, 1) for _ in range(n)]
        for _ in range(rng.randint(0, 4)):
            values[rng.randrange(n)] = rng.gauss(0, 20)
        s = _stream(values)
        got = [(m.t, m.value, m.fence) for m in detect_outliers(s)]
        assert got == _oracle_marks(s)


# -- resample -----------------------------------------------------------------


def test_linear_resample_example():
    s = SampledStream(name="x", rate_hz=1.0, samples=[(0, 0.0), (1000, 10.0)])
    out = resample(s, 4.0)
    assert out.samples == [(0, 0.0), (250, 2.5), (500, 5.0), (750, 7.5), (1000, 10.0)]


def test_resample_identity_at_original_rate():
    s = _stream([1, 2, 3, 4, 5, 6], dt=250, rate=4.0)
    out = resample(s, 4.0)
    assert out.samples == s.samples


def test_resample_never_extrapolates():
    s = SampledStream(name="x", rate_hz=2.0, samples=[(100, 1.0), (600, 2.0), (1100, 3.0)])
    out = resample(s, 3.0)
    assert out.samples[0][0] >= 100
    assert out.samples[-1][0] <= 1100


def test_resample_points_lie_on_input_segments():
    rng = random.Random(9)
    for _ in range(50):
        times = sorted(rng.sample(range(0, 20_000), rng.randint(2, 40)))
        samples = [(t, rng.uniform(-5, 5)) for t in times]
        rate_in = 1000.0 / max(1.0, (times[-1] - times[0]) / max(1, len(times) - 1))
        s = SampledStream(name="x", rate_hz=rate_in, samples=samples)
        out = resample(s, rng.choice([1.0, 3.0, 7.5, 30.0]))
        for t, v in out.samples:
            lo = max(i for i, (ti, _) in enumerate(samples) if ti <= t)
            if samples[lo][0] == t:
                assert v == samples[lo][1]
                continue
            hi = lo + 1
            t1, v1 = samples[lo]
            t2, v2 = samples[hi]
            expect = v1 + (t - t1) / (t2 - t1) * (v2 - v1)
            assert v == pytest.approx(expect, abs=1e-9)


def test_resample_skips_gap_regions():
    # nominal period 250 ms; 2000 ms hole is a gap
    samples = [(0, 0.0), (250, 1.0), (500, 2.0), (2500, 3.0), (2750, 4.0)]
    s = SampledStream(name="x", rate_hz=4.0, samples=samples)
    out = resample(s, 4.0)
    ts = [t for t, _ in out.samples]
    assert 1500 not in ts and 1000 not in ts
    assert (500 in ts) and (2500 in ts)  # gap edges are real samples
    assert out.gaps == [(500, 2500)]


def test_resample_rejects_bad_rate():
    s = _stream([1, 2])
    with pytest.raises(ValueError):
        resample(s, 0.0)
    with pytest.raises(ValueError):
        resample(s, -2.0)
