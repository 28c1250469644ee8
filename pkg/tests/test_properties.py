"""Property tests over the numeric core invariants."""

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from drivelab.geoscene.path import wrap_angle_deg
from drivelab.ingest import detect_outliers, quantile_type7, resample
from drivelab.model import SampledStream
from drivelab.quat import hemisphere_mean, qdot, qnormalize, slerp

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@st.composite
def streams(draw):
    n = draw(st.integers(min_value=2, max_value=120))
    values = draw(st.lists(finite, min_size=n, max_size=n))
    deltas = draw(st.lists(st.integers(min_value=1, max_value=400), min_size=n - 1, max_size=n - 1))
    ts = [0]
    for d in deltas:
        ts.append(ts[-1] + d)
    return SampledStream(name="s", rate_hz=4.0, samples=list(zip(ts, values)))


@given(streams())
@settings(max_examples=150, deadline=None)
def test_outlier_marks_are_strictly_outside_fences(stream):
    if len(stream.samples) < 4:
        return
    values = stream.values()
    q1 = quantile_type7(values, 0.25)
    q3 = quantile_type7(values, 0.75)
    lo, hi = q1 - 1.5 * (q3 - q1), q3 + 1.5 * (q3 - q1)
    marked = {(m.t, m.value) for m in detect_outliers(stream)}
    for t, v in stream.samples:
        if (t, v) in marked:
            assert v < lo or v > hi
        else:
            assert lo <= v <= hi


@given(streams(), st.sampled_from([1.0, 3.0, 4.0, 12.5, 60.0]))
@settings(max_examples=150, deadline=None)
def test_resample_output_is_sorted_and_bounded(stream, hz):
    out = resample(stream, hz)
    ts = [t for t, _ in out.samples]
    assert ts == sorted(set(ts))
    if ts:
        assert ts[0] >= stream.samples[0][0]
        assert ts[-1] <= stream.samples[-1][0]
    values = stream.values()
    lo, hi = min(values), max(values)
    for _, v in out.samples:
        assert lo - 1e-9 <= v <= hi + 1e-9  # interpolation never leaves the hull


unit_quats = st.tuples(*[st.floats(-1, 1) for _ in range(4)]).filter(
    lambda q: sum(c * c for c in q) > 1e-3
).map(lambda q: qnormalize(q))


@given(st.lists(unit_quats, min_size=1, max_size=8))
@settings(max_examples=200, deadline=None)
def test_hemisphere_mean_is_unit_and_sign_invariant(quats):
    m = hemisphere_mean(quats)
    assert abs(math.sqrt(qdot(m, m)) - 1.0) < 1e-9
    flipped = [tuple(-c for c in q) if i % 2 else q for i, q in enumerate(quats)]
    m2 = hemisphere_mean(flipped)
    # flipping member signs never changes the orientation of the mean
    assert abs(abs(qdot(m, m2)) - 1.0) < 1e-9


@given(unit_quats, unit_quats, st.floats(0, 1))
@settings(max_examples=200, deadline=None)
def test_slerp_stays_unit_norm(a, b, u):
    out = slerp(a, b, u)
    assert abs(math.sqrt(qdot(out, out)) - 1.0) < 1e-9


@given(st.floats(-1e5, 1e5, allow_nan=False))
@settings(max_examples=300, deadline=None)
def test_wrap_angle_range(a):
    w = wrap_angle_deg(a)
    assert -180.0 < w <= 180.0
    # wrapped angle differs from the input by a multiple of 360
    k = round((a - w) / 360.0)
    assert math.isclose(a - w, k * 360.0, abs_tol=1e-6)
