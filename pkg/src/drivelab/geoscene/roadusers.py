"""Road-user placement at a replay time step."""

from __future__ import annotations

from ..model import TrackedObjectSample, Vec3

COVERAGE_WINDOW_MS = 2000


def place_road_users(
    samples: list[TrackedObjectSample], t: int, window_ms: int = COVERAGE_WINDOW_MS
) -> list[tuple[str, str, Vec3]]:
    """Positions of tracked objects at time t.

    Positions interpolate linearly between bracketing samples and clamp at
    track ends; objects with no sample within ``window_ms`` of t are
    omitted (stale detections must not ghost through the scene).
    """
    by_object: dict[str, list[TrackedObjectSample]] = {}
    for s in samples:
        by_object.setdefault(s.object_id, []).append(s)

    out: list[tuple[str, str, Vec3]] = []
    for object_id in sorted(by_object):
        track = by_object[object_id]
        if min(abs(s.t - t) for s in track) > window_ms:
            continue
        out.append((object_id, track[0].object_class, _position_at(track, t)))
    return out


def _position_at(track: list[TrackedObjectSample], t: int) -> Vec3:
    if t <= track[0].t:
        return track[0].position
    if t >= track[-1].t:
        return track[-1].position
    for s1, s2 in zip(track, track[1:]):
        if s1.t <= t <= s2.t:
            if s2.t == s1.t:
                return s1.position
            u = (t - s1.t) / (s2.t - s1.t)
            return tuple(a + u * (b - a) for a, b in zip(s1.position, s2.position))  # type: ignore[return-value]
    return track[-1].position
