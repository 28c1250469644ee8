"""Ego-vehicle path geometry: local-frame polyline with headings and
cumulative arc length, plus continuous pose interpolation for replay."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from ..model import GeoSample, Vec3
from .geodesy import LocalFrame, geo_to_local

log = logging.getLogger(__name__)


@dataclass
class PathPoint:
    t: int
    position: Vec3
    heading: float  # deg, 0 = north, 90 = east
    speed: float


@dataclass
class PathPose:
    position: Vec3
    heading: float
    clamped: bool = False


@dataclass
class EgoPath:
    points: list[PathPoint]
    arc_length: list[float] = field(default_factory=list)

    @property
    def total_length(self) -> float:
        return self.arc_length[-1] if self.arc_length else 0.0

    @property
    def t_start(self) -> int:
        return self.points[0].t

    @property
    def t_end(self) -> int:
        return self.points[-1].t

    def arc_length_at(self, t: int) -> float:
        """Arc-length coordinate at time t (linear in t between samples, clamped)."""
        pts = self.points
        if t <= pts[0].t:
            return self.arc_length[0]
        if t >= pts[-1].t:
            return self.arc_length[-1]
        i = _bracket(pts, t)
        t1, t2 = pts[i].t, pts[i + 1].t
        u = 0.0 if t2 == t1 else (t - t1) / (t2 - t1)
        return self.arc_length[i] + u * (self.arc_length[i + 1] - self.arc_length[i])


def segment_heading(p1: Vec3, p2: Vec3) -> float:
    """Compass heading of the segment p1->p2 in the ENU plane."""
    de = p2[0] - p1[0]
    dn = p2[1] - p1[1]
    return math.degrees(math.atan2(de, dn)) % 360.0


def build_ego_path(samples: list[GeoSample], frame: LocalFrame) -> EgoPath:
    """Convert GPS samples to a local-frame path.

    Headings missing from the source are filled from segment direction;
    duplicate timestamps keep the first sample only.
    """
    if len(samples) < 2:
        raise ValueError("ego path needs at least 2 GPS samples")

    deduped: list[GeoSample] = []
    seen: set[int] = set()
    for g in samples:
        if g.t in seen:
            log.warning("dropping duplicate ego-path timestamp %d ms", g.t)
            continue
        seen.add(g.t)
        deduped.append(g)

    positions = [geo_to_local(frame, g) for g in deduped]
    headings: list[float] = []
    for i, g in enumerate(deduped):
        if math.isfinite(g.heading):
            headings.append(g.heading % 360.0)
        elif i + 1 < len(deduped):
            headings.append(segment_heading(positions[i], positions[i + 1]))
        else:
            headings.append(headings[-1] if headings else 0.0)

    arc = [0.0]
    for a, b in zip(positions, positions[1:]):
        arc.append(arc[-1] + math.dist(a, b))

    points = [
        PathPoint(t=g.t, position=pos, heading=h, speed=g.speed)
        for g, pos, h in zip(deduped, positions, headings)
    ]
    return EgoPath(points=points, arc_length=arc)


def _bracket(points: list[PathPoint], t: int) -> int:
    lo, hi = 0, len(points) - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if points[mid].t <= t:
            lo = mid
        else:
            hi = mid - 1
    return lo


def wrap_angle_deg(a: float) -> float:
    """Wrap to (-180, 180]."""
    a = math.fmod(a, 360.0)
    if a > 180.0:
        a -= 360.0
    elif a <= -180.0:
        a += 360.0
    return a


def vehicle_vec_to_scene(pose: PathPose, v: Vec3) -> Vec3:
    """Rotate a vehicle-local vector (x fwd, y left, z up) into the ENU
    scene frame for the given ego pose."""
    h = math.radians(pose.heading)
    sh, ch = math.sin(h), math.cos(h)
    x, y, z = v
    return (x * sh - y * ch, x * ch + y * sh, z)


def vehicle_to_scene(pose: PathPose, p: Vec3) -> Vec3:
    r = vehicle_vec_to_scene(pose, p)
    o = pose.position
    return (o[0] + r[0], o[1] + r[1], o[2] + r[2])


def scene_vec_to_vehicle(pose: PathPose, v: Vec3) -> Vec3:
    h = math.radians(pose.heading)
    sh, ch = math.sin(h), math.cos(h)
    x, y, z = v
    return (x * sh + y * ch, -x * ch + y * sh, z)


def scene_to_vehicle(pose: PathPose, p: Vec3) -> Vec3:
    o = pose.position
    return scene_vec_to_vehicle(pose, (p[0] - o[0], p[1] - o[1], p[2] - o[2]))


def interpolate_pose(path: EgoPath, t: int) -> PathPose:
    """Pose at time t: linear position, shortest-arc heading interpolation.

    Queries outside the covered time range are clamped and flagged.
    """
    pts = path.points
    if t <= pts[0].t:
        p = pts[0]
        return PathPose(p.position, p.heading, clamped=t < pts[0].t)
    if t >= pts[-1].t:
        p = pts[-1]
        return PathPose(p.position, p.heading, clamped=t > pts[-1].t)

    i = _bracket(pts, t)
    p1, p2 = pts[i], pts[i + 1]
    u = 0.0 if p2.t == p1.t else (t - p1.t) / (p2.t - p1.t)
    pos = tuple(a + u * (b - a) for a, b in zip(p1.position, p2.position))
    heading = (p1.heading + u * wrap_angle_deg(p2.heading - p1.heading)) % 360.0
    return PathPose(pos, heading, clamped=False)  # type: ignore[arg-type]
