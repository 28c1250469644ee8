"""Context-portal resolution for interaction events.

Direct portals anchor a zoomed view of something the participant referenced
in the scene (raycast hit for gaze/pointing, matched scene object for
speech); indirect portals cover speech referents absent from the scene,
answered from an offline place index. A live geocoder can be plugged in by
passing any object with a ``lookup(name)`` method.
"""

from __future__ import annotations

import json
import re
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path

from ..geoscene.path import EgoPath, PathPose, interpolate_pose, vehicle_to_scene
from ..model import EventRecord, RaySample, SceneDescription, SessionRecording, Vec3
from .avatars import sample_skeleton_pose
from .raycast import SceneIndex, VEHICLE_ROLES

PORTAL_OFFSET_M = 2.0  # along the ray from the fingertip / eyes
RAY_MAX_DISTANCE_M = 500.0
HEAD_ANCHOR_OFFSET = (0.0, 0.5, 0.3)  # beside the head, vehicle-local
DEFAULT_EYE_POSITION = (0.9, 0.35, 1.2)  # driver seat fallback


@dataclass
class PlaceRecord:
    name: str
    lat: float
    lon: float

    def to_json(self) -> dict:
        return {"name": self.name, "lat": self.lat, "lon": self.lon}


def _tokens(s: str) -> tuple[str, ...]:
    return tuple(t for t in re.split(r"[^a-z0-9]+", s.casefold()) if t)


class PlaceIndex:
    """Offline gazetteer: JSON array of {name, lat, lon}."""

    def __init__(self, records: list[PlaceRecord]):
        self.records = records
        self._exact = {r.name.casefold(): r for r in records}
        self._tokenized = {_tokens(r.name): r for r in records}

    @classmethod
    def load(cls, path: str | Path) -> "PlaceIndex":
        data = json.loads(Path(path).read_text())
        return cls([PlaceRecord(name=str(d["name"]), lat=float(d["lat"]), lon=float(d["lon"])) for d in data])

    def lookup(self, query: str) -> PlaceRecord | None:
        hit = self._exact.get(query.casefold())
        if hit is not None:
            return hit
        return self._tokenized.get(_tokens(query))


@dataclass
class PortalResolution:
    event_id: str
    mode: str  # "direct" | "indirect"
    resolved: bool
    anchor: Vec3  # scene frame
    target_mesh: str | None = None
    target_point: Vec3 | None = None  # in the target mesh's frame
    camera_position: Vec3 | None = None  # scene frame (direct only)
    camera_look_at: Vec3 | None = None
    query: str | None = None  # indirect only
    place: PlaceRecord | None = None

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "mode": self.mode,
            "resolved": self.resolved,
            "anchor": list(self.anchor),
            "target_mesh": self.target_mesh,
            "target_point": None if self.target_point is None else list(self.target_point),
            "camera_position": None if self.camera_position is None else list(self.camera_position),
            "camera_look_at": None if self.camera_look_at is None else list(self.camera_look_at),
            "query": self.query,
            "place": None if self.place is None else self.place.to_json(),
        }


def _nearest_ray(rays: list[RaySample], t: int) -> RaySample | None:
    if not rays:
        return None
    ts = [r.t for r in rays]
    i = bisect_left(ts, t)
    best = None
    for k in (i - 1, i):
        if 0 <= k < len(rays):
            if best is None or abs(rays[k].t - t) < abs(best.t - t):
                best = rays[k]
    return best


def _head_position(session: SessionRecording, t: int) -> Vec3:
    if session.skeleton and "head" in session.skeleton_joints:
        return sample_skeleton_pose(session, t)[session.joint_index("head")].position
    return DEFAULT_EYE_POSITION


def _mesh_centroid(scene: SceneDescription, mesh_id: str) -> Vec3:
    mesh = scene.mesh_by_id(mesh_id)
    assert mesh is not None
    n = len(mesh.vertices)
    return tuple(sum(v[c] for v in mesh.vertices) / n for c in range(3))  # type: ignore[return-value]


def _to_scene(point: Vec3, pose: PathPose | None) -> Vec3:
    return vehicle_to_scene(pose, point) if pose is not None else point


def _mesh_frame_to_scene(scene_index: SceneIndex, mesh_id: str, point: Vec3, pose: PathPose | None) -> Vec3:
    if scene_index.roles[mesh_id] in VEHICLE_ROLES:
        return _to_scene(point, pose)
    return point


def resolve_portal(
    event: EventRecord,
    session: SessionRecording,
    scene: SceneDescription,
    place_index: PlaceIndex | None = None,
    scene_index: SceneIndex | None = None,
    ego_path: EgoPath | None = None,
) -> PortalResolution:
    """Resolve one interaction event to its portal placement."""
    modality = event.attrs.get("modality", "")
    if event.kind != "interaction" or modality not in ("gaze", "pointing", "speech"):
        raise ValueError("portals resolve interaction events with modality gaze, pointing, or speech")

    index = scene_index or SceneIndex(scene)
    t = event.midpoint
    pose = interpolate_pose(ego_path, t) if ego_path is not None else None

    if modality in ("gaze", "pointing"):
        rays = session.gaze if modality == "gaze" else session.pointing
        ray = _nearest_ray(rays, t)
        if ray is None:
            head = _to_scene(_head_position(session, t), pose)
            return PortalResolution(event_id=event.id, mode="direct", resolved=False, anchor=head)
        anchor_local = tuple(o + PORTAL_OFFSET_M * d for o, d in zip(ray.origin, ray.direction))
        anchor = _to_scene(anchor_local, pose)  # type: ignore[arg-type]
        hit = index.raycast_vehicle_ray(ray.origin, ray.direction, ego_pose=pose, max_distance=RAY_MAX_DISTANCE_M)
        if hit is None:
            return PortalResolution(
                event_id=event.id, mode="direct", resolved=False, anchor=anchor,
                camera_position=_to_scene(ray.origin, pose),
            )
        look_at = _mesh_frame_to_scene(index, hit.mesh_id, hit.point, pose)
        return PortalResolution(
            event_id=event.id,
            mode="direct",
            resolved=True,
            anchor=anchor,
            target_mesh=hit.mesh_id,
            target_point=hit.point,
            camera_position=_to_scene(ray.origin, pose),
            camera_look_at=look_at,
        )

    # speech
    referent = event.attrs.get("referent", "")
    if not referent:
        seg = next((s for s in session.speech if s.t_start <= t <= s.t_end and s.referent), None)
        referent = seg.referent if seg else ""
    head_local = _head_position(session, t)
    anchor_local = tuple(h + o for h, o in zip(head_local, HEAD_ANCHOR_OFFSET))
    anchor = _to_scene(anchor_local, pose)  # type: ignore[arg-type]

    if referent:
        match = _match_scene_object(scene, referent)
        if match is not None:
            centroid = _mesh_centroid(scene, match)
            centroid_scene = _mesh_frame_to_scene(index, match, centroid, pose)
            head_scene = _to_scene(head_local, pose)
            target_point = centroid
            hit = _raycast_toward(index, head_local, centroid_scene, head_scene, pose, match)
            if hit is not None:
                target_point = hit
            return PortalResolution(
                event_id=event.id,
                mode="direct",
                resolved=True,
                anchor=anchor,
                target_mesh=match,
                target_point=target_point,
                camera_position=head_scene,
                camera_look_at=centroid_scene,
            )

    place = place_index.lookup(referent) if (place_index and referent) else None
    return PortalResolution(
        event_id=event.id,
        mode="indirect",
        resolved=place is not None,
        anchor=anchor,
        query=referent,
        place=place,
    )


def _match_scene_object(scene: SceneDescription, referent: str) -> str | None:
    """Case-insensitive exact id match first, then normalized tokens."""
    want = referent.casefold()
    for m in scene.meshes:
        if m.id.casefold() == want:
            return m.id
    want_tokens = _tokens(referent)
    for m in scene.meshes:
        if _tokens(m.id) == want_tokens:
            return m.id
    for fp in scene.footprints:
        if fp.id.casefold() == want or _tokens(fp.id) == want_tokens:
            mesh = scene.mesh_by_id(fp.id)
            if mesh is not None:
                return mesh.id
    return None


def _raycast_toward(
    index: SceneIndex, head_local: Vec3, centroid_scene: Vec3, head_scene: Vec3, pose, mesh_id: str
) -> Vec3 | None:
    import math

    d = tuple(c - h for c, h in zip(centroid_scene, head_scene))
    norm = math.sqrt(sum(x * x for x in d))
    if norm < 1e-9:
        return None
    d = tuple(x / norm for x in d)
    # cast in the target mesh's frame directly (scene frame for buildings)
    if index.roles[mesh_id] in VEHICLE_ROLES:
        return None
    hit = index.bvhs[mesh_id].raycast(head_scene, d)
    return hit.point if hit is not None else None
