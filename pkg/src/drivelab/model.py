"""Domain types for the study config document.

Conventions used throughout:
  * timestamps are session-relative integer milliseconds; ``t0`` anchors a
    session to wall clock (epoch ms)
  * positions are meters; in-vehicle data lives in the vehicle-local frame
    (origin at the rear-axle center, x forward, y left, z up), scene data in
    the local east-north-up frame of ``scene.origin``
  * quaternions are (w, x, y, z), unit norm
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]

SCHEMA_VERSION = "1.0"

EVENT_KINDS = ("interaction", "emotion", "driving", "activity", "audio")
EVENT_SOURCES = ("logged", "inferred", "manual")
RAY_MODALITIES = ("gaze", "pointing")
MESH_ROLES = ("interior", "ego_exterior", "building", "road_user", "ground")
OBJECT_CLASSES = ("car", "pedestrian", "cyclist", "other")
ANNOTATION_KINDS = ("label", "comment")
MEDIA_KINDS = ("video", "audio")

# Kinect-v2-style joint catalog; sessions may use any subset that includes
# the minimum set below, in a fixed per-session order.
JOINT_CATALOG = (
    "head", "neck", "spine_shoulder", "spine_mid", "spine_base",
    "left_shoulder", "left_elbow", "left_wrist", "left_hand", "left_thumb", "left_hand_tip",
    "right_shoulder", "right_elbow", "right_wrist", "right_hand", "right_thumb", "right_hand_tip",
    "left_hip", "left_knee", "left_ankle", "left_foot",
    "right_hip", "right_knee", "right_ankle", "right_foot",
)
MIN_JOINT_SET = ("head", "left_hand", "right_hand")


def _vec3(v: Any) -> Vec3:
    return (float(v[0]), float(v[1]), float(v[2]))


def _quat(q: Any) -> Quat:
    return (float(q[0]), float(q[1]), float(q[2]), float(q[3]))


@dataclass
class StudyMeta:
    title: str = ""
    conditions: list[str] = field(default_factory=list)
    notes: str = ""

    def to_json(self) -> dict:
        return {"title": self.title, "conditions": list(self.conditions), "notes": self.notes}

    @classmethod
    def from_json(cls, d: dict) -> "StudyMeta":
        return cls(
            title=str(d.get("title", "")),
            conditions=[str(c) for c in d.get("conditions", [])],
            notes=str(d.get("notes", "")),
        )


@dataclass
class Participant:
    id: str
    color: Vec3 = (0.0, 0.0, 0.0)
    demographics: dict[str, str] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "color": list(self.color),
            "demographics": dict(sorted(self.demographics.items())),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Participant":
        return cls(
            id=str(d["id"]),
            color=_vec3(d.get("color", (0.0, 0.0, 0.0))),
            demographics={str(k): str(v) for k, v in d.get("demographics", {}).items()},
        )


@dataclass
class SampledStream:
    name: str
    unit: str = ""
    rate_hz: float = 1.0
    samples: list[tuple[int, float]] = field(default_factory=list)
    # Regions wider than 2x the nominal period, recorded at ingestion so
    # downstream consumers never interpolate across them.
    gaps: list[tuple[int, int]] = field(default_factory=list)

    def values(self) -> list[float]:
        return [v for _, v in self.samples]

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "unit": self.unit,
            "rate_hz": float(self.rate_hz),
            "samples": [[int(t), float(v)] for t, v in self.samples],
            "gaps": [[int(a), int(b)] for a, b in self.gaps],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SampledStream":
        return cls(
            name=str(d["name"]),
            unit=str(d.get("unit", "")),
            rate_hz=float(d.get("rate_hz", 1.0)),
            samples=[(int(t), float(v)) for t, v in d.get("samples", [])],
            gaps=[(int(a), int(b)) for a, b in d.get("gaps", [])],
        )


@dataclass
class JointPose:
    position: Vec3
    rotation: Quat = (1.0, 0.0, 0.0, 0.0)

    def to_json(self) -> dict:
        return {"position": list(self.position), "rotation": list(self.rotation)}

    @classmethod
    def from_json(cls, d: dict) -> "JointPose":
        return cls(position=_vec3(d["position"]), rotation=_quat(d.get("rotation", (1.0, 0.0, 0.0, 0.0))))


@dataclass
class SkeletonFrame:
    t: int
    joints: list[JointPose] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"t": int(self.t), "joints": [j.to_json() for j in self.joints]}

    @classmethod
    def from_json(cls, d: dict) -> "SkeletonFrame":
        return cls(t=int(d["t"]), joints=[JointPose.from_json(j) for j in d.get("joints", [])])


@dataclass
class RaySample:
    t: int
    origin: Vec3
    direction: Vec3
    modality: str = "gaze"

    def to_json(self) -> dict:
        return {
            "t": int(self.t),
            "origin": list(self.origin),
            "direction": list(self.direction),
            "modality": self.modality,
        }

    @classmethod
    def from_json(cls, d: dict) -> "RaySample":
        return cls(
            t=int(d["t"]),
            origin=_vec3(d["origin"]),
            direction=_vec3(d["direction"]),
            modality=str(d.get("modality", "gaze")),
        )


@dataclass
class SurfaceSample:
    t: int
    mesh_id: str
    position: Vec3

    def to_json(self) -> dict:
        return {"t": int(self.t), "mesh_id": self.mesh_id, "position": list(self.position)}

    @classmethod
    def from_json(cls, d: dict) -> "SurfaceSample":
        return cls(t=int(d["t"]), mesh_id=str(d["mesh_id"]), position=_vec3(d["position"]))


@dataclass
class EventRecord:
    id: str
    kind: str
    label: str
    t_start: int
    t_end: int
    participant_id: str = ""
    attrs: dict[str, str] = field(default_factory=dict)
    confidence: float = 1.0
    source: str = "logged"

    @property
    def midpoint(self) -> int:
        return (self.t_start + self.t_end) // 2

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "label": self.label,
            "t_start": int(self.t_start),
            "t_end": int(self.t_end),
            "participant_id": self.participant_id,
            "attrs": dict(sorted(self.attrs.items())),
            "confidence": float(self.confidence),
            "source": self.source,
        }

    @classmethod
    def from_json(cls, d: dict) -> "EventRecord":
        return cls(
            id=str(d["id"]),
            kind=str(d["kind"]),
            label=str(d.get("label", "")),
            t_start=int(d["t_start"]),
            t_end=int(d["t_end"]),
            participant_id=str(d.get("participant_id", "")),
            attrs={str(k): str(v) for k, v in d.get("attrs", {}).items()},
            confidence=float(d.get("confidence", 1.0)),
            source=str(d.get("source", "logged")),
        )


@dataclass
class GeoSample:
    t: int
    lat: float
    lon: float
    alt: float = 0.0
    heading: float = float("nan")
    speed: float = 0.0

    def to_json(self) -> dict:
        heading = self.heading if math.isfinite(self.heading) else None
        return {
            "t": int(self.t),
            "lat": float(self.lat),
            "lon": float(self.lon),
            "alt": float(self.alt),
            "heading": heading if heading is None else float(heading),
            "speed": float(self.speed),
        }

    @classmethod
    def from_json(cls, d: dict) -> "GeoSample":
        heading = d.get("heading")
        return cls(
            t=int(d.get("t", 0)),
            lat=float(d["lat"]),
            lon=float(d["lon"]),
            alt=float(d.get("alt", 0.0)),
            heading=float("nan") if heading is None else float(heading),
            speed=float(d.get("speed", 0.0)),
        )


@dataclass
class TrackedObjectSample:
    t: int
    object_id: str
    object_class: str
    position: Vec3

    def to_json(self) -> dict:
        return {
            "t": int(self.t),
            "object_id": self.object_id,
            "class": self.object_class,
            "position": list(self.position),
        }

    @classmethod
    def from_json(cls, d: dict) -> "TrackedObjectSample":
        return cls(
            t=int(d["t"]),
            object_id=str(d["object_id"]),
            object_class=str(d.get("class", "other")),
            position=_vec3(d["position"]),
        )


@dataclass
class MeshAsset:
    id: str
    role: str
    vertices: list[Vec3] = field(default_factory=list)
    triangles: list[tuple[int, int, int]] = field(default_factory=list)
    uv: list[tuple[float, float]] | None = None

    def to_json(self) -> dict:
        out: dict = {
            "id": self.id,
            "role": self.role,
            "vertices": [list(v) for v in self.vertices],
            "triangles": [[int(a), int(b), int(c)] for a, b, c in self.triangles],
        }
        if self.uv is not None:
            out["uv"] = [[float(u), float(v)] for u, v in self.uv]
        return out

    @classmethod
    def from_json(cls, d: dict) -> "MeshAsset":
        uv = d.get("uv")
        return cls(
            id=str(d["id"]),
            role=str(d["role"]),
            vertices=[_vec3(v) for v in d.get("vertices", [])],
            triangles=[(int(a), int(b), int(c)) for a, b, c in d.get("triangles", [])],
            uv=None if uv is None else [(float(u), float(v)) for u, v in uv],
        )


@dataclass
class BuildingFootprint:
    id: str
    polygon: list[tuple[float, float]]  # (lat, lon) vertices
    height: float = 10.0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "polygon": [[float(a), float(b)] for a, b in self.polygon],
            "height": float(self.height),
        }

    @classmethod
    def from_json(cls, d: dict) -> "BuildingFootprint":
        return cls(
            id=str(d["id"]),
            polygon=[(float(a), float(b)) for a, b in d.get("polygon", [])],
            height=float(d.get("height", 10.0)),
        )


@dataclass
class SceneDescription:
    origin: GeoSample
    meshes: list[MeshAsset] = field(default_factory=list)
    footprints: list[BuildingFootprint] = field(default_factory=list)
    ego_vehicle: str = ""

    def mesh_by_id(self, mesh_id: str) -> MeshAsset | None:
        for m in self.meshes:
            if m.id == mesh_id:
                return m
        return None

    def to_json(self) -> dict:
        return {
            "origin": self.origin.to_json(),
            "meshes": [m.to_json() for m in self.meshes],
            "footprints": [f.to_json() for f in self.footprints],
            "ego_vehicle": self.ego_vehicle,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SceneDescription":
        return cls(
            origin=GeoSample.from_json(d["origin"]),
            meshes=[MeshAsset.from_json(m) for m in d.get("meshes", [])],
            footprints=[BuildingFootprint.from_json(f) for f in d.get("footprints", [])],
            ego_vehicle=str(d.get("ego_vehicle", "")),
        )


@dataclass
class Annotation:
    id: str
    kind: str
    text: str
    t: int | None = None
    position: Vec3 | None = None
    author: str = ""
    created_seq: int = 0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "text": self.text,
            "t": None if self.t is None else int(self.t),
            "position": None if self.position is None else list(self.position),
            "author": self.author,
            "created_seq": int(self.created_seq),
        }

    @classmethod
    def from_json(cls, d: dict) -> "Annotation":
        pos = d.get("position")
        t = d.get("t")
        return cls(
            id=str(d["id"]),
            kind=str(d["kind"]),
            text=str(d.get("text", "")),
            t=None if t is None else int(t),
            position=None if pos is None else _vec3(pos),
            author=str(d.get("author", "")),
            created_seq=int(d.get("created_seq", 0)),
        )


@dataclass
class SpeechSegment:
    t_start: int
    t_end: int
    transcript: str = ""
    referent: str | None = None

    def to_json(self) -> dict:
        return {
            "t_start": int(self.t_start),
            "t_end": int(self.t_end),
            "transcript": self.transcript,
            "referent": self.referent,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SpeechSegment":
        ref = d.get("referent")
        return cls(
            t_start=int(d["t_start"]),
            t_end=int(d["t_end"]),
            transcript=str(d.get("transcript", "")),
            referent=None if ref is None else str(ref),
        )


@dataclass
class MediaRef:
    path: str
    kind: str = "video"
    t_offset: int = 0

    def to_json(self) -> dict:
        return {"path": self.path, "kind": self.kind, "t_offset": int(self.t_offset)}

    @classmethod
    def from_json(cls, d: dict) -> "MediaRef":
        return cls(path=str(d["path"]), kind=str(d.get("kind", "video")), t_offset=int(d.get("t_offset", 0)))


@dataclass
class SessionRecording:
    participant_id: str
    condition: str = ""
    t0: int = 0
    duration: int = 0
    streams: list[SampledStream] = field(default_factory=list)
    skeleton_joints: list[str] = field(default_factory=list)
    skeleton: list[SkeletonFrame] = field(default_factory=list)
    gaze: list[RaySample] = field(default_factory=list)
    pointing: list[RaySample] = field(default_factory=list)
    touches: list[SurfaceSample] = field(default_factory=list)
    speech: list[SpeechSegment] = field(default_factory=list)
    events: list[EventRecord] = field(default_factory=list)
    ego_path: list[GeoSample] = field(default_factory=list)
    road_users: list[TrackedObjectSample] = field(default_factory=list)
    media: list[MediaRef] = field(default_factory=list)

    def stream(self, name: str) -> SampledStream | None:
        for s in self.streams:
            if s.name == name:
                return s
        return None

    def joint_index(self, joint: str) -> int:
        try:
            return self.skeleton_joints.index(joint)
        except ValueError:
            raise KeyError(f"unknown joint {joint!r}") from None

    def to_json(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "condition": self.condition,
            "t0": int(self.t0),
            "duration": int(self.duration),
            "streams": [s.to_json() for s in self.streams],
            "skeleton_joints": list(self.skeleton_joints),
            "skeleton": [f.to_json() for f in self.skeleton],
            "gaze": [r.to_json() for r in self.gaze],
            "pointing": [r.to_json() for r in self.pointing],
            "touches": [t.to_json() for t in self.touches],
            "speech": [s.to_json() for s in self.speech],
            "events": [e.to_json() for e in self.events],
            "ego_path": [g.to_json() for g in self.ego_path],
            "road_users": [r.to_json() for r in self.road_users],
            "media": [m.to_json() for m in self.media],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SessionRecording":
        return cls(
            participant_id=str(d["participant_id"]),
            condition=str(d.get("condition", "")),
            t0=int(d.get("t0", 0)),
            duration=int(d.get("duration", 0)),
            streams=[SampledStream.from_json(s) for s in d.get("streams", [])],
            skeleton_joints=[str(j) for j in d.get("skeleton_joints", [])],
            skeleton=[SkeletonFrame.from_json(f) for f in d.get("skeleton", [])],
            gaze=[RaySample.from_json(r) for r in d.get("gaze", [])],
            pointing=[RaySample.from_json(r) for r in d.get("pointing", [])],
            touches=[SurfaceSample.from_json(t) for t in d.get("touches", [])],
            speech=[SpeechSegment.from_json(s) for s in d.get("speech", [])],
            events=[EventRecord.from_json(e) for e in d.get("events", [])],
            ego_path=[GeoSample.from_json(g) for g in d.get("ego_path", [])],
            road_users=[TrackedObjectSample.from_json(r) for r in d.get("road_users", [])],
            media=[MediaRef.from_json(m) for m in d.get("media", [])],
        )


@dataclass
class ConfigDocument:
    study_meta: StudyMeta
    participants: list[Participant] = field(default_factory=list)
    sessions: list[SessionRecording] = field(default_factory=list)
    scene: SceneDescription | None = None
    annotations: list[Annotation] = field(default_factory=list)
    schema_version: str = SCHEMA_VERSION

    def participant_by_id(self, pid: str) -> Participant | None:
        for p in self.participants:
            if p.id == pid:
                return p
        return None

    def participant_index(self, pid: str) -> int:
        for i, p in enumerate(self.participants):
            if p.id == pid:
                return i
        return -1

    def to_json(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "study_meta": self.study_meta.to_json(),
            "participants": [p.to_json() for p in self.participants],
            "sessions": [s.to_json() for s in self.sessions],
            "scene": None if self.scene is None else self.scene.to_json(),
            "annotations": [a.to_json() for a in self.annotations],
        }

    @classmethod
    def from_json(cls, d: dict) -> "ConfigDocument":
        scene = d.get("scene")
        return cls(
            schema_version=str(d.get("schema_version", SCHEMA_VERSION)),
            study_meta=StudyMeta.from_json(d.get("study_meta", {})),
            participants=[Participant.from_json(p) for p in d.get("participants", [])],
            sessions=[SessionRecording.from_json(s) for s in d.get("sessions", [])],
            scene=None if scene is None else SceneDescription.from_json(scene),
            annotations=[Annotation.from_json(a) for a in d.get("annotations", [])],
        )
