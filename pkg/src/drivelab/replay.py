"""Deterministic replay: scene state at any time, event queries, filters,
and the annotation store.

Snapshots are pure functions of (document, replay state); stepping is
driven externally, so identical call sequences give identical states on
any machine or thread count.
"""

from __future__ import annotations

import hashlib
import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field, replace

from .analytics.avatars import sample_skeleton_pose
from .geoscene import LocalFrame, build_ego_path, interpolate_pose, place_road_users
from .geoscene.path import EgoPath
from .ingest.outliers import OutlierMark, detect_outliers
from .model import Annotation, ConfigDocument, EventRecord, JointPose, Vec3

RATE_LIMIT = 8.0
OUTLIER_ACTIVE_WINDOW_MS = 1000


@dataclass
class ReplayState:
    t: int = 0
    rate: float = 1.0
    playing: bool = False
    participants: frozenset[str] | None = None  # None = all
    conditions: frozenset[str] | None = None
    event_kinds: frozenset[str] | None = None
    visibility: dict[str, bool] = field(default_factory=dict)
    nearest_frame: bool = False  # fidelity-audit skeleton mode

    def __post_init__(self) -> None:
        self.rate = max(-RATE_LIMIT, min(RATE_LIMIT, self.rate))

    def includes(self, participant_id: str, condition: str) -> bool:
        if self.participants is not None and participant_id not in self.participants:
            return False
        if self.conditions is not None and condition not in self.conditions:
            return False
        return True


class EventIndex:
    """Centered interval tree over event records.

    Queries return exactly what a linear scan over [t_start, t_end]
    overlap would, sorted by onset then id.
    """

    def __init__(self, events: list[EventRecord]):
        self.events = list(events)
        self._root = _build_node(list(range(len(events))), self.events)

    def query(
        self,
        t_start: int,
        t_end: int,
        kinds: frozenset[str] | None = None,
        participants: frozenset[str] | None = None,
    ) -> list[EventRecord]:
        if t_end < t_start:
            return []
        found: list[int] = []
        _query_node(self._root, self.events, t_start, t_end, found)
        out = [self.events[i] for i in found]
        if kinds is not None:
            out = [e for e in out if e.kind in kinds]
        if participants is not None:
            out = [e for e in out if e.participant_id in participants]
        out.sort(key=lambda e: (e.t_start, e.id))
        return out


class _Node:
    __slots__ = ("center", "by_start", "by_end", "left", "right")

    def __init__(self, center, by_start, by_end, left, right):
        self.center = center
        self.by_start = by_start  # overlapping events sorted by t_start
        self.by_end = by_end  # same events sorted by t_end
        self.left = left
        self.right = right


def _build_node(idx: list[int], events: list[EventRecord]):
    if not idx:
        return None
    ts = sorted(events[i].t_start + events[i].t_end for i in idx)
    center = ts[len(ts) // 2] / 2.0
    here, left, right = [], [], []
    for i in idx:
        e = events[i]
        if e.t_end < center:
            left.append(i)
        elif e.t_start > center:
            right.append(i)
        else:
            here.append(i)
    by_start = sorted(here, key=lambda i: events[i].t_start)
    by_end = sorted(here, key=lambda i: events[i].t_end)
    return _Node(center, by_start, by_end, _build_node(left, events), _build_node(right, events))


def _query_node(node, events, a: int, b: int, out: list[int]) -> None:
    if node is None:
        return
    if b < node.center:
        # overlapping-center events qualify iff they start at or before b
        for i in node.by_start:
            if events[i].t_start > b:
                break
            out.append(i)
        _query_node(node.left, events, a, b, out)
    elif a > node.center:
        for i in reversed(node.by_end):
            if events[i].t_end < a:
                break
            out.append(i)
        _query_node(node.right, events, a, b, out)
    else:
        out.extend(node.by_start)
        _query_node(node.left, events, a, b, out)
        _query_node(node.right, events, a, b, out)


@dataclass
class AvatarPose:
    participant_id: str
    joint_names: list[str]
    joints: list[JointPose]

    def to_json(self) -> dict:
        return {
            "participant_id": self.participant_id,
            "joint_names": list(self.joint_names),
            "joints": [j.to_json() for j in self.joints],
        }


@dataclass
class SceneSnapshot:
    t: int
    ego_pose: dict | None
    avatars: list[AvatarPose]
    road_users: list[tuple[str, str, Vec3]]
    active_events: list[EventRecord]
    active_outliers: list[OutlierMark]

    def to_json(self) -> dict:
        return {
            "t": int(self.t),
            "ego_pose": self.ego_pose,
            "avatars": [a.to_json() for a in self.avatars],
            "road_users": [[oid, cls, list(pos)] for oid, cls, pos in self.road_users],
            "active_events": [e.to_json() for e in self.active_events],
            "active_outliers": [m.to_json() for m in self.active_outliers],
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


class ReplayEngine:
    """Immutable-document replay with cached paths, indexes, and outliers."""

    def __init__(self, doc: ConfigDocument):
        self.doc = doc
        self.duration = max((s.duration for s in doc.sessions), default=0)
        self.frame = LocalFrame(origin=doc.scene.origin) if doc.scene is not None else None
        self.paths: dict[str, EgoPath] = {}
        if self.frame is not None:
            for s in doc.sessions:
                if len(s.ego_path) >= 2:
                    self.paths[s.participant_id] = build_ego_path(s.ego_path, self.frame)
        self.event_index = EventIndex([e for s in doc.sessions for e in s.events])
        self._outliers: list[OutlierMark] = []
        for s in doc.sessions:
            for stream in s.streams:
                if len(stream.samples) >= 4:
                    self._outliers.extend(detect_outliers(stream))
        self._outliers.sort(key=lambda m: (m.t, m.stream_name))
        self._outlier_ts = [m.t for m in self._outliers]

    def outliers(self, stream_name: str | None = None) -> list[OutlierMark]:
        if stream_name is None:
            return list(self._outliers)
        return [m for m in self._outliers if m.stream_name == stream_name]

    def step(self, state: ReplayState, wall_dt_ms: float) -> ReplayState:
        """Advance playback by a wall-clock delta; pauses at the ends."""
        if not state.playing:
            return state
        t_raw = state.t + state.rate * wall_dt_ms
        t = int(round(max(0, min(self.duration, t_raw))))
        playing = state.playing
        if (t == 0 and state.rate < 0) or (t == self.duration and state.rate > 0):
            playing = False
        return replace(state, t=t, playing=playing)

    def seek(self, state: ReplayState, t: int) -> ReplayState:
        return replace(state, t=int(max(0, min(self.duration, t))))

    def snapshot(self, state: ReplayState) -> SceneSnapshot:
        t = state.t
        ego_pose = None
        avatars: list[AvatarPose] = []
        road_users: list[tuple[str, str, Vec3]] = []
        included_pids = []
        mode = "nearest" if state.nearest_frame else "interpolate"
        for s in self.doc.sessions:
            if not state.includes(s.participant_id, s.condition):
                continue
            included_pids.append(s.participant_id)
            if ego_pose is None and s.participant_id in self.paths:
                pose = interpolate_pose(self.paths[s.participant_id], t)
                ego_pose = {
                    "position": list(pose.position),
                    "heading": pose.heading,
                    "clamped": pose.clamped,
                }
            if s.skeleton:
                avatars.append(
                    AvatarPose(
                        participant_id=s.participant_id,
                        joint_names=list(s.skeleton_joints),
                        joints=sample_skeleton_pose(s, t, mode=mode),
                    )
                )
            road_users.extend(place_road_users(s.road_users, t))

        kinds = state.event_kinds
        participants = frozenset(included_pids)
        active_events = self.event_index.query(t, t, kinds=kinds, participants=participants)

        lo = bisect_left(self._outlier_ts, t - OUTLIER_ACTIVE_WINDOW_MS)
        hi = bisect_right(self._outlier_ts, t)
        active_outliers = self._outliers[lo:hi]

        return SceneSnapshot(
            t=t,
            ego_pose=ego_pose,
            avatars=avatars,
            road_users=road_users,
            active_events=active_events,
            active_outliers=active_outliers,
        )


def annotate(doc: ConfigDocument, annotation: Annotation) -> ConfigDocument:
    """Upsert an annotation; labels are auto-anchored to the driving-path
    event line at their timestamp. Same id + same author replaces, a
    different author is rejected."""
    if annotation.kind not in ("label", "comment"):
        raise ValueError(f"unknown annotation kind {annotation.kind!r}")
    if annotation.kind == "label" and annotation.t is None:
        raise ValueError("label annotations need a timeline anchor t")

    ann = annotation
    if ann.kind == "label" and doc.scene is not None:
        frame = LocalFrame(origin=doc.scene.origin)
        for s in doc.sessions:
            if len(s.ego_path) >= 2:
                pose = interpolate_pose(build_ego_path(s.ego_path, frame), ann.t)
                ann = replace(ann, position=pose.position)
                break
    if ann.kind == "label" and ann.position is None:
        raise ValueError("label annotation needs a position (no driving path to anchor to)")

    out = []
    replaced = False
    for existing in doc.annotations:
        if existing.id == ann.id:
            if existing.author != ann.author:
                raise ValueError(f"annotation {ann.id!r} belongs to {existing.author!r}")
            out.append(ann)
            replaced = True
        else:
            out.append(existing)
    if not replaced:
        out.append(ann)
    return replace(doc, annotations=out)
