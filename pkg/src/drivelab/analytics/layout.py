"""Driving-path event layout: anchor events along the ego path and stack
co-located ones vertically per participant (explode view)."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..geoscene.path import EgoPath, interpolate_pose
from ..model import EventRecord, Vec3

BASE_HEIGHT_M = 2.0
LANE_STEP_M = 0.5
CLUSTER_ARC_M = 1.0


@dataclass
class LayoutEntry:
    event_id: str
    path_position: Vec3  # anchor on the path (ground level)
    vertical_offset: float
    lane_index: int
    cluster: int
    clamped: bool = False

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "path_position": list(self.path_position),
            "vertical_offset": float(self.vertical_offset),
            "lane_index": int(self.lane_index),
            "cluster": int(self.cluster),
            "clamped": self.clamped,
        }


@dataclass
class PathEventLayout:
    entries: list[LayoutEntry] = field(default_factory=list)
    exploded: bool = True

    def entry(self, event_id: str) -> LayoutEntry | None:
        for e in self.entries:
            if e.event_id == event_id:
                return e
        return None

    def to_json(self) -> dict:
        return {"exploded": self.exploded, "entries": [e.to_json() for e in self.entries]}


def layout_path_events(
    events: list[EventRecord],
    path: EgoPath,
    participant_order: list[str] | None = None,
    exploded: bool = True,
    cluster_arc_m: float = CLUSTER_ARC_M,
) -> PathEventLayout:
    """Anchor each event at its onset pose, cluster anchors within
    ``cluster_arc_m`` of arc length, and assign explode lanes.

    Lane order inside a cluster follows participant order (then onset time,
    then id); collapsed mode keeps every event at the base height.
    """
    if participant_order is None:
        participant_order = []
        for e in events:
            if e.participant_id not in participant_order:
                participant_order.append(e.participant_id)
    rank = {pid: i for i, pid in enumerate(participant_order)}

    items = []
    for e in events:
        clamped = e.t_start < path.t_start or e.t_start > path.t_end
        pose = interpolate_pose(path, e.t_start)
        s = path.arc_length_at(e.t_start)
        items.append((s, e, pose.position, clamped))
    items.sort(key=lambda it: (it[0], rank.get(it[1].participant_id, len(rank)), it[1].t_start, it[1].id))

    entries: list[LayoutEntry] = []
    cluster_id = -1
    cluster_members: list = []
    prev_s = None

    def flush():
        ordered = sorted(
            cluster_members,
            key=lambda it: (rank.get(it[1].participant_id, len(rank)), it[1].t_start, it[1].id),
        )
        for lane, (s, e, pos, clamped) in enumerate(ordered):
            offset = BASE_HEIGHT_M + lane * LANE_STEP_M if exploded else BASE_HEIGHT_M
            entries.append(
                LayoutEntry(
                    event_id=e.id,
                    path_position=pos,
                    vertical_offset=offset,
                    lane_index=lane if exploded else 0,
                    cluster=cluster_id,
                    clamped=clamped,
                )
            )

    for s, e, pos, clamped in items:
        if prev_s is None or s - prev_s > cluster_arc_m:
            if cluster_members:
                flush()
            cluster_id += 1
            cluster_members = []
        cluster_members.append((s, e, pos, clamped))
        prev_s = s
    if cluster_members:
        flush()

    order = {e.id: i for i, e in enumerate(events)}
    entries.sort(key=lambda entry: order[entry.event_id])
    return PathEventLayout(entries=entries, exploded=exploded)
