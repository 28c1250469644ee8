"""Bundle ingestion: parse, align, merge into one config document."""

from __future__ import annotations

import colorsys
import json
import math
import statistics
from dataclasses import dataclass, field
from pathlib import Path

from ..geoscene.extrude import extrude_footprints
from ..geoscene.geodesy import LocalFrame
from ..model import (
    ConfigDocument,
    GeoSample,
    Participant,
    SceneDescription,
    SessionRecording,
    SkeletonFrame,
    StudyMeta,
)
from ..vehicle import default_ego_exterior_mesh, default_interior_mesh
from .parsers import ALL_FORMATS, SCENE_FORMATS, SESSION_FORMATS
from .resample import find_gaps

# Raw timestamps at or above this are treated as epoch-anchored
# (1e10 ms is 2001-09-09; no session-relative clock runs that long).
EPOCH_MIN_MS = 1e10

# Wong's colorblind-safe palette.
_PALETTE = [
    (0.902, 0.624, 0.0),
    (0.337, 0.706, 0.914),
    (0.0, 0.62, 0.451),
    (0.941, 0.894, 0.259),
    (0.0, 0.447, 0.698),
    (0.835, 0.369, 0.0),
    (0.8, 0.475, 0.655),
    (0.35, 0.35, 0.35),
]


class IngestError(Exception):
    pass


@dataclass
class IngestReport:
    warnings: list[str] = field(default_factory=list)
    time_formats: dict[str, list[str]] = field(default_factory=dict)
    rows_skipped: int = 0

    def warn(self, source: str, message: str) -> None:
        self.warnings.append(f"{source}: {message}")
        if "row skipped" in message:
            self.rows_skipped += 1

    def note_time_format(self, source: str, formats: set[str]) -> None:
        if formats:
            self.time_formats[source] = sorted(formats)

    def to_json(self) -> dict:
        return {
            "warnings": list(self.warnings),
            "rows_skipped": self.rows_skipped,
            "time_formats": {k: v for k, v in sorted(self.time_formats.items())},
        }


@dataclass
class SourceEntry:
    name: str
    format: str
    path: Path
    options: dict


@dataclass
class SourceBundle:
    """A manifest plus the files it points at.

    The manifest is a JSON object mapping logical source names to
    {format, path, options}; a reserved "study_meta" key may carry inline
    study metadata instead of a source spec.
    """

    root: Path
    entries: list[SourceEntry]
    study_meta: StudyMeta | None = None

    @classmethod
    def load(cls, manifest_path: str | Path) -> "SourceBundle":
        manifest_path = Path(manifest_path)
        if not manifest_path.exists():
            raise IngestError(f"manifest not found: {manifest_path}")
        try:
            data = json.loads(manifest_path.read_text())
        except json.JSONDecodeError as exc:
            raise IngestError(f"manifest is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise IngestError("manifest must be a JSON object mapping source names to specs")

        root = manifest_path.parent
        entries: list[SourceEntry] = []
        study_meta = None
        problems: list[str] = []
        for name, spec in data.items():
            if name == "study_meta" and isinstance(spec, dict) and "format" not in spec:
                study_meta = StudyMeta.from_json(spec)
                continue
            if not isinstance(spec, dict) or "format" not in spec:
                problems.append(f"{name}: source spec needs a format")
                continue
            fmt = spec["format"]
            if fmt not in ALL_FORMATS:
                problems.append(f"{name}: unknown format {fmt!r}")
                continue
            path = root / spec.get("path", "")
            if not path.exists():
                problems.append(f"{name}: path does not exist: {path}")
                continue
            entries.append(SourceEntry(name=name, format=fmt, path=path, options=spec.get("options", {})))
        if problems:
            raise IngestError("invalid manifest: " + "; ".join(problems))
        if not entries:
            raise IngestError("manifest declares no sources")
        return cls(root=root, entries=entries, study_meta=study_meta)


def auto_color(index: int) -> tuple[float, float, float]:
    if index < len(_PALETTE):
        return _PALETTE[index]
    h = (index * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hsv_to_rgb(h, 0.65, 0.9)
    return (round(r, 6), round(g, 6), round(b, 6))


def ingest(bundle: SourceBundle, study_meta: StudyMeta | None = None) -> tuple[ConfigDocument, IngestReport]:
    """Build a validated-shape document from a source bundle.

    Deterministic for identical bundle bytes: sessions follow manifest
    order, colors come from a fixed palette, and nothing depends on wall
    clock. Row-level problems are skipped with a warning in the report.
    """
    report = IngestReport()

    scene_payload: dict = {"footprints": [], "meshes": []}
    session_groups: dict[tuple[str, str], list[SourceEntry]] = {}
    for entry in bundle.entries:
        if entry.format in SCENE_FORMATS:
            payload = SCENE_FORMATS[entry.format](entry.path, entry.options, report, entry.name)
            scene_payload["footprints"].extend(payload.get("footprints", []))
            scene_payload["meshes"].extend(payload.get("meshes", []))
            if "origin" in payload:
                scene_payload["origin"] = payload["origin"]
            continue
        key = (str(entry.options.get("participant", "p1")), str(entry.options.get("condition", "")))
        session_groups.setdefault(key, []).append(entry)

    if not session_groups:
        raise IngestError("bundle contains no session data sources")

    sessions = []
    demographics: dict[str, dict[str, str]] = {}
    for (pid, condition), entries in session_groups.items():
        session = _build_session(pid, condition, entries, report)
        sessions.append(session)
        for e in entries:
            demo = e.options.get("demographics")
            if isinstance(demo, dict):
                demographics.setdefault(pid, {}).update({str(k): str(v) for k, v in demo.items()})

    pids = []
    for s in sessions:
        if s.participant_id not in pids:
            pids.append(s.participant_id)
    participants = [
        Participant(id=pid, color=auto_color(i), demographics=demographics.get(pid, {}))
        for i, pid in enumerate(pids)
    ]

    scene = _build_scene(scene_payload, sessions, report)

    meta = study_meta or bundle.study_meta or StudyMeta(title=bundle.root.name)
    if not meta.conditions:
        conditions = []
        for s in sessions:
            if s.condition and s.condition not in conditions:
                conditions.append(s.condition)
        meta = StudyMeta(title=meta.title, conditions=conditions, notes=meta.notes)

    doc = ConfigDocument(
        study_meta=meta,
        participants=participants,
        sessions=sessions,
        scene=scene,
        annotations=[],
    )
    return doc, report


def _build_session(pid: str, condition: str, entries: list[SourceEntry], report: IngestReport) -> SessionRecording:
    merged: dict = {
        "streams": [],
        "skeleton_joints": [],
        "skeleton_raw": [],
        "rays_raw": [],
        "touches_raw": [],
        "events_raw": [],
        "speech_raw": [],
        "ego_path_raw": [],
        "road_users_raw": [],
        "media": [],
    }
    t0_option = 0
    for entry in entries:
        payload = SESSION_FORMATS[entry.format](entry.path, entry.options, report, entry.name)
        for key, value in payload.items():
            if key == "skeleton_joints":
                if merged["skeleton_joints"] and merged["skeleton_joints"] != value:
                    report.warn(entry.name, "conflicting joint sets within one session; keeping the first")
                    continue
                merged["skeleton_joints"] = value
            else:
                merged[key] = merged.get(key, []) + value
        if "t0" in entry.options:
            t0_option = int(entry.options["t0"])

    # decide the epoch anchor from sources that carry absolute time
    absolute_mins = []
    for times in _raw_time_lists(merged):
        if times and min(times) >= EPOCH_MIN_MS:
            absolute_mins.append(min(times))
    t0 = int(min(absolute_mins)) if absolute_mins else t0_option

    def rel(t: float, source_min: float) -> int:
        return int(round(t - t0)) if source_min >= EPOCH_MIN_MS else int(round(t))

    def shift(pairs):
        if not pairs:
            return []
        source_min = min(p[0] for p in pairs)
        return [(rel(t, source_min), *rest) for t, *rest in pairs]

    streams = []
    for stream in merged["streams"]:
        samples = shift(stream.samples)
        samples.sort(key=lambda s: s[0])
        stream.samples = [(t, v) for t, v in samples]
        if stream.rate_hz <= 0:
            deltas = [b - a for (a, _), (b, _) in zip(stream.samples, stream.samples[1:])]
            if deltas:
                med = statistics.median(deltas)
                stream.rate_hz = 1000.0 / med if med > 0 else 1.0
            else:
                stream.rate_hz = 1.0
        stream.gaps = find_gaps(stream.samples, stream.rate_hz)
        if stream.gaps:
            report.warn(stream.name, f"{len(stream.gaps)} gap(s) wider than 2x the nominal period recorded")
        streams.append(stream)

    skeleton = []
    for t, poses in sorted(shift(merged["skeleton_raw"]), key=lambda p: p[0]):
        skeleton.append(SkeletonFrame(t=t, joints=poses))

    gaze, pointing = [], []
    for t, ray in sorted(shift(merged["rays_raw"]), key=lambda p: p[0]):
        ray.t = t
        (gaze if ray.modality == "gaze" else pointing).append(ray)

    touches = []
    for t, sample in sorted(shift(merged["touches_raw"]), key=lambda p: p[0]):
        sample.t = t
        touches.append(sample)

    events = []
    ev_raw = merged["events_raw"]
    if ev_raw:
        source_min = min(a for a, _, _ in ev_raw)
        for a, b, ev in ev_raw:
            ev.t_start = rel(a, source_min)
            ev.t_end = rel(b, source_min)
            if not ev.participant_id:
                ev.participant_id = pid
            events.append(ev)
        events.sort(key=lambda e: (e.t_start, e.id))

    speech = []
    sp_raw = merged["speech_raw"]
    if sp_raw:
        source_min = min(a for a, _, _ in sp_raw)
        for a, b, seg in sorted(sp_raw, key=lambda p: p[0]):
            seg.t_start = rel(a, source_min)
            seg.t_end = rel(b, source_min)
            speech.append(seg)

    ego_path = []
    for t, g in sorted(shift(merged["ego_path_raw"]), key=lambda p: p[0]):
        g.t = t
        ego_path.append(g)

    road_users = []
    for t, r in sorted(shift(merged["road_users_raw"]), key=lambda p: p[0]):
        r.t = t
        road_users.append(r)

    if not streams and not skeleton:
        raise IngestError(f"session {pid!r}: empty session (needs at least stream or skeleton data)")

    all_times = []
    for stream in streams:
        all_times.extend(t for t, _ in stream.samples)
    all_times.extend(f.t for f in skeleton)
    all_times.extend(r.t for r in gaze + pointing)
    all_times.extend(s.t for s in touches)
    all_times.extend(e.t_end for e in events)
    all_times.extend(s.t_end for s in speech)
    all_times.extend(g.t for g in ego_path)
    all_times.extend(r.t for r in road_users)
    negative = [t for t in all_times if t < 0]
    if negative:
        report.warn(pid, f"{len(negative)} timestamps before session start clamped to 0")
        for stream in streams:
            stream.samples = [(max(0, t), v) for t, v in stream.samples]
        for coll in (skeleton, gaze, pointing, touches, ego_path, road_users):
            for item in coll:
                item.t = max(0, item.t)
        for e in events:
            e.t_start, e.t_end = max(0, e.t_start), max(0, e.t_end)
        for seg in speech:
            seg.t_start, seg.t_end = max(0, seg.t_start), max(0, seg.t_end)
    duration = max(all_times) if all_times else 0

    return SessionRecording(
        participant_id=pid,
        condition=condition,
        t0=t0,
        duration=int(max(0, duration)),
        streams=streams,
        skeleton_joints=merged["skeleton_joints"],
        skeleton=skeleton,
        gaze=gaze,
        pointing=pointing,
        touches=touches,
        speech=speech,
        events=events,
        ego_path=ego_path,
        road_users=road_users,
        media=merged["media"],
    )


def _raw_time_lists(merged: dict):
    yield [t for s in merged["streams"] for t, _ in s.samples]
    yield [t for t, _ in merged["skeleton_raw"]]
    yield [t for t, _ in merged["rays_raw"]]
    yield [t for t, _ in merged["touches_raw"]]
    yield [a for a, _, _ in merged["events_raw"]]
    yield [a for a, _, _ in merged["speech_raw"]]
    yield [t for t, _ in merged["ego_path_raw"]]
    yield [t for t, _ in merged["road_users_raw"]]


def _build_scene(scene_payload: dict, sessions: list[SessionRecording], report: IngestReport) -> SceneDescription | None:
    origin = scene_payload.get("origin")
    if origin is None:
        for s in sessions:
            if s.ego_path:
                g = s.ego_path[0]
                origin = GeoSample(t=0, lat=g.lat, lon=g.lon, alt=g.alt, heading=0.0, speed=0.0)
                break
    if origin is None:
        report.warn("scene", "no GPS data and no explicit origin; document has no scene")
        return None

    frame = LocalFrame(origin=origin)
    meshes = list(scene_payload["meshes"])
    meshes.extend(extrude_footprints(scene_payload["footprints"], frame))

    if not any(m.role == "interior" for m in meshes):
        meshes.insert(0, default_interior_mesh())
    ego = next((m for m in meshes if m.role == "ego_exterior"), None)
    if ego is None:
        ego = default_ego_exterior_mesh()
        meshes.insert(1, ego)

    return SceneDescription(
        origin=origin,
        meshes=meshes,
        footprints=list(scene_payload["footprints"]),
        ego_vehicle=ego.id,
    )
