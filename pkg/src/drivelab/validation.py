"""Structural validation of config documents.

``validate`` reports every invariant violation instead of raising, so a
single pass surfaces all problems. It never touches the filesystem: media
and mesh references are checked for shape only, keeping documents
relocatable.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from . import meshmath
from .model import (
    ANNOTATION_KINDS,
    EVENT_KINDS,
    EVENT_SOURCES,
    JOINT_CATALOG,
    MEDIA_KINDS,
    MESH_ROLES,
    MIN_JOINT_SET,
    OBJECT_CLASSES,
    RAY_MODALITIES,
    SCHEMA_VERSION,
    ConfigDocument,
    MeshAsset,
    SessionRecording,
)

SURFACE_TOLERANCE_M = 0.01
QUAT_NORM_TOLERANCE = 1e-6
DIRECTION_NORM_TOLERANCE = 1e-6
MIN_TRIANGLE_AREA = 1e-12
RATE_MISMATCH_FRACTION = 0.10


@dataclass
class Finding:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def to_json(self) -> dict:
        return {"severity": self.severity, "path": self.path, "message": self.message}


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "error"]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, path: str, message: str) -> None:
        self.findings.append(Finding("error", path, message))

    def warning(self, path: str, message: str) -> None:
        self.findings.append(Finding("warning", path, message))

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "errors": len(self.errors),
            "warnings": len(self.warnings),
            "findings": [f.to_json() for f in self.findings],
        }


def validate(doc: ConfigDocument) -> ValidationReport:
    report = ValidationReport()

    if doc.schema_version != SCHEMA_VERSION:
        report.error("schema_version", f"unsupported schema version {doc.schema_version!r}")

    seen = set()
    for i, cond in enumerate(doc.study_meta.conditions):
        if cond in seen:
            report.error(f"study_meta.conditions[{i}]", f"duplicate condition name {cond!r}")
        seen.add(cond)

    pids = set()
    colors = set()
    for i, p in enumerate(doc.participants):
        if p.id in pids:
            report.error(f"participants[{i}].id", f"duplicate participant id {p.id!r}")
        pids.add(p.id)
        if not all(0.0 <= c <= 1.0 for c in p.color):
            report.error(f"participants[{i}].color", f"color components outside [0,1]: {p.color}")
        if p.color in colors:
            report.error(f"participants[{i}].color", f"color {p.color} not unique")
        colors.add(p.color)

    mesh_ids = set()
    if doc.scene is not None:
        _validate_scene(doc, report)
        mesh_ids = {m.id for m in doc.scene.meshes}
    else:
        report.warning("scene", "document has no scene description")

    event_ids: set[str] = set()
    for si, session in enumerate(doc.sessions):
        _validate_session(doc, session, si, pids, mesh_ids, event_ids, report)

    ann_ids = set()
    for i, a in enumerate(doc.annotations):
        path = f"annotations[{i}]"
        if a.id in ann_ids:
            report.error(f"{path}.id", f"duplicate annotation id {a.id!r}")
        ann_ids.add(a.id)
        if a.kind not in ANNOTATION_KINDS:
            report.error(f"{path}.kind", f"unknown annotation kind {a.kind!r}")
        if a.kind == "label" and (a.t is None or a.position is None):
            report.error(path, "label annotations must carry both t and position")

    return report


def _is_sorted(ts: list[int]) -> bool:
    return all(a <= b for a, b in zip(ts, ts[1:]))


def _check_times(ts: list[int], duration: int, path: str, report: ValidationReport) -> None:
    if not _is_sorted(ts):
        report.error(path, "samples not sorted by timestamp")
    for t in ts:
        if not (0 <= t <= duration):
            report.error(path, f"timestamp {t} outside [0, {duration}]")
            break


def _validate_session(
    doc: ConfigDocument,
    s: SessionRecording,
    si: int,
    pids: set[str],
    mesh_ids: set[str],
    event_ids: set[str],
    report: ValidationReport,
) -> None:
    base = f"sessions[{si}]"
    if s.participant_id not in pids:
        report.error(f"{base}.participant_id", f"unresolved participant {s.participant_id!r}")
    if doc.study_meta.conditions and s.condition and s.condition not in doc.study_meta.conditions:
        report.warning(f"{base}.condition", f"condition {s.condition!r} not declared in study_meta")
    if s.duration < 0:
        report.error(f"{base}.duration", "negative duration")

    for i, st in enumerate(s.streams):
        path = f"{base}.streams[{i}]"
        if st.rate_hz <= 0:
            report.error(f"{path}.rate_hz", f"rate must be positive, got {st.rate_hz}")
        _check_times([t for t, _ in st.samples], s.duration, f"{path}.samples", report)
        if any(not math.isfinite(v) for _, v in st.samples):
            report.error(f"{path}.samples", "non-finite sample value (gaps must be explicit, not NaN)")
        if len(st.samples) >= 2 and st.rate_hz > 0:
            in_gap = set()
            for a, b in st.gaps:
                in_gap.add((a, b))
            deltas = [
                t2 - t1
                for (t1, _), (t2, _) in zip(st.samples, st.samples[1:])
                if (t1, t2) not in in_gap
            ]
            if deltas:
                period = 1000.0 / st.rate_hz
                median_gap = statistics.median(deltas)
                if abs(median_gap - period) > RATE_MISMATCH_FRACTION * period:
                    report.warning(
                        f"{path}.rate_hz",
                        f"declared rate {st.rate_hz} Hz (period {period:.3f} ms) does not match "
                        f"median sample gap {median_gap:.3f} ms",
                    )

    _validate_skeleton(s, base, report)

    for name, rays in (("gaze", s.gaze), ("pointing", s.pointing)):
        _check_times([r.t for r in rays], s.duration, f"{base}.{name}", report)
        for i, r in enumerate(rays):
            norm = math.dist((0.0, 0.0, 0.0), r.direction)
            if abs(norm - 1.0) > DIRECTION_NORM_TOLERANCE:
                report.error(f"{base}.{name}[{i}].direction", f"non-unit direction (|d|={norm:.9f})")
            if r.modality not in RAY_MODALITIES:
                report.error(f"{base}.{name}[{i}].modality", f"unknown modality {r.modality!r}")

    _check_times([t.t for t in s.touches], s.duration, f"{base}.touches", report)
    mesh_lookup = {m.id: m for m in (doc.scene.meshes if doc.scene else [])}
    for i, touch in enumerate(s.touches):
        path = f"{base}.touches[{i}]"
        if touch.mesh_id not in mesh_ids:
            report.error(f"{path}.mesh_id", f"unresolved mesh {touch.mesh_id!r}")
            continue
        mesh = mesh_lookup[touch.mesh_id]
        if mesh.triangles and all(0 <= i < len(mesh.vertices) for tri in mesh.triangles for i in tri):
            v, f = meshmath.mesh_arrays(mesh)
            d = meshmath.point_mesh_distance(touch.position, v, f)
            if d > SURFACE_TOLERANCE_M:
                report.error(f"{path}.position", f"point is {d * 100:.2f} cm off mesh {touch.mesh_id!r} surface")

    _check_times([sp.t_start for sp in s.speech], s.duration, f"{base}.speech", report)
    for i, sp in enumerate(s.speech):
        if sp.t_start > sp.t_end:
            report.error(f"{base}.speech[{i}]", f"t_start {sp.t_start} > t_end {sp.t_end}")

    _check_times([e.t_start for e in s.events], s.duration, f"{base}.events", report)
    for i, e in enumerate(s.events):
        path = f"{base}.events[{i}]"
        if e.id in event_ids:
            report.error(f"{path}.id", f"duplicate event id {e.id!r}")
        event_ids.add(e.id)
        if e.kind not in EVENT_KINDS:
            report.error(f"{path}.kind", f"unknown event kind {e.kind!r}")
        if e.t_start > e.t_end:
            report.error(path, f"t_start {e.t_start} > t_end {e.t_end}")
        if e.participant_id and e.participant_id not in pids:
            report.error(f"{path}.participant_id", f"unresolved participant {e.participant_id!r}")
        if not (0.0 <= e.confidence <= 1.0):
            report.error(f"{path}.confidence", f"confidence {e.confidence} outside [0,1]")
        if e.source not in EVENT_SOURCES:
            report.error(f"{path}.source", f"unknown source {e.source!r}")

    _check_times([g.t for g in s.ego_path], s.duration, f"{base}.ego_path", report)
    for i, g in enumerate(s.ego_path):
        if not (-90.0 <= g.lat <= 90.0):
            report.error(f"{base}.ego_path[{i}].lat", f"latitude {g.lat} outside [-90, 90]")
        if not (-180.0 <= g.lon <= 180.0):
            report.error(f"{base}.ego_path[{i}].lon", f"longitude {g.lon} outside [-180, 180]")

    _check_times([r.t for r in s.road_users], s.duration, f"{base}.road_users", report)
    for i, r in enumerate(s.road_users):
        if r.object_class not in OBJECT_CLASSES:
            report.error(f"{base}.road_users[{i}].class", f"unknown object class {r.object_class!r}")

    for i, m in enumerate(s.media):
        path = f"{base}.media[{i}].path"
        if m.path.startswith("/") or (len(m.path) > 1 and m.path[1] == ":"):
            report.error(path, f"media path must be relative, got {m.path!r}")
        if m.kind not in MEDIA_KINDS:
            report.error(f"{base}.media[{i}].kind", f"unknown media kind {m.kind!r}")


def _validate_skeleton(s: SessionRecording, base: str, report: ValidationReport) -> None:
    if not s.skeleton:
        return
    joints = s.skeleton_joints
    if not joints:
        report.error(f"{base}.skeleton_joints", "skeleton frames present but joint order undeclared")
        return
    if len(joints) != len(set(joints)):
        report.error(f"{base}.skeleton_joints", "duplicate joint names")
    if len(joints) > len(JOINT_CATALOG):
        report.error(f"{base}.skeleton_joints", f"more than {len(JOINT_CATALOG)} joints")
    for j in joints:
        if j not in JOINT_CATALOG:
            report.error(f"{base}.skeleton_joints", f"unknown joint name {j!r}")
    for j in MIN_JOINT_SET:
        if j not in joints:
            report.error(f"{base}.skeleton_joints", f"minimum joint set requires {j!r}")

    _check_times([f.t for f in s.skeleton], s.duration, f"{base}.skeleton", report)
    for i, frame in enumerate(s.skeleton):
        if len(frame.joints) != len(joints):
            report.error(
                f"{base}.skeleton[{i}]",
                f"frame has {len(frame.joints)} joints, session declares {len(joints)}",
            )
            continue
        for k, jp in enumerate(frame.joints):
            norm = math.sqrt(sum(q * q for q in jp.rotation))
            if abs(norm - 1.0) > QUAT_NORM_TOLERANCE:
                report.error(
                    f"{base}.skeleton[{i}].joints[{k}].rotation",
                    f"non-unit quaternion (|q|={norm:.9f})",
                )


def _validate_scene(doc: ConfigDocument, report: ValidationReport) -> None:
    scene = doc.scene
    assert scene is not None
    if not (-90.0 <= scene.origin.lat <= 90.0) or not (-180.0 <= scene.origin.lon <= 180.0):
        report.error("scene.origin", f"origin lat/lon out of range ({scene.origin.lat}, {scene.origin.lon})")

    ids = set()
    ego_meshes = []
    for i, m in enumerate(scene.meshes):
        path = f"scene.meshes[{i}]"
        if m.id in ids:
            report.error(f"{path}.id", f"duplicate mesh id {m.id!r}")
        ids.add(m.id)
        if m.role not in MESH_ROLES:
            report.error(f"{path}.role", f"unknown mesh role {m.role!r}")
        if m.role == "ego_exterior":
            ego_meshes.append(m.id)
        _validate_mesh(m, path, report)

    if len(ego_meshes) != 1:
        report.error("scene.meshes", f"expected exactly one ego-vehicle mesh, found {len(ego_meshes)}")
    if scene.ego_vehicle not in ids:
        report.error("scene.ego_vehicle", f"unresolved mesh {scene.ego_vehicle!r}")
    elif ego_meshes and scene.ego_vehicle not in ego_meshes:
        report.error("scene.ego_vehicle", f"{scene.ego_vehicle!r} is not the ego_exterior mesh")

    fids = set()
    for i, fp in enumerate(scene.footprints):
        path = f"scene.footprints[{i}]"
        if fp.id in fids:
            report.error(f"{path}.id", f"duplicate footprint id {fp.id!r}")
        fids.add(fp.id)
        if len(fp.polygon) < 3:
            report.error(f"{path}.polygon", f"polygon needs >= 3 vertices, got {len(fp.polygon)}")
            continue
        if not polygon_is_simple(fp.polygon):
            report.error(f"{path}.polygon", "polygon is self-intersecting")
            continue
        if polygon_signed_area(fp.polygon) <= 0:
            report.error(f"{path}.polygon", "polygon vertices must be counter-clockwise")
        if fp.height <= 0:
            report.error(f"{path}.height", f"height must be positive, got {fp.height}")


def _validate_mesh(m: MeshAsset, path: str, report: ValidationReport) -> None:
    n = len(m.vertices)
    for i, tri in enumerate(m.triangles):
        if any(idx < 0 or idx >= n for idx in tri):
            report.error(f"{path}.triangles[{i}]", f"vertex index out of range: {tri}")
            return
    if m.triangles:
        v, f = meshmath.mesh_arrays(m)
        areas = meshmath.triangle_areas(v, f)
        bad = np.nonzero(areas <= MIN_TRIANGLE_AREA)[0]
        if bad.size:
            report.error(f"{path}.triangles[{bad[0]}]", f"degenerate triangle (area {areas[bad[0]]:.3e} m^2)")
    if m.uv is not None:
        if len(m.uv) != n:
            report.error(f"{path}.uv", f"uv count {len(m.uv)} != vertex count {n}")
        elif any(not (0.0 <= u <= 1.0 and 0.0 <= w <= 1.0) for u, w in m.uv):
            report.error(f"{path}.uv", "uv coordinates outside [0,1]^2")


def polygon_signed_area(polygon: list[tuple[float, float]]) -> float:
    """Shoelace area of a (lat,lon) ring in the (x=lon, y=lat) plane.

    Positive for counter-clockwise rings (viewed with east right, north up).
    """
    area = 0.0
    n = len(polygon)
    for i in range(n):
        lat1, lon1 = polygon[i]
        lat2, lon2 = polygon[(i + 1) % n]
        area += lon1 * lat2 - lon2 * lat1
    return 0.5 * area


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_properly_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


def polygon_is_simple(polygon: list[tuple[float, float]]) -> bool:
    """True when no two non-adjacent edges properly intersect."""
    n = len(polygon)
    pts = [(lon, lat) for lat, lon in polygon]
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = pts[j], pts[(j + 1) % n]
            if _segments_properly_intersect(a1, a2, b1, b2):
                return False
    return True
