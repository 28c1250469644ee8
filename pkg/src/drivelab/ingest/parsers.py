"""Format parsers for raw study sources.

Every parser takes (path, options, report) and returns a payload dict the
pipeline merges into a session or the scene. Timestamps come back as raw
float milliseconds; the pipeline decides per session whether they are
epoch-anchored and shifts them to session-relative time.

Registering a new dataset adapter means adding one function here; the
pipeline does not change.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from ..canonical import mesh_from_obj
from ..model import (
    EventRecord,
    GeoSample,
    JointPose,
    MediaRef,
    RaySample,
    SampledStream,
    SkeletonFrame,
    SpeechSegment,
    SurfaceSample,
    TrackedObjectSample,
)
from ..geoscene.extrude import footprints_from_geojson


class RowError(ValueError):
    pass


def parse_time_cell(text: str) -> tuple[float, str]:
    """Parse one timestamp cell; returns (ms, detected format)."""
    s = text.strip()
    try:
        return float(int(s)), "ms"
    except ValueError:
        pass
    try:
        return float(s), "ms"
    except ValueError:
        pass
    try:
        dt = datetime.fromisoformat(s.replace("Z", "+00:00"))
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return dt.timestamp() * 1000.0, "iso8601"
    except ValueError:
        raise RowError(f"unparseable timestamp {text!r}") from None


def _float(row: dict, key: str) -> float:
    try:
        return float(row[key])
    except (KeyError, TypeError):
        raise RowError(f"missing column {key!r}") from None
    except ValueError:
        raise RowError(f"bad number {row[key]!r} in column {key!r}") from None


def _read_csv(path: Path, report, source: str) -> tuple[list[str], list[tuple[int, dict]]]:
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = []
        for i, row in enumerate(reader):
            rows.append((i + 2, row))  # header is line 1
        return list(header), rows


def _iter_rows(rows, report, source: str, fn: Callable[[dict], Any]) -> list[Any]:
    out = []
    for line_no, row in rows:
        try:
            out.append(fn(row))
        except RowError as exc:
            report.warn(source, f"line {line_no}: {exc}; row skipped")
    return out


def parse_stream_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    time_col = options.get("time_col") or ("t" if "t" in header else header[0])
    value_col = options.get("value_col") or ("value" if "value" in header else header[1])
    fmt_seen: set[str] = set()

    def one(row):
        t, fmt = parse_time_cell(row[time_col])
        fmt_seen.add(fmt)
        v = _float(row, value_col)
        if not math.isfinite(v):
            raise RowError(f"non-finite value {row[value_col]!r}")
        return (t, v)

    samples = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    stream = SampledStream(
        name=options.get("name", source),
        unit=options.get("unit", ""),
        rate_hz=float(options["rate_hz"]) if "rate_hz" in options else 0.0,  # 0 = infer later
        samples=samples,  # type: ignore[arg-type]
    )
    return {"streams": [stream]}


def parse_empatica_csv(path: Path, options: dict, report, source: str) -> dict:
    """Wearable export: line 1 start epoch seconds, line 2 rate Hz, then values."""
    lines = path.read_text().strip().splitlines()
    if len(lines) < 3:
        report.warn(source, "file too short for wearable format")
        return {"streams": []}
    col = int(options.get("value_col", 0))
    start_ms = float(lines[0].split(",")[col]) * 1000.0
    rate = float(lines[1].split(",")[col])
    samples = []
    for i, line in enumerate(lines[2:]):
        try:
            v = float(line.split(",")[col])
        except (ValueError, IndexError):
            report.warn(source, f"line {i + 3}: bad value {line!r}; row skipped")
            continue
        if not math.isfinite(v):
            report.warn(source, f"line {i + 3}: non-finite value; row skipped")
            continue
        samples.append((start_ms + i * 1000.0 / rate, v))
    report.note_time_format(source, {"epoch_s_header"})
    return {
        "streams": [
            SampledStream(
                name=options.get("name", source),
                unit=options.get("unit", ""),
                rate_hz=rate,
                samples=samples,  # type: ignore[arg-type]
            )
        ]
    }


_POSE_SUFFIXES = ("_px", "_py", "_pz")
_ROT_SUFFIXES = ("_qw", "_qx", "_qy", "_qz")


def parse_skeleton_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    joints: list[str] = []
    for col in header:
        if col.endswith("_px"):
            joints.append(col[: -len("_px")])
    if not joints:
        report.warn(source, "no joint columns (<joint>_px/_py/_pz) found")
        return {}
    has_rot = {j: all(f"{j}{s}" in header for s in _ROT_SUFFIXES) for j in joints}
    fps = float(options.get("fps", 30.0))
    use_frame = "t" not in header and "frame" in header
    fmt_seen: set[str] = set()

    def one(row):
        if use_frame:
            t = float(row["frame"]) / fps * 1000.0
            fmt_seen.add(f"frame@{fps:g}fps")
        else:
            t, fmt = parse_time_cell(row["t"])
            fmt_seen.add(fmt)
        poses = []
        for j in joints:
            pos = tuple(_float(row, f"{j}{s}") for s in _POSE_SUFFIXES)
            if has_rot[j]:
                q = tuple(_float(row, f"{j}{s}") for s in _ROT_SUFFIXES)
                norm = math.sqrt(sum(c * c for c in q))
                if norm < 1e-9:
                    raise RowError(f"zero quaternion for joint {j!r}")
                q = tuple(c / norm for c in q)
            else:
                q = (1.0, 0.0, 0.0, 0.0)
            poses.append(JointPose(position=pos, rotation=q))  # type: ignore[arg-type]
        return (t, poses)

    frames = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    return {"skeleton_joints": joints, "skeleton_raw": frames}


def parse_gps_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    fmt_seen: set[str] = set()

    def one(row):
        t, fmt = parse_time_cell(row["t"])
        fmt_seen.add(fmt)
        lat = _float(row, "lat")
        lon = _float(row, "lon")
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise RowError(f"lat/lon out of range ({lat}, {lon})")
        heading = float(row["heading"]) if row.get("heading") not in (None, "",) else float("nan")
        return (
            t,
            GeoSample(
                t=0,
                lat=lat,
                lon=lon,
                alt=float(row["alt"]) if row.get("alt") else 0.0,
                heading=heading,
                speed=float(row["speed"]) if row.get("speed") else 0.0,
            ),
        )

    samples = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    return {"ego_path_raw": samples}


def parse_rays_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    default_modality = options.get("modality", "gaze")
    fmt_seen: set[str] = set()

    def one(row):
        t, fmt = parse_time_cell(row["t"])
        fmt_seen.add(fmt)
        origin = (_float(row, "ox"), _float(row, "oy"), _float(row, "oz"))
        d = (_float(row, "dx"), _float(row, "dy"), _float(row, "dz"))
        norm = math.sqrt(sum(c * c for c in d))
        if norm < 1e-9:
            raise RowError("zero direction vector")
        if abs(norm - 1.0) > 1e-3:
            report.warn(source, f"direction norm {norm:.4f} renormalized")
        d = (d[0] / norm, d[1] / norm, d[2] / norm)
        modality = row.get("modality") or default_modality
        if modality not in ("gaze", "pointing"):
            raise RowError(f"unknown modality {modality!r}")
        return (t, RaySample(t=0, origin=origin, direction=d, modality=modality))

    samples = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    return {"rays_raw": samples}


def parse_touches_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    fmt_seen: set[str] = set()

    def one(row):
        t, fmt = parse_time_cell(row["t"])
        fmt_seen.add(fmt)
        if not row.get("mesh_id"):
            raise RowError("missing mesh_id")
        return (
            t,
            SurfaceSample(t=0, mesh_id=row["mesh_id"], position=(_float(row, "x"), _float(row, "y"), _float(row, "z"))),
        )

    samples = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    return {"touches_raw": samples}


_EVENT_COLUMNS = {"id", "kind", "label", "t_start", "t_end", "participant_id", "confidence", "source"}


def parse_events_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    fmt_seen: set[str] = set()
    counter = [0]

    def one(row):
        a, fmt = parse_time_cell(row["t_start"])
        b, _ = parse_time_cell(row["t_end"])
        fmt_seen.add(fmt)
        if row.get("kind") not in ("interaction", "emotion", "driving", "activity", "audio"):
            raise RowError(f"unknown event kind {row.get('kind')!r}")
        attrs = {k: v for k, v in row.items() if k not in _EVENT_COLUMNS and v not in (None, "")}
        counter[0] += 1
        ev = EventRecord(
            id=row.get("id") or f"evt-{source}-{counter[0]}",
            kind=row["kind"],
            label=row.get("label", ""),
            t_start=0,
            t_end=0,
            participant_id=row.get("participant_id", ""),
            attrs=attrs,
            confidence=float(row["confidence"]) if row.get("confidence") else 1.0,
            source=row.get("source") or "logged",
        )
        return (a, b, ev)

    events = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    return {"events_raw": events}


def parse_speech_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    fmt_seen: set[str] = set()

    def one(row):
        a, fmt = parse_time_cell(row["t_start"])
        b, _ = parse_time_cell(row["t_end"])
        fmt_seen.add(fmt)
        return (a, b, SpeechSegment(t_start=0, t_end=0, transcript=row.get("transcript", ""), referent=row.get("referent") or None))

    segs = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    return {"speech_raw": segs}


def parse_road_users_csv(path: Path, options: dict, report, source: str) -> dict:
    header, rows = _read_csv(path, report, source)
    fmt_seen: set[str] = set()

    def one(row):
        t, fmt = parse_time_cell(row["t"])
        fmt_seen.add(fmt)
        cls = row.get("class", "other")
        if cls not in ("car", "pedestrian", "cyclist", "other"):
            raise RowError(f"unknown object class {cls!r}")
        return (
            t,
            TrackedObjectSample(
                t=0,
                object_id=row["object_id"],
                object_class=cls,
                position=(_float(row, "x"), _float(row, "y"), _float(row, "z")),
            ),
        )

    samples = _iter_rows(rows, report, source, one)
    report.note_time_format(source, fmt_seen)
    return {"road_users_raw": samples}


def parse_media_ref(path: Path, options: dict, report, source: str) -> dict:
    return {
        "media": [
            MediaRef(
                path=str(options.get("relative_path", path.name)),
                kind=options.get("kind", "video"),
                t_offset=int(options.get("t_offset", 0)),
            )
        ]
    }


def parse_footprints_geojson(path: Path, options: dict, report, source: str) -> dict:
    return {"footprints": footprints_from_geojson(path)}


def parse_mesh_obj(path: Path, options: dict, report, source: str) -> dict:
    mesh = mesh_from_obj(path, mesh_id=options.get("id", source), role=options.get("role", "building"))
    return {"meshes": [mesh]}


def parse_origin_json(path: Path, options: dict, report, source: str) -> dict:
    d = json.loads(path.read_text())
    return {
        "origin": GeoSample(
            t=0,
            lat=float(d["lat"]),
            lon=float(d["lon"]),
            alt=float(d.get("alt", 0.0)),
            heading=float(d.get("heading", 0.0)),
            speed=0.0,
        )
    }


SESSION_FORMATS: dict[str, Callable] = {
    "stream_csv": parse_stream_csv,
    "empatica_csv": parse_empatica_csv,
    "skeleton_csv": parse_skeleton_csv,
    "gps_csv": parse_gps_csv,
    "rays_csv": parse_rays_csv,
    "touches_csv": parse_touches_csv,
    "events_csv": parse_events_csv,
    "speech_csv": parse_speech_csv,
    "road_users_csv": parse_road_users_csv,
    "media_ref": parse_media_ref,
}

SCENE_FORMATS: dict[str, Callable] = {
    "footprints_geojson": parse_footprints_geojson,
    "mesh_obj": parse_mesh_obj,
    "origin_json": parse_origin_json,
}

ALL_FORMATS = {**SESSION_FORMATS, **SCENE_FORMATS}
