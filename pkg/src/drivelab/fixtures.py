"""Bundled synthetic study data.

A three-participant automated-driving session on a ~2.4 km downtown loop
at a constant 35 km/h, with four scripted task windows (in-vehicle
navigation query, a social phase, an unexpected cyclist crossing, and
environment sightseeing at a landmark tower). Multimodal interaction
chains run gaze -> pointing -> speech with exactly 500 ms between onsets,
so pipeline metrics have known ground truth. Everything is deterministic.

The same data is available three ways: as an in-memory document, as a raw
CSV source bundle for the ingest pipeline, and as a miniature
activity-recognition-style bundle (frame-indexed poses, activity
intervals, no environment data).
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

from .geoscene.geodesy import LocalFrame, local_to_geo
from .geoscene.path import PathPose, scene_to_vehicle, segment_heading
from .model import (
    BuildingFootprint,
    ConfigDocument,
    EventRecord,
    GeoSample,
    JointPose,
    MeshAsset,
    Participant,
    RaySample,
    SampledStream,
    SceneDescription,
    SessionRecording,
    SkeletonFrame,
    SpeechSegment,
    StudyMeta,
    SurfaceSample,
    TrackedObjectSample,
)
from .ingest.pipeline import auto_color
from .ingest.resample import find_gaps
from .validation import polygon_signed_area
from .vehicle import default_ego_exterior_mesh, default_interior_mesh

ORIGIN_LAT = 37.7936
ORIGIN_LON = -122.3990

SPEED_KMH = 35.0
SPEED_MS = SPEED_KMH / 3.6

# four legs, 2400 m total; the first leg is the 60 s constant-speed segment
TRACK_LEGS_M = [
    ((0.0, 0.0), (0.0, SPEED_MS * 60.0)),           # north, 583.33 m
    ((0.0, SPEED_MS * 60.0), (600.0, SPEED_MS * 60.0)),  # east, 600 m
    ((600.0, SPEED_MS * 60.0), (600.0, SPEED_MS * 60.0 + 616.6666666666667)),
    ((600.0, SPEED_MS * 60.0 + 616.6666666666667), (1200.0, SPEED_MS * 60.0 + 616.6666666666667)),
]
TRACK_LENGTH_M = 583.3333333333334 + 600.0 + 616.6666666666667 + 600.0  # = 2400.0

TASKS = {
    "in_vehicle": (20_000, 50_000),
    "social": (70_000, 100_000),
    "unexpected": (130_000, 150_000),
    "environment": (200_000, 235_000),
}

PARTICIPANT_IDS = ("p1", "p2", "p3")

JOINTS = ["head", "neck", "left_hand", "right_hand"]

LANDMARK_ID = "transamerica_pyramid"
STREET_NAME = "Lombard Street"


def track_position(s: float) -> tuple[float, float]:
    """Point on the track polyline at arc length s (meters, local frame)."""
    remaining = max(0.0, min(TRACK_LENGTH_M, s))
    for (x1, y1), (x2, y2) in TRACK_LEGS_M:
        seg = math.hypot(x2 - x1, y2 - y1)
        if remaining <= seg:
            u = remaining / seg
            return (x1 + u * (x2 - x1), y1 + u * (y2 - y1))
        remaining -= seg
    return TRACK_LEGS_M[-1][1]


def track_heading(s: float) -> float:
    remaining = max(0.0, min(TRACK_LENGTH_M, s))
    for (x1, y1), (x2, y2) in TRACK_LEGS_M:
        seg = math.hypot(x2 - x1, y2 - y1)
        if remaining <= seg:
            return segment_heading((x1, y1, 0.0), (x2, y2, 0.0))
        remaining -= seg
    a, b = TRACK_LEGS_M[-1]
    return segment_heading((a[0], a[1], 0.0), (b[0], b[1], 0.0))


def session_duration_ms() -> int:
    return int(round(TRACK_LENGTH_M / SPEED_MS * 1000.0))


def ego_pose_at(t_ms: int) -> PathPose:
    s = SPEED_MS * t_ms / 1000.0
    x, y = track_position(s)
    return PathPose(position=(x, y, 0.0), heading=track_heading(s))


def _frame() -> LocalFrame:
    return LocalFrame(origin=GeoSample(t=0, lat=ORIGIN_LAT, lon=ORIGIN_LON, alt=0.0, heading=0.0, speed=0.0))


def _gps_track() -> list[GeoSample]:
    frame = _frame()
    duration = session_duration_ms()
    times = list(range(0, duration, 1000)) + [duration]
    out = []
    for t in times:
        s = SPEED_MS * t / 1000.0
        x, y = track_position(s)
        lat, lon, _ = local_to_geo(frame, (x, y, 0.0))
        out.append(GeoSample(t=t, lat=lat, lon=lon, alt=0.0, heading=float("nan"), speed=SPEED_MS))
    return out


def _footprints() -> list[BuildingFootprint]:
    frame = _frame()

    def ring(cx, cy, half):
        corners = [(cx - half, cy - half), (cx + half, cy - half), (cx + half, cy + half), (cx - half, cy + half)]
        poly = []
        for x, y in corners:
            lat, lon, _ = local_to_geo(frame, (x, y, 0.0))
            poly.append((lat, lon))
        if polygon_signed_area(poly) < 0:
            poly = list(reversed(poly))
        return poly

    # the landmark sits east of the final leg's end
    end_x, end_y = TRACK_LEGS_M[-1][1]
    return [
        BuildingFootprint(id=LANDMARK_ID, polygon=ring(end_x + 60.0, end_y, 24.0), height=260.0),
        BuildingFootprint(id="office_block", polygon=ring(540.0, 400.0, 18.0), height=28.0),
        BuildingFootprint(id="row_house", polygon=ring(-40.0, 300.0, 12.0), height=12.0),
    ]


def _landmark_centroid_scene() -> tuple[float, float, float]:
    end_x, end_y = TRACK_LEGS_M[-1][1]
    return (end_x + 60.0, end_y, 40.0)  # aim below the roof line


HEAD_POS = (0.95, 0.35, 1.18)
LEFT_HAND = (1.25, 0.55, 0.75)
RIGHT_HAND = (1.25, 0.15, 0.75)


def _skeleton(pid_index: int, duration: int) -> list[SkeletonFrame]:
    frames = []
    phase = pid_index * 2.1
    env_start, env_end = TASKS["environment"]
    for i in range(0, duration // 33 + 1):
        t = i * 33
        if t > duration:
            break
        sway = 0.02 * math.sin(2 * math.pi * t / 4000.0 + phase)
        head = (HEAD_POS[0] + sway, HEAD_POS[1] + 0.01 * pid_index, HEAD_POS[2])
        right = list(RIGHT_HAND)
        if env_start <= t <= env_end:
            # raise the right hand to point out the window
            lift = min(1.0, (t - env_start) / 1500.0)
            right = [1.05, 0.0, 0.75 + 0.45 * lift]
        rot = _small_rotation(0.05 * math.sin(2 * math.pi * t / 6000.0 + phase))
        frames.append(
            SkeletonFrame(
                t=t,
                joints=[
                    JointPose(position=head, rotation=rot),
                    JointPose(position=(0.95, 0.35 - 0.02 * pid_index, 1.0), rotation=rot),
                    JointPose(position=(LEFT_HAND[0], LEFT_HAND[1], LEFT_HAND[2] + sway), rotation=rot),
                    JointPose(position=tuple(right), rotation=rot),
                ],
            )
        )
    return frames


def _small_rotation(angle: float) -> tuple[float, float, float, float]:
    return (math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2))


def _streams(pid_index: int, duration: int) -> list[SampledStream]:
    rng = random.Random(1000 + pid_index)
    unexpected_start, unexpected_end = TASKS["unexpected"]
    eda = []
    for i in range(0, duration // 250 + 1):
        t = i * 250
        if t > duration:
            break
        base = 2.0 + 0.3 * math.sin(2 * math.pi * t / 30_000.0) + rng.gauss(0, 0.05)
        if unexpected_start <= t <= unexpected_start + 10_000:
            base += 4.0  # sustained arousal spike for the threshold detector
        eda.append((t, round(base, 4)))
    # a few isolated artifacts so outlier marks exist (small enough to keep
    # the z-score threshold of the stress detector below the task step)
    eda[40] = (eda[40][0], 9.0)
    eda[600] = (eda[600][0], 8.5)

    hr = []
    for i in range(0, duration // 1000 + 1):
        t = i * 1000
        if t > duration:
            break
        hr.append((t, round(72.0 + 4.0 * math.sin(2 * math.pi * t / 45_000.0 + pid_index) + rng.gauss(0, 0.4), 2)))

    s_eda = SampledStream(name="eda", unit="uS", rate_hz=4.0, samples=eda)
    s_eda.gaps = find_gaps(eda, 4.0)
    s_hr = SampledStream(name="heart_rate", unit="bpm", rate_hz=1.0, samples=hr)
    s_hr.gaps = find_gaps(hr, 1.0)
    return [s_eda, s_hr]


def _rays(pid_index: int, duration: int) -> tuple[list[RaySample], list[RaySample]]:
    gaze: list[RaySample] = []
    pointing: list[RaySample] = []
    eye = (0.98, 0.35, 1.15)
    fingertip = (1.05, 0.0, 1.2)
    landmark = _landmark_centroid_scene()

    # routine gaze sweeps over the dashboard outside the environment task
    for t in range(5000, duration - 5000, 2000):
        env_start, env_end = TASKS["environment"]
        if env_start <= t <= env_end:
            continue
        yaw = 0.35 * math.sin(2 * math.pi * t / 9000.0 + pid_index)
        d = (math.cos(yaw), math.sin(yaw), -0.35)
        n = math.sqrt(sum(c * c for c in d))
        gaze.append(RaySample(t=t, origin=eye, direction=(d[0] / n, d[1] / n, d[2] / n), modality="gaze"))

    # during the environment task both gaze and pointing aim at the landmark
    env_start, env_end = TASKS["environment"]
    for t in range(env_start, env_end + 1, 500):
        pose = ego_pose_at(t)
        for origin, modality, bucket in ((eye, "gaze", gaze), (fingertip, "pointing", pointing)):
            target_local = scene_to_vehicle(pose, (landmark[0], landmark[1], landmark[2]))
            d = tuple(tc - oc for tc, oc in zip(target_local, origin))
            n = math.sqrt(sum(c * c for c in d))
            bucket.append(RaySample(t=t, origin=origin, direction=tuple(c / n for c in d), modality=modality))

    gaze.sort(key=lambda r: r.t)
    pointing.sort(key=lambda r: r.t)
    return gaze, pointing


def _touches(pid_index: int) -> list[SurfaceSample]:
    # in-vehicle task: participants explore dashboard and center console
    rng = random.Random(500 + pid_index)
    t0, t1 = TASKS["in_vehicle"]
    out = []
    for k in range(12):
        t = t0 + k * (t1 - t0) // 12
        if k % 3 == 2:
            # center console plane: x in [1.05,1.55], y in [-0.25,0.25], z=0.55
            p = (rng.uniform(1.1, 1.5), rng.uniform(-0.2, 0.2), 0.55)
        else:
            # dashboard plane x=1.6
            p = (1.6, rng.uniform(-0.7, 0.7), rng.uniform(0.6, 0.9))
        out.append(SurfaceSample(t=t, mesh_id="interior", position=p))
    return out


def _speech(pid_index: int) -> list[SpeechSegment]:
    nav_t = TASKS["in_vehicle"][0] + 6_000 + pid_index * 400
    env_t = TASKS["environment"][0] + 5_000 + pid_index * 1000 + 1000
    social_t = TASKS["social"][0] + 8_000 + pid_index * 700
    return [
        SpeechSegment(t_start=nav_t, t_end=nav_t + 1800, transcript="where are we right now", referent=STREET_NAME),
        SpeechSegment(t_start=social_t, t_end=social_t + 2500, transcript="did you see that", referent=None),
        SpeechSegment(t_start=env_t, t_end=env_t + 1500, transcript="what is that tower", referent="Transamerica Pyramid"),
    ]


def _events(pid: str, pid_index: int) -> list[EventRecord]:
    events: list[EventRecord] = []
    for name, (a, b) in TASKS.items():
        events.append(
            EventRecord(
                id=f"task-{name}-{pid}",
                kind="driving" if name == "unexpected" else "activity",
                label=f"task:{name}",
                t_start=a,
                t_end=b,
                participant_id=pid,
                attrs={"task": name},
                source="logged",
            )
        )

    # the multimodal chain: gaze, then pointing, then speech, 500 ms apart
    base = TASKS["environment"][0] + 5_000 + pid_index * 1000
    for k, modality in enumerate(("gaze", "pointing", "speech")):
        attrs = {"modality": modality, "task": "environment"}
        if modality != "gaze":
            attrs["referent"] = "Transamerica Pyramid"
        events.append(
            EventRecord(
                id=f"chain-{pid}-{modality}",
                kind="interaction",
                label=f"{modality} at landmark",
                t_start=base + 500 * k,
                t_end=base + 500 * k + 400,
                participant_id=pid,
                attrs=attrs,
                source="logged",
            )
        )

    # in-vehicle location query by speech (indirect portal, street not modeled)
    nav_t = TASKS["in_vehicle"][0] + 6_000 + pid_index * 400
    events.append(
        EventRecord(
            id=f"navquery-{pid}",
            kind="interaction",
            label="location query",
            t_start=nav_t,
            t_end=nav_t + 1800,
            participant_id=pid,
            attrs={"modality": "speech", "referent": STREET_NAME, "task": "in_vehicle"},
            source="logged",
        )
    )

    events.sort(key=lambda e: (e.t_start, e.id))
    return events


def _road_users(duration: int) -> list[TrackedObjectSample]:
    out = []
    # cyclist crossing during the unexpected task, right to left
    t0, _ = TASKS["unexpected"]
    for k in range(9):
        t = t0 + 3000 + k * 500
        pose = ego_pose_at(t)
        fwd = (math.sin(math.radians(pose.heading)), math.cos(math.radians(pose.heading)))
        left = (-fwd[1], fwd[0])
        center = (pose.position[0] + fwd[0] * 18.0, pose.position[1] + fwd[1] * 18.0)
        off = 8.0 - 2.0 * k
        out.append(
            TrackedObjectSample(
                t=t,
                object_id="cyclist-1",
                object_class="cyclist",
                position=(center[0] - left[0] * off, center[1] - left[1] * off, 0.0),
            )
        )
    # oncoming car early in the drive
    for k in range(12):
        t = 8000 + k * 1000
        pose = ego_pose_at(t)
        fwd = (math.sin(math.radians(pose.heading)), math.cos(math.radians(pose.heading)))
        dist = 60.0 - k * 9.0
        out.append(
            TrackedObjectSample(
                t=t,
                object_id="car-1",
                object_class="car",
                position=(pose.position[0] + fwd[0] * dist - 3.0, pose.position[1] + fwd[1] * dist, 0.0),
            )
        )
    out.sort(key=lambda s: (s.t, s.object_id))
    return out


def build_study_document() -> ConfigDocument:
    """The in-memory fixture document (already merged and validated-shape)."""
    duration = session_duration_ms()
    gps = _gps_track()
    frame = _frame()

    from .geoscene.extrude import extrude_footprints

    footprints = _footprints()
    meshes = [default_interior_mesh(), default_ego_exterior_mesh()]
    meshes.extend(extrude_footprints(footprints, frame))

    participants = []
    sessions = []
    for i, pid in enumerate(PARTICIPANT_IDS):
        participants.append(Participant(id=pid, color=auto_color(i), demographics={"age": str(27 + 3 * i)}))
        gaze, pointing = _rays(i, duration)
        sessions.append(
            SessionRecording(
                participant_id=pid,
                condition="av_ride",
                t0=1_684_000_000_000 + i * 3_600_000,
                duration=duration,
                streams=_streams(i, duration),
                skeleton_joints=list(JOINTS),
                skeleton=_skeleton(i, duration),
                gaze=gaze,
                pointing=pointing,
                touches=_touches(i),
                speech=_speech(i),
                events=_events(pid, i),
                ego_path=gps,
                road_users=_road_users(duration),
            )
        )

    scene = SceneDescription(
        origin=GeoSample(t=0, lat=ORIGIN_LAT, lon=ORIGIN_LON, alt=0.0, heading=0.0, speed=0.0),
        meshes=meshes,
        footprints=footprints,
        ego_vehicle="ego",
    )
    return ConfigDocument(
        study_meta=StudyMeta(
            title="Multimodal AV interaction study (synthetic)",
            conditions=["av_ride"],
            notes="Synthetic fixture: 2.4 km downtown loop at 35 km/h, three participants.",
        ),
        participants=participants,
        sessions=sessions,
        scene=scene,
        annotations=[],
    )


def write_gazetteer(path: str | Path) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(
            [
                {"name": STREET_NAME, "lat": 37.8021, "lon": -122.4187},
                {"name": "Ferry Building", "lat": 37.7955, "lon": -122.3937},
            ],
            indent=2,
        )
    )
    return path


def write_source_bundle(root: str | Path) -> Path:
    """Raw CSV form of the fixture plus a manifest; returns the manifest path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    doc = build_study_document()

    frame = _frame()
    features = []
    for fp in _footprints():
        ring = [[lon, lat] for lat, lon in fp.polygon]
        ring.append(ring[0])
        features.append(
            {
                "type": "Feature",
                "properties": {"id": fp.id, "height": fp.height},
                "geometry": {"type": "Polygon", "coordinates": [ring]},
            }
        )
    (root / "footprints.geojson").write_text(json.dumps({"type": "FeatureCollection", "features": features}))

    manifest: dict = {
        "study_meta": doc.study_meta.to_json(),
        "footprints": {"format": "footprints_geojson", "path": "footprints.geojson"},
    }

    for s in doc.sessions:
        pid = s.participant_id
        opts = {"participant": pid, "condition": s.condition}

        eda = s.stream("eda")
        (root / f"{pid}_eda.csv").write_text(
            "t,value\n" + "".join(f"{t},{v}\n" for t, v in eda.samples)
        )
        manifest[f"{pid}/eda"] = {"format": "stream_csv", "path": f"{pid}_eda.csv",
                                  "options": {**opts, "name": "eda", "unit": "uS", "rate_hz": 4}}

        hr = s.stream("heart_rate")
        (root / f"{pid}_hr.csv").write_text(
            "t,value\n" + "".join(f"{t},{v}\n" for t, v in hr.samples)
        )
        manifest[f"{pid}/hr"] = {"format": "stream_csv", "path": f"{pid}_hr.csv",
                                 "options": {**opts, "name": "heart_rate", "unit": "bpm", "rate_hz": 1}}

        cols = ["t"]
        for j in JOINTS:
            cols += [f"{j}_px", f"{j}_py", f"{j}_pz", f"{j}_qw", f"{j}_qx", f"{j}_qy", f"{j}_qz"]
        lines = [",".join(cols)]
        for f in s.skeleton:
            row = [str(f.t)]
            for jp in f.joints:
                row += [repr(c) for c in jp.position] + [repr(c) for c in jp.rotation]
            lines.append(",".join(row))
        (root / f"{pid}_skeleton.csv").write_text("\n".join(lines) + "\n")
        manifest[f"{pid}/skeleton"] = {"format": "skeleton_csv", "path": f"{pid}_skeleton.csv", "options": opts}

        (root / f"{pid}_gps.csv").write_text(
            "t,lat,lon,alt,heading,speed\n"
            + "".join(f"{g.t},{g.lat!r},{g.lon!r},{g.alt!r},,{g.speed!r}\n" for g in s.ego_path)
        )
        manifest[f"{pid}/gps"] = {"format": "gps_csv", "path": f"{pid}_gps.csv", "options": opts}

        rays = sorted(s.gaze + s.pointing, key=lambda r: (r.t, r.modality))
        (root / f"{pid}_rays.csv").write_text(
            "t,ox,oy,oz,dx,dy,dz,modality\n"
            + "".join(
                f"{r.t},{r.origin[0]!r},{r.origin[1]!r},{r.origin[2]!r},"
                f"{r.direction[0]!r},{r.direction[1]!r},{r.direction[2]!r},{r.modality}\n"
                for r in rays
            )
        )
        manifest[f"{pid}/rays"] = {"format": "rays_csv", "path": f"{pid}_rays.csv", "options": opts}

        (root / f"{pid}_touches.csv").write_text(
            "t,mesh_id,x,y,z\n"
            + "".join(f"{x.t},{x.mesh_id},{x.position[0]!r},{x.position[1]!r},{x.position[2]!r}\n" for x in s.touches)
        )
        manifest[f"{pid}/touches"] = {"format": "touches_csv", "path": f"{pid}_touches.csv", "options": opts}

        (root / f"{pid}_events.csv").write_text(
            "id,kind,label,t_start,t_end,participant_id,confidence,source,modality,task,referent\n"
            + "".join(
                f"{e.id},{e.kind},{e.label},{e.t_start},{e.t_end},{e.participant_id},{e.confidence},{e.source},"
                f"{e.attrs.get('modality', '')},{e.attrs.get('task', '')},{e.attrs.get('referent', '')}\n"
                for e in s.events
            )
        )
        manifest[f"{pid}/events"] = {"format": "events_csv", "path": f"{pid}_events.csv", "options": opts}

        (root / f"{pid}_speech.csv").write_text(
            "t_start,t_end,transcript,referent\n"
            + "".join(f"{sp.t_start},{sp.t_end},{sp.transcript},{sp.referent or ''}\n" for sp in s.speech)
        )
        manifest[f"{pid}/speech"] = {"format": "speech_csv", "path": f"{pid}_speech.csv", "options": opts}

        (root / f"{pid}_road_users.csv").write_text(
            "t,object_id,class,x,y,z\n"
            + "".join(
                f"{r.t},{r.object_id},{r.object_class},{r.position[0]!r},{r.position[1]!r},{r.position[2]!r}\n"
                for r in s.road_users
            )
        )
        manifest[f"{pid}/road_users"] = {"format": "road_users_csv", "path": f"{pid}_road_users.csv", "options": opts}

    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path


def write_driveact_sample(root: str | Path) -> Path:
    """Miniature activity-dataset bundle: frame-indexed 3D poses and
    activity intervals, GPS only, no environment recordings."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = random.Random(77)

    cols = ["frame"]
    for j in ("head", "left_hand", "right_hand"):
        cols += [f"{j}_px", f"{j}_py", f"{j}_pz"]
    lines = [",".join(cols)]
    for frame_no in range(0, 1800):  # 60 s at 30 fps
        reading = 300 <= frame_no <= 1200
        head_z = 1.05 if reading else 1.18
        row = [str(frame_no),
               repr(0.95 + rng.gauss(0, 0.002)), "0.35", repr(head_z),
               "1.1", "0.4", repr(0.8 if reading else 0.75),
               "1.1", "0.1", repr(0.8 if reading else 0.75)]
        lines.append(",".join(row))
    (root / "poses.csv").write_text("\n".join(lines) + "\n")

    (root / "activities.csv").write_text(
        "participant_id,file_id,annotation_id,frame_start,frame_end,activity,chunk_id\n"
        "vp1,vp1/run1b,0,0,290,sitting_still,0\n"
        "vp1,vp1/run1b,1,300,1200,reading_newspaper,1\n"
        "vp1,vp1/run1b,2,1210,1799,sitting_still,2\n"
    )

    frame = _frame()
    gps_lines = ["t,lat,lon,alt,heading,speed"]
    for i in range(61):
        lat, lon, _ = local_to_geo(frame, (22.0 * i, 0.0, 0.0))  # ~80 km/h highway
        gps_lines.append(f"{i * 1000},{lat!r},{lon!r},0,,22.0")
    (root / "gps.csv").write_text("\n".join(gps_lines) + "\n")

    manifest = {
        "study_meta": {"title": "activity dataset conversion (miniature)", "conditions": ["autonomous"], "notes": ""},
        "poses": {"format": "skeleton_csv", "path": "poses.csv",
                  "options": {"participant": "vp1", "condition": "autonomous", "fps": 30}},
        "gps": {"format": "gps_csv", "path": "gps.csv",
                "options": {"participant": "vp1", "condition": "autonomous"}},
    }
    manifest_path = root / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2))
    return manifest_path
