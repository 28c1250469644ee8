"""Seeded random config-document generator shared by round-trip tests."""

from __future__ import annotations

import math
import random

from drivelab.model import (
    Annotation,
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


def _unit(rng: random.Random) -> tuple[float, float, float]:
    while True:
        v = (rng.gauss(0, 1), rng.gauss(0, 1), rng.gauss(0, 1))
        n = math.sqrt(sum(c * c for c in v))
        if n > 1e-6:
            return (v[0] / n, v[1] / n, v[2] / n)


def _unit_quat(rng: random.Random) -> tuple[float, float, float, float]:
    while True:
        q = tuple(rng.gauss(0, 1) for _ in range(4))
        n = math.sqrt(sum(c * c for c in q))
        if n > 1e-6:
            return tuple(c / n for c in q)  # type: ignore[return-value]


def _quad_mesh(mesh_id: str, role: str, z: float = 0.0) -> MeshAsset:
    return MeshAsset(
        id=mesh_id,
        role=role,
        vertices=[(0.0, 0.0, z), (1.0, 0.0, z), (1.0, 1.0, z), (0.0, 1.0, z)],
        triangles=[(0, 1, 2), (0, 2, 3)],
        uv=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
    )


def random_document(rng: random.Random) -> ConfigDocument:
    n_participants = rng.randint(1, 3)
    participants = [
        Participant(
            id=f"p{i}",
            color=(round(0.1 + 0.25 * i, 3), round(rng.random(), 6), round(rng.random(), 6)),
            demographics={"age": str(rng.randint(18, 70))},
        )
        for i in range(n_participants)
    ]

    duration = rng.randint(5_000, 30_000)
    joints = ["head", "left_hand", "right_hand"]
    sessions = []
    for p in participants:
        n = rng.randint(2, 12)
        ts = sorted(rng.sample(range(duration + 1), n))
        skeleton = [
            SkeletonFrame(
                t=t,
                joints=[
                    JointPose(position=tuple(rng.uniform(-2, 2) for _ in range(3)), rotation=_unit_quat(rng))
                    for _ in joints
                ],
            )
            for t in ts
        ]
        stream_ts = list(range(0, duration + 1, 250))
        streams = [
            SampledStream(
                name="eda",
                unit="uS",
                rate_hz=4.0,
                samples=[(t, rng.uniform(0.1, 8.0)) for t in stream_ts],
            )
        ]
        gaze = [
            RaySample(t=t, origin=(0.0, 0.0, 1.2), direction=_unit(rng), modality="gaze")
            for t in sorted(rng.sample(range(duration + 1), min(5, duration)))
        ]
        events = [
            EventRecord(
                id=f"ev-{p.id}-{k}",
                kind=rng.choice(["interaction", "emotion", "driving", "activity", "audio"]),
                label=rng.choice(["touch", "stress", "brake", "reading", "utterance"]),
                t_start=(a := rng.randint(0, duration)),
                t_end=min(duration, a + rng.randint(0, 2000)),
                participant_id=p.id,
                attrs={"modality": rng.choice(["gaze", "pointing", "speech", "touch"])},
                confidence=round(rng.random(), 6),
                source=rng.choice(["logged", "inferred", "manual"]),
            )
            for k in range(rng.randint(0, 5))
        ]
        events.sort(key=lambda e: e.t_start)
        ego_path = [
            GeoSample(t=t, lat=48.0 + t * 1e-8, lon=9.0 + t * 2e-8, alt=0.0, heading=90.0, speed=10.0)
            for t in range(0, duration + 1, 1000)
        ]
        speech = [SpeechSegment(t_start=0, t_end=min(duration, 900), transcript="where are we", referent=None)]
        touches = [SurfaceSample(t=min(duration, 10), mesh_id="dash", position=(rng.uniform(0, 1), rng.uniform(0, 1), 0.0))]
        road_users = [
            TrackedObjectSample(t=t, object_id="cyclist-1", object_class="cyclist", position=(float(t) / 1000.0, 2.0, 0.0))
            for t in range(0, duration + 1, 2000)
        ]
        sessions.append(
            SessionRecording(
                participant_id=p.id,
                condition="baseline",
                t0=1_700_000_000_000 + rng.randint(0, 10_000),
                duration=duration,
                streams=streams,
                skeleton_joints=joints,
                skeleton=skeleton,
                gaze=gaze,
                pointing=[],
                touches=touches,
                speech=speech,
                events=events,
                ego_path=ego_path,
                road_users=road_users,
            )
        )

    scene = SceneDescription(
        origin=GeoSample(t=0, lat=48.0, lon=9.0, alt=0.0, heading=0.0, speed=0.0),
        meshes=[
            _quad_mesh("dash", "interior"),
            MeshAsset(
                id="ego",
                role="ego_exterior",
                vertices=[(0.0, 0.0, 0.0), (4.0, 0.0, 0.0), (4.0, 2.0, 0.0), (0.0, 0.0, 1.5)],
                triangles=[(0, 1, 2), (0, 1, 3)],
            ),
        ],
        footprints=[
            # counter-clockwise in the (lon, lat) plane
            BuildingFootprint(
                id="b1",
                polygon=[(48.001, 9.001), (48.001, 9.002), (48.002, 9.002), (48.002, 9.001)],
                height=12.0,
            )
        ],
        ego_vehicle="ego",
    )

    annotations = [
        Annotation(
            id="a1",
            kind="label",
            text="interesting",
            t=rng.randint(0, duration),
            position=(1.0, 2.0, 3.0),
            author="analyst-a",
            created_seq=1,
        ),
        Annotation(id="a2", kind="comment", text="check later", t=None, position=None, author="analyst-b"),
    ]

    return ConfigDocument(
        study_meta=StudyMeta(title="synthetic", conditions=["baseline"], notes=""),
        participants=participants,
        sessions=sessions,
        scene=scene,
        annotations=annotations,
    )
