"""Avatar aggregation and joint trajectories.

The aggregated avatar is the per-frame mean skeleton over several
participants: arithmetic mean positions, hemisphere-aligned normalized
linear mean rotations. Seated postures cluster tightly, which keeps the
linear rotation mean accurate; the hemisphere convention (flip to a
non-negative dot with the first member) is part of the contract.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from ..model import JointPose, SessionRecording, SkeletonFrame, Vec3
from ..quat import hemisphere_mean, slerp


def sample_skeleton_pose(session: SessionRecording, t: int, mode: str = "interpolate") -> list[JointPose]:
    """Joint poses at time t: positions lerped, rotations slerped between
    the bracketing frames ("nearest" mode snaps to the closer frame)."""
    frames = session.skeleton
    if not frames:
        raise ValueError("session has no skeleton frames")
    if t <= frames[0].t:
        return frames[0].joints
    if t >= frames[-1].t:
        return frames[-1].joints
    i = bisect_right([f.t for f in frames], t) - 1
    f1, f2 = frames[i], frames[i + 1]
    if f1.t == t or f2.t == f1.t:
        return f1.joints
    u = (t - f1.t) / (f2.t - f1.t)
    if mode == "nearest":
        return f1.joints if u < 0.5 else f2.joints
    joints = []
    for j1, j2 in zip(f1.joints, f2.joints):
        pos = tuple(a + u * (b - a) for a, b in zip(j1.position, j2.position))
        joints.append(JointPose(position=pos, rotation=slerp(j1.rotation, j2.rotation, u)))  # type: ignore[arg-type]
    return joints


@dataclass
class AggregatedSkeleton:
    joint_names: list[str]
    frames: list[SkeletonFrame]
    member_ids: list[str]
    dispersion: list[list[float]] = field(default_factory=list)  # [frame][joint] positional std-dev m

    def to_json(self) -> dict:
        return {
            "joint_names": list(self.joint_names),
            "member_ids": list(self.member_ids),
            "frames": [f.to_json() for f in self.frames],
            "dispersion": [[float(d) for d in row] for row in self.dispersion],
        }


def aggregate_avatars(
    sessions: list[SessionRecording], window: tuple[int, int], rate_hz: float
) -> AggregatedSkeleton:
    """Mean skeleton over members, resampled to a common grid in ``window``.

    All members must share one joint set and their skeletons must cover the
    window. Session lengths may differ; only the window is aggregated.
    """
    if not sessions:
        raise ValueError("no sessions to aggregate")
    if rate_hz <= 0:
        raise ValueError("rate must be positive")
    t_start, t_end = window
    if t_end < t_start:
        raise ValueError(f"empty window ({t_start}, {t_end})")

    joints = sessions[0].skeleton_joints
    for s in sessions[1:]:
        if s.skeleton_joints != joints:
            raise ValueError(
                f"mismatched joint sets: {joints} vs {s.skeleton_joints} ({s.participant_id})"
            )
    for s in sessions:
        if not s.skeleton:
            raise ValueError(f"session {s.participant_id} has no skeleton data")
        if s.skeleton[0].t > t_start or s.skeleton[-1].t < t_end:
            raise ValueError(f"session {s.participant_id} does not cover window {window}")

    step = 1000.0 / rate_hz
    times = []
    k = 0
    while True:
        raw = t_start + k * step
        if raw > t_end + 1e-9:
            break
        t = round(raw)
        if not times or t != times[-1]:
            times.append(t)
        k += 1

    member_poses = [[sample_skeleton_pose(s, t) for t in times] for s in sessions]

    frames: list[SkeletonFrame] = []
    dispersion: list[list[float]] = []
    n = len(sessions)
    for fi, t in enumerate(times):
        out_joints = []
        out_disp = []
        for ji in range(len(joints)):
            poses = [member_poses[m][fi][ji] for m in range(n)]
            mean_pos = tuple(sum(p.position[c] for p in poses) / n for c in range(3))
            var = sum(
                sum((p.position[c] - mean_pos[c]) ** 2 for c in range(3)) for p in poses
            ) / n
            out_disp.append(math.sqrt(var))
            out_joints.append(
                JointPose(position=mean_pos, rotation=hemisphere_mean([p.rotation for p in poses]))  # type: ignore[arg-type]
            )
        frames.append(SkeletonFrame(t=t, joints=out_joints))
        dispersion.append(out_disp)

    return AggregatedSkeleton(
        joint_names=list(joints),
        frames=frames,
        member_ids=[s.participant_id for s in sessions],
        dispersion=dispersion,
    )


@dataclass
class Trajectory:
    participant_id: str
    joint: str
    window: tuple[int, int]
    points: list[tuple[int, Vec3]]
    simplified: list[tuple[int, Vec3]] | None = None
    epsilon: float | None = None

    def to_json(self) -> dict:
        out = {
            "participant_id": self.participant_id,
            "joint": self.joint,
            "window": [int(self.window[0]), int(self.window[1])],
            "points": [[int(t), list(p)] for t, p in self.points],
        }
        if self.simplified is not None:
            out["simplified"] = [[int(t), list(p)] for t, p in self.simplified]
            out["epsilon"] = self.epsilon
        return out


def extract_trajectory(session: SessionRecording, joint: str, window: tuple[int, int]) -> Trajectory:
    """One point per skeleton frame inside the window, in time order."""
    idx = session.joint_index(joint)
    t_start, t_end = window
    points = [
        (f.t, f.joints[idx].position)
        for f in session.skeleton
        if t_start <= f.t <= t_end
    ]
    return Trajectory(participant_id=session.participant_id, joint=joint, window=window, points=points)
