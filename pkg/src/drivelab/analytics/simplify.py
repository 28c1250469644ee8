"""Ramer-Douglas-Peucker reduction of trajectory polylines."""

from __future__ import annotations

import math
from dataclasses import replace

from ..model import Vec3
from .avatars import Trajectory


def point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> float:
    ab = tuple(bb - aa for aa, bb in zip(a, b))
    ap = tuple(pp - aa for aa, pp in zip(a, p))
    denom = sum(c * c for c in ab)
    if denom < 1e-24:
        return math.dist(p, a)
    t = max(0.0, min(1.0, sum(x * y for x, y in zip(ap, ab)) / denom))
    closest = tuple(aa + t * c for aa, c in zip(a, ab))
    return math.dist(p, closest)


def rdp_indices(points: list[Vec3], epsilon: float) -> list[int]:
    """Indices of the kept points; endpoints always survive."""
    n = len(points)
    if n <= 2:
        return list(range(n))
    keep = [0, n - 1]
    stack = [(0, n - 1)]
    while stack:
        first, last = stack.pop()
        max_d = epsilon
        index = -1
        for i in range(first + 1, last):
            d = point_segment_distance(points[i], points[first], points[last])
            if d > max_d:
                max_d = d
                index = i
        if index >= 0:
            keep.append(index)
            stack.append((first, index))
            stack.append((index, last))
    return sorted(set(keep))


def simplify_trajectory(traj: Trajectory, epsilon: float) -> Trajectory:
    """RDP on the positions; every original point stays within ``epsilon``
    of the simplified polyline. epsilon=0 keeps the list unchanged."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if epsilon == 0 or len(traj.points) <= 2:
        simplified = list(traj.points)
    else:
        positions = [p for _, p in traj.points]
        simplified = [traj.points[i] for i in rdp_indices(positions, epsilon)]
    return replace(traj, simplified=simplified, epsilon=float(epsilon))
