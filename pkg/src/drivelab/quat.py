"""Unit-quaternion helpers, (w, x, y, z) convention."""

from __future__ import annotations

import math

from .model import Quat


def qdot(a: Quat, b: Quat) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]


def qnormalize(q: Quat) -> Quat:
    n = math.sqrt(qdot(q, q))
    if n < 1e-12:
        raise ValueError("cannot normalize zero quaternion")
    return (q[0] / n, q[1] / n, q[2] / n, q[3] / n)


def slerp(a: Quat, b: Quat, u: float) -> Quat:
    """Shortest-arc spherical interpolation; falls back to nlerp when the
    quaternions are nearly parallel."""
    d = qdot(a, b)
    if d < 0.0:
        b = (-b[0], -b[1], -b[2], -b[3])
        d = -d
    if d > 0.9995:
        mixed = tuple(av + u * (bv - av) for av, bv in zip(a, b))
        return qnormalize(mixed)  # type: ignore[arg-type]
    theta = math.acos(max(-1.0, min(1.0, d)))
    s = math.sin(theta)
    wa = math.sin((1.0 - u) * theta) / s
    wb = math.sin(u * theta) / s
    return qnormalize(tuple(wa * av + wb * bv for av, bv in zip(a, b)))  # type: ignore[arg-type]


def hemisphere_mean(quats: list[Quat]) -> Quat:
    """Normalized linear mean after flipping every quaternion into the
    hemisphere of the first one (q and -q encode the same rotation)."""
    if not quats:
        raise ValueError("mean of no quaternions")
    ref = quats[0]
    acc = [0.0, 0.0, 0.0, 0.0]
    for q in quats:
        sign = -1.0 if qdot(q, ref) < 0.0 else 1.0
        for i in range(4):
            acc[i] += sign * q[i]
    return qnormalize(tuple(acc))  # type: ignore[arg-type]
