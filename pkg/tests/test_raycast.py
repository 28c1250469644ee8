import math
import random

import numpy as np
import pytest

from drivelab.analytics import MeshBVH, SceneIndex, raycast
from drivelab.geoscene.path import PathPose
from drivelab.model import GeoSample, MeshAsset, SceneDescription


def _tri_mesh(vertices, triangles, mesh_id="m", role="building"):
    return MeshAsset(id=mesh_id, role=role, vertices=vertices, triangles=triangles)


def test_axis_aligned_hit():
    mesh = _tri_mesh([(-1.0, -1.0, 1.0), (1.0, -1.0, 1.0), (0.0, 2.0, 1.0)], [(0, 1, 2)])
    hit = raycast(mesh, (0.0, 0.0, 0.0), (0.0, 0.0, 1.0))
    assert hit is not None
    assert hit.distance == pytest.approx(1.0, abs=1e-12)
    assert hit.point == pytest.approx((0.0, 0.0, 1.0), abs=1e-12)
    assert hit.triangle == 0


def test_parallel_ray_misses():
    mesh = _tri_mesh([(-1.0, -1.0, 1.0), (1.0, -1.0, 1.0), (0.0, 2.0, 1.0)], [(0, 1, 2)])
    assert raycast(mesh, (0.0, 0.0, 0.0), (1.0, 0.0, 0.0)) is None


def test_back_face_hit_counts():
    mesh = _tri_mesh([(-1.0, -1.0, 1.0), (1.0, -1.0, 1.0), (0.0, 2.0, 1.0)], [(0, 1, 2)])
    # approach from above: hits the back side
    hit = raycast(mesh, (0.0, 0.0, 2.0), (0.0, 0.0, -1.0))
    assert hit is not None and hit.distance == pytest.approx(1.0, abs=1e-12)


def _random_mesh(rng, n_tris):
    vertices = []
    triangles = []
    for _ in range(n_tris):
        while True:
            a = np.array([rng.uniform(-5, 5) for _ in range(3)])
            b = a + np.array([rng.gauss(0, 1) for _ in range(3)])
            c = a + np.array([rng.gauss(0, 1) for _ in range(3)])
            if np.linalg.norm(np.cross(b - a, c - a)) / 2 > 1e-6:
                break
        base = len(vertices)
        vertices += [tuple(a), tuple(b), tuple(c)]
        triangles.append((base, base + 1, base + 2))
    return _tri_mesh(vertices, triangles)


def _oracle_scan(mesh, origin, direction):
    # independent exhaustive Moller-Trumbore scan
    o = np.asarray(origin)
    d = np.asarray(direction)
    best = None
    for ti, (ia, ib, ic) in enumerate(mesh.triangles):
        a = np.asarray(mesh.vertices[ia])
        e1 = np.asarray(mesh.vertices[ib]) - a
        e2 = np.asarray(mesh.vertices[ic]) - a
        pvec = np.cross(d, e2)
        det = e1 @ pvec
        if abs(det) < 1e-12:
            continue
        tvec = o - a
        u = (tvec @ pvec) / det
        qvec = np.cross(tvec, e1)
        v = (d @ qvec) / det
        t = (e2 @ qvec) / det
        if u >= 0.0 and v >= 0.0 and u + v <= 1.0 and t > 1e-9:
            if best is None or t < best[0] - 1e-15 or (abs(t - best[0]) <= 1e-15 and ti < best[1]):
                best = (t, ti)
    return best


def test_bvh_matches_bruteforce_oracle():
    rng = random.Random(42)
    for trial in range(6):
        mesh = _random_mesh(rng, rng.randint(20, 400))
        bvh = MeshBVH(mesh)
        for _ in range(300):
            origin = tuple(rng.uniform(-8, 8) for _ in range(3))
            d = np.array([rng.gauss(0, 1) for _ in range(3)])
            d /= np.linalg.norm(d)
            got = bvh.raycast(origin, tuple(d))
            want = _oracle_scan(mesh, origin, tuple(d))
            if want is None:
                assert got is None
            else:
                assert got is not None, (origin, tuple(d))
                assert got.distance == pytest.approx(want[0], abs=1e-9)
                assert got.triangle == want[1]


def test_scene_index_transforms_vehicle_rays():
    # building 10 m north; vehicle at origin heading north: forward ray hits it
    wall = _tri_mesh(
        [(-5.0, 10.0, 0.0), (5.0, 10.0, 0.0), (5.0, 10.0, 5.0), (-5.0, 10.0, 5.0)],
        [(0, 1, 2), (0, 2, 3)],
        mesh_id="wall",
    )
    ego = _tri_mesh([(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)], [(0, 1, 2)], mesh_id="ego", role="ego_exterior")
    scene = SceneDescription(
        origin=GeoSample(t=0, lat=0.0, lon=0.0, alt=0.0, heading=0.0, speed=0.0),
        meshes=[wall, ego],
        ego_vehicle="ego",
    )
    index = SceneIndex(scene)
    pose = PathPose(position=(0.0, 0.0, 0.0), heading=0.0)  # facing north
    hit = index.raycast_vehicle_ray((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), ego_pose=pose)
    assert hit is not None and hit.mesh_id == "wall"
    assert hit.distance == pytest.approx(10.0, abs=1e-9)
    assert hit.point == pytest.approx((0.0, 10.0, 1.0), abs=1e-9)

    pose_east = PathPose(position=(0.0, 0.0, 0.0), heading=90.0)
    assert index.raycast_vehicle_ray((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), ego_pose=pose_east) is None


def test_max_distance_cutoff():
    mesh = _tri_mesh([(-1.0, -1.0, 50.0), (1.0, -1.0, 50.0), (0.0, 2.0, 50.0)], [(0, 1, 2)])
    bvh = MeshBVH(mesh)
    assert bvh.raycast((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), max_distance=10.0) is None
    assert bvh.raycast((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), max_distance=100.0) is not None
