"""Triangle-mesh ray casting with a bounding-volume hierarchy.

Hits are found with the same per-triangle intersection arithmetic an
exhaustive scan would use; the BVH only prunes, so results are identical
(nearest distance, ties broken toward the lower triangle index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import meshmath
from ..geoscene.path import PathPose, vehicle_to_scene, vehicle_vec_to_scene
from ..model import MeshAsset, SceneDescription, Vec3

LEAF_SIZE = 8

# Meshes that travel with the ego vehicle live in the vehicle-local frame;
# everything else is fixed in the ENU scene frame.
VEHICLE_ROLES = ("interior", "ego_exterior")


@dataclass
class RaycastHit:
    triangle: int
    point: Vec3
    distance: float


@dataclass
class SceneHit:
    mesh_id: str
    triangle: int
    point: Vec3  # in the hit mesh's own frame
    distance: float


class MeshBVH:
    def __init__(self, mesh: MeshAsset):
        self.v, self.f = meshmath.mesh_arrays(mesh)
        n = len(self.f)
        if n == 0:
            self._nodes = []
            return
        tri = self.v[self.f]
        self._lo = tri.min(axis=1)
        self._hi = tri.max(axis=1)
        centroids = tri.mean(axis=1)
        # nodes: (lo, hi, left, right, start, count); leaves have left == -1
        self._nodes: list[tuple] = []
        self._order = np.arange(n)
        self._fill = 0
        self._build(np.arange(n), centroids)

    def _build(self, idx: np.ndarray, centroids: np.ndarray) -> int:
        lo = self._lo[idx].min(axis=0)
        hi = self._hi[idx].max(axis=0)
        node_id = len(self._nodes)
        self._nodes.append(None)  # reserve
        if len(idx) <= LEAF_SIZE:
            start = self._fill
            self._order[start : start + len(idx)] = idx
            self._fill = start + len(idx)
            self._nodes[node_id] = (lo, hi, -1, -1, start, len(idx))
            return node_id
        c = centroids[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        med = np.median(c[:, axis])
        left_mask = c[:, axis] <= med
        if left_mask.all() or not left_mask.any():
            half = len(idx) // 2
            perm = np.argsort(c[:, axis], kind="stable")
            left_idx, right_idx = idx[perm[:half]], idx[perm[half:]]
        else:
            left_idx, right_idx = idx[left_mask], idx[~left_mask]
        left = self._build(left_idx, centroids)
        right = self._build(right_idx, centroids)
        self._nodes[node_id] = (lo, hi, left, right, 0, 0)
        return node_id

    def raycast(self, origin, direction, max_distance: float = np.inf) -> RaycastHit | None:
        if not self._nodes:
            return None
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        with np.errstate(divide="ignore"):
            inv = 1.0 / d
        best_t = max_distance
        best_tri = -1
        stack = [0]
        while stack:
            lo, hi, left, right, start, count = self._nodes[stack.pop()]
            t_entry = self._slab(o, inv, lo, hi)
            if t_entry is None or t_entry > best_t:
                continue
            if left < 0:
                tris = self._order[start : start + count]
                ts = meshmath.ray_triangle_distances(o, d, self.v, self.f[tris])
                for k in np.argsort(ts, kind="stable"):
                    t = ts[k]
                    if not np.isfinite(t):
                        break
                    tri = int(tris[k])
                    if t < best_t - 1e-15 or (abs(t - best_t) <= 1e-15 and tri < best_tri):
                        best_t = float(t)
                        best_tri = tri
            else:
                stack.append(left)
                stack.append(right)
        if best_tri < 0:
            return None
        point = tuple(o + best_t * d)
        return RaycastHit(triangle=best_tri, point=point, distance=best_t)  # type: ignore[arg-type]

    @staticmethod
    def _slab(o: np.ndarray, inv: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> float | None:
        with np.errstate(invalid="ignore"):
            t1 = (lo - o) * inv
            t2 = (hi - o) * inv
        tmin = np.minimum(t1, t2)
        tmax = np.maximum(t1, t2)
        # axis-parallel rays: replace nan (0 * inf) with the full interval
        tmin = np.where(np.isnan(tmin), -np.inf, tmin)
        tmax = np.where(np.isnan(tmax), np.inf, tmax)
        enter = float(tmin.max())
        exit_ = float(tmax.min())
        if exit_ < max(enter, 0.0):
            return None
        return max(enter, 0.0)


def raycast(mesh: MeshAsset, origin, direction, bvh: MeshBVH | None = None) -> RaycastHit | None:
    """Nearest front-or-back-face hit on one mesh, or None."""
    return (bvh or MeshBVH(mesh)).raycast(origin, direction)


class SceneIndex:
    """Per-mesh BVHs over a scene, with vehicle-frame ray handling.

    Rays recorded in the vehicle (gaze, pointing) stay vehicle-local for
    meshes that travel with the ego vehicle and are transformed by the ego
    pose before testing scene-fixed meshes.
    """

    def __init__(self, scene: SceneDescription):
        self.scene = scene
        self.bvhs = {m.id: MeshBVH(m) for m in scene.meshes}
        self.roles = {m.id: m.role for m in scene.meshes}

    def raycast_vehicle_ray(
        self,
        origin: Vec3,
        direction: Vec3,
        ego_pose: PathPose | None = None,
        max_distance: float = np.inf,
        restrict_to: set[str] | None = None,
    ) -> SceneHit | None:
        best: SceneHit | None = None
        scene_origin = scene_dir = None
        if ego_pose is not None:
            scene_origin = vehicle_to_scene(ego_pose, origin)
            scene_dir = vehicle_vec_to_scene(ego_pose, direction)
        for mesh in self.scene.meshes:
            if restrict_to is not None and mesh.id not in restrict_to:
                continue
            vehicle_frame = self.roles[mesh.id] in VEHICLE_ROLES
            if vehicle_frame or ego_pose is None:
                o, d = origin, direction
            else:
                o, d = scene_origin, scene_dir
            hit = self.bvhs[mesh.id].raycast(o, d, max_distance)
            if hit is None:
                continue
            if best is None or hit.distance < best.distance - 1e-15:
                best = SceneHit(mesh_id=mesh.id, triangle=hit.triangle, point=hit.point, distance=hit.distance)
        return best
