"""Interaction heatmaps as weight grids bound to mesh surfaces or ground.

Layers store raw texel weights, not colors; ramps are applied at export so
analysts can switch schemes without recomputation. Each accepted sample
deposits a truncated Gaussian in surface space, normalized to unit mass
before truncation, so total_weight stays interpretable as
"samples x truncated-kernel mass".
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .. import meshmath
from ..geoscene.path import EgoPath, interpolate_pose
from ..model import MeshAsset, RaySample, SceneDescription, SurfaceSample, TrackedObjectSample
from .raycast import SceneIndex

DEFAULT_RESOLUTION = (256, 256)
GROUND_CELL_M = 1.0
TRUNCATION_SIGMAS = 3.0

SIGMA_DEFAULTS = {"interior": 0.05, "ego_exterior": 0.05, "building": 1.0, "road_user": 0.5, "ground": 1.0}

GROUND_TARGET = "ground"

RAY_MAX_DISTANCE_M = 500.0


def truncated_kernel_mass() -> float:
    """Mass of the unit 2D Gaussian inside the 3-sigma truncation disk."""
    return 1.0 - math.exp(-(TRUNCATION_SIGMAS**2) / 2.0)


@dataclass
class HeatmapLayer:
    id: str
    kind: str  # gaze | touch | pointing | traffic
    target: str  # mesh id or "ground"
    resolution: tuple[int, int] = DEFAULT_RESOLUTION
    cell_size: float = GROUND_CELL_M
    color_scheme: str = "viridis"
    total_weight: float = 0.0
    miss_count: int = 0
    sigma: float | None = None
    grid: np.ndarray | None = None  # mesh layers, shape (H*W,)
    cells: dict[tuple[int, int], float] = field(default_factory=dict)  # ground layers

    @property
    def accumulator(self) -> dict:
        if self.target == GROUND_TARGET:
            return dict(self.cells)
        if self.grid is None:
            return {}
        nz = np.nonzero(self.grid)[0]
        return {int(i): float(self.grid[i]) for i in nz}

    def summed(self) -> float:
        if self.target == GROUND_TARGET:
            return float(sum(self.cells.values()))
        return float(self.grid.sum()) if self.grid is not None else 0.0

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "target": self.target,
            "resolution": list(self.resolution),
            "cell_size": self.cell_size,
            "color_scheme": self.color_scheme,
            "total_weight": float(self.total_weight),
            "miss_count": int(self.miss_count),
            "sigma": self.sigma,
        }


class TexelTable:
    """Texel geometry for one mesh: owner triangle, 3D center, surface area.

    Meshes without UVs get a deterministic per-triangle atlas (each
    triangle isometrically flattened into its own grid cell), so binding
    never depends on authoring tools.
    """

    def __init__(self, mesh: MeshAsset, resolution: tuple[int, int] = DEFAULT_RESOLUTION):
        self.mesh = mesh
        self.resolution = resolution
        w, h = resolution
        v, f = meshmath.mesh_arrays(mesh)
        n_tris = len(f)
        self.owner = np.full(w * h, -1, dtype=np.int64)
        self.pos = np.zeros((w * h, 3))
        self.area = np.zeros(w * h)

        if mesh.uv is not None:
            uv_arr = np.asarray(mesh.uv, dtype=np.float64)
            corner_uv = uv_arr[f]  # (T, 3, 2)
        else:
            corner_uv = _triangle_atlas(v, f)

        tri3d_area = meshmath.triangle_areas(v, f)
        texel_uv_area = (1.0 / w) * (1.0 / h)

        xs = (np.arange(w) + 0.5) / w
        ys = (np.arange(h) + 0.5) / h
        for ti in range(n_tris):
            ua, ub, uc = corner_uv[ti]
            det = (ub[0] - ua[0]) * (uc[1] - ua[1]) - (ub[1] - ua[1]) * (uc[0] - ua[0])
            uv_area = abs(det) / 2.0
            if uv_area < 1e-15:
                continue
            umin = min(ua[0], ub[0], uc[0])
            umax = max(ua[0], ub[0], uc[0])
            vmin = min(ua[1], ub[1], uc[1])
            vmax = max(ua[1], ub[1], uc[1])
            i0, i1 = np.searchsorted(xs, umin), np.searchsorted(xs, umax, side="right")
            j0, j1 = np.searchsorted(ys, vmin), np.searchsorted(ys, vmax, side="right")
            if i0 >= i1 or j0 >= j1:
                continue
            gx, gy = np.meshgrid(xs[i0:i1], ys[j0:j1])
            b1 = ((gx - ua[0]) * (uc[1] - ua[1]) - (gy - ua[1]) * (uc[0] - ua[0])) / det
            b2 = ((ub[0] - ua[0]) * (gy - ua[1]) - (ub[1] - ua[1]) * (gx - ua[0])) / det
            b0 = 1.0 - b1 - b2
            inside = (b0 >= -1e-12) & (b1 >= -1e-12) & (b2 >= -1e-12)
            jj, ii = np.nonzero(inside)
            if not len(jj):
                continue
            texel_idx = (jj + j0) * w + (ii + i0)
            free = self.owner[texel_idx] < 0
            texel_idx = texel_idx[free]
            if not len(texel_idx):
                continue
            a3, b3, c3 = v[f[ti, 0]], v[f[ti, 1]], v[f[ti, 2]]
            bb0 = b0[jj, ii][free][:, None]
            bb1 = b1[jj, ii][free][:, None]
            bb2 = b2[jj, ii][free][:, None]
            self.owner[texel_idx] = ti
            self.pos[texel_idx] = bb0 * a3 + bb1 * b3 + bb2 * c3
            self.area[texel_idx] = texel_uv_area * (tri3d_area[ti] / uv_area)

        owned = np.nonzero(self.owner >= 0)[0]
        self._owned = owned
        self._tree = cKDTree(self.pos[owned]) if len(owned) else None
        self.texel_pitch = float(np.sqrt(np.median(self.area[owned]))) if len(owned) else 0.0

    def splat(self, grid: np.ndarray, point, sigma: float) -> float:
        """Deposit one truncated Gaussian at ``point``; returns the mass.

        Kernels narrower than the texel grid cannot be sampled faithfully;
        they degrade to a delta deposit of the full unit mass into the
        nearest texel (the sigma -> 0 limit).
        """
        if self._tree is None:
            return 0.0
        p = np.asarray(point, dtype=np.float64)
        if 2.0 * sigma < self.texel_pitch:
            _, k = self._tree.query(p)
            grid[self._owned[k]] += 1.0
            return 1.0
        hits = self._tree.query_ball_point(p, TRUNCATION_SIGMAS * sigma)
        if not hits:
            return 0.0
        idx = self._owned[hits]
        d2 = ((self.pos[idx] - p) ** 2).sum(axis=1)
        g = np.exp(-d2 / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)
        w = g * self.area[idx]
        np.add.at(grid, idx, w)
        return float(w.sum())


def _triangle_atlas(v: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Per-corner UVs packing each triangle into its own cell."""
    n = len(f)
    g = max(1, math.ceil(math.sqrt(n)))
    cell = 1.0 / g
    inset = 0.05 * cell
    out = np.zeros((n, 3, 2))
    for ti in range(n):
        a, b, c = v[f[ti, 0]], v[f[ti, 1]], v[f[ti, 2]]
        e1 = b - a
        e2 = c - a
        u_axis = e1 / (np.linalg.norm(e1) or 1.0)
        normal = np.cross(e1, e2)
        nn = np.linalg.norm(normal)
        if nn < 1e-15:
            continue
        v_axis = np.cross(normal / nn, u_axis)
        p2 = np.array([[0.0, 0.0], [np.linalg.norm(e1), 0.0], [e2 @ u_axis, e2 @ v_axis]])
        p2 -= p2.min(axis=0)
        extent = max(p2.max(), 1e-12)
        scale = (cell - 2 * inset) / extent
        col, row = ti % g, ti // g
        out[ti] = p2 * scale + np.array([col * cell + inset, row * cell + inset])
    return out


class HeatmapBuilder:
    """Caches scene index and texel tables across layers of one document."""

    def __init__(self, scene: SceneDescription, resolution: tuple[int, int] = DEFAULT_RESOLUTION):
        self.scene = scene
        self.resolution = resolution
        self.index = SceneIndex(scene)
        self._tables: dict[str, TexelTable] = {}

    def table(self, mesh_id: str) -> TexelTable:
        if mesh_id not in self._tables:
            mesh = self.scene.mesh_by_id(mesh_id)
            if mesh is None:
                raise KeyError(f"unknown mesh {mesh_id!r}")
            self._tables[mesh_id] = TexelTable(mesh, self.resolution)
        return self._tables[mesh_id]


def accumulate_heatmap(
    layer: HeatmapLayer,
    samples: list,
    scene: SceneDescription,
    builder: HeatmapBuilder | None = None,
    ego_path: EgoPath | None = None,
    sigma: float | None = None,
) -> HeatmapLayer:
    """Accumulate samples into the layer's grid; returns the same layer.

    Rays (gaze/pointing) resolve to their nearest scene hit first; only
    hits landing on the layer's target deposit here, rays missing every
    mesh go to the miss tally. Touches deposit directly, tracked objects
    splat their ground positions.
    """
    if layer.kind in ("gaze", "pointing"):
        expected = RaySample
    elif layer.kind == "touch":
        expected = SurfaceSample
    elif layer.kind == "traffic":
        expected = TrackedObjectSample
    else:
        raise ValueError(f"unknown layer kind {layer.kind!r}")
    for s in samples:
        if not isinstance(s, expected):
            raise TypeError(f"{layer.kind} layer cannot accumulate {type(s).__name__}")

    if layer.target == GROUND_TARGET:
        sig = sigma if sigma is not None else SIGMA_DEFAULTS[GROUND_TARGET]
        layer.sigma = sig
        if layer.kind == "traffic":
            for s in samples:
                layer.total_weight += _splat_ground(layer, (s.position[0], s.position[1]), sig)
        else:
            raise ValueError("ray layers need a mesh target")
        return layer

    builder = builder or HeatmapBuilder(scene, layer.resolution)
    table = builder.table(layer.target)
    role = builder.index.roles[layer.target]
    sig = sigma if sigma is not None else SIGMA_DEFAULTS.get(role, 1.0)
    layer.sigma = sig
    if layer.grid is None:
        w, h = layer.resolution
        layer.grid = np.zeros(w * h)

    if layer.kind == "touch":
        for s in samples:
            if s.mesh_id != layer.target:
                continue
            layer.total_weight += table.splat(layer.grid, s.position, sig)
        return layer

    for s in samples:
        pose = interpolate_pose(ego_path, s.t) if ego_path is not None else None
        hit = builder.index.raycast_vehicle_ray(
            s.origin, s.direction, ego_pose=pose, max_distance=RAY_MAX_DISTANCE_M
        )
        if hit is None:
            layer.miss_count += 1
            continue
        if hit.mesh_id != layer.target:
            continue
        layer.total_weight += table.splat(layer.grid, hit.point, sig)
    return layer


def _splat_ground(layer: HeatmapLayer, xy: tuple[float, float], sigma: float) -> float:
    c = layer.cell_size
    x, y = xy
    if 2.0 * sigma < c:
        key = (math.floor(x / c), math.floor(y / c))
        layer.cells[key] = layer.cells.get(key, 0.0) + 1.0
        return 1.0
    r = TRUNCATION_SIGMAS * sigma
    ix0 = math.floor((x - r) / c)
    ix1 = math.floor((x + r) / c)
    iy0 = math.floor((y - r) / c)
    iy1 = math.floor((y + r) / c)
    norm = 1.0 / (2.0 * math.pi * sigma * sigma)
    deposited = 0.0
    for ix in range(ix0, ix1 + 1):
        cx = (ix + 0.5) * c
        for iy in range(iy0, iy1 + 1):
            cy = (iy + 0.5) * c
            d2 = (cx - x) ** 2 + (cy - y) ** 2
            if d2 > r * r:
                continue
            w = norm * math.exp(-d2 / (2.0 * sigma * sigma)) * c * c
            layer.cells[(ix, iy)] = layer.cells.get((ix, iy), 0.0) + w
            deposited += w
    return deposited


def merge_layers(a: HeatmapLayer, b: HeatmapLayer) -> HeatmapLayer:
    """Associative merge for sample-partitioned parallel accumulation."""
    if (a.id, a.kind, a.target, a.resolution) != (b.id, b.kind, b.target, b.resolution):
        raise ValueError("cannot merge incompatible layers")
    out = HeatmapLayer(
        id=a.id, kind=a.kind, target=a.target, resolution=a.resolution, cell_size=a.cell_size,
        color_scheme=a.color_scheme, total_weight=a.total_weight + b.total_weight,
        miss_count=a.miss_count + b.miss_count, sigma=a.sigma if a.sigma is not None else b.sigma,
    )
    if a.target == GROUND_TARGET:
        out.cells = dict(a.cells)
        for k, v in b.cells.items():
            out.cells[k] = out.cells.get(k, 0.0) + v
    else:
        if a.grid is not None or b.grid is not None:
            ga = a.grid if a.grid is not None else 0.0
            gb = b.grid if b.grid is not None else 0.0
            out.grid = ga + gb
    return out


# -- exports ------------------------------------------------------------------

_RAMPS: dict[str, list[tuple[float, tuple[float, float, float]]]] = {
    "viridis": [
        (0.0, (0.267004, 0.004874, 0.329415)),
        (0.125, (0.282623, 0.140926, 0.457517)),
        (0.25, (0.253935, 0.265254, 0.529983)),
        (0.375, (0.206756, 0.371758, 0.553117)),
        (0.5, (0.163625, 0.471133, 0.558148)),
        (0.625, (0.127568, 0.566949, 0.550556)),
        (0.75, (0.134692, 0.658636, 0.517649)),
        (0.875, (0.477504, 0.821444, 0.318195)),
        (1.0, (0.993248, 0.906157, 0.143936)),
    ],
    "inferno": [
        (0.0, (0.001462, 0.000466, 0.013866)),
        (0.25, (0.341500, 0.062325, 0.429425)),
        (0.5, (0.735683, 0.215906, 0.330245)),
        (0.75, (0.978422, 0.557937, 0.034931)),
        (1.0, (0.988362, 0.998364, 0.644924)),
    ],
    "grayscale": [(0.0, (0.0, 0.0, 0.0)), (1.0, (1.0, 1.0, 1.0))],
}

_LUT_CACHE: dict[str, np.ndarray] = {}


def ramp_lut(name: str) -> np.ndarray:
    if name not in _RAMPS:
        raise KeyError(f"unknown color ramp {name!r}; known: {sorted(_RAMPS)}")
    if name not in _LUT_CACHE:
        anchors = _RAMPS[name]
        xs = np.array([a for a, _ in anchors])
        cols = np.array([c for _, c in anchors])
        t = np.linspace(0.0, 1.0, 256)
        lut = np.stack([np.interp(t, xs, cols[:, i]) for i in range(3)], axis=1)
        _LUT_CACHE[name] = (lut * 255).round().astype(np.uint8)
    return _LUT_CACHE[name]


def _dense_grid(layer: HeatmapLayer) -> tuple[int, int, np.ndarray]:
    if layer.target != GROUND_TARGET:
        w, h = layer.resolution
        grid = layer.grid if layer.grid is not None else np.zeros(w * h)
        return w, h, grid.reshape(h, w)
    if not layer.cells:
        return 0, 0, np.zeros((0, 0))
    ixs = [k[0] for k in layer.cells]
    iys = [k[1] for k in layer.cells]
    x0, x1 = min(ixs), max(ixs)
    y0, y1 = min(iys), max(iys)
    w, h = x1 - x0 + 1, y1 - y0 + 1
    grid = np.zeros((h, w))
    for (ix, iy), v in layer.cells.items():
        grid[iy - y0, ix - x0] = v
    return w, h, grid


def layer_to_f32(layer: HeatmapLayer) -> bytes:
    """Portable float map: uint32 LE width, height, then row-major float32."""
    w, h, grid = _dense_grid(layer)
    return struct.pack("<II", w, h) + grid.astype("<f4").tobytes()


def layer_to_png(layer: HeatmapLayer, scheme: str | None = None) -> bytes:
    from PIL import Image

    w, h, grid = _dense_grid(layer)
    if w == 0 or h == 0:
        w = h = 1
        grid = np.zeros((1, 1))
    lut = ramp_lut(scheme or layer.color_scheme)
    peak = grid.max()
    norm = grid / peak if peak > 0 else grid
    idx = np.clip((norm * 255).round().astype(np.int64), 0, 255)
    rgb = lut[idx]
    alpha = np.full((h, w, 1), 255, dtype=np.uint8)
    rgba = np.concatenate([rgb, alpha], axis=2)
    img = Image.fromarray(rgba, mode="RGBA")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()
