"""Built-in ego-vehicle meshes.

Datasets without vehicle geometry still need an interior to bind heatmaps
to and an exterior to draw; these defaults approximate a mid-size car in
the vehicle-local frame (origin rear-axle center, x forward, y left, z up).
UV cells are disjoint per panel so every texel has one owner.
"""

from __future__ import annotations

from .model import MeshAsset, Vec3

_INSET = 0.002

# (name, corners counter-clockwise seen from the cabin/outside)
_INTERIOR_PANELS: list[tuple[str, list[Vec3]]] = [
    ("dashboard", [(1.6, 0.85, 0.55), (1.6, -0.85, 0.55), (1.6, -0.85, 0.95), (1.6, 0.85, 0.95)]),
    ("windshield", [(1.62, 0.85, 0.95), (1.62, -0.85, 0.95), (2.05, -0.78, 1.42), (2.05, 0.78, 1.42)]),
    ("center_console", [(1.05, 0.25, 0.55), (1.55, 0.25, 0.55), (1.55, -0.25, 0.55), (1.05, -0.25, 0.55)]),
    ("left_door", [(0.4, 0.9, 0.45), (1.6, 0.9, 0.45), (1.6, 0.9, 1.1), (0.4, 0.9, 1.1)]),
    ("right_door", [(1.6, -0.9, 0.45), (0.4, -0.9, 0.45), (0.4, -0.9, 1.1), (1.6, -0.9, 1.1)]),
    ("roof", [(0.3, 0.8, 1.45), (1.9, 0.8, 1.45), (1.9, -0.8, 1.45), (0.3, -0.8, 1.45)]),
]


def _quad_panels(panels: list[tuple[str, list[Vec3]]], mesh_id: str, role: str) -> MeshAsset:
    cols, rows = 3, 2
    vertices: list[Vec3] = []
    triangles: list[tuple[int, int, int]] = []
    uv: list[tuple[float, float]] = []
    for k, (_, corners) in enumerate(panels):
        ci, ri = k % cols, k // cols
        u0 = ci / cols + _INSET
        u1 = (ci + 1) / cols - _INSET
        v0 = ri / rows + _INSET
        v1 = (ri + 1) / rows - _INSET
        base = len(vertices)
        vertices.extend(corners)
        uv.extend([(u0, v0), (u1, v0), (u1, v1), (u0, v1)])
        triangles.extend([(base, base + 1, base + 2), (base, base + 2, base + 3)])
    return MeshAsset(id=mesh_id, role=role, vertices=vertices, triangles=triangles, uv=uv)


def default_interior_mesh(mesh_id: str = "interior") -> MeshAsset:
    return _quad_panels(_INTERIOR_PANELS, mesh_id, "interior")


def default_ego_exterior_mesh(mesh_id: str = "ego") -> MeshAsset:
    x0, x1 = -0.8, 3.4
    y0, y1 = -0.95, 0.95
    z0, z1 = 0.25, 1.5
    faces: list[tuple[str, list[Vec3]]] = [
        ("front", [(x1, y0, z0), (x1, y1, z0), (x1, y1, z1), (x1, y0, z1)]),
        ("rear", [(x0, y1, z0), (x0, y0, z0), (x0, y0, z1), (x0, y1, z1)]),
        ("left", [(x1, y1, z0), (x0, y1, z0), (x0, y1, z1), (x1, y1, z1)]),
        ("right", [(x0, y0, z0), (x1, y0, z0), (x1, y0, z1), (x0, y0, z1)]),
        ("top", [(x0, y0, z1), (x1, y0, z1), (x1, y1, z1), (x0, y1, z1)]),
        ("bottom", [(x0, y1, z0), (x1, y1, z0), (x1, y0, z0), (x0, y0, z0)]),
    ]
    return _quad_panels(faces, mesh_id, "ego_exterior")


def interior_panel_names() -> list[str]:
    return [name for name, _ in _INTERIOR_PANELS]
