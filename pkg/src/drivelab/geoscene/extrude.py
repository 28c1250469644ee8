"""Building prisms from footprint polygons.

Caps are ear-clipped, walls quad-split. The UV atlas keeps walls and caps
disjoint so heatmap texels have unique owners:
  walls   u = perimeter fraction, v in [0, 0.5)
  top cap bbox-projected into [0, 0.5) x [0.5, 1]
  bottom  bbox-projected into [0.5, 1] x [0.5, 1]
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from ..model import BuildingFootprint, MeshAsset, Vec3
from ..validation import polygon_is_simple, polygon_signed_area
from .geodesy import LocalFrame, geo_to_local
from ..model import GeoSample

log = logging.getLogger(__name__)

DEFAULT_BUILDING_HEIGHT_M = 10.0


def _signed_area_xy(ring: list[tuple[float, float]]) -> float:
    area = 0.0
    n = len(ring)
    for i in range(n):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % n]
        area += x1 * y2 - x2 * y1
    return 0.5 * area


def _point_in_triangle(p, a, b, c) -> bool:
    def cross(o, u, v):
        return (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])

    d1 = cross(a, b, p)
    d2 = cross(b, c, p)
    d3 = cross(c, a, p)
    has_neg = (d1 < 0) or (d2 < 0) or (d3 < 0)
    has_pos = (d1 > 0) or (d2 > 0) or (d3 > 0)
    return not (has_neg and has_pos)


def ear_clip(ring: list[tuple[float, float]]) -> list[tuple[int, int, int]]:
    """Triangulate a simple CCW polygon; returns index triples into ring."""
    n = len(ring)
    if n < 3:
        return []
    idx = list(range(n))
    tris: list[tuple[int, int, int]] = []
    guard = 0
    while len(idx) > 3 and guard < 10 * n * n:
        guard += 1
        clipped = False
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[(k - 1) % m], idx[k], idx[(k + 1) % m]
            a, b, c = ring[i0], ring[i1], ring[i2]
            cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
            if cross <= 1e-18:  # reflex or collinear corner
                continue
            if any(
                _point_in_triangle(ring[j], a, b, c)
                for j in idx
                if j not in (i0, i1, i2)
            ):
                continue
            tris.append((i0, i1, i2))
            idx.pop(k)
            clipped = True
            break
        if not clipped:
            # numerically stubborn polygon: fall back to a fan
            log.warning("ear clipping stalled on %d-gon, fan fallback", len(idx))
            for k in range(1, len(idx) - 1):
                tris.append((idx[0], idx[k], idx[k + 1]))
            return tris
    tris.append((idx[0], idx[1], idx[2]))
    return tris


def extrude_footprint(fp: BuildingFootprint, frame: LocalFrame) -> MeshAsset | None:
    """Extrude one footprint to a prism mesh; None for degenerate polygons."""
    if len(fp.polygon) < 3 or not polygon_is_simple(fp.polygon):
        log.warning("skipping footprint %s: not a simple polygon", fp.id)
        return None

    polygon = fp.polygon
    if polygon_signed_area(polygon) < 0:  # normalize to counter-clockwise
        polygon = list(reversed(polygon))

    ring = [
        (p[0], p[1])
        for p in (
            geo_to_local(frame, GeoSample(t=0, lat=lat, lon=lon, alt=frame.origin.alt))
            for lat, lon in polygon
        )
    ]
    if abs(_signed_area_xy(ring)) < 1e-9:
        log.warning("skipping footprint %s: zero area", fp.id)
        return None

    h = fp.height if fp.height > 0 else DEFAULT_BUILDING_HEIGHT_M
    n = len(ring)

    vertices: list[Vec3] = []
    triangles: list[tuple[int, int, int]] = []
    uv: list[tuple[float, float]] = []

    # walls, one quad per edge, duplicated vertices for per-wall UVs
    edge_len = [_dist(ring[i], ring[(i + 1) % n]) for i in range(n)]
    perimeter = sum(edge_len)
    u_acc = 0.0
    for i in range(n):
        p1 = ring[i]
        p2 = ring[(i + 1) % n]
        u1 = u_acc / perimeter
        u_acc += edge_len[i]
        u2 = u_acc / perimeter
        base = len(vertices)
        vertices += [(p1[0], p1[1], 0.0), (p2[0], p2[1], 0.0), (p2[0], p2[1], h), (p1[0], p1[1], h)]
        uv += [(u1, 0.0), (u2, 0.0), (u2, 0.5), (u1, 0.5)]
        triangles += [(base, base + 1, base + 2), (base, base + 2, base + 3)]

    xs = [p[0] for p in ring]
    ys = [p[1] for p in ring]
    spanx = max(xs) - min(xs) or 1.0
    spany = max(ys) - min(ys) or 1.0

    def cap_uv(p, left: float):
        return (left + 0.5 * (p[0] - min(xs)) / spanx * 0.999, 0.5 + (p[1] - min(ys)) / spany * 0.4999)

    cap_tris = ear_clip(ring)
    # top cap (z = h), counter-clockwise from above -> +z normal
    top_base = len(vertices)
    vertices += [(p[0], p[1], h) for p in ring]
    uv += [cap_uv(p, 0.0) for p in ring]
    triangles += [(top_base + a, top_base + b, top_base + c) for a, b, c in cap_tris]
    # bottom cap (z = 0), reversed winding -> -z normal
    bot_base = len(vertices)
    vertices += [(p[0], p[1], 0.0) for p in ring]
    uv += [cap_uv(p, 0.5) for p in ring]
    triangles += [(bot_base + a, bot_base + c, bot_base + b) for a, b, c in cap_tris]

    return MeshAsset(id=fp.id, role="building", vertices=vertices, triangles=triangles, uv=uv)


def extrude_footprints(footprints: list[BuildingFootprint], frame: LocalFrame) -> list[MeshAsset]:
    meshes = []
    for fp in footprints:
        mesh = extrude_footprint(fp, frame)
        if mesh is not None:
            meshes.append(mesh)
    return meshes


def footprints_from_geojson(path: str | Path) -> list[BuildingFootprint]:
    """Read a GeoJSON FeatureCollection of polygons with optional numeric
    property "height". GeoJSON coordinates are (lon, lat); outer ring only."""
    data = json.loads(Path(path).read_text())
    out: list[BuildingFootprint] = []
    for i, feature in enumerate(data.get("features", [])):
        geom = feature.get("geometry", {})
        if geom.get("type") != "Polygon":
            continue
        rings = geom.get("coordinates", [])
        if not rings:
            continue
        ring = rings[0]
        if len(ring) >= 2 and ring[0] == ring[-1]:
            ring = ring[:-1]  # unclose
        props = feature.get("properties") or {}
        height = props.get("height")
        fid = str(props.get("id", feature.get("id", f"building-{i}")))
        out.append(
            BuildingFootprint(
                id=fid,
                polygon=[(float(lat), float(lon)) for lon, lat in ring],
                height=float(height) if height is not None else DEFAULT_BUILDING_HEIGHT_M,
            )
        )
    return out


def _dist(a, b) -> float:
    return ((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2) ** 0.5
