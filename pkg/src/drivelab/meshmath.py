"""Low-level triangle-mesh math shared by validation and analytics."""

from __future__ import annotations

import numpy as np

from .model import MeshAsset

# Rays must travel at least this far before a hit counts; rejects self-hits
# when origins sit on a surface.
RAY_EPS = 1e-9


def mesh_arrays(mesh: MeshAsset) -> tuple[np.ndarray, np.ndarray]:
    v = np.asarray(mesh.vertices, dtype=np.float64).reshape(-1, 3)
    f = np.asarray(mesh.triangles, dtype=np.int64).reshape(-1, 3)
    return v, f


def triangle_areas(v: np.ndarray, f: np.ndarray) -> np.ndarray:
    a, b, c = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def closest_points_on_triangles(p: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Closest point to ``p`` on each triangle (a[i], b[i], c[i])."""
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)

    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)

    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    with np.errstate(divide="ignore", invalid="ignore"):
        vc = d1 * d4 - d3 * d2
        vb = d5 * d2 - d1 * d6
        va = d3 * d6 - d5 * d4

        t_ab = d1 / (d1 - d3)
        t_ac = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = va + vb + vc
        v_in = vb / denom
        w_in = vc / denom

        cand_interior = a + ab * v_in[:, None] + ac * w_in[:, None]
        cand_ab = a + ab * t_ab[:, None]
        cand_ac = a + ac * t_ac[:, None]
        cand_bc = b + (c - b) * t_bc[:, None]

    out = cand_interior.copy()

    m_bc = (va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0)
    out[m_bc] = cand_bc[m_bc]
    m_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    out[m_ac] = cand_ac[m_ac]
    m_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    out[m_ab] = cand_ab[m_ab]
    m_c = (d6 >= 0) & (d5 <= d6)
    out[m_c] = c[m_c]
    m_b = (d3 >= 0) & (d4 <= d3)
    out[m_b] = b[m_b]
    m_a = (d1 <= 0) & (d2 <= 0)
    out[m_a] = a[m_a]
    return out


def point_mesh_distance(point, v: np.ndarray, f: np.ndarray) -> float:
    p = np.asarray(point, dtype=np.float64)
    closest = closest_points_on_triangles(p, v[f[:, 0]], v[f[:, 1]], v[f[:, 2]])
    return float(np.min(np.linalg.norm(closest - p, axis=1)))


def ray_triangle_distances(origin, direction, v: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Moller-Trumbore distances for one ray against all triangles.

    Returns an array of hit distances with +inf for misses. Both face
    orientations count; hits closer than RAY_EPS are rejected.
    """
    o = np.asarray(origin, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    v0, v1, v2 = v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]
    e1 = v1 - v0
    e2 = v2 - v0
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = 1.0 / det
        tvec = o - v0
        u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
        qvec = np.cross(tvec, e1)
        w = qvec @ d * inv_det
        t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    hit = (np.abs(det) > 1e-12) & (u >= 0.0) & (w >= 0.0) & (u + w <= 1.0) & (t > RAY_EPS)
    return np.where(hit, t, np.inf)
