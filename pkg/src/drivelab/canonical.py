"""Canonical config-document serialization.

One deterministic byte form per document: UTF-8 JSON with sorted keys,
compact separators, shortest round-trip decimals, terminated by a single
newline. Mesh assets referenced as relative Wavefront-OBJ files are inlined
(and triangulated) at parse time.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from .model import ConfigDocument, MeshAsset


class NonFiniteValueError(ValueError):
    pass


def _check_finite(obj: Any, path: str = "$") -> None:
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise NonFiniteValueError(f"non-finite numeric field at {path}: {obj!r}")
    elif isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


def canonical_serialize(doc: ConfigDocument) -> bytes:
    """Serialize to the canonical byte form.

    Raises NonFiniteValueError if any numeric field is NaN or infinite.
    """
    tree = doc.to_json()
    _check_finite(tree)
    text = json.dumps(tree, sort_keys=True, ensure_ascii=False, separators=(",", ":"), allow_nan=False)
    return (text + "\n").encode("utf-8")


def parse_document(data: bytes | str, base_dir: str | Path | None = None) -> ConfigDocument:
    """Parse a config document from JSON bytes or text.

    ``base_dir`` is required only when mesh assets are stored as OBJ
    references ({"obj": "relative/path.obj", ...}); those are inlined so the
    in-memory document is self-contained.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    tree = json.loads(data)
    scene = tree.get("scene")
    if scene:
        meshes = scene.get("meshes", [])
        for i, m in enumerate(meshes):
            if "obj" in m:
                if base_dir is None:
                    raise ValueError(f"mesh {m.get('id')!r} references an OBJ file but no base_dir was given")
                rel = m["obj"]
                if Path(rel).is_absolute():
                    raise ValueError(f"mesh {m.get('id')!r}: OBJ reference must be a relative path")
                vertices, triangles, uv = load_obj(Path(base_dir) / rel)
                meshes[i] = {
                    "id": m["id"],
                    "role": m.get("role", "building"),
                    "vertices": vertices,
                    "triangles": triangles,
                    **({"uv": uv} if uv is not None else {}),
                }
    return ConfigDocument.from_json(tree)


def load_document(path: str | Path) -> ConfigDocument:
    path = Path(path)
    return parse_document(path.read_bytes(), base_dir=path.parent)


def save_document(doc: ConfigDocument, path: str | Path) -> None:
    Path(path).write_bytes(canonical_serialize(doc))


def load_obj(path: str | Path) -> tuple[list, list, list | None]:
    """Load a Wavefront OBJ as (vertices, triangles, uv).

    Polygon faces are fan-triangulated. Per-vertex UVs are kept only when
    every face vertex carries a vt index that is consistent per position
    index; otherwise uv is None and consumers fall back to a generated
    parameterization.
    """
    vertices: list[list[float]] = []
    texcoords: list[list[float]] = []
    triangles: list[list[int]] = []
    uv_of_vertex: dict[int, int] = {}
    uv_consistent = True

    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "v" and len(parts) >= 4:
            vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
        elif parts[0] == "vt" and len(parts) >= 3:
            texcoords.append([float(parts[1]), float(parts[2])])
        elif parts[0] == "f" and len(parts) >= 4:
            idx: list[int] = []
            for spec in parts[1:]:
                fields = spec.split("/")
                vi = int(fields[0])
                vi = vi - 1 if vi > 0 else len(vertices) + vi
                idx.append(vi)
                if len(fields) > 1 and fields[1]:
                    ti = int(fields[1])
                    ti = ti - 1 if ti > 0 else len(texcoords) + ti
                    if uv_of_vertex.setdefault(vi, ti) != ti:
                        uv_consistent = False
                else:
                    uv_consistent = False
            for k in range(1, len(idx) - 1):
                triangles.append([idx[0], idx[k], idx[k + 1]])

    uv = None
    if uv_consistent and texcoords and len(uv_of_vertex) == len(vertices):
        uv = [texcoords[uv_of_vertex[i]] for i in range(len(vertices))]
    return vertices, triangles, uv


def mesh_from_obj(path: str | Path, mesh_id: str, role: str) -> MeshAsset:
    vertices, triangles, uv = load_obj(path)
    return MeshAsset(
        id=mesh_id,
        role=role,
        vertices=[tuple(v) for v in vertices],
        triangles=[tuple(t) for t in triangles],
        uv=None if uv is None else [tuple(u) for u in uv],
    )
