"""Headless computation of analysis artifacts from a config document.

Shared by the CLI analyze command and the collab server's export
endpoints so both always agree byte-for-byte.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .analytics import (
    HeatmapLayer,
    PlaceIndex,
    accumulate_heatmap,
    aggregate_avatars,
    extract_trajectory,
    layer_to_f32,
    layer_to_png,
    layout_path_events,
    modality_sequence_metrics,
    resolve_portal,
    simplify_trajectory,
)
from .analytics.heatmap import GROUND_TARGET, HeatmapBuilder
from .analytics.raycast import SceneIndex
from .geoscene import LocalFrame, build_ego_path
from .model import ConfigDocument

PRODUCTS = ("heatmaps", "aggregate", "trajectories", "portals", "layout", "metrics")

TRAJECTORY_JOINTS = ("head", "left_hand", "right_hand")


@dataclass
class AnalysisParams:
    heatmap_resolution: tuple[int, int] = (256, 256)
    sigma_interior: float | None = None  # None = role default
    sigma_environment: float | None = None
    trajectory_epsilon: float = 0.02
    aggregate_rate_hz: float = 30.0
    gazetteer_path: str | None = None

    @classmethod
    def from_settings(cls, settings: dict) -> "AnalysisParams":
        p = cls()
        if "heatmap_res" in settings:
            r = int(settings["heatmap_res"])
            p.heatmap_resolution = (r, r)
        if settings.get("sigma_interior") is not None:
            p.sigma_interior = float(settings["sigma_interior"])
        if settings.get("sigma_environment") is not None:
            p.sigma_environment = float(settings["sigma_environment"])
        if settings.get("epsilon") is not None:
            p.trajectory_epsilon = float(settings["epsilon"])
        if settings.get("gazetteer") is not None:
            p.gazetteer_path = str(settings["gazetteer"])
        return p


def _ego_paths(doc: ConfigDocument) -> dict[str, object]:
    if doc.scene is None:
        return {}
    frame = LocalFrame(origin=doc.scene.origin)
    return {
        s.participant_id: build_ego_path(s.ego_path, frame)
        for s in doc.sessions
        if len(s.ego_path) >= 2
    }


def standard_layer_names(doc: ConfigDocument) -> list[str]:
    """The deterministic layer set for a document.

    Interior surfaces carry gaze and touch density, environment meshes
    gaze and pointing, and road users accumulate into the ground grid.
    """
    names: list[str] = []
    if doc.scene is not None:
        for m in doc.scene.meshes:
            if m.role == "interior":
                names += [f"gaze_{m.id}", f"touch_{m.id}"]
            elif m.role == "building":
                names += [f"gaze_{m.id}", f"pointing_{m.id}"]
    if any(s.road_users for s in doc.sessions):
        names.append("traffic_ground")
    return names


def parse_layer_name(name: str) -> tuple[str, str]:
    kind, _, target = name.partition("_")
    if kind not in ("gaze", "touch", "pointing", "traffic") or not target:
        raise KeyError(f"bad layer name {name!r} (expected <kind>_<target>)")
    return kind, target


def compute_layer(
    doc: ConfigDocument,
    name: str,
    params: AnalysisParams | None = None,
    builder: HeatmapBuilder | None = None,
) -> HeatmapLayer:
    params = params or AnalysisParams()
    kind, target = parse_layer_name(name)
    if doc.scene is None:
        raise ValueError("document has no scene; heatmaps need geometry")
    layer = HeatmapLayer(id=name, kind=kind, target=target, resolution=params.heatmap_resolution)
    if target != GROUND_TARGET and doc.scene.mesh_by_id(target) is None:
        raise KeyError(f"unknown heatmap target {target!r}")

    sigma = None
    if target != GROUND_TARGET:
        role = doc.scene.mesh_by_id(target).role
        if role in ("interior", "ego_exterior"):
            sigma = params.sigma_interior
        else:
            sigma = params.sigma_environment

    builder = builder or HeatmapBuilder(doc.scene, params.heatmap_resolution)
    paths = _ego_paths(doc)
    for s in doc.sessions:
        if kind == "gaze":
            samples = s.gaze
        elif kind == "pointing":
            samples = s.pointing
        elif kind == "touch":
            samples = s.touches
        else:
            samples = s.road_users
        if not samples:
            continue
        accumulate_heatmap(
            layer, samples, doc.scene, builder=builder,
            ego_path=paths.get(s.participant_id), sigma=sigma,
        )
    return layer


def compute_aggregate(doc: ConfigDocument, rate_hz: float = 30.0):
    """Aggregate the largest group of sessions sharing one joint set over
    their common skeleton window."""
    groups: dict[tuple, list] = {}
    for s in doc.sessions:
        if s.skeleton:
            groups.setdefault(tuple(s.skeleton_joints), []).append(s)
    if not groups:
        return None
    sessions = max(groups.values(), key=len)
    t0 = max(s.skeleton[0].t for s in sessions)
    t1 = min(s.skeleton[-1].t for s in sessions)
    if t1 < t0:
        return None
    return aggregate_avatars(sessions, (t0, t1), rate_hz)


def compute_trajectories(doc: ConfigDocument, epsilon: float):
    out = []
    for s in doc.sessions:
        if not s.skeleton:
            continue
        window = (s.skeleton[0].t, s.skeleton[-1].t)
        for joint in TRAJECTORY_JOINTS:
            if joint in s.skeleton_joints:
                out.append(simplify_trajectory(extract_trajectory(s, joint, window), epsilon))
    return out


def compute_portals(doc: ConfigDocument, gazetteer_path: str | None = None):
    place_index = PlaceIndex.load(gazetteer_path) if gazetteer_path else PlaceIndex([])
    if doc.scene is None:
        return []
    index = SceneIndex(doc.scene)
    paths = _ego_paths(doc)
    out = []
    for s in doc.sessions:
        for e in s.events:
            if e.kind == "interaction" and e.attrs.get("modality") in ("gaze", "pointing", "speech"):
                out.append(
                    resolve_portal(
                        e, s, doc.scene, place_index=place_index,
                        scene_index=index, ego_path=paths.get(s.participant_id),
                    )
                )
    return out


def compute_layout(doc: ConfigDocument, exploded: bool = True):
    paths = _ego_paths(doc)
    if not paths:
        return None
    path = next(iter(paths.values()))
    events = [e for s in doc.sessions for e in s.events]
    order = [p.id for p in doc.participants]
    return layout_path_events(events, path, participant_order=order, exploded=exploded)


def compute_metrics(doc: ConfigDocument):
    return modality_sequence_metrics([e for s in doc.sessions for e in s.events])


def _dump_json(tree, path: Path) -> None:
    path.write_text(json.dumps(tree, sort_keys=True, separators=(",", ":")) + "\n")


def write_products(
    doc: ConfigDocument,
    products: list[str],
    out_dir: str | Path,
    params: AnalysisParams | None = None,
) -> dict:
    """Write the requested artifact files; returns a manifest of outputs."""
    params = params or AnalysisParams()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    unknown = [p for p in products if p not in PRODUCTS]
    if unknown:
        raise KeyError(f"unknown products: {', '.join(unknown)} (known: {', '.join(PRODUCTS)})")

    written: dict[str, list[str]] = {p: [] for p in products}
    builder = HeatmapBuilder(doc.scene, params.heatmap_resolution) if doc.scene is not None else None

    if "heatmaps" in products:
        for name in standard_layer_names(doc):
            layer = compute_layer(doc, name, params, builder=builder)
            (out_dir / f"{name}.f32").write_bytes(layer_to_f32(layer))
            (out_dir / f"{name}.png").write_bytes(layer_to_png(layer))
            meta = layer.to_json()
            _dump_json(meta, out_dir / f"{name}.json")
            written["heatmaps"] += [f"{name}.f32", f"{name}.png", f"{name}.json"]

    if "aggregate" in products:
        agg = compute_aggregate(doc, params.aggregate_rate_hz)
        _dump_json(agg.to_json() if agg else None, out_dir / "aggregate.json")
        written["aggregate"].append("aggregate.json")

    if "trajectories" in products:
        trajs = compute_trajectories(doc, params.trajectory_epsilon)
        _dump_json([t.to_json() for t in trajs], out_dir / "trajectories.json")
        written["trajectories"].append("trajectories.json")

    if "portals" in products:
        portals = compute_portals(doc, params.gazetteer_path)
        _dump_json([p.to_json() for p in portals], out_dir / "portals.json")
        written["portals"].append("portals.json")

    if "layout" in products:
        layout = compute_layout(doc)
        _dump_json(layout.to_json() if layout else None, out_dir / "layout.json")
        written["layout"].append("layout.json")

    if "metrics" in products:
        metrics = compute_metrics(doc)
        (out_dir / "metrics.csv").write_text(metrics.to_csv())
        _dump_json(metrics.to_json(), out_dir / "metrics.json")
        written["metrics"] += ["metrics.csv", "metrics.json"]

    return {"out_dir": str(out_dir), "written": written}
