/** Render-independent scene computations: marker placement for
 * driving-path events (collapsed/exploded), avatar bone segments in
 * participant colors, ghost and presence markers, bounding-box proxies
 * for missing meshes.
 */

import { cssColor } from "./protocol.js";
import type {
  AvatarPose,
  ConfigDocument,
  EventRecord,
  GhostRecord,
  LayoutEntry,
  MeshAsset,
  Participant,
  PathEventLayout,
  PresenceRecord,
} from "./protocol.js";

export interface EventMarker {
  eventId: string;
  position: [number, number, number];
  color: string;
  cluster: number;
  lane: number;
}

export function eventMarkers(
  layout: PathEventLayout,
  events: EventRecord[],
  participants: Participant[],
): EventMarker[] {
  const colorOf = new Map(participants.map((p) => [p.id, cssColor(p.color)]));
  const byId = new Map(events.map((e) => [e.id, e]));
  const markers: EventMarker[] = [];
  for (const entry of layout.entries) {
    const event = byId.get(entry.event_id);
    const [x, y, z] = entry.path_position;
    markers.push({
      eventId: entry.event_id,
      position: [x, y, z + entry.vertical_offset],
      color: event ? (colorOf.get(event.participant_id) ?? "#999999") : "#999999",
      cluster: entry.cluster,
      lane: entry.lane_index,
    });
  }
  return markers;
}

/** Marker heights above the path anchor, keyed by event id (the explode
 * contract: base 2 m, 0.5 m per lane). */
export function markerHeights(layout: PathEventLayout): Map<string, number> {
  return new Map(layout.entries.map((e) => [e.event_id, e.vertical_offset]));
}

const BONES: [string, string][] = [
  ["head", "neck"],
  ["neck", "spine_shoulder"],
  ["neck", "left_hand"],
  ["neck", "right_hand"],
  ["spine_shoulder", "spine_mid"],
  ["left_shoulder", "left_elbow"],
  ["left_elbow", "left_wrist"],
  ["left_wrist", "left_hand"],
  ["right_shoulder", "right_elbow"],
  ["right_elbow", "right_wrist"],
  ["right_wrist", "right_hand"],
];

export interface BoneSegment {
  from: [number, number, number];
  to: [number, number, number];
}

export interface AvatarFigure {
  participantId: string;
  color: string;
  jointPositions: [number, number, number][];
  bones: BoneSegment[];
}

export function avatarFigure(pose: AvatarPose, participants: Participant[]): AvatarFigure {
  const colorOf = new Map(participants.map((p) => [p.id, cssColor(p.color)]));
  const index = new Map(pose.joint_names.map((n, i) => [n, i]));
  const bones: BoneSegment[] = [];
  for (const [a, b] of BONES) {
    const ia = index.get(a);
    const ib = index.get(b);
    if (ia !== undefined && ib !== undefined) {
      bones.push({ from: pose.joints[ia].position, to: pose.joints[ib].position });
    }
  }
  return {
    participantId: pose.participant_id,
    color: colorOf.get(pose.participant_id) ?? "#ffffff",
    jointPositions: pose.joints.map((j) => j.position),
    bones,
  };
}

export interface BoxProxy {
  center: [number, number, number];
  size: [number, number, number];
}

/** Fallback geometry for a mesh that failed to load or has no triangles. */
export function boundingBoxProxy(mesh: MeshAsset): BoxProxy {
  if (!mesh.vertices.length) {
    return { center: [0, 0, 0], size: [1, 1, 1] };
  }
  const lo = [Infinity, Infinity, Infinity];
  const hi = [-Infinity, -Infinity, -Infinity];
  for (const v of mesh.vertices) {
    for (let c = 0; c < 3; c++) {
      lo[c] = Math.min(lo[c], v[c]);
      hi[c] = Math.max(hi[c], v[c]);
    }
  }
  return {
    center: [(lo[0] + hi[0]) / 2, (lo[1] + hi[1]) / 2, (lo[2] + hi[2]) / 2],
    size: [Math.max(hi[0] - lo[0], 0.1), Math.max(hi[1] - lo[1], 0.1), Math.max(hi[2] - lo[2], 0.1)],
  };
}

export interface GhostMarker {
  id: string;
  t: number;
  label: string;
  position: [number, number, number] | null;
}

export function ghostMarkers(ghosts: Record<string, GhostRecord>): GhostMarker[] {
  return Object.values(ghosts)
    .map((g) => ({
      id: g.id,
      t: g.t,
      label: g.label,
      position: (g.camera.position as [number, number, number] | undefined) ?? null,
    }))
    .sort((a, b) => a.t - b.t);
}

export interface PresenceMarker {
  analystId: string;
  displayName: string;
  view: "desktop" | "vr";
  position: [number, number, number] | null;
  lookAt: [number, number, number] | null;
  hFovDeg: number;
}

export function presenceMarkers(presences: Record<string, PresenceRecord>, selfId: string): PresenceMarker[] {
  return Object.values(presences)
    .filter((p) => p.analyst_id !== selfId)
    .map((p) => ({
      analystId: p.analyst_id,
      displayName: p.display_name,
      view: p.view,
      position: p.pose.position ?? null,
      lookAt: p.pose.look_at ?? null,
      hFovDeg: p.frustum?.h_fov_deg ?? 90,
    }));
}

/** Which heatmap layers the overview toggles should show for a scene. */
export function visibleLayers(names: string[], visibility: Record<string, boolean>): string[] {
  return names.filter((n) => visibility[`heatmap:${n}`] !== false);
}

export function sceneMeshes(config: ConfigDocument): MeshAsset[] {
  return config.scene?.meshes ?? [];
}
