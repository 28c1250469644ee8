/** Wire types for the replay server's HTTP + sync contract. */

export type SyncKind =
  | "hello"
  | "snapshot"
  | "set_playback"
  | "presence"
  | "create_annotation"
  | "update_annotation"
  | "delete_annotation"
  | "set_visibility"
  | "create_ghost"
  | "select_ghost"
  | "error";

export interface SyncMessage {
  seq: number;
  kind: SyncKind;
  origin: string;
  payload: Record<string, unknown>;
}

export function encodeMessage(msg: SyncMessage): string {
  return JSON.stringify({ seq: msg.seq, kind: msg.kind, origin: msg.origin, payload: msg.payload });
}

export function decodeMessage(raw: string): SyncMessage {
  const obj = JSON.parse(raw);
  if (typeof obj.kind !== "string" || typeof obj.seq !== "number") {
    throw new Error(`malformed sync frame: ${raw.slice(0, 120)}`);
  }
  return { seq: obj.seq, kind: obj.kind, origin: obj.origin ?? "", payload: obj.payload ?? {} };
}

export interface SessionInfo {
  id: string;
  title: string;
  duration: number;
  seq: number;
}

export interface EventRecord {
  id: string;
  kind: "interaction" | "emotion" | "driving" | "activity" | "audio";
  label: string;
  t_start: number;
  t_end: number;
  participant_id: string;
  attrs: Record<string, string>;
  confidence: number;
  source: string;
}

export const EVENT_KINDS = ["interaction", "emotion", "driving", "activity"] as const;

export interface OutlierMark {
  stream_name: string;
  t: number;
  value: number;
  fence: "low" | "high";
}

export interface StreamWindow {
  name: string;
  participant_id: string;
  unit: string;
  rate_hz: number;
  mean: number;
  total_points: number;
  points: [number, number][];
  outliers: OutlierMark[];
  gaps: [number, number][];
}

export interface LayoutEntry {
  event_id: string;
  path_position: [number, number, number];
  vertical_offset: number;
  lane_index: number;
  cluster: number;
  clamped: boolean;
}

export interface PathEventLayout {
  exploded: boolean;
  entries: LayoutEntry[];
}

export interface JointPose {
  position: [number, number, number];
  rotation: [number, number, number, number];
}

export interface AvatarPose {
  participant_id: string;
  joint_names: string[];
  joints: JointPose[];
}

export interface Snapshot {
  t: number;
  ego_pose: { position: [number, number, number]; heading: number; clamped: boolean } | null;
  avatars: AvatarPose[];
  road_users: [string, string, [number, number, number]][];
  active_events: EventRecord[];
  active_outliers: OutlierMark[];
}

export interface Participant {
  id: string;
  color: [number, number, number];
  demographics: Record<string, string>;
}

export interface MeshAsset {
  id: string;
  role: "interior" | "ego_exterior" | "building" | "road_user" | "ground";
  vertices: [number, number, number][];
  triangles: [number, number, number][];
  uv?: [number, number][];
}

export interface SpeechSegment {
  t_start: number;
  t_end: number;
  transcript: string;
  referent: string | null;
}

export interface MediaRef {
  path: string;
  kind: "video" | "audio";
  t_offset: number;
}

export interface SessionRecording {
  participant_id: string;
  condition: string;
  duration: number;
  events: EventRecord[];
  speech: SpeechSegment[];
  media: MediaRef[];
  streams: { name: string; unit: string }[];
}

export interface ConfigDocument {
  schema_version: string;
  study_meta: { title: string; conditions: string[]; notes: string };
  participants: Participant[];
  sessions: SessionRecording[];
  scene: {
    meshes: MeshAsset[];
    ego_vehicle: string;
  } | null;
  annotations: unknown[];
}

export interface AnnotationRecord {
  id: string;
  kind: "label" | "comment";
  text: string;
  t: number | null;
  position: [number, number, number] | null;
  author: string;
  created_seq: number;
}

export interface GhostRecord {
  id: string;
  analyst_id: string;
  t: number;
  camera: Record<string, unknown>;
  label: string;
}

export interface PresenceRecord {
  analyst_id: string;
  display_name: string;
  view: "desktop" | "vr";
  pose: { position?: [number, number, number]; look_at?: [number, number, number] };
  frustum: { h_fov_deg: number; v_fov_deg: number };
  last_seen: number;
}

/** rgb in [0,1] -> #rrggbb */
export function cssColor(rgb: [number, number, number]): string {
  const h = (c: number) =>
    Math.max(0, Math.min(255, Math.round(c * 255)))
      .toString(16)
      .padStart(2, "0");
  return `#${h(rgb[0])}${h(rgb[1])}${h(rgb[2])}`;
}
