/** Client-side replica of the shared session state.
 *
 * The reducer mirrors the server's fold exactly; the console never applies
 * a local guess, only sequenced server messages (strict echo discipline).
 */

import type { AnnotationRecord, GhostRecord, PresenceRecord, SyncMessage } from "./protocol.js";

export interface PlaybackState {
  t: number;
  rate: number;
  playing: boolean;
}

export interface SessionState {
  playback: PlaybackState;
  visibility: Record<string, boolean>;
  annotations: Record<string, AnnotationRecord>;
  ghosts: Record<string, GhostRecord>;
  presences: Record<string, PresenceRecord>;
  lastSeq: number;
}

export function emptyState(): SessionState {
  return {
    playback: { t: 0, rate: 1.0, playing: false },
    visibility: {},
    annotations: {},
    ghosts: {},
    presences: {},
    lastSeq: 0,
  };
}

export function stateFromSnapshot(payload: Record<string, unknown>): SessionState {
  const raw = payload.state as Record<string, any>;
  const state = emptyState();
  state.playback = { ...state.playback, ...(raw.playback as PlaybackState) };
  state.visibility = { ...(raw.visibility ?? {}) };
  state.annotations = { ...(raw.annotations ?? {}) };
  state.ghosts = { ...(raw.ghosts ?? {}) };
  state.presences = { ...(raw.presences ?? {}) };
  state.lastSeq = (raw.last_seq as number) ?? 0;
  return state;
}

/** Fold one sequenced broadcast; returns false on a sequence gap (the
 * caller must rejoin and resnapshot instead of diverging silently). */
export function applyMessage(state: SessionState, msg: SyncMessage): boolean {
  if (msg.seq !== state.lastSeq + 1) {
    return false;
  }
  const p = msg.payload as Record<string, any>;
  switch (msg.kind) {
    case "set_playback":
      state.playback = {
        t: p.t as number,
        rate: (p.rate as number) ?? 1.0,
        playing: Boolean(p.playing),
      };
      break;
    case "presence":
      state.presences[msg.origin] = {
        analyst_id: msg.origin,
        display_name: p.display_name ?? "",
        view: p.view ?? "desktop",
        pose: p.pose ?? {},
        frustum: p.frustum ?? { h_fov_deg: 90, v_fov_deg: 60 },
        last_seen: p.last_seen ?? 0,
      };
      break;
    case "create_annotation":
    case "update_annotation": {
      const existing = state.annotations[p.id as string];
      state.annotations[p.id as string] = {
        id: p.id,
        kind: p.kind ?? "comment",
        text: p.text ?? "",
        t: p.t ?? null,
        position: p.position ?? null,
        author: existing ? existing.author : (p.author ?? msg.origin),
        created_seq: existing ? existing.created_seq : msg.seq,
      };
      break;
    }
    case "delete_annotation":
      delete state.annotations[p.id as string];
      break;
    case "set_visibility":
      for (const [key, value] of Object.entries(p)) {
        state.visibility[key] = Boolean(value);
      }
      break;
    case "create_ghost":
      state.ghosts[p.id as string] = {
        id: p.id,
        analyst_id: msg.origin,
        t: p.t,
        camera: p.camera ?? {},
        label: p.label ?? "",
      };
      break;
    default:
      break; // snapshot/error/hello never arrive as sequenced broadcasts
  }
  state.lastSeq = msg.seq;
  return true;
}
