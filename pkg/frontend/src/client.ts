/** Session sync client: hello/snapshot handshake, proposals, sequenced
 * broadcasts, reconnect with backoff.
 *
 * The console holds no authoritative state. Proposals leave through
 * `propose*`; the local state changes only when the sequenced echo comes
 * back, and any gap or reconnect replaces the state with the server's
 * snapshot.
 */

import { decodeMessage, encodeMessage } from "./protocol.js";
import type { SyncMessage } from "./protocol.js";
import { applyMessage, emptyState, stateFromSnapshot } from "./state.js";
import type { SessionState } from "./state.js";

export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type SocketFactory = (url: string) => SocketLike;

export type ClientStatus = "connecting" | "live" | "reconnecting" | "closed";

export interface ClientEvents {
  onState?: (state: SessionState) => void;
  onMessage?: (msg: SyncMessage) => void;
  onStatus?: (status: ClientStatus) => void;
  onRejection?: (msg: SyncMessage) => void;
}

const MAX_BACKOFF_MS = 15_000;

export class SessionClient {
  state: SessionState = emptyState();
  status: ClientStatus = "connecting";
  duration = 0;

  private socket: SocketLike | null = null;
  private attempts = 0;
  private closedByUser = false;
  private joined = false;

  constructor(
    private readonly url: string,
    readonly analystId: string,
    private readonly events: ClientEvents = {},
    private readonly socketFactory: SocketFactory = (u) => new WebSocket(u) as unknown as SocketLike,
    private readonly scheduler: (fn: () => void, ms: number) => void = (fn, ms) => setTimeout(fn, ms),
  ) {}

  connect(): void {
    this.closedByUser = false;
    this.setStatus(this.attempts === 0 ? "connecting" : "reconnecting");
    const socket = this.socketFactory(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.joined = false;
      socket.send(encodeMessage({ seq: 0, kind: "hello", origin: this.analystId, payload: {} }));
    };
    socket.onmessage = (ev) => this.handleFrame(String(ev.data));
    socket.onerror = () => undefined; // close always follows
    socket.onclose = () => {
      this.socket = null;
      this.joined = false;
      if (this.closedByUser) {
        this.setStatus("closed");
        return;
      }
      const backoff = Math.min(MAX_BACKOFF_MS, 250 * 2 ** this.attempts);
      this.attempts += 1;
      this.setStatus("reconnecting");
      this.scheduler(() => this.connect(), backoff);
    };
  }

  close(): void {
    this.closedByUser = true;
    this.socket?.close();
    this.setStatus("closed");
  }

  get live(): boolean {
    return this.status === "live" && this.joined;
  }

  private setStatus(status: ClientStatus): void {
    this.status = status;
    this.events.onStatus?.(status);
  }

  private handleFrame(raw: string): void {
    const msg = decodeMessage(raw);
    if (msg.kind === "snapshot") {
      // authoritative replacement: everything rendered derives from this
      this.state = stateFromSnapshot(msg.payload);
      this.duration = (msg.payload.duration as number) ?? 0;
      this.attempts = 0;
      this.joined = true;
      this.setStatus("live");
      this.events.onState?.(this.state);
      this.events.onMessage?.(msg);
      return;
    }
    if (msg.kind === "error") {
      this.events.onRejection?.(msg);
      this.events.onMessage?.(msg);
      return;
    }
    if (!applyMessage(this.state, msg)) {
      // sequence gap: drop the socket and rejoin for a fresh snapshot
      this.socket?.close();
      return;
    }
    this.events.onState?.(this.state);
    this.events.onMessage?.(msg);
  }

  propose(kind: SyncMessage["kind"], payload: Record<string, unknown>): void {
    if (!this.socket || !this.joined) {
      return; // controls are disabled while disconnected
    }
    this.socket.send(encodeMessage({ seq: 0, kind, origin: this.analystId, payload }));
  }

  scrubTo(t: number, playing = false): void {
    this.propose("set_playback", { t: Math.round(t), playing });
  }

  setPlaying(playing: boolean, rate = 1.0): void {
    this.propose("set_playback", { t: this.state.playback.t, playing, rate });
  }

  createLabel(id: string, text: string, t: number): void {
    this.propose("create_annotation", { id, kind: "label", text, t: Math.round(t), author: this.analystId });
  }

  createComment(id: string, text: string, position: [number, number, number]): void {
    this.propose("create_annotation", { id, kind: "comment", text, position, author: this.analystId });
  }

  deleteAnnotation(id: string): void {
    this.propose("delete_annotation", { id });
  }

  setVisibility(key: string, visible: boolean): void {
    this.propose("set_visibility", { [key]: visible });
  }

  createGhost(id: string, t: number, camera: Record<string, unknown>, label: string): void {
    this.propose("create_ghost", { id, t: Math.round(t), camera, label });
  }

  selectGhost(id: string): void {
    this.propose("select_ghost", { id });
  }

  sendPresence(pose: Record<string, unknown>, view: "desktop" | "vr" = "desktop", displayName = ""): void {
    this.propose("presence", { pose, view, display_name: displayName || this.analystId });
  }
}
