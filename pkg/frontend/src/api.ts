/** Thin typed wrappers over the server's HTTP endpoints. */

import type {
  ConfigDocument,
  EventRecord,
  PathEventLayout,
  SessionInfo,
  Snapshot,
  StreamWindow,
} from "./protocol.js";

export class HttpApi {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`);
    if (!res.ok) {
      throw new Error(`GET ${path} -> ${res.status}`);
    }
    return (await res.json()) as T;
  }

  listSessions(): Promise<SessionInfo[]> {
    return this.getJson("/sessions");
  }

  config(sessionId: string): Promise<ConfigDocument> {
    return this.getJson(`/sessions/${sessionId}/config`);
  }

  events(
    sessionId: string,
    opts: { from?: number; to?: number; kinds?: string[]; participants?: string[] } = {},
  ): Promise<EventRecord[]> {
    const q = new URLSearchParams();
    if (opts.from !== undefined) q.set("from", String(opts.from));
    if (opts.to !== undefined) q.set("to", String(opts.to));
    if (opts.kinds?.length) q.set("kinds", opts.kinds.join(","));
    if (opts.participants?.length) q.set("participants", opts.participants.join(","));
    const qs = q.toString();
    return this.getJson(`/sessions/${sessionId}/events${qs ? `?${qs}` : ""}`);
  }

  stream(
    sessionId: string,
    name: string,
    opts: { from?: number; to?: number; maxPoints?: number; participant?: string } = {},
  ): Promise<StreamWindow> {
    const q = new URLSearchParams();
    if (opts.from !== undefined) q.set("from", String(Math.round(opts.from)));
    if (opts.to !== undefined) q.set("to", String(Math.round(opts.to)));
    if (opts.maxPoints !== undefined) q.set("max_points", String(opts.maxPoints));
    if (opts.participant) q.set("participant", opts.participant);
    const qs = q.toString();
    return this.getJson(`/sessions/${sessionId}/streams/${encodeURIComponent(name)}${qs ? `?${qs}` : ""}`);
  }

  layout(sessionId: string, exploded: boolean): Promise<PathEventLayout> {
    return this.getJson(`/sessions/${sessionId}/layout?exploded=${exploded}`);
  }

  snapshot(sessionId: string, t: number, participants?: string[]): Promise<Snapshot> {
    const q = new URLSearchParams({ t: String(Math.round(t)) });
    if (participants?.length) q.set("participants", participants.join(","));
    return this.getJson(`/sessions/${sessionId}/snapshot?${q.toString()}`);
  }

  heatmapNames(sessionId: string): Promise<string[]> {
    return this.getJson(`/sessions/${sessionId}/heatmaps`);
  }

  heatmapPngUrl(sessionId: string, layer: string): string {
    return `${this.baseUrl}/sessions/${sessionId}/heatmaps/${encodeURIComponent(layer)}.png`;
  }

  syncUrl(sessionId: string): string {
    const ws = this.baseUrl.replace(/^http/, "ws");
    return `${ws}/sessions/${sessionId}/sync`;
  }
}
