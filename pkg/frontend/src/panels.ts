/** Panel layout: a grid of panels persisted locally per analyst.
 * The timeline is always present; layouts serialize and restore.
 */

export type PanelKind = "timeline" | "stream2d" | "scene3d" | "inspector" | "overview" | "video";

export interface PanelPlacement {
  kind: PanelKind;
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export const DEFAULT_LAYOUT: PanelPlacement[] = [
  { kind: "stream2d", x: 0, y: 0, w: 3, h: 8 },
  { kind: "scene3d", x: 3, y: 0, w: 6, h: 8 },
  { kind: "video", x: 9, y: 0, w: 3, h: 3 },
  { kind: "inspector", x: 9, y: 3, w: 3, h: 3 },
  { kind: "overview", x: 9, y: 6, w: 3, h: 2 },
  { kind: "timeline", x: 0, y: 8, w: 12, h: 2 },
];

const STORAGE_KEY = "console-panel-layout-v1";

export class PanelLayout {
  panels: PanelPlacement[];

  constructor(panels: PanelPlacement[] = DEFAULT_LAYOUT) {
    this.panels = panels.map((p) => ({ ...p }));
    this.ensureTimeline();
  }

  private ensureTimeline(): void {
    if (!this.panels.some((p) => p.kind === "timeline")) {
      this.panels.push({ kind: "timeline", x: 0, y: 8, w: 12, h: 2 });
    }
  }

  move(kind: PanelKind, x: number, y: number): void {
    const p = this.panels.find((q) => q.kind === kind);
    if (p) {
      p.x = x;
      p.y = y;
    }
  }

  resize(kind: PanelKind, w: number, h: number): void {
    const p = this.panels.find((q) => q.kind === kind);
    if (p) {
      p.w = Math.max(1, w);
      p.h = Math.max(1, h);
    }
  }

  remove(kind: PanelKind): boolean {
    if (kind === "timeline") {
      return false; // the timeline cannot be removed
    }
    const before = this.panels.length;
    this.panels = this.panels.filter((p) => p.kind !== kind);
    return this.panels.length < before;
  }

  serialize(): string {
    return JSON.stringify(this.panels);
  }

  static restore(raw: string | null): PanelLayout {
    if (!raw) {
      return new PanelLayout();
    }
    try {
      const parsed = JSON.parse(raw) as PanelPlacement[];
      return new PanelLayout(parsed);
    } catch {
      return new PanelLayout();
    }
  }

  save(storage: StorageLike): void {
    storage.setItem(STORAGE_KEY, this.serialize());
  }

  static load(storage: StorageLike): PanelLayout {
    return PanelLayout.restore(storage.getItem(STORAGE_KEY));
  }
}
