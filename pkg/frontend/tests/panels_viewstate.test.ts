import { describe, expect, it } from "vitest";

import { DEFAULT_LAYOUT, PanelLayout } from "../src/panels.js";
import { POV_PRESETS, ViewState } from "../src/viewstate.js";

class MemoryStorage {
  private store = new Map<string, string>();
  getItem(key: string): string | null {
    return this.store.get(key) ?? null;
  }
  setItem(key: string, value: string): void {
    this.store.set(key, value);
  }
}

describe("panel layout", () => {
  it("serializes and restores round-trip", () => {
    const layout = new PanelLayout();
    layout.move("scene3d", 1, 1);
    layout.resize("stream2d", 4, 6);
    const restored = PanelLayout.restore(layout.serialize());
    expect(restored.panels).toEqual(layout.panels);
  });

  it("persists per analyst locally", () => {
    const storage = new MemoryStorage();
    const layout = new PanelLayout();
    layout.move("video", 0, 5);
    layout.save(storage);
    const loaded = PanelLayout.load(storage);
    expect(loaded.panels.find((p) => p.kind === "video")).toMatchObject({ x: 0, y: 5 });
  });

  it("timeline is always present and cannot be removed", () => {
    const layout = new PanelLayout(DEFAULT_LAYOUT.filter((p) => p.kind !== "timeline"));
    expect(layout.panels.some((p) => p.kind === "timeline")).toBe(true);
    expect(layout.remove("timeline")).toBe(false);
    expect(layout.panels.some((p) => p.kind === "timeline")).toBe(true);
    expect(layout.remove("video")).toBe(true);
  });

  it("corrupt persisted layouts fall back to the default", () => {
    expect(PanelLayout.restore("{not json").panels).toEqual(new PanelLayout().panels);
  });
});

describe("view state", () => {
  it("camera presets include the predefined POVs", () => {
    const vs = new ViewState();
    vs.applyPreset("passenger_seat");
    expect(vs.camera.position).toEqual(POV_PRESETS.passenger_seat.position);
    vs.applyPreset("isometric");
    expect(vs.preset).toBe("isometric");
  });

  it("slice plane axis must be x, y, or z", () => {
    const vs = new ViewState();
    vs.setSlice("y", 0.5);
    expect(vs.slice).toEqual({ axis: "y", offset: 0.5 });
    expect(() => vs.setSlice("w" as never, 0)).toThrow();
    vs.clearSlice();
    expect(vs.slice).toBeNull();
  });
});
