import { describe, expect, it } from "vitest";

import type { StreamWindow } from "../src/protocol.js";
import { StreamPanelModel } from "../src/streampanel.js";

function window_(points: [number, number][], outliers: StreamWindow["outliers"] = [], mean = 0): StreamWindow {
  return {
    name: "eda",
    participant_id: "p1",
    unit: "uS",
    rate_hz: 4,
    mean,
    total_points: points.length,
    points,
    outliers,
    gaps: [],
  };
}

describe("stream panel model", () => {
  it("places yellow marks exactly at server-reported outliers", () => {
    const data = window_(
      [
        [0, 1],
        [250, 2],
        [500, 3],
        [750, 4],
        [1000, 100],
      ],
      [{ stream_name: "eda", t: 1000, value: 100, fence: "high" }],
      22,
    );
    const model = new StreamPanelModel(data, 200, 100);
    expect(model.outliers.length).toBe(1);
    expect(model.outliers[0].x).toBeCloseTo(200, 6); // at the right edge
    expect(model.outliers[0].y).toBeCloseTo(model.yOf(100), 9);
    expect(model.outliers[0].fence).toBe("high");
  });

  it("mean line sits at the scaled mean value", () => {
    const data = window_(
      [
        [0, 0],
        [1000, 10],
      ],
      [],
      5,
    );
    const model = new StreamPanelModel(data, 100, 100);
    expect(model.meanY).toBeCloseTo(model.yOf(5), 9);
    expect(model.meanY).toBeCloseTo(50, 6); // midway for symmetric range
  });

  it("constant stream keeps the mean line on the data", () => {
    const data = window_(
      [
        [0, 5],
        [1000, 5],
      ],
      [],
      5,
    );
    const model = new StreamPanelModel(data, 100, 100);
    expect(model.outliers).toEqual([]);
    expect(model.meanY).toBeCloseTo(model.points[0].y, 9);
  });

  it("empty windows render a placeholder instead of crashing", () => {
    const model = new StreamPanelModel(window_([]), 100, 100);
    expect(model.empty).toBe(true);
  });

  it("drag-zoom produces a bounded refetch request", () => {
    const data = window_(
      Array.from({ length: 101 }, (_, i) => [i * 100, Math.sin(i)] as [number, number]),
    );
    const model = new StreamPanelModel(data, 1000, 100);
    const req = model.zoomRequest(250, 750, 500);
    expect(req.from).toBe(2500);
    expect(req.to).toBe(7500);
    expect(req.maxPoints).toBe(500);
    // reversed drags normalize
    expect(model.zoomRequest(750, 250, 500)).toEqual(req);
  });
});
