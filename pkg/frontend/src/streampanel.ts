/** 2D stream panel: line chart with a red mean line and yellow marks at
 * exactly the server-reported outliers. Drag-zoom narrows the window and
 * refetches at higher resolution.
 */

import type { StreamWindow } from "./protocol.js";

export interface ChartPoint {
  x: number;
  y: number;
  t: number;
  v: number;
}

export interface OutlierDot {
  x: number;
  y: number;
  t: number;
  value: number;
  fence: "low" | "high";
}

export interface FetchRequest {
  from: number;
  to: number;
  maxPoints: number;
}

export class StreamPanelModel {
  readonly points: ChartPoint[];
  readonly outliers: OutlierDot[];
  readonly meanY: number;
  readonly vMin: number;
  readonly vMax: number;
  readonly tMin: number;
  readonly tMax: number;

  constructor(
    readonly data: StreamWindow,
    readonly width: number,
    readonly height: number,
  ) {
    const pts = data.points;
    this.tMin = pts.length ? pts[0][0] : 0;
    this.tMax = pts.length ? pts[pts.length - 1][0] : 1;
    let lo = Infinity;
    let hi = -Infinity;
    for (const [, v] of pts) {
      lo = Math.min(lo, v);
      hi = Math.max(hi, v);
    }
    for (const m of data.outliers) {
      lo = Math.min(lo, m.value);
      hi = Math.max(hi, m.value);
    }
    lo = Math.min(lo, data.mean);
    hi = Math.max(hi, data.mean);
    if (!isFinite(lo) || !isFinite(hi)) {
      lo = 0;
      hi = 1;
    }
    if (hi - lo < 1e-12) {
      hi = lo + 1;
    }
    this.vMin = lo;
    this.vMax = hi;
    this.points = pts.map(([t, v]) => ({ x: this.xOf(t), y: this.yOf(v), t, v }));
    this.outliers = data.outliers.map((m) => ({
      x: this.xOf(m.t),
      y: this.yOf(m.value),
      t: m.t,
      value: m.value,
      fence: m.fence,
    }));
    this.meanY = this.yOf(data.mean);
  }

  get empty(): boolean {
    return this.points.length === 0;
  }

  xOf(t: number): number {
    return this.tMax > this.tMin ? ((t - this.tMin) / (this.tMax - this.tMin)) * this.width : 0;
  }

  yOf(v: number): number {
    return this.height - ((v - this.vMin) / (this.vMax - this.vMin)) * this.height;
  }

  tOf(x: number): number {
    const u = Math.min(1, Math.max(0, this.width > 0 ? x / this.width : 0));
    return Math.round(this.tMin + u * (this.tMax - this.tMin));
  }

  /** Drag-zoom: sub-window plus a refetch request at panel resolution. */
  zoomRequest(x0: number, x1: number, maxPoints = 1000): FetchRequest {
    const a = this.tOf(Math.min(x0, x1));
    const b = this.tOf(Math.max(x0, x1));
    return { from: a, to: Math.max(b, a + 1), maxPoints };
  }

  render(ctx: CanvasRenderingContext2D): void {
    ctx.clearRect(0, 0, this.width, this.height);
    if (this.empty) {
      ctx.fillStyle = "#888";
      ctx.fillText("no samples in window", 8, this.height / 2);
      return;
    }
    // gap-aware polyline: lift the pen across recorded gaps
    const gaps = this.data.gaps;
    ctx.strokeStyle = "#3a7";
    ctx.beginPath();
    let pen = false;
    for (let i = 0; i < this.points.length; i++) {
      const p = this.points[i];
      const prev = this.points[i - 1];
      const inGap =
        prev !== undefined && gaps.some(([a, b]) => prev.t >= a && p.t <= b && p.t > prev.t && b > a);
      if (!pen || inGap) {
        ctx.moveTo(p.x, p.y);
        pen = true;
      } else {
        ctx.lineTo(p.x, p.y);
      }
    }
    ctx.stroke();

    ctx.strokeStyle = "#d43";
    ctx.beginPath();
    ctx.moveTo(0, this.meanY);
    ctx.lineTo(this.width, this.meanY);
    ctx.stroke();

    ctx.fillStyle = "#fc0";
    for (const m of this.outliers) {
      ctx.beginPath();
      ctx.arc(m.x, m.y, 3, 0, Math.PI * 2);
      ctx.fill();
    }
  }
}
