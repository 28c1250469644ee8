/** Timeline model: four color-coded event lines per kind plus an audio
 * line, a playhead, scrubbing, and region selection for label annotations.
 *
 * Pure layout math lives here so it is unit-testable; canvas drawing is a
 * thin method over the computed segments.
 */

import { EVENT_KINDS, cssColor } from "./protocol.js";
import type { EventRecord, Participant, SpeechSegment } from "./protocol.js";

export interface TimelineSegment {
  eventId: string;
  t0: number;
  t1: number;
  color: string;
  participantId: string;
  label: string;
}

export interface TimelineLine {
  kind: string;
  segments: TimelineSegment[];
}

export interface RegionSelection {
  t0: number;
  t1: number;
}

export class TimelineModel {
  readonly lines: TimelineLine[];
  private colorOf: Map<string, string>;

  constructor(
    events: EventRecord[],
    speech: { participant_id: string; segments: SpeechSegment[] }[],
    participants: Participant[],
    readonly duration: number,
  ) {
    this.colorOf = new Map(participants.map((p) => [p.id, cssColor(p.color)]));
    const byKind = new Map<string, TimelineSegment[]>();
    for (const kind of EVENT_KINDS) {
      byKind.set(kind, []);
    }
    for (const e of events) {
      if (e.kind === "audio") {
        continue; // audio events render on the dedicated audio line below
      }
      byKind.get(e.kind)?.push({
        eventId: e.id,
        t0: e.t_start,
        t1: e.t_end,
        color: this.colorOf.get(e.participant_id) ?? "#999999",
        participantId: e.participant_id,
        label: e.label,
      });
    }
    this.lines = EVENT_KINDS.map((kind) => ({ kind, segments: byKind.get(kind) ?? [] }));

    const audio: TimelineSegment[] = [];
    for (const e of events) {
      if (e.kind === "audio") {
        audio.push({
          eventId: e.id,
          t0: e.t_start,
          t1: e.t_end,
          color: this.colorOf.get(e.participant_id) ?? "#999999",
          participantId: e.participant_id,
          label: e.label,
        });
      }
    }
    for (const { participant_id, segments } of speech) {
      for (let i = 0; i < segments.length; i++) {
        const s = segments[i];
        audio.push({
          eventId: `speech-${participant_id}-${i}`,
          t0: s.t_start,
          t1: s.t_end,
          color: this.colorOf.get(participant_id) ?? "#999999",
          participantId: participant_id,
          label: s.transcript,
        });
      }
    }
    audio.sort((a, b) => a.t0 - b.t0);
    this.lines.push({ kind: "audio", segments: audio });
  }

  /** Kinds that actually carry segments (the populated lines). */
  populatedKinds(): string[] {
    return this.lines.filter((l) => l.segments.length > 0).map((l) => l.kind);
  }

  timeToX(t: number, width: number): number {
    return this.duration > 0 ? (t / this.duration) * width : 0;
  }

  xToTime(x: number, width: number): number {
    const u = width > 0 ? Math.min(1, Math.max(0, x / width)) : 0;
    return Math.round(u * this.duration);
  }

  hitTest(x: number, lineIndex: number, width: number): TimelineSegment | null {
    const line = this.lines[lineIndex];
    if (!line) return null;
    const t = this.xToTime(x, width);
    for (const seg of line.segments) {
      if (seg.t0 <= t && t <= Math.max(seg.t1, seg.t0 + 1)) {
        return seg;
      }
    }
    return null;
  }

  regionFromDrag(x0: number, x1: number, width: number): RegionSelection {
    const a = this.xToTime(Math.min(x0, x1), width);
    const b = this.xToTime(Math.max(x0, x1), width);
    return { t0: a, t1: b };
  }

  render(ctx: CanvasRenderingContext2D, width: number, height: number, playheadT: number): void {
    ctx.clearRect(0, 0, width, height);
    const rows = this.lines.length;
    const rowH = height / (rows + 0.5);
    ctx.font = "10px sans-serif";
    this.lines.forEach((line, i) => {
      const y = (i + 0.25) * rowH;
      ctx.fillStyle = "#666";
      ctx.fillText(line.kind, 4, y + rowH * 0.45);
      for (const seg of line.segments) {
        const x0 = this.timeToX(seg.t0, width);
        const x1 = Math.max(x0 + 2, this.timeToX(seg.t1, width));
        ctx.fillStyle = seg.color;
        ctx.globalAlpha = 0.85;
        ctx.fillRect(x0, y, x1 - x0, rowH * 0.7);
        ctx.globalAlpha = 1.0;
      }
    });
    const px = this.timeToX(playheadT, width);
    ctx.strokeStyle = "#e33";
    ctx.beginPath();
    ctx.moveTo(px, 0);
    ctx.lineTo(px, height);
    ctx.stroke();
  }
}
