/** Video panel: plays referenced media aligned by t_offset; degrades to a
 * placeholder when the session has no media. */

import type { MediaRef } from "./protocol.js";

export class VideoPanel {
  private video: HTMLVideoElement | null = null;
  private media: MediaRef | null = null;

  constructor(private readonly el: HTMLElement, private readonly mediaBase: string) {}

  setMedia(media: MediaRef[]): void {
    this.el.innerHTML = "";
    const candidate = media.find((m) => m.kind === "video") ?? null;
    this.media = candidate;
    if (!candidate) {
      const note = document.createElement("div");
      note.className = "placeholder";
      note.textContent = "no media referenced by this session";
      this.el.append(note);
      this.video = null;
      return;
    }
    const video = document.createElement("video");
    video.src = `${this.mediaBase}/${candidate.path}`;
    video.muted = true;
    video.controls = false;
    video.addEventListener("error", () => {
      this.el.innerHTML = "";
      const note = document.createElement("div");
      note.className = "placeholder";
      note.textContent = `media unavailable: ${candidate.path}`;
      this.el.append(note);
      this.video = null;
    });
    this.el.append(video);
    this.video = video;
  }

  /** Align the video with shared playback time. */
  sync(tMs: number, playing: boolean): void {
    if (!this.video || !this.media) return;
    const target = (tMs - this.media.t_offset) / 1000;
    if (Math.abs(this.video.currentTime - target) > 0.25) {
      this.video.currentTime = Math.max(0, target);
    }
    if (playing && this.video.paused) {
      void this.video.play().catch(() => undefined);
    } else if (!playing && !this.video.paused) {
      this.video.pause();
    }
  }
}
