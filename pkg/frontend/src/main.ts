/** Console bootstrap: panels, server wiring, render loop.
 *
 * All mutations flow as proposals through the sync client; panels render
 * exclusively from server-echoed state, so a reconnect always converges
 * on the server snapshot.
 */

import * as THREE from "three";

import { HttpApi } from "./api.js";
import { SessionClient } from "./client.js";
import { inspectRows, overviewToggles, renderInspector, renderOverview } from "./inspector.js";
import { PanelLayout } from "./panels.js";
import type { ConfigDocument, EventRecord, PathEventLayout, Snapshot } from "./protocol.js";
import { SceneView } from "./scene3d.js";
import { ghostMarkers, presenceMarkers } from "./scenemodel.js";
import { StreamPanelModel } from "./streampanel.js";
import { TimelineModel } from "./timeline.js";
import { VideoPanel } from "./video.js";
import { ViewState } from "./viewstate.js";
import type { PovPreset } from "./viewstate.js";

interface ConsoleContext {
  api: HttpApi;
  sessionId: string;
  config: ConfigDocument;
  client: SessionClient;
  events: EventRecord[];
  layouts: { exploded: PathEventLayout; collapsed: PathEventLayout };
  heatmapNames: string[];
}

async function boot(): Promise<void> {
  const base = window.location.origin;
  const api = new HttpApi(base);
  const params = new URLSearchParams(window.location.search);
  let sessionId = params.get("session") ?? "";
  if (!sessionId) {
    const sessions = await api.listSessions();
    if (!sessions.length) {
      document.body.textContent = "no hosted sessions";
      return;
    }
    sessionId = sessions[0].id;
  }

  const config = await api.config(sessionId);
  const events = await api.events(sessionId);
  const layouts = {
    exploded: await api.layout(sessionId, true),
    collapsed: await api.layout(sessionId, false),
  };
  const heatmapNames = await api.heatmapNames(sessionId);

  const analystId = `analyst-${Math.random().toString(36).slice(2, 8)}`;
  const client = new SessionClient(api.syncUrl(sessionId), analystId, {
    onStatus: (status) => {
      const banner = document.getElementById("banner")!;
      banner.textContent = status === "live" ? "" : `connection: ${status}`;
      banner.style.display = status === "live" ? "none" : "block";
      document.body.classList.toggle("disconnected", status !== "live");
    },
  });

  const ctx: ConsoleContext = { api, sessionId, config, client, events, layouts, heatmapNames };
  buildDom(ctx);
  client.connect();
}

function buildDom(ctx: ConsoleContext): void {
  const layout = PanelLayout.load(window.localStorage);
  layout.save(window.localStorage);
  const grid = document.getElementById("grid")!;
  grid.innerHTML = "";
  const holders = new Map<string, HTMLElement>();
  for (const p of layout.panels) {
    const el = document.createElement("section");
    el.className = `panel panel-${p.kind}`;
    el.style.gridColumn = `${p.x + 1} / span ${p.w}`;
    el.style.gridRow = `${p.y + 1} / span ${p.h}`;
    const title = document.createElement("header");
    title.textContent = p.kind;
    el.append(title);
    const body = document.createElement("div");
    body.className = "panel-body";
    el.append(body);
    grid.append(el);
    holders.set(p.kind, body);
  }

  wireTimeline(ctx, holders.get("timeline")!);
  wireStreamPanel(ctx, holders.get("stream2d")!);
  wireScene(ctx, holders.get("scene3d")!, holders.get("inspector")!, holders.get("overview")!);
  wireVideo(ctx, holders.get("video")!);
}

function wireTimeline(ctx: ConsoleContext, el: HTMLElement): void {
  const canvas = document.createElement("canvas");
  el.append(canvas);
  const speech = ctx.config.sessions.map((s) => ({ participant_id: s.participant_id, segments: s.speech }));
  const duration = Math.max(...ctx.config.sessions.map((s) => s.duration), 1);
  const model = new TimelineModel(ctx.events, speech, ctx.config.participants, duration);

  const draw = () => {
    canvas.width = el.clientWidth;
    canvas.height = el.clientHeight - 4;
    model.render(canvas.getContext("2d")!, canvas.width, canvas.height, ctx.client.state.playback.t);
  };
  ctx.client["events"].onState = wrap(ctx.client["events"].onState, draw);
  new ResizeObserver(draw).observe(el);

  let dragStart: number | null = null;
  canvas.addEventListener("pointerdown", (ev) => {
    dragStart = ev.offsetX;
  });
  canvas.addEventListener("pointerup", (ev) => {
    if (dragStart === null) return;
    const dx = Math.abs(ev.offsetX - dragStart);
    if (dx < 4) {
      // scrub: propose shared playback; render happens on the echo
      ctx.client.scrubTo(model.xToTime(ev.offsetX, canvas.width));
    } else if (ev.shiftKey) {
      const region = model.regionFromDrag(dragStart, ev.offsetX, canvas.width);
      const text = window.prompt("label text", "") ?? "";
      if (text) {
        ctx.client.createLabel(`label-${Date.now()}`, text, region.t0);
      }
    }
    dragStart = null;
  });
  draw();
}

function wireStreamPanel(ctx: ConsoleContext, el: HTMLElement): void {
  const firstStream = ctx.config.sessions.flatMap((s) => s.streams.map((st) => st.name))[0];
  if (!firstStream) {
    el.textContent = "no streams";
    return;
  }
  const select = document.createElement("select");
  const names = [...new Set(ctx.config.sessions.flatMap((s) => s.streams.map((st) => st.name)))];
  for (const name of names) {
    const opt = document.createElement("option");
    opt.value = name;
    opt.textContent = name;
    select.append(opt);
  }
  const canvas = document.createElement("canvas");
  el.append(select, canvas);

  let window_: { from?: number; to?: number } = {};
  const refresh = async () => {
    const data = await ctx.api.stream(ctx.sessionId, select.value, { ...window_, maxPoints: 1000 });
    canvas.width = el.clientWidth;
    canvas.height = Math.max(80, el.clientHeight - 30);
    const model = new StreamPanelModel(data, canvas.width, canvas.height);
    model.render(canvas.getContext("2d")!);
    let dragStart: number | null = null;
    canvas.onpointerdown = (ev) => {
      dragStart = ev.offsetX;
    };
    canvas.onpointerup = (ev) => {
      if (dragStart === null) return;
      if (Math.abs(ev.offsetX - dragStart) > 8) {
        const req = model.zoomRequest(dragStart, ev.offsetX);
        window_ = { from: req.from, to: req.to };
        void refresh();
      } else if (ev.detail === 2) {
        window_ = {};
        void refresh();
      }
      dragStart = null;
    };
  };
  select.addEventListener("change", () => void refresh());
  void refresh();
}

function wireScene(ctx: ConsoleContext, el: HTMLElement, inspectorEl: HTMLElement, overviewEl: HTMLElement): void {
  const view = new SceneView(ctx.config.participants);
  const proxied = view.buildScene(ctx.config);
  if (proxied.length) {
    const badge = document.createElement("div");
    badge.className = "warn-badge";
    badge.textContent = `proxy geometry for: ${proxied.join(", ")}`;
    el.append(badge);
  }

  const canvas = document.createElement("canvas");
  el.append(canvas);
  const renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
  renderer.localClippingEnabled = true;
  const camera = new THREE.PerspectiveCamera(60, 1, 0.05, 5000);
  camera.up.set(0, 0, 1);
  const viewState = new ViewState();

  const loader = new THREE.TextureLoader();
  for (const name of ctx.heatmapNames) {
    const meshId = name.substring(name.indexOf("_") + 1);
    loader.load(ctx.api.heatmapPngUrl(ctx.sessionId, name), (texture) => view.applyHeatmapTexture(meshId, texture));
  }

  const controls = document.createElement("div");
  controls.className = "scene-controls";
  for (const preset of ["free", "driver_seat", "passenger_seat", "hood", "isometric"] as PovPreset[]) {
    const btn = document.createElement("button");
    btn.textContent = preset.replace("_", " ");
    btn.addEventListener("click", () => {
      viewState.applyPreset(preset);
    });
    controls.append(btn);
  }
  const explode = document.createElement("button");
  explode.textContent = "explode events";
  let exploded = true;
  explode.addEventListener("click", () => {
    exploded = !exploded;
    explode.textContent = exploded ? "collapse events" : "explode events";
    refreshMarkers();
  });
  controls.append(explode);
  const sliceSelect = document.createElement("select");
  for (const axis of ["none", "x", "y", "z"]) {
    const opt = document.createElement("option");
    opt.value = axis;
    opt.textContent = `slice ${axis}`;
    sliceSelect.append(opt);
  }
  sliceSelect.addEventListener("change", () => {
    if (sliceSelect.value === "none") {
      viewState.clearSlice();
      view.setSlicePlane(null);
    } else {
      viewState.setSlice(sliceSelect.value as "x" | "y" | "z", 0.9);
      view.setSlicePlane(viewState.slice);
    }
  });
  controls.append(sliceSelect);
  el.append(controls);

  const refreshMarkers = () => {
    const layout = exploded ? ctx.layouts.exploded : ctx.layouts.collapsed;
    view.setEventMarkers(layout, ctx.events, ctx.client.state.visibility["events"] !== false);
  };
  refreshMarkers();

  let snapshot: Snapshot | null = null;
  let fetching = false;
  const pullSnapshot = async () => {
    if (fetching) return;
    fetching = true;
    try {
      snapshot = await ctx.api.snapshot(ctx.sessionId, ctx.client.state.playback.t);
      view.applySnapshot(snapshot, ctx.client.state.visibility);
    } finally {
      fetching = false;
    }
  };

  const raycaster = new THREE.Raycaster();
  canvas.addEventListener("click", (ev) => {
    const rect = canvas.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((ev.clientX - rect.left) / rect.width) * 2 - 1,
      -((ev.clientY - rect.top) / rect.height) * 2 + 1,
    );
    raycaster.setFromCamera(ndc, camera);
    const picked = view.pick(raycaster);
    if (!picked) return;
    viewState.select(picked);
    renderInspector(inspectorEl, inspectRows(picked, ctx.config, snapshot, ctx.events));
    if (picked.startsWith("ghost:")) {
      ctx.client.selectGhost(picked.slice("ghost:".length));
    }
  });

  const toggles = overviewToggles(ctx.heatmapNames);
  const redrawOverview = () =>
    renderOverview(overviewEl, toggles, ctx.client.state.visibility, ctx.client);
  redrawOverview();

  let lastT = -1;
  const frame = () => {
    const { playback, visibility, ghosts, presences } = ctx.client.state;
    if (playback.t !== lastT) {
      lastT = playback.t;
      void pullSnapshot();
    }
    view.setGhosts(ghostMarkers(ghosts));
    view.setPresences(presenceMarkers(presences, ctx.client.analystId));
    refreshMarkers();
    redrawOverview();
    const w = el.clientWidth;
    const h = Math.max(120, el.clientHeight - 30);
    renderer.setSize(w, h, false);
    camera.aspect = w / h;
    camera.updateProjectionMatrix();
    camera.position.set(...viewState.camera.position);
    camera.lookAt(new THREE.Vector3(...viewState.camera.lookAt));
    renderer.render(view.scene, camera);
    requestAnimationFrame(frame);
  };
  requestAnimationFrame(frame);
}

function wireVideo(ctx: ConsoleContext, el: HTMLElement): void {
  const panel = new VideoPanel(el, `${ctx.api.baseUrl}/media`);
  panel.setMedia(ctx.config.sessions[0]?.media ?? []);
  window.setInterval(() => {
    panel.sync(ctx.client.state.playback.t, ctx.client.state.playback.playing);
  }, 250);
}

function wrap<T extends (...args: never[]) => void>(prev: T | undefined, next: () => void): (...args: Parameters<T>) => void {
  return (...args) => {
    prev?.(...args);
    next();
  };
}

void boot();
