/** Inspector and overview panels (plain DOM). */

import type { ConfigDocument, EventRecord, Snapshot } from "./protocol.js";
import type { SessionClient } from "./client.js";

export interface InspectorRow {
  key: string;
  value: string;
}

/** Table rows for a selected scene object. */
export function inspectRows(
  objectId: string,
  config: ConfigDocument,
  snapshot: Snapshot | null,
  events: EventRecord[],
): InspectorRow[] {
  const rows: InspectorRow[] = [{ key: "object", value: objectId }];
  const [prefix, id] = objectId.includes(":") ? objectId.split(":", 2) : ["mesh", objectId];
  if (prefix === "avatar") {
    const participant = config.participants.find((p) => p.id === id);
    rows.push({ key: "participant", value: id });
    for (const [k, v] of Object.entries(participant?.demographics ?? {})) {
      rows.push({ key: k, value: v });
    }
  } else if (prefix === "event") {
    const event = events.find((e) => e.id === id);
    if (event) {
      rows.push(
        { key: "kind", value: event.kind },
        { key: "label", value: event.label },
        { key: "span", value: `${event.t_start}..${event.t_end} ms` },
        { key: "participant", value: event.participant_id },
        { key: "confidence", value: event.confidence.toFixed(2) },
        { key: "source", value: event.source },
      );
      for (const [k, v] of Object.entries(event.attrs)) {
        rows.push({ key: `attr:${k}`, value: v });
      }
    }
  } else if (prefix === "mesh") {
    const mesh = config.scene?.meshes.find((m) => m.id === id);
    if (mesh) {
      rows.push(
        { key: "role", value: mesh.role },
        { key: "triangles", value: String(mesh.triangles.length) },
      );
    }
    if (id === config.scene?.ego_vehicle && snapshot?.ego_pose) {
      rows.push({ key: "heading", value: `${snapshot.ego_pose.heading.toFixed(1)} deg` });
    }
  } else if (prefix === "road_user" && snapshot) {
    const entry = snapshot.road_users.find(([oid]) => oid === id);
    if (entry) {
      rows.push({ key: "class", value: entry[1] }, { key: "position", value: entry[2].map((c) => c.toFixed(1)).join(", ") });
    }
  }
  return rows;
}

export function renderInspector(el: HTMLElement, rows: InspectorRow[]): void {
  el.innerHTML = "";
  const table = document.createElement("table");
  for (const row of rows) {
    const tr = document.createElement("tr");
    const k = document.createElement("td");
    k.textContent = row.key;
    const v = document.createElement("td");
    v.textContent = row.value;
    tr.append(k, v);
    table.append(tr);
  }
  el.append(table);
}

export interface OverviewToggle {
  key: string;
  label: string;
}

export function overviewToggles(heatmapNames: string[]): OverviewToggle[] {
  const toggles: OverviewToggle[] = [
    { key: "avatars", label: "avatars" },
    { key: "trajectories", label: "trajectories" },
    { key: "events", label: "driving-path events" },
    { key: "annotations", label: "annotations" },
  ];
  for (const name of heatmapNames) {
    toggles.push({ key: `heatmap:${name}`, label: `heatmap ${name}` });
  }
  return toggles;
}

export function renderOverview(
  el: HTMLElement,
  toggles: OverviewToggle[],
  visibility: Record<string, boolean>,
  client: SessionClient,
): void {
  el.innerHTML = "";
  for (const toggle of toggles) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = visibility[toggle.key] !== false;
    // strict echo discipline: the checkbox re-renders from server state only
    box.addEventListener("change", () => {
      client.setVisibility(toggle.key, box.checked);
      box.checked = visibility[toggle.key] !== false;
    });
    label.append(box, document.createTextNode(` ${toggle.label}`));
    el.append(label, document.createElement("br"));
  }
}
