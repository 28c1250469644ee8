/** three.js scene view.
 *
 * Builds the scene graph (meshes, heatmap textures, ego group, avatars,
 * trajectories, markers, ghosts, presence) from config + snapshots. The
 * WebGL renderer itself is attached in main.ts so this module stays
 * constructible headlessly.
 */

import * as THREE from "three";

import type { ConfigDocument, MeshAsset, PathEventLayout, Participant, Snapshot } from "./protocol.js";
import { avatarFigure, boundingBoxProxy, eventMarkers } from "./scenemodel.js";
import type { EventMarker } from "./scenemodel.js";
import type { SlicePlane } from "./viewstate.js";

const ROLE_COLORS: Record<MeshAsset["role"], number> = {
  interior: 0x8a8f98,
  ego_exterior: 0x4a6fa5,
  building: 0xb8b2a7,
  road_user: 0xcc5544,
  ground: 0x667766,
};

function meshToGeometry(mesh: MeshAsset): THREE.BufferGeometry {
  const geometry = new THREE.BufferGeometry();
  const positions = new Float32Array(mesh.triangles.length * 9);
  const uvs = mesh.uv ? new Float32Array(mesh.triangles.length * 6) : null;
  let o = 0;
  let uo = 0;
  for (const [a, b, c] of mesh.triangles) {
    for (const idx of [a, b, c]) {
      const v = mesh.vertices[idx];
      positions[o++] = v[0];
      positions[o++] = v[1];
      positions[o++] = v[2];
      if (uvs && mesh.uv) {
        uvs[uo++] = mesh.uv[idx][0];
        uvs[uo++] = mesh.uv[idx][1];
      }
    }
  }
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  if (uvs) {
    geometry.setAttribute("uv", new THREE.BufferAttribute(uvs, 2));
  }
  geometry.computeVertexNormals();
  return geometry;
}

export class SceneView {
  readonly scene = new THREE.Scene();
  readonly egoGroup = new THREE.Group(); // travels with the vehicle
  readonly markerGroup = new THREE.Group();
  readonly avatarGroup = new THREE.Group();
  readonly trajectoryGroup = new THREE.Group();
  readonly ghostGroup = new THREE.Group();
  readonly presenceGroup = new THREE.Group();
  readonly roadUserGroup = new THREE.Group();

  private meshObjects = new Map<string, THREE.Mesh>();
  private vehicleMaterials: THREE.Material[] = [];
  private markerObjects: THREE.Mesh[] = [];

  constructor(private readonly participants: Participant[]) {
    this.scene.up.set(0, 0, 1);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 0.8);
    sun.position.set(200, 100, 300);
    this.scene.add(sun);
    this.scene.add(this.egoGroup);
    this.scene.add(this.markerGroup);
    this.scene.add(this.ghostGroup);
    this.scene.add(this.presenceGroup);
    this.scene.add(this.roadUserGroup);
    this.egoGroup.add(this.avatarGroup);
    this.egoGroup.add(this.trajectoryGroup);
  }

  /** Build static geometry; returns mesh ids that needed a proxy box. */
  buildScene(config: ConfigDocument): string[] {
    const proxied: string[] = [];
    for (const mesh of config.scene?.meshes ?? []) {
      let object: THREE.Mesh;
      const material = new THREE.MeshLambertMaterial({
        color: ROLE_COLORS[mesh.role] ?? 0x888888,
        side: THREE.DoubleSide,
        transparent: mesh.role === "interior" || mesh.role === "ego_exterior",
        opacity: mesh.role === "ego_exterior" ? 0.45 : 0.95,
      });
      if (!mesh.triangles.length) {
        const proxy = boundingBoxProxy(mesh);
        const geometry = new THREE.BoxGeometry(...proxy.size);
        object = new THREE.Mesh(geometry, material);
        object.position.set(...proxy.center);
        proxied.push(mesh.id);
      } else {
        object = new THREE.Mesh(meshToGeometry(mesh), material);
      }
      object.name = mesh.id;
      this.meshObjects.set(mesh.id, object);
      if (mesh.role === "interior" || mesh.role === "ego_exterior") {
        this.vehicleMaterials.push(material);
        this.egoGroup.add(object);
      } else {
        this.scene.add(object);
      }
    }
    return proxied;
  }

  /** Bind a heatmap PNG onto its target mesh via the mesh UVs. */
  applyHeatmapTexture(meshId: string, texture: THREE.Texture): void {
    const object = this.meshObjects.get(meshId);
    if (!object) return;
    const material = object.material as THREE.MeshLambertMaterial;
    texture.flipY = false; // texel row 0 is v=0
    material.map = texture;
    material.needsUpdate = true;
  }

  setLayerVisible(meshId: string, visible: boolean): void {
    const object = this.meshObjects.get(meshId);
    if (object) {
      const material = object.material as THREE.MeshLambertMaterial;
      if (material.map) {
        material.map = visible ? material.map : null;
      }
      material.needsUpdate = true;
    }
  }

  /** Slice the virtual ego vehicle along one axis to see inside. */
  setSlicePlane(slice: SlicePlane | null): void {
    const planes: THREE.Plane[] = [];
    if (slice) {
      const normal =
        slice.axis === "x"
          ? new THREE.Vector3(-1, 0, 0)
          : slice.axis === "y"
            ? new THREE.Vector3(0, -1, 0)
            : new THREE.Vector3(0, 0, -1);
      planes.push(new THREE.Plane(normal, slice.offset));
    }
    for (const material of this.vehicleMaterials) {
      material.clippingPlanes = planes;
      material.needsUpdate = true;
    }
  }

  /** Move the ego group per the snapshot pose and redraw dynamic actors. */
  applySnapshot(snapshot: Snapshot, visibility: Record<string, boolean>): void {
    if (snapshot.ego_pose) {
      const [x, y, z] = snapshot.ego_pose.position;
      this.egoGroup.position.set(x, y, z);
      // heading is compass degrees (0 = +y); vehicle x is forward
      this.egoGroup.rotation.set(0, 0, Math.PI / 2 - (snapshot.ego_pose.heading * Math.PI) / 180);
    }

    this.avatarGroup.clear();
    if (visibility["avatars"] !== false) {
      for (const pose of snapshot.avatars) {
        const figure = avatarFigure(pose, this.participants);
        const color = new THREE.Color(figure.color);
        const group = new THREE.Group();
        group.name = `avatar:${figure.participantId}`;
        const jointMaterial = new THREE.MeshLambertMaterial({ color, transparent: true, opacity: 0.7 });
        for (const p of figure.jointPositions) {
          const joint = new THREE.Mesh(new THREE.SphereGeometry(0.05, 8, 8), jointMaterial);
          joint.position.set(...p);
          group.add(joint);
        }
        for (const bone of figure.bones) {
          const pts = [new THREE.Vector3(...bone.from), new THREE.Vector3(...bone.to)];
          const line = new THREE.Line(
            new THREE.BufferGeometry().setFromPoints(pts),
            new THREE.LineBasicMaterial({ color }),
          );
          group.add(line);
        }
        this.avatarGroup.add(group);
      }
    }

    this.roadUserGroup.clear();
    for (const [objectId, cls, position] of snapshot.road_users) {
      const color = cls === "pedestrian" ? 0xffaa00 : cls === "cyclist" ? 0xff4444 : 0xdddd22;
      const box = new THREE.Mesh(
        new THREE.BoxGeometry(cls === "car" ? 4 : 0.8, cls === "car" ? 1.8 : 0.8, 1.6),
        new THREE.MeshLambertMaterial({ color }),
      );
      box.position.set(position[0], position[1], position[2] + 0.8);
      box.name = `road_user:${objectId}`;
      this.roadUserGroup.add(box);
    }
  }

  setTrajectories(lines: { color: string; points: [number, number, number][] }[], visible: boolean): void {
    this.trajectoryGroup.clear();
    if (!visible) return;
    for (const line of lines) {
      const pts = line.points.map((p) => new THREE.Vector3(...p));
      this.trajectoryGroup.add(
        new THREE.Line(
          new THREE.BufferGeometry().setFromPoints(pts),
          new THREE.LineBasicMaterial({ color: new THREE.Color(line.color) }),
        ),
      );
    }
  }

  setEventMarkers(layout: PathEventLayout, events: Parameters<typeof eventMarkers>[1], visible: boolean): EventMarker[] {
    this.markerGroup.clear();
    this.markerObjects = [];
    if (!visible) return [];
    const markers = eventMarkers(layout, events, this.participants);
    for (const marker of markers) {
      const cone = new THREE.Mesh(
        new THREE.ConeGeometry(0.3, 0.6, 12),
        new THREE.MeshLambertMaterial({ color: new THREE.Color(marker.color) }),
      );
      cone.position.set(...marker.position);
      cone.rotation.x = Math.PI / 2; // point down at the path in z-up space
      cone.name = `event:${marker.eventId}`;
      this.markerGroup.add(cone);
      this.markerObjects.push(cone);
    }
    return markers;
  }

  setGhosts(ghosts: { id: string; label: string; position: [number, number, number] | null }[]): void {
    this.ghostGroup.clear();
    for (const ghost of ghosts) {
      if (!ghost.position) continue;
      const body = new THREE.Mesh(
        new THREE.BoxGeometry(4.2, 1.9, 1.4),
        new THREE.MeshLambertMaterial({ color: 0x99ccff, transparent: true, opacity: 0.35 }),
      );
      body.position.set(...ghost.position);
      body.name = `ghost:${ghost.id}`;
      this.ghostGroup.add(body);
    }
  }

  setPresences(markers: { analystId: string; position: [number, number, number] | null }[]): void {
    this.presenceGroup.clear();
    for (const p of markers) {
      if (!p.position) continue;
      const head = new THREE.Mesh(
        new THREE.SphereGeometry(0.18, 10, 10),
        new THREE.MeshLambertMaterial({ color: 0xffffff }),
      );
      head.position.set(...p.position);
      head.name = `analyst:${p.analystId}`;
      this.presenceGroup.add(head);
    }
  }

  /** Picking: returns the named object under the pointer, if any. */
  pick(raycaster: THREE.Raycaster): string | null {
    const hits = raycaster.intersectObjects(this.scene.children, true);
    for (const hit of hits) {
      let node: THREE.Object3D | null = hit.object;
      while (node) {
        if (node.name) return node.name;
        node = node.parent;
      }
    }
    return null;
  }
}
