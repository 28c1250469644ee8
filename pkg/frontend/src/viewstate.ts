/** Per-analyst 3D view state: camera presets, selection, ego slice plane. */

export type SliceAxis = "x" | "y" | "z";

export interface CameraPose {
  position: [number, number, number];
  lookAt: [number, number, number];
}

export type PovPreset = "free" | "driver_seat" | "passenger_seat" | "hood" | "isometric";

/** Vehicle-local camera poses; the scene transforms them by the ego pose. */
export const POV_PRESETS: Record<Exclude<PovPreset, "free">, CameraPose> = {
  driver_seat: { position: [0.95, 0.35, 1.15], lookAt: [4.0, 0.35, 1.0] },
  passenger_seat: { position: [0.95, -0.35, 1.15], lookAt: [4.0, -0.35, 1.0] },
  hood: { position: [3.6, 0.0, 1.4], lookAt: [0.8, 0.0, 1.0] },
  isometric: { position: [-8.0, -8.0, 9.0], lookAt: [1.0, 0.0, 0.8] },
};

export interface SlicePlane {
  axis: SliceAxis;
  offset: number;
}

export class ViewState {
  camera: CameraPose = { position: [-8, -8, 9], lookAt: [0, 0, 0] };
  preset: PovPreset = "free";
  selectedObject: string | null = null;
  slice: SlicePlane | null = null;

  applyPreset(preset: PovPreset): void {
    this.preset = preset;
    if (preset !== "free") {
      const pose = POV_PRESETS[preset];
      this.camera = { position: [...pose.position], lookAt: [...pose.lookAt] };
    }
  }

  setSlice(axis: SliceAxis, offset: number): void {
    if (axis !== "x" && axis !== "y" && axis !== "z") {
      throw new Error(`slice axis must be x, y, or z, got ${String(axis)}`);
    }
    this.slice = { axis, offset };
  }

  clearSlice(): void {
    this.slice = null;
  }

  select(objectId: string | null): void {
    this.selectedObject = objectId;
  }
}
