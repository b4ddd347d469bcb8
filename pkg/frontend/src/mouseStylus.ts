// Mouse-driven stylus substitute.
//
// The pointer moves the virtual stylus in the screen plane (device Y/Z per
// the kernel's screen-frame convention: canvas right = device +Y... no;
// device Y spans screen-up and device Z the lateral axis, device X is the
// view normal driven by the wheel). The primary button is the clutch.
// Output positions always lie inside the device workspace box.

import type { Quat, StylusInput, Vec3 } from "./types.js";

export interface WorkspaceBox {
  extents: Vec3;  // full widths, meters
}

export interface PointerSample {
  canvasX: number;   // px, 0..width
  canvasY: number;   // px, 0..height
  width: number;
  height: number;
  wheelSteps: number; // accumulated wheel detents
  button: boolean;
}

const WHEEL_STEP_M = 0.002; // 2 mm of view-normal travel per detent

/**
 * Map a pointer sample into the device workspace box.
 *
 * Canvas x spans device Z (lateral, screen plane), canvas y spans device Y
 * (screen-up, inverted so up is up), and the wheel walks device X (the view
 * normal). Every component is clamped to the box.
 */
export function pointerToDevice(sample: PointerSample, box: WorkspaceBox): Vec3 {
  const [ex, ey, ez] = box.extents;
  const hx = ex / 2, hy = ey / 2, hz = ez / 2;
  const u = sample.width > 0 ? sample.canvasX / sample.width : 0.5;   // 0..1
  const v = sample.height > 0 ? sample.canvasY / sample.height : 0.5; // 0..1
  const x = clamp(sample.wheelSteps * WHEEL_STEP_M, -hx, hx);
  const y = clamp((0.5 - v) * ey, -hy, hy);
  const z = clamp((u - 0.5) * ez, -hz, hz);
  return [x, y, z];
}

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

const IDENTITY_QUAT: Quat = [1, 0, 0, 0];

/** Assemble the stylus input message for one pointer sample. */
export function stylusInput(sample: PointerSample, box: WorkspaceBox,
                            orientation: Quat = IDENTITY_QUAT): StylusInput {
  return {
    type: "stylus",
    position: pointerToDevice(sample, box),
    quaternion: orientation,
    button: sample.button,
  };
}

/** True when a position sits inside the workspace box (inclusive). */
export function withinBox(position: Vec3, box: WorkspaceBox): boolean {
  return position.every((c, i) => Math.abs(c) <= box.extents[i] / 2 + 1e-12);
}

/** Arcball-style orientation from a modifier-drag, for rotating entities. */
export function dragToOrientation(dxPx: number, dyPx: number, width: number,
                                  height: number): Quat {
  const yaw = (dxPx / Math.max(1, width)) * Math.PI;      // drag across = yaw
  const pitch = (dyPx / Math.max(1, height)) * Math.PI;   // drag down = pitch
  const cy = Math.cos(yaw / 2), sy = Math.sin(yaw / 2);
  const cp = Math.cos(pitch / 2), sp = Math.sin(pitch / 2);
  // pitch about device Z composed onto yaw about device Y (screen up)
  return normalizeQuat([cp * cy, -sp * sy, cp * sy, sp * cy]);
}

function normalizeQuat(q: Quat): Quat {
  const n = Math.hypot(q[0], q[1], q[2], q[3]) || 1;
  return [q[0] / n, q[1] / n, q[2] / n, q[3] / n];
}
