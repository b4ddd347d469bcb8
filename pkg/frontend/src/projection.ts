// Orbit camera and 3D -> canvas projection for the scene view.
//
// The camera orbits a target point at a distance; the projection is a simple
// perspective with the screen convention the kernel's mapping module expects:
// camera local +X looks at the scene (view direction), +Y is screen-up.

import type { Pose7, Vec3 } from "./types.js";

export interface Camera {
  target: Vec3;
  azimuth: number;    // rad, around world +Z
  elevation: number;  // rad above the horizontal plane
  distance: number;   // m from target
  fov: number;        // vertical field of view, rad
}

export function defaultCamera(): Camera {
  return { target: [0.1, 0, 0], azimuth: 2.6, elevation: 0.45, distance: 1.4, fov: 0.9 };
}

export interface Basis {
  eye: Vec3;
  view: Vec3;   // unit, toward the target (screen normal)
  up: Vec3;     // unit, screen up
  right: Vec3;  // unit, screen right
}

export function cameraBasis(cam: Camera): Basis {
  const ce = Math.cos(cam.elevation), se = Math.sin(cam.elevation);
  const ca = Math.cos(cam.azimuth), sa = Math.sin(cam.azimuth);
  const back: Vec3 = [ce * ca, ce * sa, se];          // target -> eye direction
  const eye: Vec3 = [
    cam.target[0] + cam.distance * back[0],
    cam.target[1] + cam.distance * back[1],
    cam.target[2] + cam.distance * back[2],
  ];
  const view: Vec3 = [-back[0], -back[1], -back[2]];
  // up = world +Z orthonormalized against the view direction
  const d = view[2];
  let up: Vec3 = [-d * view[0], -d * view[1], 1 - d * view[2]];
  const un = Math.hypot(...up) || 1;
  up = [up[0] / un, up[1] / un, up[2] / un];
  const right: Vec3 = [
    view[1] * up[2] - view[2] * up[1],
    view[2] * up[0] - view[0] * up[2],
    view[0] * up[1] - view[1] * up[0],
  ];
  return { eye, view, up, right };
}

/** Kernel-convention camera pose: local +X = view, +Y = up, +Z = view x up. */
export function cameraPose7(cam: Camera): Pose7 {
  const { eye, view, up } = cameraBasis(cam);
  const zAxis: Vec3 = [
    view[1] * up[2] - view[2] * up[1],
    view[2] * up[0] - view[0] * up[2],
    view[0] * up[1] - view[1] * up[0],
  ];
  const m = [
    [view[0], up[0], zAxis[0]],
    [view[1], up[1], zAxis[1]],
    [view[2], up[2], zAxis[2]],
  ];
  const q = matrixToQuat(m);
  return [eye[0], eye[1], eye[2], q[0], q[1], q[2], q[3]];
}

function matrixToQuat(m: number[][]): [number, number, number, number] {
  const tr = m[0][0] + m[1][1] + m[2][2];
  let w: number, x: number, y: number, z: number;
  if (tr > 0) {
    const s = Math.sqrt(tr + 1) * 2;
    w = s / 4; x = (m[2][1] - m[1][2]) / s; y = (m[0][2] - m[2][0]) / s; z = (m[1][0] - m[0][1]) / s;
  } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
    const s = Math.sqrt(1 + m[0][0] - m[1][1] - m[2][2]) * 2;
    w = (m[2][1] - m[1][2]) / s; x = s / 4; y = (m[0][1] + m[1][0]) / s; z = (m[0][2] + m[2][0]) / s;
  } else if (m[1][1] > m[2][2]) {
    const s = Math.sqrt(1 + m[1][1] - m[0][0] - m[2][2]) * 2;
    w = (m[0][2] - m[2][0]) / s; x = (m[0][1] + m[1][0]) / s; y = s / 4; z = (m[1][2] + m[2][1]) / s;
  } else {
    const s = Math.sqrt(1 + m[2][2] - m[0][0] - m[1][1]) * 2;
    w = (m[1][0] - m[0][1]) / s; x = (m[0][2] + m[2][0]) / s; y = (m[1][2] + m[2][1]) / s; z = s / 4;
  }
  const n = Math.hypot(w, x, y, z) || 1;
  return [w / n, x / n, y / n, z / n];
}

/** Project a world point to canvas pixels; null when behind the eye. */
export function project(cam: Camera, basis: Basis, p: Vec3,
                        width: number, height: number): [number, number] | null {
  const rel: Vec3 = [p[0] - basis.eye[0], p[1] - basis.eye[1], p[2] - basis.eye[2]];
  const depth = rel[0] * basis.view[0] + rel[1] * basis.view[1] + rel[2] * basis.view[2];
  if (depth < 1e-4) return null;
  const sx = rel[0] * basis.right[0] + rel[1] * basis.right[1] + rel[2] * basis.right[2];
  const sy = rel[0] * basis.up[0] + rel[1] * basis.up[1] + rel[2] * basis.up[2];
  const focal = (height / 2) / Math.tan(cam.fov / 2);
  return [width / 2 + (focal * sx) / depth, height / 2 - (focal * sy) / depth];
}

/** Scene extent currently spanned by the view: feeds screen-adaptive scale. */
export function viewportExtent(cam: Camera): number {
  return 2 * cam.distance * Math.tan(cam.fov / 2);
}
