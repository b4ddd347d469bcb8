// Canvas scene painter: grid, entities at snapshot poses, the closest-pair
// segment with its distance label, and the force vector at the stylus proxy.

import { Camera, cameraBasis, project } from "./projection.js";
import { SceneModel } from "./sceneModel.js";
import { distanceLabel } from "./readouts.js";
import type { ForceMsg, Vec3 } from "./types.js";

const COLORS: Record<string, string> = {
  solid: "#7aa2f7",
  robot_link: "#9ece6a",
  mannequin_segment: "#e0af68",
};

export function drawScene(ctx: CanvasRenderingContext2D, cam: Camera,
                          scene: SceneModel, force: ForceMsg | null,
                          width: number, height: number): void {
  const basis = cameraBasis(cam);
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#14141c";
  ctx.fillRect(0, 0, width, height);

  drawGrid(ctx, cam, basis, width, height);

  const colliding = scene.collidingIds();
  for (const entity of scene.entities.values()) {
    const pts: [number, number][] = [];
    for (const v of scene.worldVertices(entity.id)) {
      const p = project(cam, basis, v, width, height);
      if (p) pts.push(p);
    }
    if (pts.length < 1) continue;
    const hull = convexHull2(pts);
    const isDriven = entity.id === scene.driven;
    const isHit = colliding.has(entity.id);
    ctx.beginPath();
    hull.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
    ctx.closePath();
    ctx.fillStyle = isHit ? "rgba(247, 118, 142, 0.45)"
      : isDriven ? "rgba(122, 162, 247, 0.35)" : "rgba(150, 150, 170, 0.18)";
    ctx.fill();
    ctx.strokeStyle = isHit ? "#f7768e" : COLORS[entity.kind] ?? "#888";
    ctx.lineWidth = isDriven ? 2.5 : 1.2;
    ctx.stroke();
    if (hull.length) {
      ctx.fillStyle = "#c0caf5";
      ctx.font = "11px system-ui, sans-serif";
      ctx.fillText(entity.id + (isHit ? " ⚠" : ""), hull[0][0] + 4, hull[0][1] - 4);
    }
  }

  drawProximity(ctx, cam, basis, scene, width, height);
  drawForce(ctx, cam, basis, scene, force, width, height);
}

function drawGrid(ctx: CanvasRenderingContext2D, cam: Camera, basis: ReturnType<typeof cameraBasis>,
                  width: number, height: number): void {
  ctx.strokeStyle = "rgba(100, 110, 140, 0.25)";
  ctx.lineWidth = 1;
  const step = 0.1, extent = 1.0;
  for (let i = -10; i <= 10; i++) {
    const a = project(cam, basis, [i * step, -extent, 0], width, height);
    const b = project(cam, basis, [i * step, extent, 0], width, height);
    const c = project(cam, basis, [-extent, i * step, 0], width, height);
    const d = project(cam, basis, [extent, i * step, 0], width, height);
    if (a && b) line(ctx, a, b);
    if (c && d) line(ctx, c, d);
  }
}

function drawProximity(ctx: CanvasRenderingContext2D, cam: Camera, basis: ReturnType<typeof cameraBasis>,
                       scene: SceneModel, width: number, height: number): void {
  const prox = scene.lastProximity;
  if (!prox || prox.colliding) return;
  const a = project(cam, basis, prox.point_a, width, height);
  const b = project(cam, basis, prox.point_b, width, height);
  if (!a || !b) return;
  ctx.save();
  ctx.strokeStyle = "#e0af68";
  ctx.setLineDash([4, 3]);
  line(ctx, a, b);
  ctx.restore();
  ctx.fillStyle = "#e0af68";
  ctx.font = "12px system-ui, sans-serif";
  ctx.fillText(distanceLabel(prox), (a[0] + b[0]) / 2 + 6, (a[1] + b[1]) / 2 - 6);
}

function drawForce(ctx: CanvasRenderingContext2D, cam: Camera, basis: ReturnType<typeof cameraBasis>,
                   scene: SceneModel, force: ForceMsg | null,
                   width: number, height: number): void {
  if (!force || force.magnitude <= 0 || !scene.driven) return;
  const entity = scene.entities.get(scene.driven);
  if (!entity) return;
  const origin: Vec3 = [entity.pose[0], entity.pose[1], entity.pose[2]];
  const scale = 0.05; // meters of arrow per newton
  const tip: Vec3 = [
    origin[0] + force.vector[0] * scale,
    origin[1] + force.vector[1] * scale,
    origin[2] + force.vector[2] * scale,
  ];
  const a = project(cam, basis, origin, width, height);
  const b = project(cam, basis, tip, width, height);
  if (!a || !b) return;
  ctx.strokeStyle = force.clamped ? "#f7768e" : "#9ece6a";
  ctx.lineWidth = 2.5;
  line(ctx, a, b);
  ctx.beginPath();
  ctx.arc(b[0], b[1], 3, 0, 2 * Math.PI);
  ctx.fillStyle = ctx.strokeStyle;
  ctx.fill();
}

function line(ctx: CanvasRenderingContext2D, a: [number, number], b: [number, number]): void {
  ctx.beginPath();
  ctx.moveTo(a[0], a[1]);
  ctx.lineTo(b[0], b[1]);
  ctx.stroke();
}

/** Monotone-chain 2D convex hull of projected vertices. */
export function convexHull2(points: [number, number][]): [number, number][] {
  if (points.length <= 2) return points.slice();
  const pts = points.slice().sort((p, q) => p[0] - q[0] || p[1] - q[1]);
  const cross = (o: number[], a: number[], b: number[]) =>
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  const lower: [number, number][] = [];
  for (const p of pts) {
    while (lower.length >= 2 && cross(lower[lower.length - 2], lower[lower.length - 1], p) <= 0) lower.pop();
    lower.push(p);
  }
  const upper: [number, number][] = [];
  for (const p of pts.slice().reverse()) {
    while (upper.length >= 2 && cross(upper[upper.length - 2], upper[upper.length - 1], p) <= 0) upper.pop();
    upper.push(p);
  }
  return lower.slice(0, -1).concat(upper.slice(0, -1));
}
