// Scene state assembled from kernel messages: entity geometry arrives once
// in the hello, poses stream in with each snapshot.

import type { HelloMsg, Pose7, ProximityMsg, SnapshotMsg, Vec3 } from "./types.js";

export interface EntityState {
  id: string;
  kind: string;
  shapes: Vec3[][];       // local-frame vertex clouds
  pose: Pose7;            // px py pz qw qx qy qz
}

const IDENTITY: Pose7 = [0, 0, 0, 1, 0, 0, 0];

export class SceneModel {
  entities = new Map<string, EntityState>();
  driven: string | null = null;
  lastSnapshotT = 0;
  lastProximity: ProximityMsg | null = null;

  loadHello(msg: HelloMsg): void {
    this.entities.clear();
    for (const e of msg.entities) {
      this.entities.set(e.id, { id: e.id, kind: e.kind, shapes: e.shapes, pose: [...IDENTITY] as Pose7 });
    }
    this.driven = msg.driven;
  }

  applySnapshot(msg: SnapshotMsg): void {
    this.lastSnapshotT = msg.t;
    for (const { id, pose } of msg.poses) {
      const entity = this.entities.get(id);
      if (entity) entity.pose = pose;
    }
  }

  applyProximity(msg: ProximityMsg): void {
    this.lastProximity = msg;
  }

  /** World-frame vertices of one entity (quaternion rotate + translate). */
  worldVertices(id: string): Vec3[] {
    const entity = this.entities.get(id);
    if (!entity) return [];
    const [px, py, pz, w, x, y, z] = entity.pose;
    const out: Vec3[] = [];
    for (const cloud of entity.shapes) {
      for (const v of cloud) {
        out.push(rotateAndTranslate(v, w, x, y, z, px, py, pz));
      }
    }
    return out;
  }

  /** Ids of entities currently flagged as colliding by the kernel. */
  collidingIds(): Set<string> {
    const prox = this.lastProximity;
    if (!prox || !prox.colliding || !prox.pair) return new Set();
    return new Set(prox.pair);
  }
}

function rotateAndTranslate(v: Vec3, w: number, x: number, y: number, z: number,
                            px: number, py: number, pz: number): Vec3 {
  // q v q* expanded: v + 2 qv x (qv x v + w v)
  const [vx, vy, vz] = v;
  const tx = 2 * (y * vz - z * vy);
  const ty = 2 * (z * vx - x * vz);
  const tz = 2 * (x * vy - y * vx);
  return [
    vx + w * tx + (y * tz - z * ty) + px,
    vy + w * ty + (z * tx - x * tz) + py,
    vz + w * tz + (x * ty - y * tx) + pz,
  ];
}
