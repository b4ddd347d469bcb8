import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { SceneModel } from "../src/sceneModel.js";
import type { HelloMsg, ProximityMsg, SnapshotMsg, Vec3 } from "../src/types.js";

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8")) as T;
}

const HELLO: HelloMsg = {
  type: "hello",
  version: 1,
  driven: "cube",
  entities: [
    { id: "cube", kind: "solid", shapes: [[[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]] as Vec3[]] },
    { id: "wall", kind: "solid", shapes: [[[0, 0, 0]] as Vec3[]] },
  ],
  device: {
    workspace_extents: [0.16, 0.13, 0.13],
    position_resolution: 0.00002,
    peak_force: 6.4,
    continuous_force: 1.4,
    haptic_rate: 1000,
  },
  modes: { scale: "medium", frame: "world", pivot: "self_origin",
           force_class: "penetration_proportional", viewport_extent: null, recording: false },
};

describe("scene model", () => {
  it("tracks poses from snapshots", () => {
    const scene = new SceneModel();
    scene.loadHello(HELLO);
    expect(scene.driven).toBe("cube");
    const snap: SnapshotMsg = {
      type: "snapshot", t: 0.5,
      poses: [{ id: "cube", pose: [2, 3, 4, 1, 0, 0, 0] }],
    };
    scene.applySnapshot(snap);
    const verts = scene.worldVertices("cube");
    expect(verts[0]).toEqual([2, 3, 4]);
    expect(verts[1]).toEqual([3, 3, 4]);
  });

  it("applies quaternion rotation to world vertices", () => {
    const scene = new SceneModel();
    scene.loadHello(HELLO);
    // 90 degrees about +Z: (1,0,0) -> (0,1,0)
    const s = Math.SQRT1_2;
    scene.applySnapshot({ type: "snapshot", t: 0, poses: [{ id: "cube", pose: [0, 0, 0, s, 0, 0, s] }] });
    const verts = scene.worldVertices("cube");
    expect(verts[1][0]).toBeCloseTo(0, 12);
    expect(verts[1][1]).toBeCloseTo(1, 12);
  });

  it("flags colliding entities from the kernel readout only", () => {
    const scene = new SceneModel();
    scene.loadHello(HELLO);
    const prox = fixture<ProximityMsg>("proximity_readout.json");
    scene.applyProximity(prox);
    expect(scene.collidingIds().size).toBe(0);          // fixture is in-zone, not colliding
    scene.applyProximity({ ...prox, colliding: true, distance: 0 });
    expect(scene.collidingIds()).toEqual(new Set(prox.pair));
  });

  it("real kernel snapshot applies cleanly", () => {
    const scene = new SceneModel();
    scene.loadHello(HELLO);
    const snap = fixture<SnapshotMsg>("snapshot.json");
    const cube = snap.poses.find((p) => p.id === "cube");
    expect(cube).toBeDefined();
    scene.applySnapshot({ ...snap, poses: snap.poses.filter((p) => scene.entities.has(p.id)) });
    expect(scene.lastSnapshotT).toBe(snap.t);
  });
});
