// UI acceptance: every asserted number originates from a kernel-produced
// fixture (frontend/tests/fixtures, regenerated by scripts/make_fixtures.py),
// so the single-source-of-truth rule is checked against real kernel output.

import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import { distanceLabel, parseDistanceLabel } from "../src/readouts.js";
import { frameCount, trajectoryFileContents } from "../src/recording.js";
import { pointerToDevice, withinBox, PointerSample } from "../src/mouseStylus.js";
import type { ProximityMsg, TrajectoryMsg, Vec3 } from "../src/types.js";

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(new URL(`./fixtures/${name}`, import.meta.url), "utf-8")) as T;
}

describe("distance label equals the kernel readout", () => {
  it("renders exactly the kernel-reported distance for the fixture scene", () => {
    const msg = fixture<ProximityMsg>("proximity_readout.json");
    const label = distanceLabel(msg);
    // the displayed number is the kernel's value (to label precision), not a
    // recomputation: parsing the label recovers the kernel distance
    expect(parseDistanceLabel(label)).toBeCloseTo(msg.distance, 6);
    expect(label).toBe(`${(msg.distance * 1000).toFixed(3)} mm`);
  });

  it("shows contact when the kernel reports a collision", () => {
    const msg = fixture<ProximityMsg>("proximity_readout.json");
    const colliding = { ...msg, colliding: true, distance: 0 };
    expect(distanceLabel(colliding)).toBe("contact");
  });
});

describe("mouse stylus stays inside the workspace box", () => {
  const box = { extents: [0.16, 0.13, 0.13] as Vec3 };

  it("holds across a scripted pointer sweep incl. off-canvas and wheel abuse", () => {
    const sweep: PointerSample[] = [];
    for (let i = 0; i <= 400; i++) {
      sweep.push({
        canvasX: -200 + i * 4,            // runs off both canvas edges
        canvasY: 900 - i * 5,
        width: 800,
        height: 600,
        wheelSteps: Math.round(-120 + i * 0.8),  // far past the box in x
        button: i % 3 === 0,
      });
    }
    for (const sample of sweep) {
      const position = pointerToDevice(sample, box);
      expect(withinBox(position, box)).toBe(true);
    }
  });

  it("spans the full lateral range across the canvas width", () => {
    const at = (x: number): PointerSample =>
      ({ canvasX: x, canvasY: 300, width: 800, height: 600, wheelSteps: 0, button: false });
    expect(pointerToDevice(at(0), box)[2]).toBeCloseTo(-0.065, 12);
    expect(pointerToDevice(at(800), box)[2]).toBeCloseTo(0.065, 12);
    expect(pointerToDevice(at(400), box)[2]).toBeCloseTo(0, 12);
  });
});

describe("trajectory download", () => {
  it("a kernel-recorded 1 m AutoDistance(0.1) drag downloads 11 frames", () => {
    const msg = fixture<TrajectoryMsg>("trajectory_1m.json");
    expect(msg.mode).toBe("auto_distance");
    expect(msg.value).toBe(0.1);
    const contents = trajectoryFileContents(msg);
    expect(frameCount(contents)).toBe(11);
    // frames are the kernel's poses verbatim, one JSON object per line
    const lines = contents.trim().split("\n").map((line) => JSON.parse(line));
    expect(lines).toHaveLength(11);
    lines.forEach((line, i) => {
      expect(line.position).toEqual(msg.frames[i].position);
      expect(line.quaternion).toEqual(msg.frames[i].quaternion);
    });
  });
});
