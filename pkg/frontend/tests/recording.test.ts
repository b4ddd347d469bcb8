import { describe, expect, it } from "vitest";

import { armCommand, captureCommand, disarmCommand, trajectoryFileName } from "../src/recording.js";
import type { TrajectoryMsg } from "../src/types.js";

describe("record commands", () => {
  it("builds arm commands with interval validation", () => {
    expect(armCommand("auto_distance", 0.1)).toEqual(
      { type: "record", action: "arm", mode: "auto_distance", value: 0.1 });
    expect(armCommand("manual")).toEqual(
      { type: "record", action: "arm", mode: "manual", value: undefined });
    expect(() => armCommand("auto_time", 0)).toThrow(/interval/);
    expect(() => armCommand("auto_distance")).toThrow(/interval/);
  });

  it("disarm and capture are plain actions", () => {
    expect(disarmCommand()).toEqual({ type: "record", action: "disarm" });
    expect(captureCommand()).toEqual({ type: "record", action: "capture" });
  });

  it("names downloads after the recording mode", () => {
    const msg: TrajectoryMsg = { type: "trajectory", mode: "auto_distance", value: 0.1, frames: [] };
    expect(trajectoryFileName(msg)).toBe("trajectory_auto_distance_0.1.jsonl");
    expect(trajectoryFileName({ ...msg, mode: "manual", value: null }))
      .toBe("trajectory_manual.jsonl");
  });
});
