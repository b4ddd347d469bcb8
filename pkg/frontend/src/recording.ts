// Trajectory recording controls and the downloadable file.
//
// Arm/disarm commands go to the kernel; the kernel records committed poses
// and returns the finished trajectory, which is turned into a JSON-lines
// file here, one frame per line, matching the kernel's own export format.

import type { RecordCommand, TrajectoryMsg } from "./types.js";

export type RecordMode = "manual" | "auto_time" | "auto_distance";

export function armCommand(mode: RecordMode, value?: number): RecordCommand {
  if (mode !== "manual" && !(value && value > 0)) {
    throw new Error(`${mode} recording needs a positive interval`);
  }
  return { type: "record", action: "arm", mode, value };
}

export function disarmCommand(): RecordCommand {
  return { type: "record", action: "disarm" };
}

export function captureCommand(): RecordCommand {
  return { type: "record", action: "capture" };
}

/** JSON-lines content of a trajectory download (kernel frames verbatim). */
export function trajectoryFileContents(msg: TrajectoryMsg): string {
  const lines = msg.frames.map((f) =>
    JSON.stringify({
      t: f.t,
      entity_id: f.entity_id,
      position: f.position,
      quaternion: f.quaternion,
    }),
  );
  return lines.join("\n") + (lines.length ? "\n" : "");
}

export function trajectoryFileName(msg: TrajectoryMsg): string {
  const suffix = msg.value != null ? `_${msg.mode}_${msg.value}` : `_${msg.mode}`;
  return `trajectory${suffix}.jsonl`;
}

export function frameCount(contents: string): number {
  return contents.split("\n").filter((line) => line.trim().length > 0).length;
}
