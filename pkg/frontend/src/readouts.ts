// Readout formatting. The displayed numbers are the kernel's values,
// formatted but never recomputed.

import type { ForceMsg, ProximityMsg } from "./types.js";

/**
 * The distance label shown next to the closest-pair segment.
 *
 * The text renders exactly the kernel-reported distance (millimeters to three
 * decimals); parsing the label back recovers the value to the shown precision.
 */
export function distanceLabel(msg: ProximityMsg): string {
  if (msg.colliding) return "contact";
  return `${(msg.distance * 1000).toFixed(3)} mm`;
}

/** Numeric content of a distance label, in meters (NaN for "contact"). */
export function parseDistanceLabel(label: string): number {
  const m = label.match(/^(-?[\d.]+) mm$/);
  return m ? Number(m[1]) / 1000 : NaN;
}

export function forceLabel(msg: ForceMsg): string {
  const clamp = msg.clamped ? " (clamped)" : "";
  return `${msg.magnitude.toFixed(2)} N${clamp}`;
}

export function pairLabel(msg: ProximityMsg): string {
  if (!msg.pair) return "";
  return `${msg.pair[0]} ↔ ${msg.pair[1]}`;
}

export function statusLine(connected: boolean, snapshotT: number | null): string {
  if (!connected) return "disconnected — reconnecting…";
  return snapshotT === null ? "connected" : `connected · t = ${snapshotT.toFixed(1)} s`;
}
