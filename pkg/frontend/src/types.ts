// Bridge wire vocabulary: JSON messages exchanged with the kernel's
// WebSocket bridge. The UI displays what the kernel says and never computes
// physics of its own.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // (w, x, y, z)
export type Pose7 = [number, number, number, number, number, number, number];

export interface HelloMsg {
  type: "hello";
  version: number;
  entities: { id: string; kind: string; shapes: Vec3[][] }[];
  driven: string;
  device: {
    workspace_extents: Vec3;
    position_resolution: number;
    peak_force: number;
    continuous_force: number;
    haptic_rate: number;
  };
  modes: ModeState;
}

export interface SnapshotMsg {
  type: "snapshot";
  t: number;
  poses: { id: string; pose: Pose7 }[];
}

export interface ForceMsg {
  type: "force";
  t: number;
  vector: Vec3;
  magnitude: number;
  clamped: boolean;
}

export interface ProximityMsg {
  type: "proximity";
  t: number;
  distance: number;
  colliding: boolean;
  point_a: Vec3;
  point_b: Vec3;
  pair: [string, string] | null;
}

export interface AckMsg {
  type: "ack";
  command: string;
  modes?: ModeState;
  recording?: boolean;
}

export interface TrajectoryMsg {
  type: "trajectory";
  mode: string;
  value: number | null;
  frames: { t: number; entity_id: string; position: Vec3; quaternion: Quat }[];
}

export interface ErrorMsg {
  type: "error";
  command?: string;
  text: string;
}

export type BridgeMsg =
  | HelloMsg | SnapshotMsg | ForceMsg | ProximityMsg | AckMsg | TrajectoryMsg | ErrorMsg;

export interface ModeState {
  scale: string;
  frame: string;
  pivot: string | null;
  force_class: string;
  viewport_extent: number | null;
  recording: boolean;
}

// outbound commands
export interface StylusInput {
  type: "stylus";
  position: Vec3;
  quaternion: Quat;
  button: boolean;
}

export interface ModeCommand {
  type: "mode";
  scale?: string;
  frame?: string;
  pivot?: string;
  force_class?: string;
  viewport_extent?: number;
}

export interface RecordCommand {
  type: "record";
  action: "arm" | "disarm" | "capture";
  mode?: string;
  value?: number;
}
