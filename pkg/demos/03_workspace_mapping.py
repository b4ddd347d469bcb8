"""Workspace mapping: scale levels, screen frame, and clutch ratcheting.

The device workspace is a 16 x 13 x 13 cm box; the scene can be much larger.
Scale levels trade precision for reach, the screen-adaptive level tracks the
zoom, and clutching (button-gated re-anchoring) walks the entity across any
distance with a small physical workspace.
"""

import numpy as np

from hapticsim import DeviceSpec, FrameMode, Pose, ScaleMode, WorkspaceMapping
from hapticsim.mapping import StylusState, active_scale, disengage, engage, map_stylus, quantize
from hapticsim.transforms import quat_from_matrix

spec = DeviceSpec()
print(f"device workspace: {spec.workspace_extents} m, resolution {spec.position_resolution * 1000:.2f} mm")

print("\nscale levels (scene meters per device meter):")
for kind in ("rough", "medium", "fine"):
    print(f"  {kind:7s} {active_scale(ScaleMode(kind=kind)):5.1f}")
for viewport in (0.8, 3.2, 12.8):
    s = active_scale(ScaleMode(kind="screen_adaptive"), viewport_extent=viewport)
    print(f"  screen-adaptive at {viewport:4.1f} m viewport: {s:5.1f}")

print("\nsensor grid: raw positions snap to 0.02 mm multiples")
raw = np.array([0.0123456, -0.054321, 0.07])
snapped, _ = quantize(raw, spec)
print(f"  {raw} -> {snapped}")

print("\nscreen frame: device Y maps to screen-up, X to the view normal")
cam_rot = np.column_stack([[-1, 0, 0], [0, 0, 1], [0, 1, 0]])  # looking down -X, up = +Z
camera = Pose(orientation=quat_from_matrix(cam_rot))
mapping = engage(WorkspaceMapping(frame_mode=FrameMode.screen()),
                 StylusState(pose=Pose.identity(), button=True), Pose.identity())
step = StylusState(pose=Pose.from_xyz(0.0, 0.01, 0.0), button=True)
out = map_stylus(step, mapping, camera_frame=camera)
print(f"  device +1 cm Y -> scene {out.pose.position} (screen-up axis)")

print("\nclutch ratcheting: five 2 cm strokes cover 10 cm of scene")
scene_pose = Pose.identity()
mapping = WorkspaceMapping()
for stroke in range(1, 6):
    mapping = engage(mapping, StylusState(pose=Pose.identity(), button=True), scene_pose)
    moved = map_stylus(StylusState(pose=Pose.from_xyz(0.02, 0, 0), button=True), mapping)
    scene_pose = moved.pose
    mapping = disengage(mapping)  # stylus glides back unengaged: nothing moves
    print(f"  stroke {stroke}: entity at x = {scene_pose.position[0] * 100:.0f} cm")
