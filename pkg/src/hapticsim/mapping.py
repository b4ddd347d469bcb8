"""Device-to-scene motion mapping: frames, scale levels, and clutching.

The device workspace is a box centered on the device-frame origin. Mapped
motion is relative to an anchor pair captured at each engage transition
(device position/orientation and the driven frame's scene pose), which makes
the clutch jump-free: re-engaging after moving the disengaged stylus never
displaces the entity.

Frame conventions for the mapped translation/rotation:

* ``world``: device axes map to scene axes 1:1.
* ``screen``: device X is the screen normal (view direction) and device Y/Z
  span the display plane. The camera pose must follow the same convention:
  its local +X is the view direction, +Y the screen-up axis, and +Z completes
  the right-handed basis.
* ``user``: axes of a caller-supplied frame.

Translations are scaled by the active scale level; rotations always map 1:1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .transforms import (
    Pose,
    as_vec3,
    quat_conjugate,
    quat_identity,
    quat_multiply,
    quat_normalize,
)

DEFAULT_SCALE_LEVELS = {"rough": 10.0, "medium": 1.0, "fine": 0.1}


@dataclass(frozen=True)
class DeviceSpec:
    """Virtual device constants (defaults model a desk-scale 6-DOF stylus)."""

    workspace_extents: np.ndarray = field(default_factory=lambda: np.array([0.16, 0.13, 0.13]))
    position_resolution: float = 0.00002
    peak_force: float = 6.4
    continuous_force: float = 1.4
    haptic_rate: int = 1000
    sensed_dof: int = 6
    force_dof: int = 3

    def __post_init__(self):
        object.__setattr__(self, "workspace_extents", as_vec3(self.workspace_extents))
        if np.any(self.workspace_extents <= 0) or self.position_resolution <= 0:
            raise ValueError("workspace extents and resolution must be positive")
        if not (self.peak_force > 0 and self.continuous_force > 0 and self.haptic_rate > 0):
            raise ValueError("device ratings must be positive")
        if self.force_dof > self.sensed_dof:
            raise ValueError("force DOF cannot exceed sensed DOF")

    @property
    def half_extents(self) -> np.ndarray:
        return self.workspace_extents / 2.0

    @property
    def max_extent(self) -> float:
        return float(np.max(self.workspace_extents))


DEFAULT_DEVICE = DeviceSpec()


@dataclass(frozen=True)
class StylusState:
    """One 6-DOF device sample: quantized pose, button, haptic tick stamp."""

    pose: Pose
    button: bool = False
    tick: int = 0


@dataclass(frozen=True)
class FrameMode:
    """Displacement-axis convention: screen plane, scene axes, or user frame."""

    kind: str
    user_frame: Pose | None = None

    def __post_init__(self):
        if self.kind not in ("screen", "world", "user"):
            raise ValueError(f"unknown frame mode {self.kind!r}")
        if self.kind == "user" and self.user_frame is None:
            raise ValueError("user frame mode needs a frame")

    @staticmethod
    def screen() -> "FrameMode":
        return FrameMode(kind="screen")

    @staticmethod
    def world() -> "FrameMode":
        return FrameMode(kind="world")

    @staticmethod
    def user(frame: Pose) -> "FrameMode":
        return FrameMode(kind="user", user_frame=frame)


@dataclass(frozen=True)
class ScaleMode:
    """Translation sensitivity level; scene meters per device meter.

    ``screen_adaptive`` derives the factor from the displayed viewport extent
    instead of a fixed level, so it tracks zoom.
    """

    kind: str = "medium"
    levels: dict = field(default_factory=lambda: dict(DEFAULT_SCALE_LEVELS))

    def __post_init__(self):
        if self.kind not in ("rough", "medium", "fine", "screen_adaptive"):
            raise ValueError(f"unknown scale mode {self.kind!r}")
        for name, value in self.levels.items():
            if not (value > 0):
                raise ValueError(f"scale level {name!r} must be positive, got {value}")


def active_scale(mode: ScaleMode, viewport_extent: float | None = None,
                 spec: DeviceSpec = DEFAULT_DEVICE) -> float:
    """Resolve the scale factor for the current tick."""
    if mode.kind != "screen_adaptive":
        return float(mode.levels[mode.kind])
    if viewport_extent is None or not (viewport_extent > 0):
        raise ValueError(f"screen-adaptive scale needs a positive viewport extent, got {viewport_extent}")
    return float(viewport_extent) / spec.max_extent


@dataclass(frozen=True)
class WorkspaceMapping:
    """Mapping state: mode, scale, engage anchors."""

    frame_mode: FrameMode = field(default_factory=FrameMode.world)
    scale_mode: ScaleMode = field(default_factory=ScaleMode)
    anchor_device: np.ndarray = field(default_factory=lambda: np.zeros(3))
    anchor_device_orientation: np.ndarray = field(default_factory=quat_identity)
    anchor_scene: Pose = field(default_factory=Pose.identity)
    engaged: bool = False


@dataclass(frozen=True)
class MappedMotion:
    """Result of mapping one stylus sample; pose is meaningful only when engaged."""

    pose: Pose
    engaged: bool


def mode_rotation(frame_mode: FrameMode, camera_frame: Pose | None) -> np.ndarray:
    """Quaternion carrying device axes into scene axes for the given mode."""
    if frame_mode.kind == "world":
        return quat_identity()
    if frame_mode.kind == "screen":
        if camera_frame is None:
            raise ValueError("screen frame mode needs a camera frame")
        return camera_frame.orientation
    return frame_mode.user_frame.orientation


def map_stylus(state: StylusState, mapping: WorkspaceMapping,
               camera_frame: Pose | None = None, viewport_extent: float | None = None,
               spec: DeviceSpec = DEFAULT_DEVICE) -> MappedMotion:
    """Map one stylus sample to the driven frame's scene pose.

    Disengaged mappings produce a flagged no-motion result. At the engage
    instant (device pose equals the anchors) the result is exactly the
    anchored scene pose, so clutching never jumps.
    """
    if not mapping.engaged:
        return MappedMotion(pose=mapping.anchor_scene, engaged=False)

    device_pos = state.pose.position
    device_quat = state.pose.orientation
    if (np.array_equal(device_pos, mapping.anchor_device)
            and np.array_equal(device_quat, mapping.anchor_device_orientation)):
        return MappedMotion(pose=mapping.anchor_scene, engaged=True)

    q_mode = mode_rotation(mapping.frame_mode, camera_frame)
    scale = active_scale(mapping.scale_mode, viewport_extent, spec)

    delta_device = device_pos - mapping.anchor_device
    delta_scene = _rotate(q_mode, scale * delta_device)
    position = mapping.anchor_scene.position + delta_scene

    delta_quat = quat_multiply(device_quat, quat_conjugate(mapping.anchor_device_orientation))
    delta_in_mode = quat_multiply(quat_multiply(q_mode, delta_quat), quat_conjugate(q_mode))
    orientation = quat_normalize(quat_multiply(delta_in_mode, mapping.anchor_scene.orientation))

    return MappedMotion(pose=Pose(position=position, orientation=orientation), engaged=True)


def _rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    qv = np.array([x, y, z])
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def engage(mapping: WorkspaceMapping, state: StylusState, current_scene_pose: Pose) -> WorkspaceMapping:
    """Engage (or re-engage) the clutch, re-anchoring device and scene origins."""
    return replace(
        mapping,
        anchor_device=state.pose.position.copy(),
        anchor_device_orientation=state.pose.orientation.copy(),
        anchor_scene=current_scene_pose,
        engaged=True,
    )


def disengage(mapping: WorkspaceMapping) -> WorkspaceMapping:
    return replace(mapping, engaged=False)


def quantize(position, spec: DeviceSpec = DEFAULT_DEVICE):
    """Round a device position to the sensor grid, clamping to the workspace.

    Returns ``(quantized_position, clamped)``; the flag is set when the input
    lay outside the workspace box. Components round half away from zero onto
    multiples of the position resolution.
    """
    p = as_vec3(position)
    half = spec.half_extents
    clamped = bool(np.any(p < -half) or np.any(p > half))
    p = np.clip(p, -half, half)
    res = spec.position_resolution
    steps = np.floor(np.abs(p) / res + 0.5) * np.sign(p)
    max_steps = np.floor(half / res + 1e-9)
    steps = np.clip(steps, -max_steps, max_steps)
    return steps * res, clamped
