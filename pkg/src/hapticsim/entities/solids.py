"""Rigid-solid driving with selectable rotation pivots.

A solid can rotate about its own construction origin, the mean of its hull
vertices, or any user-supplied local frame; the chosen pivot's world position
stays fixed under pure-rotation increments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geometry import SceneEntity
from ..transforms import Pose, quat_multiply, quat_normalize, quat_rotate


@dataclass(frozen=True)
class PivotMode:
    """Rotation-center choice: self origin, geometric center, or a user frame."""

    kind: str
    user_frame: Pose | None = None

    def __post_init__(self):
        if self.kind not in ("self_origin", "geometric_center", "user_frame"):
            raise ValueError(f"unknown pivot mode {self.kind!r}")
        if self.kind == "user_frame" and self.user_frame is None:
            raise ValueError("user_frame pivot needs a frame")

    @staticmethod
    def self_origin() -> "PivotMode":
        return PivotMode(kind="self_origin")

    @staticmethod
    def geometric_center() -> "PivotMode":
        return PivotMode(kind="geometric_center")

    @staticmethod
    def user(frame: Pose) -> "PivotMode":
        return PivotMode(kind="user_frame", user_frame=frame)


def geometric_center(entity: SceneEntity) -> np.ndarray:
    """Arithmetic mean of all hull vertices across the compound, local frame."""
    all_vertices = np.vstack([s.vertices for s in entity.shapes])
    return all_vertices.mean(axis=0)


def pivot_local_point(entity: SceneEntity, pivot: PivotMode) -> np.ndarray:
    if pivot.kind == "self_origin":
        return np.zeros(3)
    if pivot.kind == "geometric_center":
        return geometric_center(entity)
    return pivot.user_frame.position


def pivot_world_point(entity: SceneEntity, pivot: PivotMode) -> np.ndarray:
    return entity.pose.apply(pivot_local_point(entity, pivot))


def move_solid(entity: SceneEntity, pivot: PivotMode, delta: Pose) -> Pose:
    """Apply a rigid increment: rotate about the pivot point, then translate.

    The rotation part of ``delta`` spins the solid about the pivot's current
    world position; the translation part then shifts it. A pure-rotation
    delta therefore leaves the pivot's world coordinates invariant.
    """
    pose = entity.pose
    pivot_w = pivot_world_point(entity, pivot)
    new_orientation = quat_normalize(quat_multiply(delta.orientation, pose.orientation))
    new_position = pivot_w + quat_rotate(delta.orientation, pose.position - pivot_w) + delta.position
    return Pose(position=new_position, orientation=new_orientation)
