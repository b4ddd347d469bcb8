"""Articulated digital-human model: kinematic tree, hand driving, trunk lock.

The mannequin is a tree of named segments rooted at the pelvis; each segment
carries zero or more 1-DOF revolute joints applied in sequence. Whole-body
driving moves the root like a rigid solid; hand driving runs position-only
damped-least-squares over the joint chain from the root to the hand, with the
trunk joints frozen when the trunk lock is on. The joint table ships as a
data file, not code (see data/mannequin56.json).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..transforms import (
    Pose,
    as_vec3,
    norm,
    pose_from_dict,
    quat_from_matrix,
    quat_to_matrix,
    unit,
)

HAND_POS_TOL = 1e-4
HAND_DLS_LAMBDA = 0.05
HAND_DLS_MAX_ITER = 200
HAND_DLS_STEP_CAP = 0.3


@dataclass(frozen=True)
class MannequinJoint:
    name: str
    axis: np.ndarray
    limits: tuple = (-math.pi, math.pi)

    def __post_init__(self):
        object.__setattr__(self, "axis", unit(as_vec3(self.axis)))
        lo, hi = float(self.limits[0]), float(self.limits[1])
        if not lo < hi:
            raise ValueError(f"joint {self.name!r}: limits need lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "limits", (lo, hi))


@dataclass(frozen=True)
class MannequinSegment:
    name: str
    parent: str | None
    offset: Pose = field(default_factory=Pose.identity)
    joints: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "joints", tuple(self.joints))


@dataclass(frozen=True)
class MannequinModel:
    name: str
    root: str
    segments: tuple                  # in parent-before-child order
    end_effectors: dict              # {"left_hand": segment, "right_hand": segment}
    trunk_joint_names: frozenset
    declared_dof: int
    trunk_locked: bool = False

    def __post_init__(self):
        segments = tuple(self.segments)
        by_name = {}
        for seg in segments:
            if seg.name in by_name:
                raise ValueError(f"duplicate segment {seg.name!r}")
            if seg.parent is None:
                if seg.name != self.root:
                    raise ValueError(f"parentless segment {seg.name!r} is not the declared root")
            elif seg.parent not in by_name:
                raise ValueError(f"segment {seg.name!r}: parent {seg.parent!r} not declared earlier")
            by_name[seg.name] = seg
        if self.root not in by_name:
            raise ValueError(f"root segment {self.root!r} missing")
        for side in ("left_hand", "right_hand"):
            if side not in self.end_effectors or self.end_effectors[side] not in by_name:
                raise ValueError(f"end effector {side!r} missing or unknown")
        joint_names = [j.name for s in segments for j in s.joints]
        if len(set(joint_names)) != len(joint_names):
            raise ValueError("joint names must be unique")
        unknown_trunk = set(self.trunk_joint_names) - set(joint_names)
        if unknown_trunk:
            raise ValueError(f"unknown trunk joints: {sorted(unknown_trunk)}")
        if self.declared_dof != len(joint_names):
            raise ValueError(
                f"declared {self.declared_dof} DOF but the tree has {len(joint_names)} joints")
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "trunk_joint_names", frozenset(self.trunk_joint_names))

    @property
    def dof(self) -> int:
        return sum(len(s.joints) for s in self.segments)

    def joint_names(self) -> list:
        return [j.name for s in self.segments for j in s.joints]

    def joint_index(self, name: str) -> int:
        return self.joint_names().index(name)

    def limit_arrays(self):
        joints = [j for s in self.segments for j in s.joints]
        return (np.array([j.limits[0] for j in joints]),
                np.array([j.limits[1] for j in joints]))

    def neutral_q(self) -> np.ndarray:
        lo, hi = self.limit_arrays()
        zero = np.zeros(self.dof)
        return np.clip(zero, lo, hi)

    def segment(self, name: str) -> MannequinSegment:
        for s in self.segments:
            if s.name == name:
                return s
        raise KeyError(name)

    def chain_joint_indices(self, segment_name: str) -> list:
        """Global joint indices along the path root -> segment, in order."""
        by_name = {s.name: s for s in self.segments}
        path = []
        cursor = by_name[segment_name]
        while cursor is not None:
            path.append(cursor.name)
            cursor = by_name[cursor.parent] if cursor.parent else None
        path.reverse()
        starts = {}
        idx = 0
        for s in self.segments:
            starts[s.name] = idx
            idx += len(s.joints)
        out = []
        for name in path:
            seg = by_name[name]
            out.extend(range(starts[name], starts[name] + len(seg.joints)))
        return out


@dataclass(frozen=True)
class MannequinState:
    """Placement of the root plus the full joint vector."""

    root_pose: Pose
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))


@dataclass(frozen=True)
class DriveReport:
    state: MannequinState
    converged: bool
    residuals: dict          # end-effector segment -> position error (m)
    iterations: int


def _axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    x, y, z = axis
    c = math.cos(angle)
    s = math.sin(angle)
    t = 1.0 - c
    return np.array([
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ])


def _walk(model: MannequinModel, q, root_pose: Pose, want_joint_frames: bool):
    """FK over the tree as raw (rotation, position) pairs.

    This sits in the per-iteration DLS path, so it avoids Pose-object
    construction; optionally also returns per-joint (world_axis, world_origin).
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (model.dof,):
        raise ValueError(f"expected {model.dof} joint values, got shape {q.shape}")
    frames = {}
    joint_world = [None] * model.dof if want_joint_frames else None
    idx = 0
    root = (quat_to_matrix(root_pose.orientation), root_pose.position)
    for seg in model.segments:
        pr, pp = root if seg.parent is None else frames[seg.parent]
        r = pr @ quat_to_matrix(seg.offset.orientation)
        p = pr @ seg.offset.position + pp
        for j in seg.joints:
            if want_joint_frames:
                joint_world[idx] = (r @ j.axis, p)
            r = r @ _axis_angle_matrix(j.axis, q[idx])
            idx += 1
        frames[seg.name] = (r, p)
    return frames, joint_world


def segment_world_poses(model: MannequinModel, q, root_pose: Pose | None = None) -> dict:
    frames, _ = _walk(model, q, root_pose or Pose.identity(), want_joint_frames=False)
    return {name: Pose(position=p, orientation=quat_from_matrix(r)) for name, (r, p) in frames.items()}


def hand_pose(model: MannequinModel, q, side: str, root_pose: Pose | None = None) -> Pose:
    frames, _ = _walk(model, q, root_pose or Pose.identity(), want_joint_frames=False)
    r, p = frames[model.end_effectors[side]]
    return Pose(position=p, orientation=quat_from_matrix(r))


def _hand_targets(model: MannequinModel, target_mode: str, target):
    if target_mode == "left":
        return [(model.end_effectors["left_hand"], target)]
    if target_mode == "right":
        return [(model.end_effectors["right_hand"], target)]
    if target_mode == "both":
        left, right = target
        return [(model.end_effectors["left_hand"], left),
                (model.end_effectors["right_hand"], right)]
    raise ValueError(f"unknown target mode {target_mode!r}")


def drive_mannequin(model: MannequinModel, target_mode: str, target,
                    state: MannequinState,
                    pos_tol: float = HAND_POS_TOL,
                    lam: float = HAND_DLS_LAMBDA,
                    max_iter: int = HAND_DLS_MAX_ITER) -> DriveReport:
    """Drive the whole body, one hand, or both hands.

    ``whole_body`` re-places the root rigidly (joint values untouched). Hand
    modes run position-only DLS over the root-to-hand chain(s); the shared
    trunk joints participate unless the model's trunk lock is set, in which
    case they stay bit-identical. Unreachable targets converge to a
    best-effort posture whose residuals are reported, never raised.
    """
    if target_mode == "whole_body":
        new_state = MannequinState(root_pose=target, q=state.q.copy())
        return DriveReport(state=new_state, converged=True, residuals={}, iterations=0)

    goals = _hand_targets(model, target_mode, target)
    goal_positions = [(seg, as_vec3(t.position if isinstance(t, Pose) else t)) for seg, t in goals]

    active = sorted({i for seg, _ in goal_positions for i in model.chain_joint_indices(seg)})
    if model.trunk_locked:
        trunk_idx = {model.joint_index(n) for n in model.trunk_joint_names}
        active = [i for i in active if i not in trunk_idx]
    if not active:
        raise ValueError("no active joints for the requested hand target")

    lo, hi = model.limit_arrays()
    chains = {seg: set(model.chain_joint_indices(seg)) for seg, _ in goal_positions}
    q = state.q.copy()

    iterations = 0
    for iterations in range(max_iter + 1):
        frames, joint_world = _walk(model, q, state.root_pose, want_joint_frames=True)
        errs = [target_pos - frames[seg][1] for seg, target_pos in goal_positions]
        if all(norm(e) <= pos_tol for e in errs):
            residuals = {seg: norm(e) for (seg, _), e in zip(goal_positions, errs)}
            return DriveReport(state=MannequinState(state.root_pose, q),
                               converged=True, residuals=residuals, iterations=iterations)
        if iterations == max_iter:
            break
        j = np.zeros((3 * len(goal_positions), len(active)))
        for g, (seg, _) in enumerate(goal_positions):
            ee_pos = frames[seg][1]
            for col, joint_idx in enumerate(active):
                if joint_idx in chains[seg]:
                    axis_w, origin_w = joint_world[joint_idx]
                    j[3 * g:3 * g + 3, col] = np.cross(axis_w, ee_pos - origin_w)
        err = np.concatenate(errs)
        a = j @ j.T + (lam * lam) * np.eye(j.shape[0])
        dq = j.T @ np.linalg.solve(a, err)
        step = float(np.max(np.abs(dq)))
        if step > HAND_DLS_STEP_CAP:
            dq *= HAND_DLS_STEP_CAP / step
        q[active] = np.clip(q[active] + dq, lo[active], hi[active])

    frames, _ = _walk(model, q, state.root_pose, want_joint_frames=False)
    residuals = {seg: norm(t - frames[seg][1]) for seg, t in goal_positions}
    return DriveReport(state=MannequinState(state.root_pose, q),
                       converged=False, residuals=residuals, iterations=iterations)


# ---------------------------------------------------------------------------
# Mannequin description files
# ---------------------------------------------------------------------------

MANNEQUIN_SCHEMA_VERSION = 1


def mannequin_from_dict(data: dict) -> MannequinModel:
    version = data.get("version", MANNEQUIN_SCHEMA_VERSION)
    if version != MANNEQUIN_SCHEMA_VERSION:
        raise ValueError(f"unsupported mannequin file version {version}")
    segments = []
    for sd in data["segments"]:
        joints = tuple(
            MannequinJoint(name=jd["name"], axis=jd["axis"], limits=tuple(jd["limits"]))
            for jd in sd.get("joints", ())
        )
        segments.append(MannequinSegment(
            name=sd["name"],
            parent=sd.get("parent"),
            offset=pose_from_dict(sd.get("offset", {})),
            joints=joints,
        ))
    return MannequinModel(
        name=data.get("name", "mannequin"),
        root=data["root"],
        segments=tuple(segments),
        end_effectors=dict(data["end_effectors"]),
        trunk_joint_names=frozenset(data.get("trunk_joints", ())),
        declared_dof=int(data["declared_dof"]),
        trunk_locked=bool(data.get("trunk_locked", False)),
    )


def load_mannequin(path) -> MannequinModel:
    with open(Path(path)) as f:
        return mannequin_from_dict(json.load(f))


def set_trunk_lock(model: MannequinModel, locked: bool) -> MannequinModel:
    return replace(model, trunk_locked=locked)
