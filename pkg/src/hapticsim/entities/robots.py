"""Serial-robot kinematics: FK, nearest-branch IK, and joint-limit zones.

Inverse kinematics keeps joint-space continuity by selecting, among all
solutions of the chain, the one closest to the previous configuration in the
max-norm. Planar 2R/3R chains enumerate their closed-form branches; any other
chain falls back to damped-least-squares iteration seeded at the previous
configuration. Joint limits are never silently clamped away: a pose reachable
only outside the limits raises ``IkError('limits', ...)`` so the caller can
render the workspace boundary as an obstacle.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..transforms import (
    Pose,
    as_vec3,
    norm,
    pose_from_dict,
    pose_to_dict,
    quat_conjugate,
    quat_from_axis_angle,
    quat_multiply,
    quat_to_rotvec,
    unit,
)

DLS_LAMBDA = 0.01
DLS_MAX_ITER = 200
DLS_STEP_CAP = 0.5
IK_POS_TOL = 1e-6
IK_ROT_TOL = 1e-6


class JointLimitError(ValueError):
    def __init__(self, offending):
        self.offending = list(offending)
        super().__init__(f"joint values out of limits: {self.offending}")


class IkError(RuntimeError):
    """IK failure carrying the best-effort configuration and its residual.

    kind 'unreachable': no configuration attains the target;
    kind 'limits': solutions exist but all violate the joint limits.
    """

    def __init__(self, kind: str, best_q, residual):
        assert kind in ("unreachable", "limits")
        self.kind = kind
        self.best_q = np.asarray(best_q, dtype=float)
        self.residual = residual
        super().__init__(f"ik {kind}: residual pos={residual[0]:.3e} rot={residual[1]:.3e}")


@dataclass(frozen=True)
class Joint:
    kind: str                 # "revolute" | "prismatic"
    axis: np.ndarray          # unit direction in the parent frame
    origin: Pose = field(default_factory=Pose.identity)
    limits: tuple = (-math.pi, math.pi)
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("revolute", "prismatic"):
            raise ValueError(f"unknown joint kind {self.kind!r}")
        object.__setattr__(self, "axis", unit(as_vec3(self.axis)))
        lo, hi = float(self.limits[0]), float(self.limits[1])
        if not lo < hi:
            raise ValueError(f"joint limits need lo < hi, got [{lo}, {hi}]")
        object.__setattr__(self, "limits", (lo, hi))


@dataclass(frozen=True)
class RobotModel:
    joints: tuple
    base_pose: Pose = field(default_factory=Pose.identity)
    tool_frame: Pose = field(default_factory=Pose.identity)
    attach_mode: str = "tcpf"          # "base" | "tcpf"
    analytic: str | None = None        # "planar2r" | "planar3r" | None
    ik_position_only: bool = False
    name: str = "robot"

    def __post_init__(self):
        joints = tuple(self.joints)
        if not joints:
            raise ValueError("robot needs at least one joint")
        if self.attach_mode not in ("base", "tcpf"):
            raise ValueError(f"unknown attach mode {self.attach_mode!r}")
        if self.analytic not in (None, "planar2r", "planar3r"):
            raise ValueError(f"unknown analytic tag {self.analytic!r}")
        object.__setattr__(self, "joints", joints)

    @property
    def dof(self) -> int:
        return len(self.joints)

    def limit_arrays(self):
        lo = np.array([j.limits[0] for j in self.joints])
        hi = np.array([j.limits[1] for j in self.joints])
        return lo, hi

    def check_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise ValueError(f"expected {self.dof} joint values, got shape {q.shape}")
        return q


def _joint_motion(joint: Joint, qi: float) -> Pose:
    if joint.kind == "revolute":
        return Pose(orientation=quat_from_axis_angle(joint.axis, qi))
    return Pose(position=joint.axis * qi)


def offending_joints(model: RobotModel, q) -> list:
    q = model.check_q(q)
    bad = []
    for i, (joint, qi) in enumerate(zip(model.joints, q)):
        lo, hi = joint.limits
        if qi < lo - 1e-12 or qi > hi + 1e-12:
            bad.append(joint.name or f"joint[{i}]")
    return bad


def forward_kinematics(model: RobotModel, q, check_limits: bool = True) -> Pose:
    """World pose of the tool frame."""
    q = model.check_q(q)
    if check_limits:
        bad = offending_joints(model, q)
        if bad:
            raise JointLimitError(bad)
    frame = model.base_pose
    for joint, qi in zip(model.joints, q):
        frame = frame.compose(joint.origin).compose(_joint_motion(joint, qi))
    return frame.compose(model.tool_frame)


def joint_world_frames(model: RobotModel, q) -> list:
    """Pose of each joint frame (after its offset, before its motion extends)."""
    q = model.check_q(q)
    frames = []
    frame = model.base_pose
    for joint, qi in zip(model.joints, q):
        frame = frame.compose(joint.origin)
        frames.append(frame)
        frame = frame.compose(_joint_motion(joint, qi))
    return frames


def jacobian(model: RobotModel, q) -> np.ndarray:
    """Geometric Jacobian (6 x n): linear rows first, then angular."""
    q = model.check_q(q)
    frames = joint_world_frames(model, q)
    tool = forward_kinematics(model, q, check_limits=False)
    j = np.zeros((6, model.dof))
    for i, (joint, frame) in enumerate(zip(model.joints, frames)):
        axis_w = frame.rotate(joint.axis)
        if joint.kind == "revolute":
            j[:3, i] = np.cross(axis_w, tool.position - frame.position)
            j[3:, i] = axis_w
        else:
            j[:3, i] = axis_w
    return j


# ---------------------------------------------------------------------------
# Analytic planar chains
# ---------------------------------------------------------------------------

def planar_2r(l1: float = 1.0, l2: float = 1.0, limits=(-math.pi, math.pi)) -> RobotModel:
    """Planar 2R chain in the base XY plane, both joints revolute about +Z."""
    return RobotModel(
        joints=(
            Joint(kind="revolute", axis=(0, 0, 1), origin=Pose.identity(), limits=limits, name="q1"),
            Joint(kind="revolute", axis=(0, 0, 1), origin=Pose.from_xyz(l1, 0, 0), limits=limits, name="q2"),
        ),
        tool_frame=Pose.from_xyz(l2, 0, 0),
        analytic="planar2r",
        name="planar2r",
    )


def planar_3r(l1: float = 1.0, l2: float = 1.0, l3: float = 0.5,
              limits=(-math.pi, math.pi)) -> RobotModel:
    return RobotModel(
        joints=(
            Joint(kind="revolute", axis=(0, 0, 1), origin=Pose.identity(), limits=limits, name="q1"),
            Joint(kind="revolute", axis=(0, 0, 1), origin=Pose.from_xyz(l1, 0, 0), limits=limits, name="q2"),
            Joint(kind="revolute", axis=(0, 0, 1), origin=Pose.from_xyz(l2, 0, 0), limits=limits, name="q3"),
        ),
        tool_frame=Pose.from_xyz(l3, 0, 0),
        analytic="planar3r",
        name="planar3r",
    )


def _planar_link_lengths(model: RobotModel):
    lengths = [norm(j.origin.position) for j in model.joints[1:]]
    lengths.append(norm(model.tool_frame.position))
    return lengths


def _wrap_pi(a: float) -> float:
    return math.atan2(math.sin(a), math.cos(a))


def _two_r_branches(l1: float, l2: float, x: float, y: float):
    """Closed-form (q1, q2) branches via the law of cosines; [] if unreachable."""
    r2 = x * x + y * y
    c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if abs(c2) > 1.0 + 1e-9:
        return []
    c2 = min(1.0, max(-1.0, c2))
    q2a = math.acos(c2)
    branches = []
    for q2 in ({q2a, -q2a}):
        q1 = math.atan2(y, x) - math.atan2(l2 * math.sin(q2), l1 + l2 * math.cos(q2))
        branches.append((_wrap_pi(q1), q2))
    return branches


def _expand_within_limits(model: RobotModel, q_branch):
    """All per-joint 2*pi-shift representatives of a branch inside the limits."""
    reps_per_joint = []
    for joint, qi in zip(model.joints, q_branch):
        lo, hi = joint.limits
        reps = [qi + 2.0 * math.pi * k for k in (-1, 0, 1)
                if lo - 1e-12 <= qi + 2.0 * math.pi * k <= hi + 1e-12]
        if not reps:
            return []
        reps_per_joint.append(reps)
    return [np.array(combo) for combo in itertools.product(*reps_per_joint)]


def _branch_distance(q, q_prev, ord=np.inf) -> float:
    """Joint-space branch distance; max-norm by default so one large joint
    flip cannot hide behind many small moves. Any p-norm is defensible; pass
    ``ord`` to change it."""
    return float(np.linalg.norm(np.asarray(q) - np.asarray(q_prev), ord=ord))


def _planar_yaw(pose: Pose) -> float:
    w, x, y, z = pose.orientation
    return 2.0 * math.atan2(z, w)


def _pose_residual(model: RobotModel, q, target: Pose):
    fk = forward_kinematics(model, q, check_limits=False)
    e_pos = norm(target.position - fk.position)
    e_rot = norm(quat_to_rotvec(quat_multiply(target.orientation, quat_conjugate(fk.orientation))))
    return e_pos, e_rot


def _analytic_branches(model: RobotModel, target: Pose):
    """Raw joint-space branches reaching the target, ignoring limits."""
    local = model.base_pose.inverse().apply(target.position)
    x, y, z_off = float(local[0]), float(local[1]), float(local[2])
    if model.analytic == "planar2r":
        l1, l2 = _planar_link_lengths(model)
        return [np.array(b) for b in _two_r_branches(l1, l2, x, y)], abs(z_off)
    l1, l2, l3 = _planar_link_lengths(model)
    yaw = _planar_yaw(model.base_pose.inverse().compose(target))
    wx = x - l3 * math.cos(yaw)
    wy = y - l3 * math.sin(yaw)
    out = []
    for (q1, q2) in _two_r_branches(l1, l2, wx, wy):
        q3 = _wrap_pi(yaw - q1 - q2)
        out.append(np.array([q1, q2, q3]))
    return out, abs(z_off)


def _best_effort_planar(model: RobotModel, target: Pose) -> np.ndarray:
    """Config pointing the stretched or folded chain at an unreachable target."""
    local = model.base_pose.inverse().apply(target.position)
    x, y = float(local[0]), float(local[1])
    lengths = _planar_link_lengths(model)
    heading = math.atan2(y, x)
    r = math.hypot(x, y)
    if r >= sum(lengths):  # stretched
        q = np.zeros(model.dof)
        q[0] = heading
        return q
    # folded: fold the second link back
    l1, l2 = lengths[0], lengths[1]
    q = np.zeros(model.dof)
    q[0] = heading if l1 >= l2 else _wrap_pi(heading + math.pi)
    q[1] = math.pi
    return q


def _analytic_ik(model: RobotModel, target: Pose, q_prev: np.ndarray,
                 pos_tol: float, rot_tol: float, branch_norm=np.inf,
                 force_branch: int | None = None) -> np.ndarray:
    branches, z_err = _analytic_branches(model, target)
    if not branches or z_err > pos_tol:
        best = _best_effort_planar(model, target) if not branches else min(
            branches, key=lambda b: _branch_distance(b, q_prev, branch_norm))
        lo, hi = model.limit_arrays()
        best = np.clip(best, lo, hi)
        raise IkError("unreachable", best, _pose_residual(model, best, target))

    if force_branch is not None:
        # explicit branch override; branches ordered by descending elbow sign
        ordered = sorted(branches, key=lambda b: -b[1])
        branch = ordered[force_branch % len(ordered)]
        candidates = _expand_within_limits(model, branch)
        if not candidates:
            lo, hi = model.limit_arrays()
            clamped = np.clip(branch, lo, hi)
            raise IkError("limits", clamped, _pose_residual(model, clamped, target))
        candidates.sort(key=lambda q: (_branch_distance(q, q_prev, branch_norm), tuple(q)))
        return candidates[0]

    candidates = []
    for branch in branches:
        candidates.extend(_expand_within_limits(model, branch))
    if not candidates:
        nearest = min(branches, key=lambda b: _branch_distance(b, q_prev, branch_norm))
        lo, hi = model.limit_arrays()
        clamped = np.clip(nearest, lo, hi)
        raise IkError("limits", clamped, _pose_residual(model, clamped, target))

    # deterministic selection: nearest branch, ties broken on joint values
    candidates.sort(key=lambda q: (_branch_distance(q, q_prev, branch_norm), tuple(q)))
    return candidates[0]


# ---------------------------------------------------------------------------
# Damped least squares
# ---------------------------------------------------------------------------

def _dls_iterate(model: RobotModel, target: Pose, q0: np.ndarray,
                 pos_tol: float, rot_tol: float, lam: float, max_iter: int,
                 clamp_limits: bool, position_only: bool):
    lo, hi = model.limit_arrays()
    q = np.asarray(q0, dtype=float).copy()
    rows = 3 if position_only else 6

    def score(res):
        return res[0] if position_only else res[0] + res[1]

    def converged(res):
        return res[0] <= pos_tol and (position_only or res[1] <= rot_tol)

    best_res = _pose_residual(model, q, target)
    best_q = q.copy()
    for _ in range(max_iter + 1):
        res = _pose_residual(model, q, target)
        if score(res) < score(best_res):
            best_q, best_res = q.copy(), res
        if converged(res):
            return q, res, True
        fk = forward_kinematics(model, q, check_limits=False)
        err = np.empty(rows)
        err[:3] = target.position - fk.position
        if not position_only:
            err[3:] = quat_to_rotvec(quat_multiply(target.orientation, quat_conjugate(fk.orientation)))
        j = jacobian(model, q)[:rows]
        a = j @ j.T + (lam * lam) * np.eye(rows)
        dq = j.T @ np.linalg.solve(a, err)
        step = float(np.max(np.abs(dq)))
        if step > DLS_STEP_CAP:
            dq *= DLS_STEP_CAP / step
        q = q + dq
        if clamp_limits:
            q = np.clip(q, lo, hi)
    return best_q, best_res, False


def inverse_kinematics(model: RobotModel, target: Pose, q_prev,
                       pos_tol: float = IK_POS_TOL, rot_tol: float = IK_ROT_TOL,
                       lam: float = DLS_LAMBDA, max_iter: int = DLS_MAX_ITER,
                       branch_norm=np.inf, force_branch: int | None = None) -> np.ndarray:
    """Joint configuration reaching ``target``, nearest in joint space to ``q_prev``.

    ``branch_norm`` selects the p-norm of the nearest-branch metric;
    ``force_branch`` pins an analytic branch by index instead of choosing the
    nearest one. Raises IkError('unreachable') with the best-effort
    configuration and its residual when the target cannot be attained, and
    IkError('limits') when it can only be attained outside the joint limits.
    """
    q_prev = model.check_q(q_prev)
    bad = offending_joints(model, q_prev)
    if bad:
        raise JointLimitError(bad)

    e_pos, e_rot = _pose_residual(model, q_prev, target)
    if force_branch is None and e_pos <= pos_tol and (model.ik_position_only or e_rot <= rot_tol):
        return q_prev.copy()

    if model.analytic:
        return _analytic_ik(model, target, q_prev, pos_tol, rot_tol,
                            branch_norm=branch_norm, force_branch=force_branch)

    q, res, ok = _dls_iterate(model, target, q_prev, pos_tol, rot_tol, lam, max_iter,
                              clamp_limits=True, position_only=model.ik_position_only)
    if ok:
        return q
    q_free, res_free, ok_free = _dls_iterate(model, target, q_prev, pos_tol, rot_tol, lam, max_iter,
                                             clamp_limits=False, position_only=model.ik_position_only)
    if ok_free:
        lo, hi = model.limit_arrays()
        clamped = np.clip(q_free, lo, hi)
        raise IkError("limits", clamped, _pose_residual(model, clamped, target))
    raise IkError("unreachable", q, res)


# ---------------------------------------------------------------------------
# Limit zones and driving
# ---------------------------------------------------------------------------

def joint_limit_force(model: RobotModel, q, zone: float) -> np.ndarray:
    """Signed penetration depth into each joint's limit zone.

    Positive pushes the joint toward its upper limit (i.e. away from the
    lower one); the magnitude never exceeds ``zone``.
    """
    if not (zone > 0):
        raise ValueError(f"limit zone must be positive, got {zone}")
    q = model.check_q(q)
    depths = np.zeros(model.dof)
    for i, (joint, qi) in enumerate(zip(model.joints, q)):
        lo, hi = joint.limits
        d = 0.0
        if qi - lo < zone:
            d += zone - (qi - lo)
        if hi - qi < zone:
            d -= zone - (hi - qi)
        depths[i] = min(zone, max(-zone, d))
    return depths


def limit_force_cartesian(model: RobotModel, q, depths, gain: float = 100.0) -> np.ndarray:
    """Map joint limit-zone depths to a Cartesian push at the tool point."""
    j = jacobian(model, q)
    return j[:3] @ (gain * np.asarray(depths, dtype=float))


def drive_robot(model: RobotModel, mapped_pose: Pose, q_prev):
    """Drive per attach mode: base -> new base pose; tcpf -> IK configuration."""
    if model.attach_mode == "base":
        return mapped_pose
    return inverse_kinematics(model, mapped_pose, q_prev)


# ---------------------------------------------------------------------------
# Robot description files
# ---------------------------------------------------------------------------

ROBOT_SCHEMA_VERSION = 1


def robot_from_dict(data: dict) -> RobotModel:
    version = data.get("version", ROBOT_SCHEMA_VERSION)
    if version != ROBOT_SCHEMA_VERSION:
        raise ValueError(f"unsupported robot file version {version}")
    joints = []
    for jd in data["joints"]:
        joints.append(Joint(
            kind=jd["type"],
            axis=jd["axis"],
            origin=pose_from_dict(jd.get("origin", {})),
            limits=tuple(jd["limits"]),
            name=jd.get("name", ""),
        ))
    return RobotModel(
        joints=tuple(joints),
        base_pose=pose_from_dict(data.get("base", {})),
        tool_frame=pose_from_dict(data.get("tool", {})),
        attach_mode=data.get("attach", "tcpf"),
        analytic=data.get("analytic"),
        ik_position_only=bool(data.get("ik_position_only", False)),
        name=data.get("name", "robot"),
    )


def robot_to_dict(model: RobotModel) -> dict:
    return {
        "version": ROBOT_SCHEMA_VERSION,
        "name": model.name,
        "attach": model.attach_mode,
        "analytic": model.analytic,
        "ik_position_only": model.ik_position_only,
        "base": pose_to_dict(model.base_pose),
        "tool": pose_to_dict(model.tool_frame),
        "joints": [
            {"name": j.name, "type": j.kind, "axis": [float(c) for c in j.axis],
             "origin": pose_to_dict(j.origin), "limits": [j.limits[0], j.limits[1]]}
            for j in model.joints
        ],
    }


def load_robot(path) -> RobotModel:
    with open(Path(path)) as f:
        return robot_from_dict(json.load(f))
