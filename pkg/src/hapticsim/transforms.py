"""Rigid-placement substrate: 3-vectors, unit quaternions, and poses.

Quaternions are stored as numpy arrays of shape (4,) in (w, x, y, z) order.
Positions and directions are numpy arrays of shape (3,), in meters unless a
caller says otherwise. A :class:`Pose` is the transform ``x -> R(q) x + p``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

QUAT_NORM_TOL = 1e-9


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


def as_vec3(v) -> np.ndarray:
    """Coerce to a finite float (3,) array, raising ValueError otherwise."""
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite 3-vector: {a}")
    return a


def norm(v: np.ndarray) -> float:
    return float(np.sqrt(v @ v))


def unit(v: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    n = norm(v)
    if n < eps:
        raise ValueError("cannot normalize a near-zero vector")
    return v / n


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def as_quat(q) -> np.ndarray:
    """Coerce to a (4,) unit quaternion, enforcing |norm - 1| <= 1e-9."""
    a = np.asarray(q, dtype=float)
    if a.shape != (4,):
        raise ValueError(f"expected a (w,x,y,z) quaternion, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"non-finite quaternion: {a}")
    n = norm(a)
    if abs(n - 1.0) > QUAT_NORM_TOL:
        raise ValueError(f"quaternion norm {n} deviates from 1 by more than {QUAT_NORM_TOL}")
    return a


def quat_normalize(q: np.ndarray) -> np.ndarray:
    n = norm(q)
    if n < 1e-12:
        raise ValueError("cannot normalize a near-zero quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b (apply b first, then a, as rotations)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by quaternion q."""
    w, x, y, z = q
    # v + 2 * qvec x (qvec x v + w v), expanded for speed
    qv = np.array([x, y, z])
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    a = unit(as_vec3(axis))
    half = 0.5 * angle
    s = np.sin(half)
    return np.array([np.cos(half), a[0] * s, a[1] * s, a[2] * s])


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_matrix(m: np.ndarray) -> np.ndarray:
    """Shepperd's method; m must be a proper rotation matrix."""
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    elif m[0, 0] > m[1, 1] and m[0, 0] > m[2, 2]:
        s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        w = (m[2, 1] - m[1, 2]) / s
        x = 0.25 * s
        y = (m[0, 1] + m[1, 0]) / s
        z = (m[0, 2] + m[2, 0]) / s
    elif m[1, 1] > m[2, 2]:
        s = np.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        w = (m[0, 2] - m[2, 0]) / s
        x = (m[0, 1] + m[1, 0]) / s
        y = 0.25 * s
        z = (m[1, 2] + m[2, 1]) / s
    else:
        s = np.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        w = (m[1, 0] - m[0, 1]) / s
        x = (m[0, 2] + m[2, 0]) / s
        y = (m[1, 2] + m[2, 1]) / s
        z = 0.25 * s
    return quat_normalize(np.array([w, x, y, z]))


def quat_angle(q: np.ndarray) -> float:
    """Rotation angle of q in [0, pi]."""
    w = min(1.0, max(-1.0, abs(float(q[0]))))
    return 2.0 * float(np.arccos(w))


def quat_to_rotvec(q: np.ndarray) -> np.ndarray:
    """Rotation vector (axis * angle) of q."""
    w, x, y, z = q
    if w < 0:  # pick the short arc
        w, x, y, z = -w, -x, -y, -z
    s = np.sqrt(x * x + y * y + z * z)
    if s < 1e-12:
        return np.array([2.0 * x, 2.0 * y, 2.0 * z])
    angle = 2.0 * np.arctan2(s, w)
    return np.array([x, y, z]) * (angle / s)


@dataclass(frozen=True)
class Pose:
    """Rigid placement: position in meters plus a unit orientation quaternion."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation: np.ndarray = field(default_factory=quat_identity)

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        object.__setattr__(self, "orientation", as_quat(self.orientation))

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_xyz(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> "Pose":
        return Pose(position=vec3(x, y, z))

    def apply(self, point: np.ndarray) -> np.ndarray:
        return quat_rotate(self.orientation, point) + self.position

    def apply_many(self, points: np.ndarray) -> np.ndarray:
        r = quat_to_matrix(self.orientation)
        return points @ r.T + self.position

    def rotate(self, direction: np.ndarray) -> np.ndarray:
        return quat_rotate(self.orientation, direction)

    def compose(self, other: "Pose") -> "Pose":
        """self o other: apply `other` first, then `self`."""
        return Pose(
            position=self.apply(other.position),
            orientation=quat_normalize(quat_multiply(self.orientation, other.orientation)),
        )

    def inverse(self) -> "Pose":
        q_inv = quat_conjugate(self.orientation)
        return Pose(position=quat_rotate(q_inv, -self.position), orientation=q_inv)

    def almost_equal(self, other: "Pose", pos_tol: float = 1e-9, rot_tol: float = 1e-9) -> bool:
        if norm(self.position - other.position) > pos_tol:
            return False
        # q and -q are the same rotation
        d = min(norm(self.orientation - other.orientation), norm(self.orientation + other.orientation))
        return d <= rot_tol

    def to_list7(self) -> list:
        return [*map(float, self.position), *map(float, self.orientation)]

    @staticmethod
    def from_list7(values) -> "Pose":
        v = np.asarray(values, dtype=float)
        if v.shape != (7,):
            raise ValueError(f"pose needs 7 values (px py pz qw qx qy qz), got {v.shape}")
        return Pose(position=v[:3], orientation=v[3:])


def pose_from_dict(d: dict) -> Pose:
    return Pose(
        position=as_vec3(d.get("position", (0.0, 0.0, 0.0))),
        orientation=as_quat(d.get("quaternion", (1.0, 0.0, 0.0, 0.0))),
    )


def pose_to_dict(p: Pose) -> dict:
    return {"position": [float(c) for c in p.position],
            "quaternion": [float(c) for c in p.orientation]}
