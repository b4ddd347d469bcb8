"""Scene representation and closest-point / collision queries.

Entities are rigid compounds of convex shapes; a convex shape is the hull of
its vertices. Distances between hulls are computed by a support-mapping
descent (GJK with witness points); group queries reduce over declared entity
pairs and report the globally closest pair. A collision is reported as
distance exactly 0 with the ``colliding`` flag set, and a safety-zone helper
turns a distance into a penetration depth for force generation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .transforms import Pose, as_vec3

# Below this separation the hulls are treated as touching/overlapping.
COLLISION_EPS = 1e-11

ENTITY_KINDS = ("solid", "robot_link", "mannequin_segment")


class UnknownEntityError(KeyError):
    """A check group referenced an entity id absent from the scene."""

    def __init__(self, entity_id: str):
        super().__init__(entity_id)
        self.entity_id = entity_id

    def __str__(self):
        return f"unknown entity id: {self.entity_id!r}"


@dataclass(frozen=True)
class ConvexShape:
    """Convex hull of a non-empty vertex cloud in the entity's local frame."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3 or v.shape[0] < 1:
            raise ValueError(f"shape needs an (n>=1, 3) vertex array, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("shape vertices must be finite")
        object.__setattr__(self, "vertices", v)

    @staticmethod
    def box(extents, center=(0.0, 0.0, 0.0)) -> "ConvexShape":
        e = as_vec3(extents) / 2.0
        c = as_vec3(center)
        corners = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
        return ConvexShape(corners * e + c)

    @staticmethod
    def point(p) -> "ConvexShape":
        return ConvexShape(np.asarray(p, dtype=float).reshape(1, 3))


@dataclass(frozen=True)
class SceneEntity:
    """A rigid, possibly compound, testable entity of the cell."""

    id: str
    shapes: tuple
    pose: Pose = field(default_factory=Pose.identity)
    kind: str = "solid"

    def __post_init__(self):
        if not self.id:
            raise ValueError("entity id must be non-empty")
        shapes = tuple(self.shapes)
        if not shapes:
            raise ValueError(f"entity {self.id!r} has no shapes")
        if self.kind not in ENTITY_KINDS:
            raise ValueError(f"entity {self.id!r}: unknown kind {self.kind!r}")
        object.__setattr__(self, "shapes", shapes)

    def with_pose(self, pose: Pose) -> "SceneEntity":
        return SceneEntity(id=self.id, shapes=self.shapes, pose=pose, kind=self.kind)

    def world_vertex_sets(self):
        return [self.pose.apply_many(s.vertices) for s in self.shapes]


@dataclass(frozen=True)
class CheckGroupPair:
    """Two disjoint entity-id groups to be tested against each other."""

    group_a: frozenset
    group_b: frozenset

    def __post_init__(self):
        a = frozenset(self.group_a)
        b = frozenset(self.group_b)
        if not a or not b:
            raise ValueError("check groups must be non-empty")
        if a & b:
            raise ValueError(f"check groups must be disjoint, both contain {sorted(a & b)}")
        object.__setattr__(self, "group_a", a)
        object.__setattr__(self, "group_b", b)


@dataclass(frozen=True)
class ProximityResult:
    """Closest pair of points between two entities or groups.

    ``colliding`` is equivalent to ``distance == 0``; when not colliding,
    ``|point_a - point_b| == distance`` to within 1e-9.
    """

    point_a: np.ndarray
    point_b: np.ndarray
    distance: float
    colliding: bool
    pair: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "point_a", as_vec3(self.point_a))
        object.__setattr__(self, "point_b", as_vec3(self.point_b))
        if self.colliding != (self.distance == 0.0):
            raise ValueError("colliding flag must mirror distance == 0")

    def swapped(self) -> "ProximityResult":
        pair = (self.pair[1], self.pair[0]) if self.pair else None
        return ProximityResult(point_a=self.point_b, point_b=self.point_a,
                               distance=self.distance, colliding=self.colliding, pair=pair)


# ---------------------------------------------------------------------------
# GJK on vertex hulls
#
# The simplex bookkeeping below runs on plain float tuples: this sits inside
# the proximity loop and numpy's per-call overhead on 3-vectors dominates at
# these sizes.
# ---------------------------------------------------------------------------

def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def _sub(u, v):
    return (u[0] - v[0], u[1] - v[1], u[2] - v[2])


def _closest_origin_segment(a, b):
    """Closest point to the origin on segment ab -> (point, (la, lb), keep)."""
    ab = _sub(b, a)
    denom = _dot(ab, ab)
    if denom <= 0.0:
        return a, (1.0,), (0,)
    t = -_dot(a, ab) / denom
    if t <= 0.0:
        return a, (1.0,), (0,)
    if t >= 1.0:
        return b, (1.0,), (1,)
    p = (a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2])
    return p, (1.0 - t, t), (0, 1)


def _closest_origin_triangle(a, b, c):
    """Closest point to the origin on triangle abc -> (point, lambdas, keep)."""
    ab = _sub(b, a)
    ac = _sub(c, a)
    d1 = -_dot(ab, a)
    d2 = -_dot(ac, a)
    if d1 <= 0.0 and d2 <= 0.0:
        return a, (1.0,), (0,)
    d3 = -_dot(ab, b)
    d4 = -_dot(ac, b)
    if d3 >= 0.0 and d4 <= d3:
        return b, (1.0,), (1,)
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 <= d1 and d3 <= 0.0 and (d1 - d3) != 0.0:
        t = d1 / (d1 - d3)
        p = (a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2])
        return p, (1.0 - t, t), (0, 1)
    d5 = -_dot(ab, c)
    d6 = -_dot(ac, c)
    if d6 >= 0.0 and d5 <= d6:
        return c, (1.0,), (2,)
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 <= d2 and d6 <= 0.0 and (d2 - d6) != 0.0:
        w = d2 / (d2 - d6)
        p = (a[0] + w * ac[0], a[1] + w * ac[1], a[2] + w * ac[2])
        return p, (1.0 - w, w), (0, 2)
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0 and ((d4 - d3) + (d5 - d6)) != 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        bc = _sub(c, b)
        p = (b[0] + w * bc[0], b[1] + w * bc[1], b[2] + w * bc[2])
        return p, (1.0 - w, w), (1, 2)
    denom = va + vb + vc
    if denom == 0.0:
        # degenerate (collinear) triangle: best of its edges
        candidates = []
        for (i, j) in ((0, 1), (0, 2), (1, 2)):
            pts = (a, b, c)
            p, lam, keep = _closest_origin_segment(pts[i], pts[j])
            candidates.append((_dot(p, p), p, lam, tuple((i, j)[k] for k in keep)))
        candidates.sort(key=lambda t: t[0])
        _, p, lam, keep = candidates[0]
        return p, lam, keep
    v = vb / denom
    w = vc / denom
    u = 1.0 - v - w
    p = (u * a[0] + v * b[0] + w * c[0],
         u * a[1] + v * b[1] + w * c[1],
         u * a[2] + v * b[2] + w * c[2])
    return p, (u, v, w), (0, 1, 2)


def _det3(u, v, w):
    return (u[0] * (v[1] * w[2] - v[2] * w[1])
            - u[1] * (v[0] * w[2] - v[2] * w[0])
            + u[2] * (v[0] * w[1] - v[1] * w[0]))


def _closest_origin_tetra(a, b, c, d):
    """Closest point to the origin in tetra abcd; detects origin enclosure."""
    ad = _sub(a, d)
    bd = _sub(b, d)
    cd = _sub(c, d)
    det = _det3(ad, bd, cd)
    if det != 0.0:
        nd = (-d[0], -d[1], -d[2])
        l1 = _det3(nd, bd, cd) / det
        l2 = _det3(ad, nd, cd) / det
        l3 = _det3(ad, bd, nd) / det
        l4 = 1.0 - l1 - l2 - l3
        if l1 >= -1e-13 and l2 >= -1e-13 and l3 >= -1e-13 and l4 >= -1e-13:
            return (0.0, 0.0, 0.0), (l1, l2, l3, l4), (0, 1, 2, 3)
    pts = (a, b, c, d)
    best = None
    for face in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        p, lam, keep = _closest_origin_triangle(pts[face[0]], pts[face[1]], pts[face[2]])
        d2 = _dot(p, p)
        if best is None or d2 < best[0]:
            best = (d2, p, lam, tuple(face[k] for k in keep))
    return best[1], best[2], best[3]


def _closest_on_simplex(points):
    n = len(points)
    if n == 1:
        return points[0], (1.0,), (0,)
    if n == 2:
        return _closest_origin_segment(points[0], points[1])
    if n == 3:
        return _closest_origin_triangle(points[0], points[1], points[2])
    return _closest_origin_tetra(points[0], points[1], points[2], points[3])


def hull_distance(verts_a: np.ndarray, verts_b: np.ndarray):
    """Closest points between conv(verts_a) and conv(verts_b), world frame.

    Returns (distance, point_a, point_b, colliding). On overlap the distance
    is exactly 0.0 and both points coincide at a common point.
    """
    va = np.asarray(verts_a, dtype=float)
    vb = np.asarray(verts_b, dtype=float)

    scale = max(1.0, float(np.max(np.abs(va))), float(np.max(np.abs(vb))))
    eps_touch = COLLISION_EPS * scale

    d = va.mean(axis=0) - vb.mean(axis=0)
    if d @ d < 1e-30:
        d = np.array([1.0, 0.0, 0.0])

    def support(direction):
        ia = int(np.argmax(va @ direction))
        ib = int(np.argmax(vb @ (-direction)))
        a = va[ia]
        b = vb[ib]
        return (a[0] - b[0], a[1] - b[1], a[2] - b[2]), (float(a[0]), float(a[1]), float(a[2])), \
            (float(b[0]), float(b[1]), float(b[2])), (ia, ib)

    w, sa, sb, ids = support(-d)
    simplex = [(w, sa, sb, ids)]

    best = None
    for _ in range(128):
        pts = [e[0] for e in simplex]
        v, lambdas, keep = _closest_on_simplex(pts)
        simplex = [simplex[k] for k in keep]
        v_norm2 = _dot(v, v)

        if best is None or v_norm2 < best[0]:
            best = (v_norm2, list(simplex), lambdas)

        if v_norm2 <= eps_touch * eps_touch:
            return _witnesses(simplex, lambdas, colliding=True)

        direction = np.array([-v[0], -v[1], -v[2]])
        w, sa, sb, ids = support(direction)
        if any(e[3] == ids for e in simplex):
            break
        # support gap: how much closer the new point can take us
        if v_norm2 - _dot(v, w) <= 1e-10 * v_norm2:
            break
        simplex.append((w, sa, sb, ids))
    else:  # pragma: no cover - loop cap; fall through with best simplex
        pass

    _, simplex, lambdas = best
    return _witnesses(simplex, lambdas, colliding=False)


def _witnesses(simplex, lambdas, colliding: bool):
    pa = np.zeros(3)
    pb = np.zeros(3)
    for lam, entry in zip(lambdas, simplex):
        pa += lam * np.asarray(entry[1])
        pb += lam * np.asarray(entry[2])
    if colliding:
        mid = 0.5 * (pa + pb)
        return 0.0, mid, mid.copy(), True
    dist = float(np.linalg.norm(pa - pb))
    if dist <= 0.0:
        mid = 0.5 * (pa + pb)
        return 0.0, mid, mid.copy(), True
    return dist, pa, pb, False


# ---------------------------------------------------------------------------
# Public queries
# ---------------------------------------------------------------------------

def closest_points(shape_a: ConvexShape, pose_a: Pose,
                   shape_b: ConvexShape, pose_b: Pose) -> ProximityResult:
    """Globally minimal distance between two posed convex shapes."""
    va = pose_a.apply_many(shape_a.vertices)
    vb = pose_b.apply_many(shape_b.vertices)
    dist, pa, pb, colliding = hull_distance(va, vb)
    return ProximityResult(point_a=pa, point_b=pb, distance=dist, colliding=colliding)


def entity_distance(entity_a: SceneEntity, entity_b: SceneEntity) -> ProximityResult:
    """Minimal distance between two rigid compounds (min over sub-shape pairs)."""
    best = None
    sets_a = entity_a.world_vertex_sets()
    sets_b = entity_b.world_vertex_sets()
    for va in sets_a:
        for vb in sets_b:
            dist, pa, pb, colliding = hull_distance(va, vb)
            if colliding:
                return ProximityResult(point_a=pa, point_b=pb, distance=0.0,
                                       colliding=True, pair=(entity_a.id, entity_b.id))
            if best is None or dist < best[0]:
                best = (dist, pa, pb)
    dist, pa, pb = best
    return ProximityResult(point_a=pa, point_b=pb, distance=dist,
                           colliding=False, pair=(entity_a.id, entity_b.id))


def group_min_distance(scene, pair: CheckGroupPair) -> ProximityResult:
    """Closest result over all (a in group_a, b in group_b) entity pairs.

    Any colliding pair short-circuits; ties and the collision scan order are
    resolved lexicographically on (id_a, id_b) for determinism.
    """
    by_id = {e.id: e for e in scene}
    for gid in sorted(pair.group_a | pair.group_b):
        if gid not in by_id:
            raise UnknownEntityError(gid)

    best = None
    for id_a in sorted(pair.group_a):
        for id_b in sorted(pair.group_b):
            result = entity_distance(by_id[id_a], by_id[id_b])
            if result.colliding:
                return result
            key = (result.distance, id_a, id_b)
            if best is None or key < best[0]:
                best = (key, result)
    return best[1]


def distance_in_safety_zone(result: ProximityResult, margin: float) -> float:
    """Penetration depth into the safety zone: max(0, margin - distance)."""
    if not (margin > 0.0):
        raise ValueError(f"safety-zone margin must be positive, got {margin}")
    return max(0.0, margin - result.distance)
