"""Closest-point queries: shapes, entity groups, and the safety zone.

Builds a tiny cluttered scene and walks a cube toward a wall, printing the
closest pair, the distance, and the safety-zone penetration at each step.
"""

import numpy as np

from hapticsim import (
    CheckGroupPair,
    ConvexShape,
    Pose,
    SceneEntity,
    closest_points,
    distance_in_safety_zone,
    group_min_distance,
)

cube = ConvexShape.box((0.2, 0.2, 0.2))
wall = ConvexShape.box((0.05, 1.0, 1.0))

print("== two shapes, one query ==")
result = closest_points(cube, Pose.identity(), wall, Pose.from_xyz(0.5, 0, 0))
print(f"distance: {result.distance:.4f} m  colliding: {result.colliding}")
print(f"closest pair: {result.point_a} <-> {result.point_b}")

print("\n== a scene with check groups ==")
scene = [
    SceneEntity(id="cube", shapes=(cube,), pose=Pose.identity()),
    SceneEntity(id="wall", shapes=(wall,), pose=Pose.from_xyz(0.5, 0, 0)),
    SceneEntity(id="pillar", shapes=(ConvexShape.box((0.1, 0.1, 1.0)),),
                pose=Pose.from_xyz(0.0, 0.4, 0.0)),
]
pair = CheckGroupPair(group_a=frozenset({"cube"}), group_b=frozenset({"wall", "pillar"}))

margin = 0.05
print(f"safety-zone margin: {margin * 1000:.0f} mm")
print(f"{'cube x':>8} {'closest':>10} {'distance':>10} {'in zone':>9}")
for x in np.linspace(0.0, 0.36, 10):
    scene[0] = scene[0].with_pose(Pose.from_xyz(x, 0, 0))
    result = group_min_distance(scene, pair)
    depth = distance_in_safety_zone(result, margin)
    marker = "collide!" if result.colliding else (f"{depth * 1000:.1f} mm" if depth > 0 else "-")
    print(f"{x:8.3f} {result.pair[1]:>10} {result.distance:10.4f} {marker:>9}")
