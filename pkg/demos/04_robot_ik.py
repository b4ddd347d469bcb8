"""Serial-robot driving: FK, nearest-branch IK, and joint limits as obstacles.

A planar 2R arm follows a Cartesian arc; the solver enumerates both analytic
branches and keeps the one nearest the previous configuration, so the joint
trajectory stays continuous. Near a joint limit, a resistance builds like a
safety zone in joint space.
"""

import math

import numpy as np

from hapticsim.entities import (
    forward_kinematics,
    inverse_kinematics,
    joint_limit_force,
    limit_force_cartesian,
    planar_2r,
)
from hapticsim.entities.robots import IkError
from hapticsim.transforms import Pose

model = planar_2r(1.0, 1.0)

print("branches reaching (1, 1): elbow-up and elbow-down")
for force_branch in (0, 1):
    q = inverse_kinematics(model, Pose.from_xyz(1, 1, 0), [0.0, 0.0], force_branch=force_branch)
    print(f"  branch {force_branch}: q = ({q[0]:+.3f}, {q[1]:+.3f}) rad")

print("\nnearest-branch tracking along a 1 mm-step arc (no flips):")
q = np.array([0.4, 1.2])
start = forward_kinematics(model, q).position
radius = float(np.linalg.norm(start[:2]))
theta = math.atan2(start[1], start[0])
max_step = 0.0
for i in range(400):
    theta += 0.001 / radius
    target = Pose(position=np.array([radius * math.cos(theta), radius * math.sin(theta), 0]))
    q_next = inverse_kinematics(model, target, q)
    max_step = max(max_step, float(np.max(np.abs(q_next - q))))
    q = q_next
print(f"  400 steps, largest joint move per step: {max_step * 1000:.2f} mrad")

print("\njoint-limit zone: resistance ramps as q2 nears its stop")
zone = 0.3
for q2 in (0.0, math.pi - 0.4, math.pi - 0.1, math.pi):
    depths = joint_limit_force(model, [0.0, q2], zone)
    cartesian = limit_force_cartesian(model, [0.0, q2], depths, gain=20.0)
    print(f"  q2 = {q2:+.2f}: depth {depths[1]:+.3f} rad, push {np.linalg.norm(cartesian):.2f} N")

print("\nunreachable target: the error carries a best-effort pose")
try:
    inverse_kinematics(model, Pose.from_xyz(3.0, 0, 0), [0.0, 0.0])
except IkError as err:
    reach = forward_kinematics(model, err.best_q, check_limits=False)
    print(f"  {err.kind}: stretched to {reach.position[:2]}, residual {err.residual[0]:.2f} m")
