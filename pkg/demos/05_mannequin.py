"""The 56-DOF mannequin: whole-body moves, hand reaching, trunk lock.

The joint table ships as a data file. Hand targets run position-only damped
least squares over the root-to-hand chain; locking the trunk freezes its six
joints exactly while the arm keeps reaching.
"""

from importlib import resources

import numpy as np

from hapticsim.entities import MannequinState, drive_mannequin, hand_pose, load_mannequin
from hapticsim.entities.mannequin import set_trunk_lock
from hapticsim.transforms import Pose

model = load_mannequin(resources.files("hapticsim.data") / "mannequin56.json")
print(f"loaded {model.name}: {model.dof} DOF over {len(model.segments)} segments")

state = MannequinState(root_pose=Pose.identity(), q=model.neutral_q())
rest = hand_pose(model, state.q, "right_hand").position
print(f"right hand at rest: {rest}")

print("\nwhole-body move: the root carries every segment rigidly")
report = drive_mannequin(model, "whole_body", Pose.from_xyz(2.0, 0.0, 0.0), state)
moved = hand_pose(model, report.state.q, "right_hand", report.state.root_pose).position
print(f"  right hand follows: {moved}")

print("\nreach a point with the right hand (trunk free vs locked):")
target = Pose(position=rest + np.array([0.25, 0.10, 0.30]))
trunk_idx = [model.joint_index(n) for n in sorted(model.trunk_joint_names)]
for label, m in (("free", model), ("locked", set_trunk_lock(model, True))):
    report = drive_mannequin(m, "right", target, state)
    trunk_moved = float(np.max(np.abs(report.state.q[trunk_idx])))
    print(f"  trunk {label:6s}: residual {report.residuals['right_hand'] * 1000:6.2f} mm "
          f"in {report.iterations:3d} iterations; largest trunk joint move {trunk_moved:.4f} rad")

print("\nboth hands toward one shared target:")
report = drive_mannequin(model, "both", (target, target), state)
for hand, residual in report.residuals.items():
    print(f"  {hand}: {residual * 1000:.1f} mm")
