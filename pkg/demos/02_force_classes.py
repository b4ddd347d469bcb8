"""The three force-rendering classes and the device force limits.

Sweeps an approach toward an obstacle and prints the force magnitude each
class produces, then demonstrates the peak clamp and the RMS governor that
holds sustained output at the continuous rating.
"""

import numpy as np

from hapticsim import ForceClass, ForceCommand, ForceParams, Pose, render_force
from hapticsim.forcefield import ForceRmsWindow, clamp_force
from hapticsim.geometry import ProximityResult

params = ForceParams(margin=0.01, constant_magnitude=2.0, stiffness=300.0, damping=8.0)

print("force vs distance (margin 10 mm, stiffness 300 N/m):")
print(f"{'distance':>10} {'constant':>9} {'spring':>9} {'spring+damper':>14}")
for d in [0.015, 0.010, 0.008, 0.005, 0.002, 0.0005]:
    result = ProximityResult(point_a=np.array([d, 0, 0]), point_b=np.zeros(3),
                             distance=d, colliding=False)
    row = []
    for cls in (ForceClass.CONSTANT_CONTACT, ForceClass.PENETRATION_PROPORTIONAL,
                ForceClass.SPRING_DAMPER):
        cmd = render_force(result, params, cls, stylus_velocity=(-0.05, 0, 0))
        row.append(cmd.magnitude)
    print(f"{d * 1000:8.1f}mm {row[0]:8.2f}N {row[1]:8.2f}N {row[2]:13.2f}N")

print("\npeak clamp: a 12 N command is held to the 6.4 N device maximum")
big = ForceCommand(force=(12.0, 0, 0), force_class=ForceClass.PENETRATION_PROPORTIONAL)
out = clamp_force(big, peak=6.4, continuous=1.4, window_rms=0.0)
print(f"commanded 12.00 N -> served {out.magnitude:.2f} N (clamped={out.clamped})")

print("\nRMS governor: sustained 3 N settles at the 1.4 N continuous rating")
window = ForceRmsWindow(window_ticks=1000)
cmd = ForceCommand(force=(3.0, 0, 0), force_class=ForceClass.PENETRATION_PROPORTIONAL)
for tick in range(2500):
    window.push(cmd.magnitude)
    served = clamp_force(cmd, peak=6.4, continuous=1.4, window_rms=window.rms)
    if tick in (0, 100, 500, 999, 2499):
        print(f"tick {tick:5d}: rms {window.rms:5.2f} N -> served {served.magnitude:.3f} N")
