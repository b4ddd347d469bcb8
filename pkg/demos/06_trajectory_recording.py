"""Trajectory recording: manual captures, time sampling, distance sampling.

Frames store the driven poses verbatim (no smoothing); auto modes capture on
elapsed time or on traveled path length.
"""

from hapticsim.runtime import Recorder
from hapticsim.transforms import Pose


def feed_line(rec, speed=1.0, duration=1.0, rate=100):
    for k in range(1, int(duration * rate) + 1):
        t = k / rate
        rec.feed(t, "part", Pose.from_xyz(speed * t, 0, 0))
    return rec.disarm(duration, "part", Pose.from_xyz(speed * duration, 0, 0))


print("auto-distance, 0.1 m interval, 1 m straight line:")
rec = Recorder("auto_distance", 0.1)
rec.arm(0.0, "part", Pose.identity())
traj = feed_line(rec)
print(f"  {len(traj.frames)} frames at x = "
      + ", ".join(f"{f.pose.position[0]:.1f}" for f in traj.frames))

print("\nauto-time, 0.25 s interval over 1 s:")
rec = Recorder("auto_time", 0.25)
rec.arm(0.0, "part", Pose.identity())
traj = feed_line(rec)
print(f"  {len(traj.frames)} frames at t = "
      + ", ".join(f"{f.t:.2f}" for f in traj.frames))

print("\nmanual: frames only where the user asks (plus arm and disarm):")
rec = Recorder("manual")
rec.arm(0.0, "part", Pose.identity())
rec.feed(0.2, "part", Pose.from_xyz(0.2, 0, 0))      # passes by silently
rec.capture(0.5, "part", Pose.from_xyz(0.5, 0, 0))   # explicit waypoint
traj = rec.disarm(1.0, "part", Pose.from_xyz(1.0, 0, 0))
print(f"  {len(traj.frames)} frames at x = "
      + ", ".join(f"{f.pose.position[0]:.1f}" for f in traj.frames))

print("\nJSON-lines export, one frame per line:")
print("  " + traj.to_jsonl().replace("\n", "\n  ").rstrip())
