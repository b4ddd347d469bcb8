"""hapticsim: a hardware-free haptic manipulation kernel.

A 1000 Hz virtual-stylus force loop exchanging messages with a simulation
client over a non-blocking socket protocol, driving solids, serial robots,
and a mannequin through a cluttered scene with closest-point proximity
queries, safety-zone force rendering, workspace mapping, and trajectory
recording.
"""

from .transforms import Pose, vec3
from .geometry import (
    CheckGroupPair,
    ConvexShape,
    ProximityResult,
    SceneEntity,
    closest_points,
    distance_in_safety_zone,
    group_min_distance,
)
from .forcefield import ForceClass, ForceCommand, ForceParams, clamp_force, contact_normal, render_force
from .mapping import DeviceSpec, FrameMode, ScaleMode, WorkspaceMapping, engage, map_stylus, quantize

__version__ = "0.1.0"

__all__ = [
    "Pose", "vec3",
    "ConvexShape", "SceneEntity", "CheckGroupPair", "ProximityResult",
    "closest_points", "group_min_distance", "distance_in_safety_zone",
    "ForceClass", "ForceCommand", "ForceParams",
    "contact_normal", "render_force", "clamp_force",
    "DeviceSpec", "FrameMode", "ScaleMode", "WorkspaceMapping",
    "map_stylus", "engage", "quantize",
    "__version__",
]
