"""Force rendering: proximity result -> 3-DOF force command on the stylus.

Three rendering classes are supported:

* constant-contact: a fixed-magnitude repulsion that only signals presence
  or absence of contact;
* penetration-proportional: a linear spring on the safety-zone penetration,
  weighted by a per-entity mass factor;
* spring-damper: the spring plus normal-direction damping whose strength
  fades with penetration depth, so the force stays continuous at the zone
  boundary (a Hunt-Crossley-style gate; see ``render_force``).

The device has no torque output, so commands are pure forces. Magnitudes
are limited twice: a hard peak clamp and an RMS governor that holds the
sustained output at the device's continuous rating.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .geometry import ProximityResult, distance_in_safety_zone
from .transforms import as_vec3, norm


class DegenerateContactError(ValueError):
    """Raised when no contact normal can be derived (coincident points)."""


class ForceClass(Enum):
    CONSTANT_CONTACT = "constant_contact"
    PENETRATION_PROPORTIONAL = "penetration_proportional"
    SPRING_DAMPER = "spring_damper"


@dataclass(frozen=True)
class ForceParams:
    """Tunable force law parameters; margin is the safety-zone width."""

    margin: float = 0.005
    constant_magnitude: float = 2.0
    stiffness: float = 200.0
    damping: float = 5.0
    mass_scale: float = 1.0

    def __post_init__(self):
        if not (self.margin > 0.0):
            raise ValueError(f"margin must be positive, got {self.margin}")
        for name in ("constant_magnitude", "stiffness", "damping", "mass_scale"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class ForceCommand:
    force: np.ndarray
    force_class: ForceClass
    clamped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "force", as_vec3(self.force))

    @property
    def magnitude(self) -> float:
        return norm(self.force)

    @staticmethod
    def zero(force_class: ForceClass) -> "ForceCommand":
        return ForceCommand(force=np.zeros(3), force_class=force_class, clamped=False)


ZERO_VELOCITY = np.zeros(3)


def contact_normal(result: ProximityResult, fallback=None) -> np.ndarray:
    """Unit normal from the environment point toward the manipulated entity.

    During full collision the two points coincide and the construction is
    undefined; the caller may supply the last valid normal as ``fallback``.
    """
    d = result.point_a - result.point_b
    n2 = float(d @ d)
    if n2 > 1e-24:
        return d / np.sqrt(n2)
    if fallback is not None:
        f = as_vec3(fallback)
        m = norm(f)
        if m > 1e-12:
            return f / m
    raise DegenerateContactError("degenerate contact: coincident closest points and no fallback normal")


def render_from_gap(gap: float, normal: np.ndarray, params: ForceParams,
                    force_class: ForceClass, stylus_velocity=None) -> ForceCommand:
    """Render a force from an effective separation distance and a unit normal.

    ``gap`` is the current distance to the environment (>= 0); penetration
    into the safety zone is ``max(0, margin - gap)``.
    """
    p = max(0.0, params.margin - max(0.0, gap))
    if p <= 0.0:
        return ForceCommand.zero(force_class)

    n = normal
    if force_class is ForceClass.CONSTANT_CONTACT:
        return ForceCommand(force=params.constant_magnitude * n, force_class=force_class)

    if force_class is ForceClass.PENETRATION_PROPORTIONAL:
        mag = params.mass_scale * params.stiffness * p
        return ForceCommand(force=mag * n, force_class=force_class)

    # spring-damper: damping acts on the normal velocity component only and is
    # gated by relative penetration so |F| -> 0 at the zone boundary; the
    # normal component is floored at zero so the field never pulls inward.
    v = ZERO_VELOCITY if stylus_velocity is None else as_vec3(stylus_velocity)
    v_n = float(v @ n)
    mag = params.mass_scale * (params.stiffness * p - params.damping * (p / params.margin) * v_n)
    return ForceCommand(force=max(0.0, mag) * n, force_class=force_class)


def render_force(result: ProximityResult, params: ForceParams, force_class: ForceClass,
                 stylus_velocity=None, fallback_normal=None) -> ForceCommand:
    """Convert a proximity result into a force command (unclamped)."""
    p = distance_in_safety_zone(result, params.margin)
    if p <= 0.0:
        return ForceCommand.zero(force_class)
    n = contact_normal(result, fallback=fallback_normal)
    return render_from_gap(result.distance, n, params, force_class, stylus_velocity)


def clamp_force(cmd: ForceCommand, peak: float, continuous: float, window_rms: float) -> ForceCommand:
    """Apply the device force limits: hard peak clamp plus RMS governor.

    The governor scales the magnitude by ``continuous / window_rms`` whenever
    the running RMS of recent commanded magnitudes exceeds the continuous
    rating. Direction is always preserved.
    """
    if not (peak >= continuous > 0.0):
        raise ValueError(f"need peak >= continuous > 0, got peak={peak} continuous={continuous}")
    mag = cmd.magnitude
    if mag == 0.0:
        return cmd
    scaled = min(mag, peak)
    if window_rms > continuous:
        scaled *= continuous / window_rms
    if scaled == mag:
        return replace(cmd, clamped=False)
    force = cmd.force * (scaled / mag)
    # float rescaling can spill past the cap by an ulp; the device limit is
    # hard, so squeeze the vector back under it
    out = float(np.sqrt(force @ force))
    while out > peak:
        force = force * (peak / out)
        out = float(np.sqrt(force @ force))
    return ForceCommand(force=force, force_class=cmd.force_class, clamped=True)


class ForceRmsWindow:
    """Running RMS of commanded force magnitudes over a fixed tick window.

    The window is zero-filled at start, so the RMS always averages over the
    full window span ("the last second"): a brief spike barely moves it and
    the peak clamp alone applies, while sustained overdrive raises the RMS
    until the governor holds the output at the continuous rating. Owned by
    the single haptic-loop context; one sample per haptic tick.
    """

    def __init__(self, window_ticks: int = 1000):
        if window_ticks < 1:
            raise ValueError("window must hold at least one tick")
        self.window_ticks = window_ticks
        self._samples = deque(maxlen=window_ticks)
        self._sum_sq = 0.0

    def push(self, magnitude: float) -> None:
        if len(self._samples) == self._samples.maxlen:
            self._sum_sq -= self._samples[0]
        sq = magnitude * magnitude
        self._samples.append(sq)
        self._sum_sq += sq

    @property
    def rms(self) -> float:
        if not self._samples:
            return 0.0
        return float(np.sqrt(max(0.0, self._sum_sq) / self.window_ticks))

    def __len__(self):
        return len(self._samples)
