"""Scripted motion source for the virtual stylus.

A script is a chain of timed segments (hold, line, arc, sinusoid) producing
device-frame positions, plus a list of button press/release events in haptic
ticks. Positions are quantized to the device grid by the device layer; a
script is valid only if its sampled positions stay inside the workspace box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..mapping import DeviceSpec, DEFAULT_DEVICE, quantize
from ..transforms import as_quat, as_vec3, quat_identity, unit

SEGMENT_KINDS = ("hold", "line", "arc", "sinusoid")


@dataclass(frozen=True)
class ScriptSegment:
    kind: str
    duration: float
    params: dict
    orientation: np.ndarray = field(default_factory=quat_identity)

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if not (self.duration > 0):
            raise ValueError(f"segment duration must be positive, got {self.duration}")
        object.__setattr__(self, "orientation", as_quat(self.orientation))
        p = dict(self.params)
        if self.kind == "hold":
            p["position"] = as_vec3(p["position"])
        elif self.kind == "line":
            p["start"] = as_vec3(p["start"])
            p["end"] = as_vec3(p["end"])
        elif self.kind == "arc":
            p["center"] = as_vec3(p["center"])
            p["axis"] = unit(as_vec3(p["axis"]))
            p["radius"] = float(p["radius"])
            p["start_angle"] = float(p.get("start_angle", 0.0))
            p["sweep"] = float(p["sweep"])
        else:
            p["base"] = as_vec3(p["base"])
            p["amplitude"] = as_vec3(p["amplitude"])
            p["frequency"] = float(p["frequency"])
            p["phase"] = float(p.get("phase", 0.0))
        object.__setattr__(self, "params", p)

    def position_at(self, tau: float) -> np.ndarray:
        """Position at local time tau in [0, duration]."""
        p = self.params
        if self.kind == "hold":
            return p["position"]
        if self.kind == "line":
            u = min(1.0, max(0.0, tau / self.duration))
            return p["start"] + u * (p["end"] - p["start"])
        if self.kind == "arc":
            u = min(1.0, max(0.0, tau / self.duration))
            angle = p["start_angle"] + u * p["sweep"]
            axis = p["axis"]
            # orthonormal basis of the arc plane
            ref = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
            e1 = unit(np.cross(axis, ref))
            e2 = np.cross(axis, e1)
            return p["center"] + p["radius"] * (math.cos(angle) * e1 + math.sin(angle) * e2)
        return p["base"] + p["amplitude"] * math.sin(
            2.0 * math.pi * p["frequency"] * tau + p["phase"])


@dataclass(frozen=True)
class StylusScript:
    segments: tuple
    button_events: tuple = ()       # ((tick, "press" | "release"), ...)

    def __post_init__(self):
        segments = tuple(self.segments)
        if not segments:
            raise ValueError("script needs at least one segment")
        events = tuple((int(t), a) for t, a in self.button_events)
        for tick, action in events:
            if action not in ("press", "release"):
                raise ValueError(f"unknown button action {action!r}")
            if tick < 0:
                raise ValueError("button event ticks must be >= 0")
        if any(events[i][0] > events[i + 1][0] for i in range(len(events) - 1)):
            raise ValueError("button events must be tick-ordered")
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "button_events", events)

    @property
    def duration(self) -> float:
        return sum(s.duration for s in self.segments)

    def sample(self, t: float):
        """(position, orientation) at script time t; holds the end pose after."""
        remaining = t
        for seg in self.segments:
            if remaining <= seg.duration:
                return seg.position_at(remaining), seg.orientation
            remaining -= seg.duration
        last = self.segments[-1]
        return last.position_at(last.duration), last.orientation

    def button_state(self, tick: int) -> bool:
        pressed = False
        for ev_tick, action in self.button_events:
            if ev_tick > tick:
                break
            pressed = action == "press"
        return pressed

    def validate_workspace(self, spec: DeviceSpec = DEFAULT_DEVICE, samples_per_segment: int = 64):
        """Workspace violations as diagnostics: (segment_index, time, position)."""
        bad = []
        t_base = 0.0
        for i, seg in enumerate(self.segments):
            for k in range(samples_per_segment + 1):
                tau = seg.duration * k / samples_per_segment
                pos = seg.position_at(tau)
                _, clamped = quantize(pos, spec)
                if clamped:
                    bad.append((i, t_base + tau, pos))
                    break
            t_base += seg.duration
        return bad


def script_from_dict(data: dict) -> StylusScript:
    segments = []
    for sd in data["segments"]:
        params = {k: v for k, v in sd.items() if k not in ("kind", "duration", "orientation")}
        segments.append(ScriptSegment(
            kind=sd["kind"],
            duration=float(sd["duration"]),
            params=params,
            orientation=as_quat(sd.get("orientation", (1.0, 0.0, 0.0, 0.0))),
        ))
    events = tuple((int(t), str(a)) for t, a in data.get("button", ()))
    return StylusScript(segments=tuple(segments), button_events=events)


def hold_script(position=(0.0, 0.0, 0.0), duration: float = 3600.0) -> StylusScript:
    return StylusScript(segments=(ScriptSegment(kind="hold", duration=duration,
                                                params={"position": position}),))
