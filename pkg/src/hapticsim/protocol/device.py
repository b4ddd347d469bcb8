"""The virtual stylus: scripted or externally fed 6-DOF device samples plus
the device-side force pipeline (hold-last command, RMS governor, hard clamp,
force log)."""

from __future__ import annotations

from ..forcefield import ForceClass, ForceCommand, ForceRmsWindow, clamp_force
from ..mapping import DEFAULT_DEVICE, DeviceSpec, StylusState, quantize
from ..transforms import Pose
from .script import StylusScript


class VirtualStylusDevice:
    """Samples stylus state at haptic ticks and applies device force limits.

    The device serves either a script or externally injected poses (UI mode).
    Sampled positions are always quantized to the position-resolution grid and
    clamped to the workspace box. Force commands pass through the RMS governor
    (window of one second of ticks) and the peak clamp; every served force is
    logged for reporting.
    """

    def __init__(self, script: StylusScript | None = None,
                 spec: DeviceSpec = DEFAULT_DEVICE,
                 haptic_hz: int | None = None,
                 keep_force_log: bool = True):
        self.spec = spec
        self.script = script
        self.haptic_hz = int(haptic_hz or spec.haptic_rate)
        self._external_pose = Pose.identity()
        self._external_button = False
        self._commanded = ForceCommand.zero(ForceClass.CONSTANT_CONTACT)
        self._window = ForceRmsWindow(window_ticks=self.haptic_hz)
        self.keep_force_log = keep_force_log
        self.force_log: list[float] = []
        self.served_count = 0
        self.served_sum = 0.0
        self.served_max = 0.0
        self.last_served = ForceCommand.zero(ForceClass.CONSTANT_CONTACT)
        self.last_state: StylusState | None = None

    # -- sampling ----------------------------------------------------------

    def set_external_pose(self, pose: Pose, button: bool) -> None:
        """Feed a live pose (UI bridge mode); used when no script is set."""
        self._external_pose = pose
        self._external_button = bool(button)

    def sample(self, tick: int) -> StylusState:
        if self.script is not None:
            t = tick / self.haptic_hz
            raw_pos, orientation = self.script.sample(t)
            button = self.script.button_state(tick)
        else:
            raw_pos = self._external_pose.position
            orientation = self._external_pose.orientation
            button = self._external_button
        pos, _ = quantize(raw_pos, self.spec)
        state = StylusState(pose=Pose(position=pos, orientation=orientation),
                            button=button, tick=tick)
        self.last_state = state
        return state

    # -- force pipeline ------------------------------------------------------

    def set_commanded_force(self, cmd: ForceCommand) -> None:
        """Install the command held between updates (wire SetForce path)."""
        self._commanded = cmd

    def serve_force(self, cmd: ForceCommand | None = None) -> ForceCommand:
        """Run one haptic tick of the output pipeline and log the result.

        ``cmd`` overrides the held command for this tick (integrated-loop
        path); without it the last SetForce is held.
        """
        if cmd is not None:
            self._commanded = cmd
        commanded = self._commanded
        self._window.push(commanded.magnitude)
        served = clamp_force(commanded, self.spec.peak_force, self.spec.continuous_force,
                             self._window.rms)
        mag = served.magnitude
        self.served_count += 1
        self.served_sum += mag
        self.served_max = max(self.served_max, mag)
        if self.keep_force_log:
            self.force_log.append(mag)
        self.last_served = served
        return served

    @property
    def mean_served_force(self) -> float:
        return self.served_sum / self.served_count if self.served_count else 0.0
