"""Multi-rate orchestration: haptic loop, proximity loop, publish loop.

One deterministic stepper drives three logical tasks from a single clock:

* the haptic task (every tick) samples the virtual stylus and serves force,
  keeping the force coherent with the current stylus pose between proximity
  updates by re-evaluating the last proximity result along its stored normal;
* the proximity task (integer divisor of the haptic rate) runs the exchange
  cycle: map the stylus, drive the selected entity, query the check groups,
  then commit the new pose only when it is collision-free;
* the publish task emits scene snapshots and readouts for observers.

With the simulated clock the tick counts are exact integers of rate times
duration and runs are bit-reproducible; wall-clock mode paces the same loop
and reports jitter statistics instead.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .entities.mannequin import MannequinModel, MannequinState, drive_mannequin, hand_pose
from .entities.robots import (
    IkError,
    RobotModel,
    forward_kinematics,
    inverse_kinematics,
    joint_limit_force,
    limit_force_cartesian,
)
from .entities.solids import PivotMode, move_solid
from .forcefield import (
    DegenerateContactError,
    ForceClass,
    ForceCommand,
    ForceParams,
    contact_normal,
    render_force,
    render_from_gap,
)
from .geometry import CheckGroupPair, ProximityResult, SceneEntity, group_min_distance
from .mapping import (
    DEFAULT_DEVICE,
    DeviceSpec,
    StylusState,
    WorkspaceMapping,
    disengage,
    engage,
    map_stylus,
)
from .protocol.device import VirtualStylusDevice
from .protocol.script import StylusScript
from .protocol.server import HapticServer
from .transforms import Pose, norm, quat_conjugate, quat_multiply, quat_normalize


@dataclass(frozen=True)
class RateConfig:
    """Loop frequencies; proximity and publish rates must divide the haptic rate."""

    haptic_hz: int = 1000
    proximity_hz: int = 100
    publish_hz: int = 10
    clock: str = "simulated"

    def __post_init__(self):
        if not (self.haptic_hz >= self.proximity_hz >= self.publish_hz >= 1):
            raise ValueError("need haptic_hz >= proximity_hz >= publish_hz >= 1")
        if self.haptic_hz % self.proximity_hz or self.haptic_hz % self.publish_hz:
            raise ValueError("proximity and publish rates must divide the haptic rate")
        if self.clock not in ("simulated", "wall"):
            raise ValueError(f"unknown clock {self.clock!r}")

    @property
    def proximity_divisor(self) -> int:
        return self.haptic_hz // self.proximity_hz

    @property
    def publish_divisor(self) -> int:
        return self.haptic_hz // self.publish_hz


# ---------------------------------------------------------------------------
# Trajectory recording
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrajectoryFrame:
    t: float
    entity_id: str
    pose: Pose


@dataclass(frozen=True)
class Trajectory:
    mode: str                      # "manual" | "auto_time" | "auto_distance"
    value: float | None            # dt (s) or d (m) for the auto modes
    frames: tuple

    def to_jsonl(self) -> str:
        lines = []
        for f in self.frames:
            lines.append(json.dumps({
                "t": f.t,
                "entity_id": f.entity_id,
                "position": [float(c) for c in f.pose.position],
                "quaternion": [float(c) for c in f.pose.orientation],
            }))
        return "\n".join(lines) + ("\n" if lines else "")


class Recorder:
    """Captures entity poses per the armed mode; frames are stored verbatim.

    Auto-time captures when the elapsed time since the last frame reaches the
    interval; auto-distance when the traveled path length does. The first
    frame is captured at arm and the final pose is appended at disarm. No
    smoothing of any kind is applied. The mode is fixed while armed.
    """

    EPS = 1e-12

    def __init__(self, mode: str, value: float | None = None):
        if mode not in ("manual", "auto_time", "auto_distance"):
            raise ValueError(f"unknown recording mode {mode!r}")
        if mode != "manual" and not (value and value > 0):
            raise ValueError(f"{mode} needs a positive interval")
        self.mode = mode
        self.value = value
        self.armed = False
        self._frames: list[TrajectoryFrame] = []
        self._last_capture_t = None
        self._path_since_capture = 0.0
        self._prev_pos = None

    def set_mode(self, mode: str, value: float | None = None) -> None:
        if self.armed:
            raise RuntimeError("cannot change the recording mode while armed")
        self.__init__(mode, value)

    def arm(self, t: float, entity_id: str, pose: Pose) -> None:
        if self.armed:
            raise RuntimeError("recorder already armed")
        self.armed = True
        self._frames = [TrajectoryFrame(t=t, entity_id=entity_id, pose=pose)]
        self._last_capture_t = t
        self._path_since_capture = 0.0
        self._prev_pos = pose.position

    def _capture(self, t: float, entity_id: str, pose: Pose) -> None:
        self._frames.append(TrajectoryFrame(t=t, entity_id=entity_id, pose=pose))
        self._last_capture_t = t
        self._path_since_capture = 0.0

    def feed(self, t: float, entity_id: str, pose: Pose) -> None:
        """Offer the current pose to the armed auto modes."""
        if not self.armed:
            return
        if self._prev_pos is not None:
            self._path_since_capture += norm(pose.position - self._prev_pos)
        self._prev_pos = pose.position
        if self.mode == "auto_time":
            if t - self._last_capture_t >= self.value - self.EPS:
                self._capture(t, entity_id, pose)
        elif self.mode == "auto_distance":
            if self._path_since_capture >= self.value - self.EPS:
                self._capture(t, entity_id, pose)

    def capture(self, t: float, entity_id: str, pose: Pose) -> None:
        """Explicit user capture (manual mode)."""
        if not self.armed:
            raise RuntimeError("recorder not armed")
        self._capture(t, entity_id, pose)

    def disarm(self, t: float, entity_id: str, pose: Pose) -> Trajectory:
        if not self.armed:
            raise RuntimeError("recorder not armed")
        if t > self._last_capture_t + self.EPS:
            self._frames.append(TrajectoryFrame(t=t, entity_id=entity_id, pose=pose))
        self.armed = False
        return Trajectory(mode=self.mode, value=self.value, frames=tuple(self._frames))


# ---------------------------------------------------------------------------
# Force coherence between proximity updates
# ---------------------------------------------------------------------------

def interpolate_force(last: ProximityResult | None, last_mapped_pose: Pose | None,
                      current_mapped_pose: Pose, params: ForceParams,
                      force_class: ForceClass, fallback_normal=None,
                      velocity=None) -> ForceCommand:
    """Force for the current stylus pose from the last proximity result.

    The separation is re-estimated along the stored contact normal: moving
    the mapped pose along +normal (away from the environment) widens the
    effective distance, moving against it narrows it; tangential motion
    leaves the force unchanged. With no prior result the force is zero.
    """
    if last is None or last_mapped_pose is None:
        return ForceCommand.zero(force_class)
    try:
        n = contact_normal(last, fallback=fallback_normal)
    except DegenerateContactError:
        return ForceCommand.zero(force_class)
    displacement = current_mapped_pose.position - last_mapped_pose.position
    effective = max(0.0, last.distance + float(displacement @ n))
    return render_from_gap(effective, n, params, force_class, velocity)


# ---------------------------------------------------------------------------
# Entity drivers
# ---------------------------------------------------------------------------

class SolidDriver:
    """Drives one rigid entity; rotations act about the configured pivot."""

    def __init__(self, entity_id: str, pivot: PivotMode | None = None):
        self.entity_id = entity_id
        self.pivot = pivot or PivotMode.self_origin()
        self._pending = None

    def anchor_pose(self, core) -> Pose:
        return core.entities[self.entity_id].pose

    def propose(self, core, mapped: Pose) -> Pose:
        anchor = core.mapping.anchor_scene
        entity_at_anchor = core.entities[self.entity_id].with_pose(anchor)
        if (np.array_equal(mapped.position, anchor.position)
                and np.array_equal(mapped.orientation, anchor.orientation)):
            self._pending = anchor
            return anchor
        dq = quat_normalize(quat_multiply(mapped.orientation, quat_conjugate(anchor.orientation)))
        dp = mapped.position - anchor.position
        candidate = move_solid(entity_at_anchor, self.pivot, Pose(position=dp, orientation=dq))
        self._pending = candidate
        return candidate

    def commit(self, core) -> None:
        core.entities[self.entity_id] = core.entities[self.entity_id].with_pose(self._pending)

    def extra_force(self, core):
        return None


class RobotDriver:
    """Drives a serial robot by its base (rigid) or its TCP (nearest-branch IK).

    The scene marker entity carries the moving geometry checked against the
    environment: the base body in base mode, the effector in TCP mode. Joint
    limit zones contribute a Cartesian resistance mapped through the Jacobian.
    """

    def __init__(self, entity_id: str, model: RobotModel, q0=None,
                 limit_zone: float = 0.15, limit_gain: float = 40.0,
                 force_branch: int | None = None):
        self.entity_id = entity_id
        self.model = model
        self.q = model.check_q(q0) if q0 is not None else np.zeros(model.dof)
        self.limit_zone = limit_zone
        self.limit_gain = limit_gain
        self.force_branch = force_branch
        self._pending_q = None
        self._pending_base = None

    def tool_pose(self) -> Pose:
        return forward_kinematics(self.model, self.q, check_limits=False)

    def anchor_pose(self, core) -> Pose:
        if self.model.attach_mode == "base":
            return self.model.base_pose
        return self.tool_pose()

    def propose(self, core, mapped: Pose) -> Pose:
        if self.model.attach_mode == "base":
            self._pending_base = mapped
            self._pending_q = None
            return mapped
        anchor = core.mapping.anchor_scene
        if (self.force_branch is None
                and np.array_equal(mapped.position, anchor.position)
                and np.array_equal(mapped.orientation, anchor.orientation)):
            self._pending_q = self.q.copy()
            return core.entities[self.entity_id].pose
        q_new = inverse_kinematics(self.model, mapped, self.q, force_branch=self.force_branch)
        self._pending_q = q_new
        self._pending_base = None
        return forward_kinematics(self.model, q_new, check_limits=False)

    def commit(self, core) -> None:
        if self._pending_base is not None:
            self.model = replace(self.model, base_pose=self._pending_base)
            pose = self._pending_base
        else:
            self.q = self._pending_q
            pose = forward_kinematics(self.model, self.q, check_limits=False)
        core.entities[self.entity_id] = core.entities[self.entity_id].with_pose(pose)

    def extra_force(self, core):
        if self.model.attach_mode != "tcpf":
            return None
        depths = joint_limit_force(self.model, self.q, self.limit_zone)
        if not np.any(depths):
            return None
        return limit_force_cartesian(self.model, self.q, depths, self.limit_gain)


class MannequinDriver:
    """Drives the mannequin wholly or by one/both hands.

    In ``both`` mode the single mapped target feeds both hands. The scene
    marker entity tracks the driven frame (root or primary hand).
    """

    def __init__(self, entity_id: str, model: MannequinModel,
                 state: MannequinState | None = None, target_mode: str = "right"):
        if target_mode not in ("left", "right", "both", "whole_body"):
            raise ValueError(f"unknown mannequin target mode {target_mode!r}")
        self.entity_id = entity_id
        self.model = model
        self.state = state or MannequinState(root_pose=Pose.identity(), q=model.neutral_q())
        self.target_mode = target_mode
        self._pending = None
        self.last_report = None

    def _primary_hand(self) -> str:
        return "left_hand" if self.target_mode in ("left", "both") else "right_hand"

    def anchor_pose(self, core) -> Pose:
        if self.target_mode == "whole_body":
            return self.state.root_pose
        return hand_pose(self.model, self.state.q, self._primary_hand(), self.state.root_pose)

    def propose(self, core, mapped: Pose) -> Pose:
        if self.target_mode == "whole_body":
            report = drive_mannequin(self.model, "whole_body", mapped, self.state)
        elif self.target_mode == "both":
            report = drive_mannequin(self.model, "both", (mapped, mapped), self.state)
        else:
            report = drive_mannequin(self.model, self.target_mode, mapped, self.state)
        self._pending = report.state
        self.last_report = report
        if self.target_mode == "whole_body":
            return report.state.root_pose
        return hand_pose(self.model, report.state.q, self._primary_hand(), report.state.root_pose)

    def commit(self, core) -> None:
        self.state = self._pending
        pose = self.anchor_pose(core)
        core.entities[self.entity_id] = core.entities[self.entity_id].with_pose(pose)

    def extra_force(self, core):
        return None


# ---------------------------------------------------------------------------
# Simulation core (the exchange cycle)
# ---------------------------------------------------------------------------

class SimulationCore:
    """Client-side state of the exchange cycle, transport-agnostic.

    Owns the scene, the workspace mapping, the entity driver, and the most
    recent proximity context (result, its mapped pose, the last valid
    normal). One call to :meth:`on_stylus` is one cycle of the communication
    scheme: map, drive, check, then either commit or render the obstacle.
    """

    def __init__(self, entities, check_pair: CheckGroupPair | None, driver,
                 mapping: WorkspaceMapping, params: ForceParams, force_class: ForceClass,
                 camera: Pose | None = None, viewport_extent: float | None = None,
                 device_spec: DeviceSpec = DEFAULT_DEVICE, recorder: Recorder | None = None):
        self.entities = {e.id: e for e in entities}
        if driver.entity_id not in self.entities:
            raise ValueError(f"driver entity {driver.entity_id!r} not in scene")
        self.check_pair = check_pair
        self.driver = driver
        self.mapping = mapping
        self.params = params
        self.force_class = force_class
        self.camera = camera
        self.viewport_extent = viewport_extent
        self.device_spec = device_spec
        self.recorder = recorder

        self.last_result: ProximityResult | None = None
        self.last_result_mapped: Pose | None = None
        self.last_normal = None
        self.held_extra_force = None
        self.committed = 0
        self.rejected = 0
        self.drive_errors = 0
        self.error_log: list[str] = []
        self.min_commit_distance = math.inf
        self._button = False
        self._prev_cycle = None     # (t, mapped position) for cycle-rate velocity

    # -- helpers ---------------------------------------------------------------

    def entity(self) -> SceneEntity:
        return self.entities[self.driver.entity_id]

    def scene(self) -> list:
        return list(self.entities.values())

    def map_current(self, state: StylusState):
        return map_stylus(state, self.mapping, self.camera, self.viewport_extent,
                          self.device_spec)

    def snapshot(self):
        return [(e.id, tuple(e.pose.to_list7())) for e in self.entities.values()]

    def _cycle_velocity(self, t: float, mapped_pos):
        if self._prev_cycle is None:
            v = np.zeros(3)
        else:
            t0, p0 = self._prev_cycle
            dt = t - t0
            v = (mapped_pos - p0) / dt if dt > 0 else np.zeros(3)
        self._prev_cycle = (t, mapped_pos.copy())
        return v

    def _proximity(self, candidate_pose: Pose | None) -> ProximityResult | None:
        if self.check_pair is None:
            return None
        if candidate_pose is None:
            scene = self.scene()
        else:
            scene = [e if e.id != self.driver.entity_id else e.with_pose(candidate_pose)
                     for e in self.entities.values()]
        return group_min_distance(scene, self.check_pair)

    # -- the exchange cycle ------------------------------------------------------

    def on_stylus(self, t: float, state: StylusState) -> dict:
        """One cycle; returns {'force', 'committed', 'result', 'engaged'}."""
        was_pressed = self._button
        self._button = state.button
        if state.button and not was_pressed:
            self.mapping = engage(self.mapping, state, self.driver.anchor_pose(self))
        elif was_pressed and not state.button:
            self.mapping = disengage(self.mapping)

        outcome = {"force": None, "committed": False, "result": self.last_result,
                   "engaged": self.mapping.engaged, "t": t}

        if not self.mapping.engaged:
            # keep readouts fresh while idle; the entity does not move
            result = self._proximity(None)
            if result is not None:
                self._absorb_result(result, None)
                outcome["result"] = result
            if self.recorder is not None:
                self.recorder.feed(t, self.driver.entity_id, self.entity().pose)
            return outcome

        mapped = self.map_current(state)
        velocity = self._cycle_velocity(t, mapped.pose.position)

        try:
            candidate = self.driver.propose(self, mapped.pose)
        except IkError as exc:
            self.drive_errors += 1
            outcome["drive_error"] = exc.kind
            outcome["force"] = self._workspace_obstacle_force(exc, mapped.pose)
            if self.recorder is not None:
                self.recorder.feed(t, self.driver.entity_id, self.entity().pose)
            return outcome
        except Exception as exc:  # driver fault: log it, hold pose, zero force
            self.drive_errors += 1
            self.error_log.append(f"t={t:.3f}: {type(exc).__name__}: {exc}")
            del self.error_log[:-50]
            outcome["drive_error"] = "fault"
            outcome["force"] = ForceCommand.zero(self.force_class)
            if self.recorder is not None:
                self.recorder.feed(t, self.driver.entity_id, self.entity().pose)
            return outcome

        result = self._proximity(candidate)
        force = None
        if result is None or not result.colliding:
            self.driver.commit(self)
            self.committed += 1
            if result is not None:
                self.min_commit_distance = min(self.min_commit_distance, result.distance)
            outcome["committed"] = True
        else:
            self.rejected += 1

        if result is not None:
            self._absorb_result(result, mapped.pose)
            outcome["result"] = result
            try:
                force = render_force(result, self.params, self.force_class,
                                     stylus_velocity=velocity, fallback_normal=self.last_normal)
            except DegenerateContactError:
                force = ForceCommand.zero(self.force_class)

        extra = self.driver.extra_force(self)
        self.held_extra_force = extra
        if extra is not None:
            base = force.force if force is not None else np.zeros(3)
            force = ForceCommand(force=base + extra, force_class=self.force_class)

        if self.recorder is not None:
            self.recorder.feed(t, self.driver.entity_id, self.entity().pose)

        outcome["force"] = force
        return outcome

    def on_stylus_wire(self, t: float, pose_msg) -> dict:
        """Adapter for the wire client: StylusPose message -> cycle."""
        state = StylusState(
            pose=Pose(position=np.array(pose_msg.position),
                      orientation=np.array(pose_msg.quaternion)),
            button=bool(pose_msg.button),
            tick=pose_msg.tick,
        )
        return self.on_stylus(t, state)

    def on_connection_lost(self) -> None:
        """Drop the clutch after a transport loss; scene state is preserved.

        The next cycle with the button held re-engages with fresh anchors, so
        the first committed pose after a reconnect equals the last one before
        the drop.
        """
        self.mapping = disengage(self.mapping)
        self._button = False
        self._prev_cycle = None

    def _absorb_result(self, result: ProximityResult, mapped_pose: Pose | None) -> None:
        self.last_result = result
        self.last_result_mapped = mapped_pose
        if not result.colliding:
            try:
                self.last_normal = contact_normal(result)
            except DegenerateContactError:
                pass

    def _workspace_obstacle_force(self, exc: IkError, target: Pose) -> ForceCommand:
        """Render an unreachable/limit IK failure as an obstacle at the boundary."""
        reach = forward_kinematics(self.driver.model, exc.best_q, check_limits=False)
        err = reach.position - target.position
        err_norm = norm(err)
        if err_norm < 1e-12:
            return ForceCommand.zero(self.force_class)
        depth = min(self.params.margin, err_norm)
        return render_from_gap(self.params.margin - depth, err / err_norm,
                               self.params, self.force_class)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    haptic_ticks: int
    proximity_ticks: int
    snapshots: int
    committed: int
    rejected: int
    drive_errors: int
    max_force: float
    mean_force: float
    min_distance: float | None
    duration: float
    clock: str
    jitter: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "haptic_ticks": self.haptic_ticks,
            "proximity_ticks": self.proximity_ticks,
            "snapshots": self.snapshots,
            "committed": self.committed,
            "rejected": self.rejected,
            "drive_errors": self.drive_errors,
            "force": {"max": self.max_force, "mean": self.mean_force},
            "min_distance": self.min_distance,
            "duration": self.duration,
            "clock": self.clock,
            "jitter": self.jitter,
        }
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


@dataclass
class RunResult:
    report: RunReport
    trajectory: Trajectory | None
    snapshots: list


# ---------------------------------------------------------------------------
# Session
# ---------------------------------------------------------------------------

@dataclass
class RunSetup:
    """Everything a session needs; assembled by the scenario loader or tests."""

    entities: list
    driver: object
    check_pair: CheckGroupPair | None = None
    mapping: WorkspaceMapping = field(default_factory=WorkspaceMapping)
    camera: Pose | None = None
    viewport_extent: float | None = None
    params: ForceParams = field(default_factory=ForceParams)
    force_class: ForceClass = ForceClass.PENETRATION_PROPORTIONAL
    script: StylusScript | None = None
    rates: RateConfig = field(default_factory=RateConfig)
    duration: float = 1.0
    device_spec: DeviceSpec = DEFAULT_DEVICE
    trajectory: tuple | None = None          # (mode, value)
    serve: tuple | None = None               # (host, port) to expose the device
    keep_force_log: bool = True


class Session:
    """One run: device + simulation core + optional wire server + recorder."""

    def __init__(self, setup: RunSetup):
        self.setup = setup
        self.rates = setup.rates
        self.device = VirtualStylusDevice(
            script=setup.script, spec=setup.device_spec,
            haptic_hz=setup.rates.haptic_hz, keep_force_log=setup.keep_force_log)
        recorder = None
        if setup.trajectory is not None:
            mode, value = setup.trajectory
            recorder = Recorder(mode, value)
        self.core = SimulationCore(
            entities=setup.entities, check_pair=setup.check_pair, driver=setup.driver,
            mapping=setup.mapping, params=setup.params, force_class=setup.force_class,
            camera=setup.camera, viewport_extent=setup.viewport_extent,
            device_spec=setup.device_spec, recorder=recorder)
        self.recorder = recorder
        self.server = None
        if setup.serve is not None:
            host, port = setup.serve
            self.server = HapticServer(self.device, host=host, port=port)
        self.observers = []
        self.snapshots = []
        self.proximity_ticks = 0
        self.publish_count = 0
        self.haptic_ticks = 0
        self._prev_mapped_pos = None
        self._prev_t = None
        self._jitter_samples = []

    # -- observer plumbing (publish task) ------------------------------------

    def add_observer(self, callback) -> None:
        self.observers.append(callback)

    def _emit(self, event: dict) -> None:
        for obs in self.observers:
            obs(event)

    # -- the three tasks, one haptic tick ----------------------------------------

    def tick(self, n: int) -> None:
        t = n / self.rates.haptic_hz
        state = self.device.sample(n)

        if n % self.rates.proximity_divisor == 0:
            self.core.on_stylus(t, state)
            self.proximity_ticks += 1

        cmd = self._haptic_force(t, state)
        self.device.serve_force(cmd)
        if self.server is not None:
            self.server.poll()

        if n % self.rates.publish_divisor == 0:
            self._publish(t)
        self.haptic_ticks += 1

    def _haptic_force(self, t: float, state: StylusState) -> ForceCommand:
        core = self.core
        if not core.mapping.engaged:
            self._prev_mapped_pos = None
            return ForceCommand.zero(core.force_class)
        mapped = core.map_current(state)
        if self._prev_mapped_pos is None or self._prev_t is None or t <= self._prev_t:
            velocity = np.zeros(3)
        else:
            velocity = (mapped.pose.position - self._prev_mapped_pos) / (t - self._prev_t)
        self._prev_mapped_pos = mapped.pose.position
        self._prev_t = t
        cmd = interpolate_force(core.last_result, core.last_result_mapped, mapped.pose,
                                core.params, core.force_class,
                                fallback_normal=core.last_normal, velocity=velocity)
        if core.held_extra_force is not None:
            cmd = ForceCommand(force=cmd.force + core.held_extra_force,
                               force_class=core.force_class)
        return cmd

    def _publish(self, t: float) -> None:
        poses = self.core.snapshot()
        self.snapshots.append({"t": t, "poses": poses})
        self.publish_count += 1
        if self.observers:
            self._emit({"type": "snapshot", "t": t,
                        "poses": [{"id": eid, "pose": list(p7)} for eid, p7 in poses]})
            served = self.device.last_served
            self._emit({"type": "force", "t": t,
                        "vector": [float(c) for c in served.force],
                        "magnitude": served.magnitude, "clamped": served.clamped})
            result = self.core.last_result
            if result is not None:
                self._emit({"type": "proximity", "t": t,
                            "distance": result.distance,
                            "colliding": result.colliding,
                            "point_a": [float(c) for c in result.point_a],
                            "point_b": [float(c) for c in result.point_b],
                            "pair": list(result.pair) if result.pair else None})

    # -- full runs ------------------------------------------------------------

    def run(self, duration: float | None = None, on_tick=None) -> RunResult:
        duration = self.setup.duration if duration is None else duration
        total = round(duration * self.rates.haptic_hz)
        wall = self.rates.clock == "wall"
        period = 1.0 / self.rates.haptic_hz
        start = time.perf_counter()

        if self.recorder is not None and not self.recorder.armed:
            self.recorder.arm(0.0, self.core.driver.entity_id, self.core.entity().pose)

        for n in range(total):
            self.tick(n)
            if on_tick is not None:
                on_tick(n, self)
            if wall:
                deadline = start + (n + 1) * period
                now = time.perf_counter()
                self._jitter_samples.append(now - (start + n * period) - period)
                if deadline > now:
                    time.sleep(deadline - now)

        t_end = total / self.rates.haptic_hz
        trajectory = None
        if self.recorder is not None and self.recorder.armed:
            trajectory = self.recorder.disarm(t_end, self.core.driver.entity_id,
                                              self.core.entity().pose)

        jitter = None
        if wall and self._jitter_samples:
            samples = np.abs(np.array(self._jitter_samples))
            jitter = {"mean": float(samples.mean()),
                      "p99": float(np.percentile(samples, 99)),
                      "max": float(samples.max())}

        report = RunReport(
            haptic_ticks=self.haptic_ticks,
            proximity_ticks=self.proximity_ticks,
            snapshots=self.publish_count,
            committed=self.core.committed,
            rejected=self.core.rejected,
            drive_errors=self.core.drive_errors,
            max_force=self.device.served_max,
            mean_force=self.device.mean_served_force,
            min_distance=(None if math.isinf(self.core.min_commit_distance)
                          else self.core.min_commit_distance),
            duration=duration,
            clock=self.rates.clock,
            jitter=jitter,
        )
        return RunResult(report=report, trajectory=trajectory, snapshots=self.snapshots)

    def close(self) -> None:
        if self.server is not None:
            self.server.close()


def run(setup: RunSetup, on_tick=None) -> RunResult:
    """Execute a scenario to completion (simulated or wall clock)."""
    session = Session(setup)
    try:
        return session.run(on_tick=on_tick)
    finally:
        session.close()
