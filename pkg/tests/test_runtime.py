from dataclasses import replace

import numpy as np
import pytest

from hapticsim.forcefield import ForceClass, ForceParams, render_force
from hapticsim.geometry import CheckGroupPair, ConvexShape, ProximityResult, SceneEntity
from hapticsim.mapping import ScaleMode, WorkspaceMapping
from hapticsim.protocol.script import ScriptSegment, StylusScript
from hapticsim.runtime import (
    RateConfig,
    Recorder,
    RunSetup,
    Session,
    SolidDriver,
    interpolate_force,
    run,
)
from hapticsim.transforms import Pose, vec3

from oracles import brute_force_distance


# -- rate config ---------------------------------------------------------------

def test_rate_defaults():
    rates = RateConfig()
    assert rates.haptic_hz == 1000
    assert rates.proximity_divisor == 10
    assert rates.publish_divisor == 100


def test_rate_validation():
    with pytest.raises(ValueError):
        RateConfig(haptic_hz=1000, proximity_hz=2000)
    with pytest.raises(ValueError):
        RateConfig(haptic_hz=1000, proximity_hz=300)
    with pytest.raises(ValueError):
        RateConfig(clock="gps")


# -- recorder --------------------------------------------------------------------

def pose_x(x):
    return Pose.from_xyz(x, 0.0, 0.0)


def test_auto_distance_line_11_frames():
    rec = Recorder("auto_distance", 0.1)
    rec.arm(0.0, "e", pose_x(0.0))
    # constant speed 1 m/s, fed at 100 Hz
    for k in range(1, 100):
        rec.feed(k * 0.01, "e", pose_x(k * 0.01))
    traj = rec.disarm(1.0, "e", pose_x(1.0))
    assert len(traj.frames) == 11
    xs = [f.pose.position[0] for f in traj.frames]
    assert xs[0] == 0.0 and xs[-1] == pytest.approx(1.0, abs=1e-12)
    spacing = np.diff(xs)
    assert np.all(spacing >= 0.1 - 1e-9)


def test_auto_time_11_frames():
    rec = Recorder("auto_time", 0.1)
    rec.arm(0.0, "e", pose_x(0.0))
    for k in range(1, 100):
        rec.feed(k * 0.01, "e", pose_x(k * 0.001))
    traj = rec.disarm(1.0, "e", pose_x(0.1))
    assert len(traj.frames) == 11
    times = [f.t for f in traj.frames]
    assert times == pytest.approx([0.1 * i for i in range(11)], abs=1e-9)


def test_stationary_auto_distance_two_frames():
    rec = Recorder("auto_distance", 0.1)
    rec.arm(0.0, "e", pose_x(0.5))
    for k in range(1, 50):
        rec.feed(k * 0.01, "e", pose_x(0.5))
    traj = rec.disarm(0.5, "e", pose_x(0.5))
    assert len(traj.frames) == 2


def test_manual_capture_only_on_demand():
    rec = Recorder("manual")
    rec.arm(0.0, "e", pose_x(0.0))
    rec.feed(0.1, "e", pose_x(1.0))     # ignored by manual mode
    rec.capture(0.2, "e", pose_x(2.0))
    traj = rec.disarm(0.3, "e", pose_x(3.0))
    assert len(traj.frames) == 3
    assert [f.pose.position[0] for f in traj.frames] == [0.0, 2.0, 3.0]


def test_mode_change_while_armed_rejected():
    rec = Recorder("auto_time", 0.1)
    rec.arm(0.0, "e", pose_x(0.0))
    with pytest.raises(RuntimeError):
        rec.set_mode("manual")


def test_frames_never_smoothed():
    """Frames replicate fed poses exactly, even on a jagged path."""
    rec = Recorder("auto_distance", 0.05)
    rng = np.random.default_rng(26)
    fed = [vec3(0.0, 0.0, 0.0)]
    rec.arm(0.0, "e", Pose(position=fed[0]))
    pos = fed[0]
    for k in range(1, 200):
        pos = pos + rng.uniform(-0.02, 0.02, size=3)
        fed.append(pos)
        rec.feed(k * 0.01, "e", Pose(position=pos))
    traj = rec.disarm(2.0, "e", Pose(position=pos))
    fed_tuples = {tuple(p) for p in fed}
    for frame in traj.frames:
        assert tuple(frame.pose.position) in fed_tuples


def test_timestamps_strictly_increasing():
    rec = Recorder("auto_time", 0.01)
    rec.arm(0.0, "e", pose_x(0.0))
    for k in range(1, 100):
        rec.feed(k * 0.01, "e", pose_x(k * 0.01))
    traj = rec.disarm(1.0, "e", pose_x(1.0))
    times = [f.t for f in traj.frames]
    assert all(b > a for a, b in zip(times, times[1:]))


# -- force interpolation between proximity ticks -------------------------------------

PARAMS = ForceParams(margin=0.005, stiffness=200.0)


def prox_result(distance, normal=(1.0, 0.0, 0.0)):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return ProximityResult(point_a=n * distance, point_b=vec3(0, 0, 0),
                           distance=distance, colliding=distance == 0.0)


def test_interpolate_zero_displacement_matches_render():
    result = prox_result(0.002)
    mapped = Pose.from_xyz(0.1, 0.2, 0.3)
    direct = render_force(result, PARAMS, ForceClass.PENETRATION_PROPORTIONAL)
    interp = interpolate_force(result, mapped, mapped, PARAMS,
                               ForceClass.PENETRATION_PROPORTIONAL)
    assert np.array_equal(direct.force, interp.force)


def test_interpolate_retreat_weakens_force():
    result = prox_result(0.002)
    last = Pose.from_xyz(0.0, 0.0, 0.0)
    # move 1 mm along +normal: effective distance 3 mm, less penetration
    now = Pose.from_xyz(0.001, 0.0, 0.0)
    cmd = interpolate_force(result, last, now, PARAMS, ForceClass.PENETRATION_PROPORTIONAL)
    expected = PARAMS.stiffness * (PARAMS.margin - 0.003)
    assert cmd.magnitude == pytest.approx(expected, abs=1e-12)


def test_interpolate_approach_strengthens_force():
    result = prox_result(0.002)
    last = Pose.identity()
    now = Pose.from_xyz(-0.001, 0.0, 0.0)
    cmd = interpolate_force(result, last, now, PARAMS, ForceClass.PENETRATION_PROPORTIONAL)
    expected = PARAMS.stiffness * (PARAMS.margin - 0.001)
    assert cmd.magnitude == pytest.approx(expected, abs=1e-12)


def test_interpolate_tangential_motion_unchanged():
    result = prox_result(0.002)
    last = Pose.identity()
    now = Pose.from_xyz(0.0, 0.05, -0.02)
    direct = render_force(result, PARAMS, ForceClass.PENETRATION_PROPORTIONAL)
    cmd = interpolate_force(result, last, now, PARAMS, ForceClass.PENETRATION_PROPORTIONAL)
    assert np.allclose(cmd.force, direct.force, atol=1e-12)


def test_interpolate_without_history_is_zero():
    cmd = interpolate_force(None, None, Pose.identity(), PARAMS,
                            ForceClass.PENETRATION_PROPORTIONAL)
    assert cmd.magnitude == 0.0


def test_interpolate_lipschitz_in_displacement():
    result = prox_result(0.002)
    last = Pose.identity()
    rng = np.random.default_rng(27)
    for _ in range(200):
        d1 = rng.uniform(-0.004, 0.004, size=3)
        d2 = rng.uniform(-0.004, 0.004, size=3)
        f1 = interpolate_force(result, last, Pose(position=d1), PARAMS,
                               ForceClass.PENETRATION_PROPORTIONAL).magnitude
        f2 = interpolate_force(result, last, Pose(position=d2), PARAMS,
                               ForceClass.PENETRATION_PROPORTIONAL).magnitude
        assert abs(f1 - f2) <= PARAMS.stiffness * np.linalg.norm(d1 - d2) + 1e-12


# -- integrated runs --------------------------------------------------------------------

def wall_setup(duration=1.0, rates=None, script=None, trajectory=None, serve=None):
    entities = [
        SceneEntity(id="cube", shapes=(ConvexShape.box((0.2, 0.2, 0.2)),), pose=Pose.identity()),
        SceneEntity(id="wall", shapes=(ConvexShape.box((0.05, 1.0, 1.0)),),
                    pose=Pose.from_xyz(0.165, 0.0, 0.0)),
    ]
    pair = CheckGroupPair(group_a=frozenset({"cube"}), group_b=frozenset({"wall"}))
    if script is None:
        script = StylusScript(
            segments=(ScriptSegment(kind="line", duration=max(duration, 1.0),
                                    params={"start": (0, 0, 0), "end": (0.06, 0, 0)}),),
            button_events=((0, "press"),))
    return RunSetup(
        entities=entities, driver=SolidDriver("cube"), check_pair=pair,
        mapping=WorkspaceMapping(scale_mode=ScaleMode(kind="medium")),
        params=ForceParams(margin=0.005, stiffness=200.0),
        force_class=ForceClass.PENETRATION_PROPORTIONAL,
        script=script, rates=rates or RateConfig(), duration=duration,
        trajectory=trajectory, serve=serve,
    )


def test_one_second_run_exact_tick_counts():
    result = run(wall_setup(duration=1.0))
    assert result.report.haptic_ticks == 1000
    assert result.report.proximity_ticks == 100
    assert result.report.snapshots == 10


def test_committed_poses_never_collide_oracle_replay():
    setup = wall_setup(duration=2.0, script=StylusScript(
        segments=(
            ScriptSegment(kind="line", duration=1.0, params={"start": (0, 0, 0), "end": (0.06, 0, 0)}),
            ScriptSegment(kind="line", duration=1.0, params={"start": (0.06, 0, 0), "end": (0, 0, 0)}),
        ),
        button_events=((0, "press"),)), trajectory=("auto_time", 0.05))
    result = run(setup)
    assert result.report.rejected > 0          # it really pressed into the wall
    assert result.report.min_distance > 0.0
    # re-verify each recorded committed pose with the independent oracle
    wall = ConvexShape.box((0.05, 1.0, 1.0))
    wall_world = Pose.from_xyz(0.165, 0.0, 0.0).apply_many(wall.vertices)
    cube = ConvexShape.box((0.2, 0.2, 0.2))
    for frame in result.trajectory.frames:
        cube_world = frame.pose.apply_many(cube.vertices)
        dist, _, _ = brute_force_distance(cube_world, wall_world)
        assert dist > 0.0


def test_force_ramps_and_caps_at_full_margin():
    result = run(wall_setup(duration=2.0))
    assert result.report.max_force == pytest.approx(200.0 * 0.005, abs=1e-9)


def test_disengaged_run_moves_nothing():
    script = StylusScript(
        segments=(ScriptSegment(kind="line", duration=1.0,
                                params={"start": (0, 0, 0), "end": (0.05, 0, 0)}),))
    result = run(wall_setup(duration=1.0, script=script))
    # button never pressed: cube stays at origin in every snapshot
    for snap in result.snapshots:
        poses = dict(snap["poses"])
        assert poses["cube"][:3] == (0.0, 0.0, 0.0)
    assert result.report.max_force == 0.0


def test_run_is_deterministic():
    a = run(wall_setup(duration=1.0, trajectory=("auto_time", 0.1)))
    b = run(wall_setup(duration=1.0, trajectory=("auto_time", 0.1)))
    assert a.trajectory.to_jsonl() == b.trajectory.to_jsonl()
    assert a.report.to_json() == b.report.to_json()


def test_trajectory_frames_equal_committed_poses():
    result = run(wall_setup(duration=1.0, trajectory=("auto_time", 0.1)))
    xs = [f.pose.position[0] for f in result.trajectory.frames]
    assert all(x <= 0.065 for x in xs)
    # frames lie exactly on the straight input path (no smoothing)
    for frame in result.trajectory.frames:
        assert frame.pose.position[1] == 0.0
        assert frame.pose.position[2] == 0.0


def test_wall_clock_reports_jitter():
    rates = RateConfig(haptic_hz=200, proximity_hz=20, publish_hz=10, clock="wall")
    result = run(wall_setup(duration=0.2, rates=rates))
    assert result.report.clock == "wall"
    assert result.report.jitter is not None
    assert set(result.report.jitter) == {"mean", "p99", "max"}
    assert result.report.haptic_ticks == 40


def test_driver_fault_logged_loop_continues():
    class FaultyDriver(SolidDriver):
        def propose(self, core, mapped):
            raise RuntimeError("boom")

    setup = wall_setup(duration=0.5)
    setup = replace(setup, driver=FaultyDriver("cube"))
    result = run(setup)
    assert result.report.haptic_ticks == 500          # the loop kept running
    assert result.report.drive_errors == 50           # one fault per cycle
    assert result.report.max_force == 0.0             # zero force on faults


def test_recorder_distance_mode_in_session():
    # 1 m straight drag at constant speed via rough scale (0.1 device -> 1.0 scene)
    script = StylusScript(
        segments=(ScriptSegment(kind="line", duration=2.0,
                                params={"start": (-0.05, 0, 0), "end": (0.05, 0, 0)}),),
        button_events=((0, "press"),))
    entities = [
        SceneEntity(id="cube", shapes=(ConvexShape.box((0.2, 0.2, 0.2)),), pose=Pose.identity()),
        SceneEntity(id="far_wall", shapes=(ConvexShape.box((0.05, 1, 1)),),
                    pose=Pose.from_xyz(50.0, 0, 0)),
    ]
    setup = RunSetup(
        entities=entities, driver=SolidDriver("cube"),
        check_pair=CheckGroupPair(group_a=frozenset({"cube"}), group_b=frozenset({"far_wall"})),
        mapping=WorkspaceMapping(scale_mode=ScaleMode(kind="rough")),
        script=script, rates=RateConfig(), duration=2.0,
        trajectory=("auto_distance", 0.1),
    )
    result = run(setup)
    assert len(result.trajectory.frames) == 11
    xs = np.array([f.pose.position[0] for f in result.trajectory.frames])
    # clutch anchors the cube at 0; the last proximity cycle samples t=1.99
    assert xs[0] == pytest.approx(0.0, abs=1e-12)
    assert xs[-1] == pytest.approx(0.995, abs=1e-9)
    assert np.all(np.diff(xs)[:-1] >= 0.1 - 1e-9)   # final appended endpoint may be closer
