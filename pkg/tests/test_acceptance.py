"""Acceptance suite: one test per criterion, printing one PASS line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines. No UI build is required by anything in this module.
"""

import itertools
import json
import math
import time
from importlib import resources

import numpy as np
import pytest

from hapticsim.cli import main as cli_main
from hapticsim.entities.mannequin import MannequinState, drive_mannequin, hand_pose, load_mannequin
from hapticsim.entities.robots import forward_kinematics, inverse_kinematics, planar_2r
from hapticsim.forcefield import ForceClass, ForceCommand, ForceParams, clamp_force, contact_normal, render_force
from hapticsim.geometry import CheckGroupPair, ConvexShape, ProximityResult, SceneEntity, group_min_distance, hull_distance
from hapticsim.mapping import DeviceSpec, ScaleMode, StylusState, WorkspaceMapping, active_scale, disengage, engage, map_stylus
from hapticsim.protocol.client import StallingClientStub
from hapticsim.protocol.codec import NEED_MORE, WIRE_MESSAGE_TYPES, decode, encode
from hapticsim.protocol.device import VirtualStylusDevice
from hapticsim.protocol.script import ScriptSegment, StylusScript
from hapticsim.runtime import RateConfig, RunSetup, Session, SolidDriver, run
from hapticsim.transforms import Pose, vec3

from oracles import brute_force_distance, planar_2r_branches
from test_protocol import GOLDEN, message_st

from hypothesis import given, settings


def ok(name):
    print(f"\nACCEPTANCE {name}: PASS")


# ---------------------------------------------------------------------------
# Rate contract
# ---------------------------------------------------------------------------

def _ten_second_setup(serve=None):
    entities = [
        SceneEntity(id="cube", shapes=(ConvexShape.box((0.2, 0.2, 0.2)),), pose=Pose.identity()),
        SceneEntity(id="wall", shapes=(ConvexShape.box((0.05, 1.0, 1.0)),),
                    pose=Pose.from_xyz(0.165, 0.0, 0.0)),
    ]
    script = StylusScript(
        segments=(
            ScriptSegment(kind="line", duration=5.0, params={"start": (0, 0, 0), "end": (0.06, 0, 0)}),
            ScriptSegment(kind="line", duration=5.0, params={"start": (0.06, 0, 0), "end": (0, 0, 0)}),
        ),
        button_events=((0, "press"),))
    return RunSetup(
        entities=entities, driver=SolidDriver("cube"),
        check_pair=CheckGroupPair(group_a=frozenset({"cube"}), group_b=frozenset({"wall"})),
        mapping=WorkspaceMapping(scale_mode=ScaleMode(kind="medium")),
        params=ForceParams(margin=0.005, stiffness=200.0),
        force_class=ForceClass.PENETRATION_PROPORTIONAL,
        script=script, rates=RateConfig(clock="simulated"), duration=10.0, serve=serve)


def test_rate_contract_with_client_stall():
    session = Session(_ten_second_setup(serve=("127.0.0.1", 0)))
    stub = StallingClientStub(*session.server.endpoint, request_period=100,
                              stall_windows=((4.0, 5.0),), haptic_hz=1000)
    t0 = time.perf_counter()
    result = session.run(on_tick=lambda n, s: stub.tick(n))
    wall = time.perf_counter() - t0
    stub.close()
    session.close()

    r = result.report
    assert (r.haptic_ticks, r.proximity_ticks, r.snapshots) == (10000, 1000, 100)
    assert wall < 5.0, f"10 s simulated run took {wall:.2f} s wall"

    baseline = run(_ten_second_setup()).report
    assert (baseline.haptic_ticks, baseline.proximity_ticks, baseline.snapshots) == (10000, 1000, 100)
    ok(f"rate contract (10000/1000/100 exact, stall-immune, {wall:.2f} s wall)")


# ---------------------------------------------------------------------------
# Device constants
# ---------------------------------------------------------------------------

def test_device_constants():
    spec = DeviceSpec()
    assert tuple(spec.workspace_extents) == (0.16, 0.13, 0.13)
    assert spec.position_resolution == 0.00002
    assert spec.peak_force == 6.4
    assert spec.continuous_force == 1.4

    # every served position is an exact multiple of the resolution: positions
    # sampled through a full scripted run plus the wire replies of a live stub
    session = Session(_ten_second_setup(serve=("127.0.0.1", 0)))
    stub = StallingClientStub(*session.server.endpoint, request_period=50,
                              stall_windows=(), haptic_hz=1000)
    positions = []
    def grab(n, s):
        stub.tick(n)
        positions.append(s.device.last_state.pose.position.copy())
    session.run(duration=2.0, on_tick=grab)
    stub.close()
    session.close()
    res = spec.position_resolution
    for p in positions:
        steps = p / res
        assert np.all(np.abs(steps - np.round(steps)) < 1e-6)
    assert len(stub.received_positions) > 10
    for p in stub.received_positions:
        steps = np.array(p) / res
        assert np.all(np.abs(steps - np.round(steps)) < 1e-6)

    # 6.4 N hard clamp, tolerance 0, under wild overdrive
    device = VirtualStylusDevice(script=None, spec=spec)
    rng = np.random.default_rng(31)
    for _ in range(5000):
        device.set_commanded_force(ForceCommand(
            force=rng.normal(size=3) * rng.uniform(0, 30),
            force_class=ForceClass.PENETRATION_PROPORTIONAL))
        device.serve_force()
    assert max(device.force_log) <= 6.4

    # 1.4 N continuous RMS within 5% under sustained overdrive
    device2 = VirtualStylusDevice(script=None, spec=spec)
    device2.set_commanded_force(ForceCommand(force=(3.0, 0.0, 0.0),
                                             force_class=ForceClass.PENETRATION_PROPORTIONAL))
    served = None
    for _ in range(3000):
        served = device2.serve_force()
    assert served.magnitude == pytest.approx(1.4, rel=0.05)
    ok("device constants (workspace, 0.02 mm grid, 6.4 N hard, 1.4 N sustained)")


# ---------------------------------------------------------------------------
# Proximity oracle
# ---------------------------------------------------------------------------

def test_proximity_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    pairs = 0
    for _ in range(200):
        na, nb = rng.integers(4, 13, size=2)
        va = rng.uniform(-0.5, 0.5, size=(int(na), 3))
        vb = rng.uniform(-0.5, 0.5, size=(int(nb), 3)) + rng.uniform(-1.5, 1.5, size=3)
        dist, pa, pb, colliding = hull_distance(va, vb)
        oracle_dist, _, _ = brute_force_distance(va, vb)
        assert abs(dist - oracle_dist) <= 1e-9
        pairs += 1
    assert pairs >= 200

    for _ in range(20):
        n = int(rng.integers(2, 7))
        entities = []
        for i in range(n):
            verts = rng.uniform(-0.4, 0.4, size=(int(rng.integers(4, 9)), 3))
            entities.append(SceneEntity(id=f"e{i}", shapes=(ConvexShape(verts),),
                                        pose=Pose(position=rng.uniform(-2, 2, size=3))))
        k = int(rng.integers(1, n))
        ids = [e.id for e in entities]
        pair = CheckGroupPair(group_a=frozenset(ids[:k]), group_b=frozenset(ids[k:]))
        result = group_min_distance(entities, pair)
        best = math.inf
        for ia in ids[:k]:
            for ib in ids[k:]:
                ea = next(e for e in entities if e.id == ia)
                eb = next(e for e in entities if e.id == ib)
                da, _, _ = brute_force_distance(ea.world_vertex_sets()[0], eb.world_vertex_sets()[0])
                best = min(best, da)
        assert result.distance == pytest.approx(best, abs=1e-9)
    wall = time.perf_counter() - t0
    assert wall < 30.0, f"proximity acceptance took {wall:.1f} s"
    ok(f"proximity oracle (200 pairs + group queries, {wall:.1f} s)")


# ---------------------------------------------------------------------------
# Force properties
# ---------------------------------------------------------------------------

def _random_result(rng):
    direction = rng.normal(size=3)
    while np.linalg.norm(direction) < 1e-6:
        direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    distance = float(rng.uniform(0.0, 0.02))
    if distance < 1e-4:
        distance = 0.0
    return ProximityResult(point_a=direction * distance, point_b=np.zeros(3),
                           distance=distance, colliding=distance == 0.0), direction


def test_force_properties():
    rng = np.random.default_rng(33)

    # repulsion: never a negative component along the normal (1000 cases)
    for _ in range(1000):
        result, direction = _random_result(rng)
        params = ForceParams(margin=float(rng.uniform(0.002, 0.02)),
                             stiffness=float(rng.uniform(50, 400)),
                             damping=float(rng.uniform(0, 20)),
                             mass_scale=float(rng.uniform(0.1, 3.0)))
        velocity = rng.normal(size=3) * 2.0
        for force_class in ForceClass:
            cmd = render_force(result, params, force_class, stylus_velocity=velocity,
                               fallback_normal=direction)
            n = contact_normal(result, fallback=direction)
            assert float(cmd.force @ n) >= -1e-12

    # zone-boundary continuity at rest: |F| <= stiffness * 1e-6 (1000 cases)
    for _ in range(1000):
        margin = float(rng.uniform(0.002, 0.05))
        stiffness = float(rng.uniform(50, 500))
        params = ForceParams(margin=margin, stiffness=stiffness,
                             damping=float(rng.uniform(0, 20)))
        result = ProximityResult(point_a=vec3(margin - 1e-6, 0, 0), point_b=np.zeros(3),
                                 distance=margin - 1e-6, colliding=False)
        for force_class in (ForceClass.PENETRATION_PROPORTIONAL, ForceClass.SPRING_DAMPER):
            cmd = render_force(result, params, force_class, stylus_velocity=(0, 0, 0))
            assert cmd.magnitude <= stiffness * 1e-6 * (1.0 + 1e-9)

    # class 1 is exactly two-valued (1000 cases)
    magnitudes = set()
    for _ in range(1000):
        result, direction = _random_result(rng)
        params = ForceParams(margin=0.01, constant_magnitude=2.0)
        cmd = render_force(result, params, ForceClass.CONSTANT_CONTACT,
                           fallback_normal=direction)
        magnitudes.add(round(cmd.magnitude, 12))
    assert magnitudes <= {0.0, 2.0}
    assert magnitudes == {0.0, 2.0}

    # clamp preserves direction, magnitude <= 6.4 always (1000 cases)
    for _ in range(1000):
        vector = rng.normal(size=3) * rng.uniform(0, 20)
        mag = np.linalg.norm(vector)
        if mag < 1e-9:
            continue
        cmd = ForceCommand(force=vector, force_class=ForceClass.PENETRATION_PROPORTIONAL)
        out = clamp_force(cmd, peak=6.4, continuous=1.4, window_rms=float(rng.uniform(0, 5)))
        assert out.magnitude <= 6.4
        if out.magnitude > 0:
            cos = float(out.force @ vector) / (out.magnitude * mag)
            assert cos == pytest.approx(1.0, abs=1e-9)
    ok("force properties (repulsion, boundary continuity, class-1, clamp direction)")


# ---------------------------------------------------------------------------
# Inverse kinematics
# ---------------------------------------------------------------------------

def test_ik_acceptance():
    model = planar_2r(1.0, 1.0)
    rng = np.random.default_rng(34)

    # branch selection matches exhaustive enumeration on 1000 (target, q_prev)
    for _ in range(1000):
        q_true = rng.uniform(-math.pi, math.pi, 2)
        target = forward_kinematics(model, q_true, check_limits=False).position
        q_prev = rng.uniform(-math.pi, math.pi, 2)
        branches = planar_2r_branches(1.0, 1.0, target[0], target[1])
        cands = []
        for b in branches:
            reps = []
            for qi in b:
                reps.append([qi + 2 * math.pi * k for k in (-1, 0, 1)
                             if -math.pi - 1e-12 <= qi + 2 * math.pi * k <= math.pi + 1e-12])
            for combo in itertools.product(*reps):
                cands.append(np.array(combo))
        cands.sort(key=lambda c: (float(np.max(np.abs(c - q_prev))), tuple(c)))
        got = inverse_kinematics(model, Pose(position=target), q_prev)
        assert np.allclose(got, cands[0], atol=1e-7)
        # FK(IK(x)) residual
        fk = forward_kinematics(model, got, check_limits=False)
        assert np.linalg.norm(fk.position - target) <= 1e-6

    # 1 mm Cartesian sweep: no branch flip
    q = np.array([0.4, 1.2])
    start = forward_kinematics(model, q).position
    radius = float(np.linalg.norm(start[:2]))
    theta0 = math.atan2(start[1], start[0])
    for i in range(1, 500):
        theta = theta0 + i * (0.001 / radius)
        q_next = inverse_kinematics(
            model, Pose(position=np.array([radius * math.cos(theta),
                                           radius * math.sin(theta), 0.0])), q)
        assert np.max(np.abs(q_next - q)) < 0.05
        q = q_next

    # DLS on the 56-DOF mannequin arm: >= 95 of 100 targets within 5 mm, <= 200 iters
    mannequin = load_mannequin(resources.files("hapticsim.data") / "mannequin56.json")
    assert mannequin.dof == 56
    state = MannequinState(root_pose=Pose.identity(), q=mannequin.neutral_q())
    lo, hi = mannequin.limit_arrays()
    chain = mannequin.chain_joint_indices(mannequin.end_effectors["right_hand"])
    hits = 0
    for _ in range(100):
        q_rand = state.q.copy()
        q_rand[chain] = rng.uniform(lo[chain], hi[chain])
        target = hand_pose(mannequin, q_rand, "right_hand").position
        report = drive_mannequin(mannequin, "right", Pose(position=target), state)
        assert report.iterations <= 200
        if report.residuals["right_hand"] <= 5e-3:
            hits += 1
    assert hits >= 95
    ok(f"inverse kinematics (1000 branch picks, sweep, mannequin {hits}/100 within 5 mm)")


# ---------------------------------------------------------------------------
# Clutch & mapping
# ---------------------------------------------------------------------------

def test_clutch_and_mapping():
    rng = np.random.default_rng(35)
    for _ in range(200):
        scene_pose = Pose(position=rng.uniform(-5, 5, size=3))
        state = StylusState(pose=Pose(position=np.round(rng.uniform(-0.06, 0.06, size=3), 5)),
                            button=True, tick=0)
        mapping = engage(WorkspaceMapping(), state, scene_pose)
        out = map_stylus(state, mapping)
        assert np.array_equal(out.pose.position, scene_pose.position)
        assert np.array_equal(out.pose.orientation, scene_pose.orientation)

    # screen-adaptive scale equals the extent ratio to 1e-12
    for _ in range(200):
        viewport = float(rng.uniform(0.1, 50.0))
        scale = active_scale(ScaleMode(kind="screen_adaptive"), viewport_extent=viewport)
        assert abs(scale - viewport / 0.16) <= 1e-12

    # disengaged motion moves nothing
    scene_pose = Pose.from_xyz(1.0, 2.0, 3.0)
    mapping = engage(WorkspaceMapping(),
                     StylusState(pose=Pose.identity(), button=True, tick=0), scene_pose)
    mapping = disengage(mapping)
    for _ in range(100):
        state = StylusState(pose=Pose(position=rng.uniform(-0.06, 0.06, size=3)),
                            button=False, tick=0)
        out = map_stylus(state, mapping)
        assert not out.engaged
        assert np.array_equal(out.pose.position, scene_pose.position)
    ok("clutch & mapping (exact engage, adaptive scale ratio, disengaged freeze)")


# ---------------------------------------------------------------------------
# Recorder
# ---------------------------------------------------------------------------

def test_recorder_acceptance():
    # 1.0 m constant-speed straight line, AutoDistance(0.1) -> 11 frames
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
        trajectory=("auto_distance", 0.1))

    committed = []
    session = Session(setup)
    def snoop(n, s):
        if n % s.rates.proximity_divisor == 0:
            committed.append(s.core.entity().pose)
    result = session.run(on_tick=snoop)
    session.close()

    frames = result.trajectory.frames
    assert len(frames) == 11

    # frames are bit-identical to committed poses and lie exactly on the path
    committed_keys = {(tuple(p.position), tuple(p.orientation)) for p in committed}
    for frame in frames:
        key = (tuple(frame.pose.position), tuple(frame.pose.orientation))
        assert key in committed_keys
        assert frame.pose.position[1] == 0.0 and frame.pose.position[2] == 0.0

    xs = np.array([f.pose.position[0] for f in frames])
    assert np.all(np.diff(xs)[:-1] >= 0.1 - 1e-9)
    ok("recorder (11 frames, bit-identical committed poses, no smoothing)")


# ---------------------------------------------------------------------------
# Protocol
# ---------------------------------------------------------------------------

def test_protocol_acceptance():
    # golden byte vectors cover every variant
    covered = set()
    for msg, hex_bytes in GOLDEN:
        assert encode(msg).hex() == hex_bytes
        back, consumed = decode(bytes.fromhex(hex_bytes))
        assert back == msg and consumed == len(hex_bytes) // 2
        covered.add(type(msg))
    assert covered == set(WIRE_MESSAGE_TYPES)

    # round-trip identity under property generation
    @given(message_st)
    @settings(max_examples=300, deadline=None)
    def round_trip(msg):
        frame = encode(msg)
        back, consumed = decode(frame)
        assert back == msg and consumed == len(frame)
    round_trip()

    # fuzz never crashes the decoder
    @given(__import__("hypothesis").strategies.binary(max_size=300))
    @settings(max_examples=500, deadline=None)
    def fuzz(blob):
        msg, consumed = decode(blob)
        assert msg is NEED_MORE or isinstance(msg, WIRE_MESSAGE_TYPES)
    fuzz()
    ok("protocol (golden vectors, round-trip property, fuzz-safe decoder)")


# ---------------------------------------------------------------------------
# End-to-end regression
# ---------------------------------------------------------------------------

def test_end_to_end_cube_vs_wall(tmp_path):
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert cli_main(["run", "bundled:cube-vs-wall", "--out-dir", str(out)]) == 0
        outputs.append(out)

    report = json.loads((outputs[0] / "cube_vs_wall_report.json").read_text())
    assert report["min_distance"] > 0.0
    assert report["rejected"] > 0           # the wall was really hit

    # trajectory poses re-verified collision-free by the independent oracle
    wall_entity = ConvexShape.box((0.05, 1.0, 1.0))
    wall_world = Pose.from_xyz(0.165, 0.0, 0.0).apply_many(wall_entity.vertices)
    cube = ConvexShape.box((0.2, 0.2, 0.2))
    for line in (outputs[0] / "cube_vs_wall_trajectory.jsonl").read_text().splitlines():
        frame = json.loads(line)
        pose = Pose(position=frame["position"], orientation=frame["quaternion"])
        dist, _, _ = brute_force_distance(pose.apply_many(cube.vertices), wall_world)
        assert dist > 0.0

    a = (outputs[0] / "cube_vs_wall_trajectory.jsonl").read_bytes()
    b = (outputs[1] / "cube_vs_wall_trajectory.jsonl").read_bytes()
    assert a == b
    ok("end-to-end regression (no zero-distance commits, byte-identical reruns)")
