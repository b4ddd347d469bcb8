import itertools
import math

import numpy as np
import pytest

from hapticsim.entities.robots import (
    IkError,
    Joint,
    JointLimitError,
    RobotModel,
    drive_robot,
    forward_kinematics,
    inverse_kinematics,
    jacobian,
    joint_limit_force,
    limit_force_cartesian,
    planar_2r,
    planar_3r,
    robot_from_dict,
    robot_to_dict,
)
from hapticsim.transforms import Pose

from oracles import fk_matrix_chain, planar_2r_branches

TWO_R = planar_2r(1.0, 1.0)


def oracle_nearest_branch(l1, l2, target_xy, q_prev, limits=(-math.pi, math.pi)):
    """Independent selection: circle-intersection branches, 2*pi reps, max-norm."""
    branches = planar_2r_branches(l1, l2, target_xy[0], target_xy[1])
    lo, hi = limits
    candidates = []
    for branch in branches:
        reps_per_joint = []
        for qi in branch:
            reps = [qi + 2 * math.pi * k for k in (-1, 0, 1)
                    if lo - 1e-12 <= qi + 2 * math.pi * k <= hi + 1e-12]
            reps_per_joint.append(reps)
        if all(reps_per_joint):
            for combo in itertools.product(*reps_per_joint):
                candidates.append(np.array(combo))
    if not candidates:
        return None
    candidates.sort(key=lambda c: (float(np.max(np.abs(c - q_prev))), tuple(c)))
    return candidates[0]


# -- forward kinematics ----------------------------------------------------------

def test_fk_zero_config_composes_offsets():
    pose = forward_kinematics(TWO_R, [0.0, 0.0])
    assert np.allclose(pose.position, [2.0, 0.0, 0.0], atol=1e-15)


def test_fk_planar_2r_hand_computed():
    pose = forward_kinematics(TWO_R, [0.0, math.pi / 2])
    assert np.allclose(pose.position, [1.0, 1.0, 0.0], atol=1e-12)


def test_fk_matches_matrix_chain_oracle():
    rng = np.random.default_rng(18)
    models = [TWO_R, planar_3r(0.8, 0.6, 0.3), _spatial_3dof()]
    for model in models:
        specs = [(j.kind, np.array(j.axis),
                  [*j.origin.position, *j.origin.orientation]) for j in model.joints]
        base7 = [*model.base_pose.position, *model.base_pose.orientation]
        tool7 = [*model.tool_frame.position, *model.tool_frame.orientation]
        lo, hi = model.limit_arrays()
        for _ in range(30):
            q = rng.uniform(lo, hi)
            fk = forward_kinematics(model, q)
            h = fk_matrix_chain(base7, specs, q, tool7)
            assert np.allclose(fk.position, h[:3, 3], atol=1e-12)
            from hapticsim.transforms import quat_to_matrix
            assert np.allclose(quat_to_matrix(fk.orientation), h[:3, :3], atol=1e-12)


def _spatial_3dof():
    return RobotModel(
        joints=(
            Joint(kind="revolute", axis=(0, 0, 1), origin=Pose.from_xyz(0, 0, 0.3),
                  limits=(-2.9, 2.9), name="waist"),
            Joint(kind="revolute", axis=(0, 1, 0), origin=Pose.from_xyz(0, 0, 0.2),
                  limits=(-2.0, 2.0), name="shoulder"),
            Joint(kind="prismatic", axis=(0, 0, 1), origin=Pose.from_xyz(0.4, 0, 0),
                  limits=(0.0, 0.5), name="lift"),
        ),
        tool_frame=Pose.from_xyz(0.1, 0, 0),
        name="spatial3",
    )


def test_fk_rejects_out_of_limit_q():
    with pytest.raises(JointLimitError) as err:
        forward_kinematics(TWO_R, [0.0, 4.0])
    assert "q2" in str(err.value)


def test_jacobian_finite_difference():
    model = _spatial_3dof()
    rng = np.random.default_rng(19)
    lo, hi = model.limit_arrays()
    q = rng.uniform(lo * 0.5 + 0.1, hi * 0.5)
    j = jacobian(model, q)
    eps = 1e-7
    for i in range(model.dof):
        dq = np.zeros(model.dof)
        dq[i] = eps
        p_plus = forward_kinematics(model, q + dq, check_limits=False).position
        p_minus = forward_kinematics(model, q - dq, check_limits=False).position
        fd = (p_plus - p_minus) / (2 * eps)
        assert np.allclose(j[:3, i], fd, atol=1e-5)


# -- analytic IK --------------------------------------------------------------------

def test_branch_selection_spec_case():
    q = inverse_kinematics(TWO_R, Pose.from_xyz(1.0, 1.0, 0.0), [0.1, 1.4])
    assert np.allclose(q, [0.0, math.pi / 2], atol=1e-9)


def test_branch_selection_other_side():
    q = inverse_kinematics(TWO_R, Pose.from_xyz(1.0, 1.0, 0.0), [1.5, -1.5])
    assert np.allclose(q, [math.pi / 2, -math.pi / 2], atol=1e-9)


def test_ik_fixed_point_returns_q_prev():
    q_prev = np.array([0.3, 0.7])
    target = forward_kinematics(TWO_R, q_prev)
    q = inverse_kinematics(TWO_R, target, q_prev)
    assert np.array_equal(q, q_prev)


def test_fk_ik_round_trip_residual():
    rng = np.random.default_rng(20)
    for _ in range(300):
        q_true = rng.uniform(-math.pi, math.pi, 2)
        target = forward_kinematics(TWO_R, q_true, check_limits=False)
        q_prev = np.clip(q_true + rng.uniform(-0.3, 0.3, 2), -math.pi, math.pi)
        q = inverse_kinematics(TWO_R, Pose(position=target.position), q_prev)
        fk = forward_kinematics(TWO_R, q, check_limits=False)
        assert np.linalg.norm(fk.position - target.position) <= 1e-6


def test_branch_matches_oracle_1000_cases():
    rng = np.random.default_rng(21)
    checked = 0
    for _ in range(1000):
        q_true = rng.uniform(-math.pi, math.pi, 2)
        target = forward_kinematics(TWO_R, q_true, check_limits=False).position
        q_prev = np.clip(rng.uniform(-math.pi, math.pi, 2), -math.pi, math.pi)
        expected = oracle_nearest_branch(1.0, 1.0, target[:2], q_prev)
        got = inverse_kinematics(TWO_R, Pose(position=target), q_prev)
        assert expected is not None
        assert np.allclose(got, expected, atol=1e-7), (got, expected, q_prev)
        checked += 1
    assert checked == 1000


def test_path_continuity_no_branch_flip():
    """1 mm steps along a Cartesian arc: consecutive IK outputs stay close."""
    q = np.array([0.4, 1.2])
    start = forward_kinematics(TWO_R, q).position
    radius = np.linalg.norm(start[:2])
    theta0 = math.atan2(start[1], start[0])
    steps = 600
    step_angle = 0.001 / radius  # 1 mm arc length
    for i in range(1, steps + 1):
        theta = theta0 + i * step_angle
        target = Pose(position=np.array([radius * math.cos(theta),
                                         radius * math.sin(theta), 0.0]))
        q_next = inverse_kinematics(TWO_R, target, q)
        assert np.max(np.abs(q_next - q)) < 0.05
        q = q_next


def test_ik_unreachable_carries_best_effort():
    with pytest.raises(IkError) as err:
        inverse_kinematics(TWO_R, Pose.from_xyz(3.0, 0.0, 0.0), [0.0, 0.0])
    assert err.value.kind == "unreachable"
    assert err.value.best_q.shape == (2,)
    fk = forward_kinematics(TWO_R, err.value.best_q, check_limits=False)
    assert np.allclose(fk.position, [2.0, 0.0, 0.0], atol=1e-9)  # stretched toward target
    assert err.value.residual[0] == pytest.approx(1.0, abs=1e-9)


def test_ik_limits_error():
    cramped = planar_2r(1.0, 1.0, limits=(-0.5, 0.5))
    # (1,1) needs |q1|+... outside +-0.5 rad on some joint
    with pytest.raises(IkError) as err:
        inverse_kinematics(cramped, Pose.from_xyz(1.0, 1.0, 0.0), [0.0, 0.0])
    assert err.value.kind == "limits"
    lo, hi = cramped.limit_arrays()
    assert np.all(err.value.best_q >= lo - 1e-12)
    assert np.all(err.value.best_q <= hi + 1e-12)


def test_ik_never_returns_out_of_limits():
    rng = np.random.default_rng(22)
    model = planar_2r(1.0, 1.0, limits=(-2.5, 2.5))
    lo, hi = model.limit_arrays()
    for _ in range(200):
        q_true = rng.uniform(lo, hi)
        target = forward_kinematics(model, q_true, check_limits=False).position
        q_prev = rng.uniform(lo, hi)
        try:
            q = inverse_kinematics(model, Pose(position=target), q_prev)
        except IkError:
            continue
        assert np.all(q >= lo - 1e-12) and np.all(q <= hi + 1e-12)


def test_planar_3r_with_orientation():
    model = planar_3r(0.8, 0.6, 0.3)
    q_true = np.array([0.3, -0.7, 0.5])
    target = forward_kinematics(model, q_true)
    q = inverse_kinematics(model, target, q_true + 0.1)
    fk = forward_kinematics(model, q, check_limits=False)
    assert np.linalg.norm(fk.position - target.position) <= 1e-6
    from hapticsim.transforms import quat_angle, quat_conjugate, quat_multiply
    assert quat_angle(quat_multiply(target.orientation, quat_conjugate(fk.orientation))) <= 1e-6


# -- numerical IK (DLS) ----------------------------------------------------------------

def _spatial_6dof():
    j = []
    axes = [(0, 0, 1), (0, 1, 0), (0, 1, 0), (1, 0, 0), (0, 1, 0), (1, 0, 0)]
    offsets = [(0, 0, 0.2), (0, 0, 0.2), (0.3, 0, 0), (0.25, 0, 0), (0.1, 0, 0), (0.05, 0, 0)]
    for i, (axis, off) in enumerate(zip(axes, offsets)):
        j.append(Joint(kind="revolute", axis=axis, origin=Pose.from_xyz(*off),
                       limits=(-2.8, 2.8), name=f"j{i + 1}"))
    return RobotModel(joints=tuple(j), tool_frame=Pose.from_xyz(0.08, 0, 0), name="arm6")


def test_dls_converges_on_6dof():
    model = _spatial_6dof()
    rng = np.random.default_rng(23)
    lo, hi = model.limit_arrays()
    ok = 0
    for _ in range(30):
        q_true = rng.uniform(lo * 0.6, hi * 0.6)
        target = forward_kinematics(model, q_true)
        q_prev = np.clip(q_true + rng.uniform(-0.2, 0.2, model.dof), lo, hi)
        try:
            q = inverse_kinematics(model, target, q_prev)
        except IkError:
            continue
        fk = forward_kinematics(model, q, check_limits=False)
        assert np.linalg.norm(fk.position - target.position) <= 1e-4
        ok += 1
    assert ok >= 27


def test_dls_unreachable_reports_residual():
    model = _spatial_6dof()
    with pytest.raises(IkError) as err:
        inverse_kinematics(model, Pose.from_xyz(5.0, 0, 0), np.zeros(6))
    assert err.value.kind in ("unreachable", "limits")
    assert err.value.residual[0] > 0.1


# -- joint limit zones --------------------------------------------------------------------

def test_limit_force_midrange_zero():
    assert np.array_equal(joint_limit_force(TWO_R, [0.0, 0.0], 0.2), np.zeros(2))


def test_limit_force_near_upper_pushes_down():
    hi = TWO_R.joints[0].limits[1]
    depths = joint_limit_force(TWO_R, [hi - 0.1, 0.0], 0.2)
    assert depths[0] == pytest.approx(-0.1, abs=1e-12)
    assert depths[1] == 0.0


def test_limit_force_at_exact_limit_is_full_zone():
    lo = TWO_R.joints[1].limits[0]
    depths = joint_limit_force(TWO_R, [0.0, lo], 0.2)
    assert depths[1] == pytest.approx(0.2, abs=1e-12)


def test_limit_force_cartesian_direction():
    model = TWO_R
    q = [0.0, model.joints[1].limits[1] - 0.05]
    depths = joint_limit_force(model, q, 0.2)
    force = limit_force_cartesian(model, q, depths, gain=10.0)
    j = jacobian(model, q)
    expected = j[:3] @ (10.0 * depths)
    assert np.allclose(force, expected, atol=1e-12)


# -- driving -----------------------------------------------------------------------------

def test_drive_base_mode_rigid():
    from dataclasses import replace
    model = replace(planar_2r(1.0, 1.0), attach_mode="base")
    target = Pose.from_xyz(0.5, 0.5, 0.0)
    out = drive_robot(model, target, np.zeros(2))
    assert isinstance(out, Pose)
    assert np.allclose(out.position, [0.5, 0.5, 0])


def test_drive_tcpf_round_trip():
    q = drive_robot(TWO_R, Pose.from_xyz(1.0, 1.0, 0.0), np.array([0.1, 1.4]))
    fk = forward_kinematics(TWO_R, q, check_limits=False)
    assert np.allclose(fk.position, [1.0, 1.0, 0.0], atol=1e-9)


def test_drive_tcpf_unreachable_surfaces_error():
    with pytest.raises(IkError):
        drive_robot(TWO_R, Pose.from_xyz(9.0, 0.0, 0.0), np.zeros(2))


# -- files ---------------------------------------------------------------------------------

def test_robot_json_round_trip():
    model = _spatial_6dof()
    data = robot_to_dict(model)
    back = robot_from_dict(data)
    assert back.dof == model.dof
    rng = np.random.default_rng(24)
    lo, hi = model.limit_arrays()
    q = rng.uniform(lo, hi)
    a = forward_kinematics(model, q)
    b = forward_kinematics(back, q)
    assert np.allclose(a.position, b.position, atol=1e-12)
    assert np.allclose(a.orientation, b.orientation, atol=1e-12)


def test_joint_validation():
    with pytest.raises(ValueError):
        Joint(kind="spherical", axis=(0, 0, 1))
    with pytest.raises(ValueError):
        Joint(kind="revolute", axis=(0, 0, 1), limits=(1.0, -1.0))


def test_force_branch_override_pins_a_branch():
    # nearest-branch would pick elbow-up here; the override forces elbow-down
    target = Pose.from_xyz(1.0, 1.0, 0.0)
    q_prev = np.array([0.1, 1.4])
    nearest = inverse_kinematics(TWO_R, target, q_prev)
    assert nearest[1] > 0
    pinned = inverse_kinematics(TWO_R, target, q_prev, force_branch=1)
    assert pinned[1] < 0
    fk = forward_kinematics(TWO_R, pinned, check_limits=False)
    assert np.allclose(fk.position, [1.0, 1.0, 0.0], atol=1e-9)
    # index 0 selects the other branch
    pinned0 = inverse_kinematics(TWO_R, target, q_prev, force_branch=0)
    assert pinned0[1] > 0


def test_branch_norm_configurable():
    # with L1 the two joint moves add up; with max-norm only the biggest counts
    target = Pose.from_xyz(1.0, 1.0, 0.0)
    q_prev = np.array([0.1, 1.4])
    a = inverse_kinematics(TWO_R, target, q_prev, branch_norm=np.inf)
    b = inverse_kinematics(TWO_R, target, q_prev, branch_norm=1)
    fk_a = forward_kinematics(TWO_R, a, check_limits=False)
    fk_b = forward_kinematics(TWO_R, b, check_limits=False)
    assert np.allclose(fk_a.position, fk_b.position, atol=1e-9)


def test_unknown_robot_file_version_rejected():
    data = robot_to_dict(TWO_R)
    data["version"] = 99
    with pytest.raises(ValueError, match="version"):
        robot_from_dict(data)
