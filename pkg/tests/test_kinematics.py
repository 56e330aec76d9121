import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from quadclimb.config import FiveBarParams
from quadclimb.geometry import RigidTransform, rot_y
from quadclimb.kinematics import (
    Branch,
    ClosureInfeasible,
    JointLimitViolation,
    LimbConfig,
    NearSingular,
    Unreachable,
    WristGimbalLock,
    fivebar_fk,
    fivebar_ik,
    fivebar_jacobian,
    fivebar_manipulability,
    home_configuration,
    limb_fk,
    limb_ik,
    limb_jacobian,
    manipulability,
    shoulder_frame,
    toe_target,
    worst_singularity_measure,
)

FIVEBAR = FiveBarParams()


@given(st.floats(min_value=0.25, max_value=0.40), st.floats(min_value=-0.1, max_value=0.1))
def test_fivebar_ik_then_fk_recovers_point(p0, p1):
    q2, q3 = fivebar_ik(FIVEBAR, np.array([p0, p1]))
    assert np.allclose(fivebar_fk(FIVEBAR, q2, q3), [p0, p1], atol=1e-9)


def test_fivebar_nominal_point_on_elbow_out_branch():
    q2, q3 = fivebar_ik(FIVEBAR, np.array(FIVEBAR.nominal_point_m))
    assert q2 > 0 > q3
    assert np.allclose(fivebar_fk(FIVEBAR, q2, q3, Branch.ELBOW_OUT), FIVEBAR.nominal_point_m, atol=1e-9)


def test_fivebar_unreachable_beyond_annulus():
    with pytest.raises(Unreachable):
        fivebar_ik(FIVEBAR, np.array([0.6, 0.0]))


def test_fivebar_closure_fails_when_distal_circles_nest():
    uneven = FiveBarParams(back_lower_m=0.10)
    with pytest.raises(ClosureInfeasible):
        fivebar_fk(uneven, 0.5, 0.5)


def test_fivebar_jacobian_matches_finite_difference():
    q2, q3 = fivebar_ik(FIVEBAR, np.array([0.33, 0.04]))
    jac = fivebar_jacobian(FIVEBAR, q2, q3)
    h = 1e-6
    col2 = (fivebar_fk(FIVEBAR, q2 + h, q3) - fivebar_fk(FIVEBAR, q2 - h, q3)) / (2 * h)
    col3 = (fivebar_fk(FIVEBAR, q2, q3 + h) - fivebar_fk(FIVEBAR, q2, q3 - h)) / (2 * h)
    assert np.allclose(jac, np.column_stack([col2, col3]), atol=1e-6)


@pytest.mark.slow
def test_fivebar_round_trips_over_the_operating_box():
    rng = np.random.default_rng(7)
    points = np.column_stack([rng.uniform(0.15, 0.40, 10_000), rng.uniform(-0.1, 0.1, 10_000)])
    worst = max(float(np.abs(fivebar_fk(FIVEBAR, *fivebar_ik(FIVEBAR, pt)) - pt).max()) for pt in points)
    assert worst < 1e-9


@pytest.mark.parametrize(
    "params, singular",
    [(FiveBarParams(), False), (FiveBarParams(back_upper_m=0.20), True)],
    ids=["asymmetric", "symmetric"],
)
def test_only_the_symmetric_linkage_folds_inside_the_box(params, singular):
    worst = worst_singularity_measure(params)
    if singular:
        assert worst < 1e-6
    else:
        assert worst > 0.05


def test_folded_elbows_are_near_singular():
    symmetric = FiveBarParams(back_upper_m=0.20)
    q2, q3 = fivebar_ik(symmetric, np.array([0.10, 0.0]))
    assert q2 == pytest.approx(math.pi, abs=1e-6)
    assert q3 == pytest.approx(-math.pi, abs=1e-6)
    for bend in (0.0, 1e-8):
        with pytest.raises(NearSingular):
            fivebar_jacobian(symmetric, math.pi - bend, -math.pi + bend)
        assert fivebar_manipulability(symmetric, math.pi - bend, -math.pi + bend) == 0.0


def test_home_configuration_points_toe_into_wall(climbing_model):
    home = home_configuration(climbing_model, "FR")
    toe = limb_fk(climbing_model, "FR", home)
    shoulder = shoulder_frame(climbing_model, "FR").translation
    assert np.allclose(toe.translation, shoulder + [0.0, 0.0, -0.35], atol=1e-9)
    assert np.allclose(toe.rotation, rot_y(math.pi), atol=1e-9)
    assert home.q[4] == pytest.approx(math.pi / 2)


offsets = st.floats(min_value=-0.04, max_value=0.04)
tilts = st.floats(min_value=-0.3, max_value=0.3)


@given(st.tuples(offsets, offsets, offsets), st.tuples(tilts, tilts, tilts), st.sampled_from(["FR", "FL", "BR", "BL"]))
def test_limb_ik_then_fk_recovers_toe_frame(climbing_model, offset, tilt, limb):
    shoulder = shoulder_frame(climbing_model, limb).translation
    rotation = Rotation.from_rotvec(tilt).as_matrix() @ rot_y(math.pi)
    target = RigidTransform(rotation, shoulder + np.array([0.0, 0.0, -0.35]) + np.array(offset))
    q = limb_ik(climbing_model, limb, target, check_singularity=False)
    reached = limb_fk(climbing_model, limb, q)
    assert np.allclose(reached.translation, target.translation, atol=1e-8)
    assert reached.rotation_distance(target) < 1e-8


@given(st.tuples(offsets, offsets, offsets))
def test_walking_ik_then_fk_recovers_foot(walking_model, offset):
    shoulder = shoulder_frame(walking_model, "BL").translation
    target = toe_target(shoulder + np.array([0.0, 0.0, -0.34]) + np.array(offset))
    q = limb_ik(walking_model, "BL", target, check_singularity=False)
    assert np.allclose(q.q[3:], 0.0)
    assert np.allclose(limb_fk(walking_model, "BL", q).translation, target.translation, atol=1e-8)


def test_limb_jacobian_matches_finite_difference(climbing_model):
    q0 = home_configuration(climbing_model, "FL").q + np.array([0.1, 0.05, -0.05, 0.2, -0.1, 0.3])
    jac = limb_jacobian(climbing_model, "FL", LimbConfig(q0))
    h = 1e-6
    numeric = np.zeros((6, 6))
    base = limb_fk(climbing_model, "FL", LimbConfig(q0))
    for i in range(6):
        dq = np.zeros(6)
        dq[i] = h
        plus = limb_fk(climbing_model, "FL", LimbConfig(q0 + dq))
        minus = limb_fk(climbing_model, "FL", LimbConfig(q0 - dq))
        numeric[:3, i] = (plus.translation - minus.translation) / (2 * h)
        numeric[3:, i] = Rotation.from_matrix(plus.rotation @ minus.rotation.T).as_rotvec() / (2 * h)
    assert np.allclose(jac, numeric, atol=1e-5)
    assert base.translation[2] < 0


def test_walking_jacobian_is_square(walking_model):
    jac = limb_jacobian(walking_model, "FR", home_configuration(walking_model, "FR"))
    assert jac.shape == (3, 3)
    assert manipulability(walking_model, "FR", home_configuration(walking_model, "FR")) > 0


def test_target_out_of_reach(climbing_model):
    with pytest.raises(Unreachable):
        limb_ik(climbing_model, "FR", toe_target([0.12, 0.15, -1.0]))


def test_wrist_gimbal_lock(climbing_model):
    shoulder = shoulder_frame(climbing_model, "FR").translation
    target = RigidTransform(rot_y(math.pi / 2), shoulder + np.array([0.03, 0.0, -0.32]))
    with pytest.raises(WristGimbalLock):
        limb_ik(climbing_model, "FR", target)


def test_shoulder_joint_limit_is_unreachable(climbing_model):
    shoulder = shoulder_frame(climbing_model, "FR").translation
    wrist = np.array([-0.32 * math.sin(1.3), 0.0, -0.32 * math.cos(1.3)])
    target = toe_target(shoulder + wrist - np.array([0.0, 0.0, 0.03]))
    with pytest.raises(JointLimitViolation) as info:
        limb_ik(climbing_model, "FR", target)
    assert info.value.joint == 0
    assert isinstance(info.value, Unreachable)


def test_branch_is_preserved(climbing_model):
    q = limb_ik(climbing_model, "BR", toe_target(shoulder_frame(climbing_model, "BR").translation + [0, 0, -0.35]))
    assert q.branch is Branch.ELBOW_OUT
