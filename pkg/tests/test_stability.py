import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quadclimb.config import GraspBoundParams
from quadclimb.geometry import STANDARD_GRAVITY, WALL_NORMAL, GravityFrame, RigidTransform
from quadclimb.gripper import max_withstanding_force
from quadclimb.kinematics import (
    LiftSide,
    LimbConfig,
    ShiftState,
    home_configuration,
    lift_side_center,
    limb_fk,
    shoulder_frame,
)
from quadclimb.planners import nominal_toes, plan_skate_cycle
from quadclimb.stability import (
    BaselineInfeasible,
    CapacityProblem,
    ContactSpec,
    Infeasible,
    LimbPosture,
    Wrench,
    certify_plan,
    check_joint_torques,
    contact_slope,
    distribute_forces,
    equilibrium_residual,
    gravity_wrench,
    joint_torques,
    max_payload,
    stance_contacts,
    torque_violations,
)


def grasp_stance(model, slope=0.0):
    toes = nominal_toes(model, np.zeros(3), ShiftState.neutral())
    return tuple(ContactSpec.grasp(model, toe, WALL_NORMAL, slope, limb=limb) for limb, toe in toes.items())


def foot_stance(model):
    toes = nominal_toes(model, np.zeros(3), ShiftState.neutral())
    return tuple(ContactSpec.foot(model, toe, WALL_NORMAL, limb) for limb, toe in toes.items())


def test_wrench_transform_moves_point_force():
    transform = RigidTransform.from_rotvec([0.0, 0.0, 0.4], [0.1, -0.2, 0.3])
    force, point = np.array([1.0, 2.0, -0.5]), np.array([0.2, 0.1, 0.0])
    moved = Wrench.point_force(force, point).transformed(transform)
    expected = Wrench.point_force(transform.rotation @ force, transform.apply(point))
    assert np.allclose(moved.force, expected.force)
    assert np.allclose(moved.torque, expected.torque)


def test_vertical_stance_balances(climbing_model):
    contacts = grasp_stance(climbing_model)
    load = gravity_wrench(climbing_model.mass_kg, GravityFrame.vertical(), np.zeros(3))
    solution = distribute_forces(contacts, load)
    force, torque = equilibrium_residual(contacts, solution.forces, load)
    assert np.linalg.norm(force) < 1e-6
    assert np.linalg.norm(torque) < 1e-6
    assert solution.forces[:, 1].sum() == pytest.approx(climbing_model.mass_kg * STANDARD_GRAVITY)
    assert solution.worst_margin_n > 0
    assert solution.max_force_n >= climbing_model.mass_kg * STANDARD_GRAVITY / 4


def test_ground_feet_share_the_load(walking_model):
    contacts = foot_stance(walking_model)
    load = gravity_wrench(walking_model.mass_kg, GravityFrame.ground(), np.zeros(3))
    solution = distribute_forces(contacts, load)
    share = walking_model.mass_kg * STANDARD_GRAVITY / 4
    assert np.allclose(solution.forces[:, 2], share, rtol=1e-3)
    assert np.allclose(solution.forces[:, :2], 0.0, atol=1e-3)


def test_thrust_enters_the_balance(climbing_model):
    contacts = grasp_stance(climbing_model)
    load = gravity_wrench(climbing_model.mass_kg, GravityFrame.vertical(), np.zeros(3))
    solution = distribute_forces(contacts, load, thrust_n=30.0, thrust_point=np.zeros(3))
    lift = climbing_model.mass_kg * STANDARD_GRAVITY - 30.0
    assert solution.forces[:, 1].sum() == pytest.approx(lift)


def test_feet_cannot_hold_a_ceiling(walking_model):
    load = gravity_wrench(walking_model.mass_kg, GravityFrame.ceiling(), np.zeros(3))
    with pytest.raises(Infeasible):
        distribute_forces(foot_stance(walking_model), load)


def test_single_contact_is_infeasible(climbing_model):
    with pytest.raises(Infeasible):
        distribute_forces(grasp_stance(climbing_model)[:1], Wrench())


def test_slack_reports_violation(climbing_model):
    contact = grasp_stance(climbing_model)[0]
    assert contact.slack(-(contact.pull_cap_n + 1.0) * contact.normal) < 0
    assert contact.slack(np.zeros(3)) > 0


def capacity(model, slope, inclination=90.0):
    return max_payload(
        CapacityProblem(
            contacts=grasp_stance(model, slope),
            gravity=GravityFrame(inclination),
            base_mass_kg=model.mass_kg,
            com=np.zeros(3),
        )
    )


def test_payload_capacity_drops_with_hold_slope(climbing_model):
    flat, steep = capacity(climbing_model, 0.0), capacity(climbing_model, 60.0)
    assert flat > 0
    assert steep <= flat + 0.02


def test_overhang_reduces_capacity(climbing_model):
    vertical = capacity(climbing_model, contact_slope(GravityFrame(90.0)), 90.0)
    overhang = capacity(climbing_model, contact_slope(GravityFrame(125.0)), 125.0)
    assert overhang < vertical


def test_baseline_infeasible(walking_model):
    problem = CapacityProblem(
        contacts=foot_stance(walking_model),
        gravity=GravityFrame.ceiling(),
        base_mass_kg=walking_model.mass_kg,
        com=np.zeros(3),
    )
    with pytest.raises(BaselineInfeasible):
        max_payload(problem)


@pytest.mark.parametrize(
    "inclination, hold, expected",
    [(90.0, 20.0, 20.0), (125.0, 20.0, 42.10), (180.0, 10.0, 90.0), (45.0, None, 0.0), (125.0, None, 22.10)],
)
def test_contact_slope(inclination, hold, expected):
    assert contact_slope(GravityFrame(inclination), hold) == pytest.approx(expected, abs=0.01)


@given(st.floats(min_value=90.0, max_value=180.0))
def test_overhang_pull_capacity_follows_the_cosine(inclination):
    bound = GraspBoundParams()
    pull = max_withstanding_force(bound, contact_slope(GravityFrame(inclination), bound=bound))
    cosine = bound.intercept_n * math.cos(math.radians(inclination - 90.0))
    assert pull == pytest.approx(max(cosine, max_withstanding_force(bound, 90.0)), abs=1e-6)


def test_stance_contacts_by_configuration(climbing_model, walking_model):
    toes = nominal_toes(climbing_model, np.zeros(3), ShiftState.neutral())
    grasps = stance_contacts(climbing_model, toes, GravityFrame.vertical())
    feet = stance_contacts(walking_model, toes, GravityFrame.ground())
    assert all(c.pull_cap_n == pytest.approx(214.2) for c in grasps)
    assert all(c.pull_cap_n == 0.0 and c.friction > 0 for c in feet)


def test_joint_torques_follow_virtual_work(climbing_model):
    q = home_configuration(climbing_model, "FR")
    force = np.array([1.0, -2.0, 3.0])
    shoulder = shoulder_frame(climbing_model, "FR")
    tau = joint_torques(climbing_model, "FR", q, force, shoulder, RigidTransform.identity())
    h = 1e-6
    for i in range(6):
        dq = np.zeros(6)
        dq[i] = h
        plus = limb_fk(climbing_model, "FR", LimbConfig(q.q + dq), shoulder).translation
        minus = limb_fk(climbing_model, "FR", LimbConfig(q.q - dq), shoulder).translation
        assert tau[i] == pytest.approx(force @ (plus - minus) / (2 * h), abs=1e-6)


def test_torque_limits(climbing_model):
    q = home_configuration(climbing_model, "FR")
    posture = LimbPosture("FR", q, shoulder_frame(climbing_model, "FR"), RigidTransform.identity())
    assert check_joint_torques(climbing_model, [posture], np.array([[0.0, 5.0, 0.0]])) == []
    problems = check_joint_torques(climbing_model, [posture], np.array([[0.0, 500.0, 0.0]]))
    assert problems and problems[0].startswith("FR q")
    assert torque_violations(climbing_model, "BL", np.zeros(6)) == []


def test_skate_cycle_certifies_on_vertical_wall(climbing_model):
    report = certify_plan(plan_skate_cycle(climbing_model), climbing_model, GravityFrame.vertical())
    assert report.feasible
    assert report.first_failure is None
    assert report.worst_margin_n > 0
    assert report.to_dict()["phases"]


def test_heavy_ceiling_payload_is_flagged(climbing_model):
    report = certify_plan(
        plan_skate_cycle(climbing_model), climbing_model, GravityFrame.ceiling(), payload_kg=30.0
    )
    assert not report.feasible
    failure = report.first_failure
    assert failure is not None
    assert failure.first_infeasible_s >= failure.start_time_s
    assert failure.message


def three_contact_problem(model, inclination, limbs=("FR", "FL", "BL")):
    gravity = GravityFrame(inclination)
    toes = nominal_toes(model, np.zeros(3), ShiftState.neutral())
    contacts = stance_contacts(model, {limb: toes[limb] for limb in limbs}, gravity)
    return CapacityProblem(contacts=contacts, gravity=gravity, base_mass_kg=model.mass_kg, com=np.zeros(3))


def test_capacity_never_rises_past_vertical(climbing_model):
    inclinations = np.arange(90.0, 181.0, 10.0)
    payloads = [max_payload(three_contact_problem(climbing_model, a)) for a in inclinations]
    for before, after in zip(payloads, payloads[1:]):
        assert after <= before + 0.02
    assert payloads[-1] < payloads[0] - 5.0


@pytest.mark.parametrize("payload", [0.0, 0.5])
def test_skate_holds_on_the_overhang_without_payload(climbing_model, payload):
    report = certify_plan(plan_skate_cycle(climbing_model), climbing_model, GravityFrame(125.0), payload_kg=payload)
    assert report.feasible


def test_skate_overhang_rejects_the_vertical_payload(climbing_model):
    report = certify_plan(plan_skate_cycle(climbing_model), climbing_model, GravityFrame(125.0), payload_kg=3.4)
    assert not report.feasible
    assert report.first_failure is not None


def test_skate_carries_the_vertical_payload(climbing_model):
    report = certify_plan(plan_skate_cycle(climbing_model), climbing_model, GravityFrame.vertical(), payload_kg=3.4)
    assert report.feasible


def test_thrust_never_lowers_capacity(climbing_model):
    payloads = [
        max_payload(
            CapacityProblem(
                contacts=grasp_stance(climbing_model),
                gravity=GravityFrame.vertical(),
                base_mass_kg=climbing_model.mass_kg,
                com=np.zeros(3),
                thrust_n=thrust,
            )
        )
        for thrust in (0.0, 10.0, 20.0, 30.0)
    ]
    for before, after in zip(payloads, payloads[1:]):
        assert after >= before - 0.02
    assert payloads[-1] > payloads[0] + 2.0


@settings(max_examples=10, deadline=None)
@given(
    st.lists(st.floats(min_value=-math.pi, max_value=math.pi), min_size=3, max_size=3),
    st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=3, max_size=3),
    st.floats(min_value=90.0, max_value=180.0),
)
def test_rotating_the_world_changes_nothing(climbing_model, rotvec, offset, inclination):
    transform = RigidTransform.from_rotvec(rotvec, offset)
    contacts = grasp_stance(climbing_model)
    load = gravity_wrench(climbing_model.mass_kg, GravityFrame(inclination), np.zeros(3))
    solution = distribute_forces(contacts, load)
    moved = distribute_forces([c.transformed(transform) for c in contacts], load.transformed(transform))
    assert moved.objective == pytest.approx(solution.objective, rel=1e-9)
    rotated = solution.forces @ transform.rotation.T
    assert np.abs(np.linalg.norm(moved.forces, axis=1).max() - np.linalg.norm(rotated, axis=1).max()) < 1e-6


def test_rotating_the_world_keeps_infeasibility(climbing_model):
    transform = RigidTransform.from_rotvec([0.3, -1.1, 2.0], [0.5, 0.2, -0.4])
    contacts = grasp_stance(climbing_model)
    load = gravity_wrench(climbing_model.mass_kg + 40.0, GravityFrame.ceiling(), np.zeros(3))
    with pytest.raises(Infeasible):
        distribute_forces(contacts, load)
    with pytest.raises(Infeasible):
        distribute_forces([c.transformed(transform) for c in contacts], load.transformed(transform))


@given(
    st.lists(st.floats(min_value=-100.0, max_value=100.0), min_size=12, max_size=12),
    st.lists(st.floats(min_value=-1.0, max_value=1.0), min_size=12, max_size=12),
)
def test_residual_matches_term_by_term_sums(values, coords):
    positions = np.reshape(coords, (4, 3))
    forces = np.reshape(values, (4, 3))
    contacts = [ContactSpec(p, WALL_NORMAL, 50.0, 50.0) for p in positions]
    external = Wrench(np.array([1.0, -2.0, 3.0]), np.array([0.5, 0.25, -0.75]))
    net_force, net_torque = equilibrium_residual(contacts, forces, external)
    fx = fy = fz = 0.0
    tx, ty, tz = 0.5, 0.25, -0.75
    for (x, y, z), (a, b, c) in zip(positions, forces):
        fx, fy, fz = fx + a, fy + b, fz + c
        tx += y * c - z * b
        ty += z * a - x * c
        tz += x * b - y * a
    assert net_force == pytest.approx([fx + 1.0, fy - 2.0, fz + 3.0], abs=1e-12)
    assert net_torque == pytest.approx([tx, ty, tz], abs=1e-12)


def normal_loads(contacts, load):
    """Normal forces of coplanar wall contacts, fixed by statics alone."""
    height = contacts[0].position[2]
    a = np.array([[1.0] * 3, [c.position[1] for c in contacts], [c.position[0] for c in contacts]])
    rhs = np.array(
        [
            -load.force[2],
            -load.torque[0] - height * load.force[1],
            load.torque[1] - height * load.force[0],
        ]
    )
    return np.linalg.solve(a, rhs)


def test_feasibility_agrees_with_statics_on_a_load_grid(climbing_model):
    toes = nominal_toes(climbing_model, np.zeros(3), ShiftState.neutral())
    contacts = [ContactSpec(toes[limb], WALL_NORMAL, 60.0, 1e4, limb=limb) for limb in ("FR", "FL", "BL")]
    verdicts = set()
    for inclination in np.arange(90.0, 181.0, 15.0):
        for mass in (5.0, 10.0, 15.0, 20.0):
            load = gravity_wrench(mass, GravityFrame(inclination), np.zeros(3))
            normals = normal_loads(contacts, load)
            margins = np.concatenate([normals + 60.0, 500.0 - normals])
            if np.abs(margins).min() < 0.5:
                continue
            expected = bool(margins.min() > 0)
            try:
                distribute_forces(contacts, load)
                solved = True
            except Infeasible:
                solved = False
            assert solved == expected, (inclination, mass, normals)
            verdicts.add(expected)
    assert verdicts == {True, False}


def test_forces_pushed_outside_the_limits_are_rejected(climbing_model, monkeypatch):
    import quadclimb.stability as stability

    def overpull(contacts, forces, external):
        return forces - 1e3 * np.array([c.normal for c in contacts])

    monkeypatch.setattr(stability, "_project_to_equilibrium", overpull)
    load = gravity_wrench(climbing_model.mass_kg, GravityFrame.vertical(), np.zeros(3))
    with pytest.raises(Infeasible, match="after projection"):
        distribute_forces(grasp_stance(climbing_model), load)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.0, max_value=180.0), st.floats(min_value=0.0, max_value=8.0))
def test_solutions_respect_every_limit(climbing_model, inclination, payload):
    contacts = grasp_stance(climbing_model)
    load = gravity_wrench(climbing_model.mass_kg + payload, GravityFrame(inclination), np.zeros(3))
    try:
        solution = distribute_forces(contacts, load)
    except Infeasible:
        return
    assert min(solution.slacks) >= -1e-9
    force, torque = equilibrium_residual(contacts, solution.forces, load)
    assert np.linalg.norm(force) < 1e-6
    assert np.linalg.norm(torque) < 1e-6


@pytest.mark.parametrize("side", [LiftSide.RIGHT, LiftSide.LEFT])
def test_thrust_acts_on_the_lifted_half(climbing_model, side):
    point = lift_side_center(climbing_model, ShiftState(side))
    assert np.sign(point[0]) == (1.0 if side is LiftSide.RIGHT else -1.0)
    contacts = grasp_stance(climbing_model)
    load = gravity_wrench(climbing_model.mass_kg, GravityFrame.vertical(), np.zeros(3))
    solution = distribute_forces(contacts, load, thrust_n=30.0, thrust_point=point)
    yaw = sum(np.cross(c.position, f)[2] for c, f in zip(contacts, solution.forces))
    assert yaw == pytest.approx(-30.0 * point[0], abs=1e-6)
