import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from quadclimb.geometry import STANDARD_GRAVITY, GravityFrame, RigidTransform, compose, skew

angles = st.floats(min_value=-3.0, max_value=3.0)
coords = st.floats(min_value=-1.0, max_value=1.0)


@given(st.tuples(angles, angles, angles), st.tuples(coords, coords, coords))
def test_inverse_composes_to_identity(rotvec, translation):
    t = RigidTransform.from_rotvec(rotvec, translation)
    ident = t @ t.inverse()
    assert np.allclose(ident.rotation, np.eye(3), atol=1e-9)
    assert np.allclose(ident.translation, 0.0, atol=1e-9)


def test_compose_applies_right_operand_first():
    a = RigidTransform.from_translation([1.0, 0.0, 0.0])
    b = RigidTransform.from_rotvec([0.0, 0.0, np.pi / 2])
    p = np.array([1.0, 0.0, 0.0])
    assert np.allclose(compose(a, b).apply(p), a.apply(b.apply(p)))
    assert np.allclose(compose(a, b).apply(p), [1.0, 1.0, 0.0])


def test_rejects_reflection():
    with pytest.raises(ValueError):
        RigidTransform(np.diag([1.0, 1.0, -1.0]))


def test_rotation_distance_matches_scipy():
    a = RigidTransform.from_rotvec([0.0, 0.3, 0.0])
    b = RigidTransform.from_rotvec([0.0, -0.2, 0.0])
    expected = (Rotation.from_rotvec([0, 0.3, 0]).inv() * Rotation.from_rotvec([0, -0.2, 0])).magnitude()
    assert a.rotation_distance(b) == pytest.approx(expected)
    assert a.rotation_distance(b) == pytest.approx(0.5)


def test_dict_round_trip():
    t = RigidTransform.from_rotvec([0.1, 0.2, 0.3], [0.4, 0.5, 0.6])
    back = RigidTransform.from_dict(t.to_dict())
    assert np.allclose(back.rotation, t.rotation)
    assert np.allclose(back.translation, t.translation)


def test_skew_is_cross_product():
    a, b = np.array([1.0, 2.0, 3.0]), np.array([-0.5, 0.1, 2.0])
    assert np.allclose(skew(a) @ b, np.cross(a, b))


@pytest.mark.parametrize(
    "inclination, expected",
    [
        (0.0, [0.0, 0.0, -STANDARD_GRAVITY]),
        (90.0, [0.0, -STANDARD_GRAVITY, 0.0]),
        (180.0, [0.0, 0.0, STANDARD_GRAVITY]),
    ],
)
def test_gravity_direction(inclination, expected):
    assert np.allclose(GravityFrame(inclination).gravity, expected, atol=1e-9)


def test_overhang_pulls_off_the_wall():
    frame = GravityFrame(125.0)
    assert frame.normal_component > 0
    assert frame.tangential_magnitude == pytest.approx(STANDARD_GRAVITY * np.sin(np.radians(125.0)))


@pytest.mark.parametrize("inclination", [-1.0, 180.5])
def test_inclination_range(inclination):
    with pytest.raises(ValueError):
        GravityFrame(inclination)
