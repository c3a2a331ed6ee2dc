import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rrv import geom
from rrv.errors import AntipodalVectors, InvalidParams

S2 = np.sqrt(2) / 2


def rodrigues(axis, angle):
    # independent oracle: R = cos b I + sin b [w]x + (1 - cos b) w w^T
    w = np.asarray(axis, float) / np.linalg.norm(axis)
    k = np.array([[0, -w[2], w[1]], [w[2], 0, -w[0]], [-w[1], w[0], 0]])
    return np.cos(angle) * np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * np.outer(w, w)


unit_quats = arrays(np.float64, 4, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 1e-3).map(
    lambda v: v / np.linalg.norm(v)
)


def test_euler_zero_is_identity():
    assert np.allclose(geom.euler_to_matrix([0, 0, 0], "ZYX"), np.eye(3))


def test_euler_single_axis():
    r = geom.euler_to_matrix([np.pi / 2, 0, 0], "ZYX")
    assert np.allclose(r @ [1, 0, 0], [0, 1, 0])
    assert np.allclose(r, rodrigues([0, 0, 1], np.pi / 2))


def test_euler_intrinsic_composition(rng):
    a = rng.uniform(-np.pi, np.pi, 3)
    r = geom.euler_to_matrix(a, "ZYX")
    expected = rodrigues([0, 0, 1], a[0]) @ rodrigues([0, 1, 0], a[1]) @ rodrigues([1, 0, 0], a[2])
    assert np.allclose(r, expected, atol=1e-12)
    # lowercase = extrinsic, applied right to left
    r = geom.euler_to_matrix(a, "zyx")
    expected = rodrigues([1, 0, 0], a[2]) @ rodrigues([0, 1, 0], a[1]) @ rodrigues([0, 0, 1], a[0])
    assert np.allclose(r, expected, atol=1e-12)


def test_euler_roundtrip_via_axis_angle(rng):
    angles = rng.uniform(-np.pi, np.pi, (100, 3))
    r = geom.euler_to_matrix(angles, "ZYX")
    aa = geom.matrix_to_axis_angle(r)
    back = geom.axis_angle_to_matrix(aa.axis, aa.angle)
    assert np.max(np.abs(back - r)) < 1e-9


def test_euler_convention_required():
    with pytest.raises(InvalidParams):
        geom.euler_to_matrix([0, 0, 0], "ZZX")
    with pytest.raises(InvalidParams):
        geom.EulerAngles(np.zeros(3), "")


def test_matrix_to_axis_angle_examples():
    aa = geom.matrix_to_axis_angle(np.eye(3))
    assert np.allclose(aa.axis, [0, 0, 1]) and aa.angle == 0
    aa = geom.matrix_to_axis_angle(rodrigues([1, 0, 0], np.pi / 2))
    assert np.allclose(aa.axis, [1, 0, 0]) and np.isclose(aa.angle, np.pi / 2)
    w = np.ones(3) / np.sqrt(3)
    aa = geom.matrix_to_axis_angle(rodrigues(w, np.pi))
    assert np.allclose(aa.axis, w, atol=1e-9) and np.isclose(aa.angle, np.pi)


@pytest.mark.parametrize("axis", [[-1, 0, 0], [0, -1, 1], [0, 0, -1], [-1, 2, -3]])
def test_half_turn_axis_sign(axis):
    aa = geom.matrix_to_axis_angle(rodrigues(axis, np.pi))
    nz = aa.axis[np.abs(aa.axis) > 1e-9]
    assert nz[0] > 0
    assert np.isclose(aa.angle, np.pi)
    assert np.allclose(np.abs(aa.axis), np.abs(axis) / np.linalg.norm(axis), atol=1e-9)


def test_quaternion_from_axis_angle_examples():
    assert np.allclose(geom.quaternion_from_axis_angle([0, 0, 1], 0), [1, 0, 0, 0])
    assert np.allclose(geom.quaternion_from_axis_angle([0, 0, 1], np.pi), [0, 0, 0, 1])
    assert np.allclose(geom.quaternion_from_axis_angle([1, 0, 0], np.pi / 2), [S2, S2, 0, 0])


def test_quaternion_to_matrix_examples():
    assert np.allclose(geom.quaternion_to_matrix([1, 0, 0, 0]), np.eye(3))
    assert np.allclose(geom.quaternion_to_matrix([0, 0, 0, 1]), np.diag([-1, -1, 1]))


def test_matrix_to_quaternion_examples():
    assert np.allclose(geom.matrix_to_quaternion(np.eye(3)), [1, 0, 0, 0])
    q = geom.matrix_to_quaternion(np.diag([-1.0, -1.0, 1.0]))
    assert np.allclose(np.abs(q), [0, 0, 0, 1])
    assert np.allclose(geom.quaternion_to_matrix(q), np.diag([-1, -1, 1]))


def test_rotation_matrix_invariants(rng):
    r = geom.random_rotations(rng, 500)
    assert np.allclose(np.einsum("nji,njk->nik", r, r), np.eye(3), atol=1e-9)
    assert np.allclose(np.linalg.det(r), 1, atol=1e-9)


def test_quaternion_matrix_roundtrip(rng):
    q = geom.random_quaternions(rng, 1000)
    r = geom.quaternion_to_matrix(q)
    q2 = geom.matrix_to_quaternion(r)
    assert np.max(np.abs(geom.quaternion_to_matrix(q2) - r)) < 1e-9
    assert np.allclose(np.linalg.norm(q2, axis=1), 1, atol=1e-12)


def test_axis_angle_quaternion_matches_rodrigues(rng):
    for _ in range(200):
        w = rng.standard_normal(3)
        w /= np.linalg.norm(w)
        b = rng.uniform(1e-6, np.pi - 1e-6)
        r = geom.quaternion_to_matrix(geom.quaternion_from_axis_angle(w, b))
        assert np.max(np.abs(r - rodrigues(w, b))) < 1e-9


def test_near_half_turn_fallback():
    # trace just above -1: the direct formula would divide by ~0
    for b in [np.pi - 1e-9, np.pi - 1e-7, np.pi]:
        r = rodrigues([0.3, -0.5, 0.8], b)
        q = geom.matrix_to_quaternion(r)
        assert np.max(np.abs(geom.quaternion_to_matrix(q) - r)) < 1e-9


@given(unit_quats)
def test_q_and_minus_q_same_matrix(q):
    assert np.max(np.abs(geom.quaternion_to_matrix(q) - geom.quaternion_to_matrix(-q))) < 1e-12


@given(unit_quats)
def test_axis_angle_range(q):
    aa = geom.quaternion_to_axis_angle(q)
    assert 0 <= aa.angle <= np.pi
    assert abs(np.linalg.norm(aa.axis) - 1) < 1e-9


def test_rotation_between_vectors_examples():
    assert np.allclose(geom.rotation_between_vectors([1, 0, 0], [1, 0, 0]), np.eye(3))
    r = geom.rotation_between_vectors([1, 0, 0], [0, 1, 0])
    assert np.allclose(r, rodrigues([0, 0, 1], np.pi / 2))
    with pytest.raises(AntipodalVectors):
        geom.rotation_between_vectors([1, 0, 0], [-1, 0, 0])
    assert np.allclose(geom.rotation_between_vectors([1, 0, 0], [-1, 0, 0], on_antipodal="identity"), np.eye(3))


def test_rotation_between_vectors_random(rng):
    a1 = rng.standard_normal((1000, 3))
    a2 = rng.standard_normal((1000, 3))
    a1 /= np.linalg.norm(a1, axis=1, keepdims=True)
    a2 /= np.linalg.norm(a2, axis=1, keepdims=True)
    r = geom.rotation_between_vectors(a1, a2)
    assert np.max(np.abs(np.einsum("nij,nj->ni", r, a1) - a2)) < 1e-9
    # minimal rotation: the axis is orthogonal to both vectors
    aa = geom.matrix_to_axis_angle(r)
    assert np.max(np.abs(np.sum(aa.axis * a1, axis=1))) < 1e-9
    assert np.allclose(aa.angle, np.arccos(np.clip(np.sum(a1 * a2, axis=1), -1, 1)), atol=1e-7)


def test_multiply_matches_matrix_product(rng):
    a, b = geom.random_quaternions(rng, (2, 50))
    lhs = geom.quaternion_to_matrix(geom.quaternion_multiply(a, b))
    rhs = geom.quaternion_to_matrix(a) @ geom.quaternion_to_matrix(b)
    assert np.allclose(lhs, rhs, atol=1e-12)
