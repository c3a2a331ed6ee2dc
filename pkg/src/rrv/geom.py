"""Rotation representation algebra.

Quaternions are stored scalar-first ``(w, x, y, z)``. Every function accepts
arbitrary leading batch dimensions: a ``(..., 3, 3)`` stack of matrices maps to
a ``(..., 4)`` stack of quaternions and so on.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AntipodalVectors, InvalidParams

EPS_ANTI = 1e-8
EPS_TR = 1e-6
# below this vector-part norm the rotation angle is treated as zero
EPS_AXIS = 1e-12

CANONICAL_AXIS = np.array([0.0, 0.0, 1.0])
IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


class AxisAngle(NamedTuple):
    axis: np.ndarray  # (..., 3) unit vectors
    angle: np.ndarray  # (...,) radians in [0, pi]


@dataclass(frozen=True)
class EulerAngles:
    """Three angles plus the axis sequence they are composed in.

    ``convention`` is a three-letter axis string. Upper case (``"ZYX"``) is an
    intrinsic sequence, lower case (``"zyx"``) extrinsic. The first angle
    always belongs to the first letter.
    """

    angles: tuple[float, float, float]
    convention: str

    def __post_init__(self):
        check_convention(self.convention)

    def to_matrix(self) -> np.ndarray:
        return euler_to_matrix(self.angles, self.convention)


def _axis_rotation(axis: str, angle: np.ndarray) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    one, zero = np.ones_like(angle), np.zeros_like(angle)
    if axis == "x":
        rows = [[one, zero, zero], [zero, c, -s], [zero, s, c]]
    elif axis == "y":
        rows = [[c, zero, s], [zero, one, zero], [-s, zero, c]]
    else:
        rows = [[c, -s, zero], [s, c, zero], [zero, zero, one]]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def check_convention(convention: str) -> str:
    if (
        not isinstance(convention, str)
        or len(convention) != 3
        or not (convention.isupper() or convention.islower())
        or any(ch not in "xyz" for ch in convention.lower())
        or convention[0].lower() == convention[1].lower()
        or convention[1].lower() == convention[2].lower()
    ):
        raise InvalidParams(f"bad Euler convention {convention!r}")
    return convention


def euler_to_matrix(angles, convention: str) -> np.ndarray:
    """Compose ``(..., 3)`` Euler angles into rotation matrices."""
    check_convention(convention)
    angles = np.asarray(angles, dtype=float)
    mats = [_axis_rotation(ax, angles[..., i]) for i, ax in enumerate(convention.lower())]
    if convention.isupper():
        # intrinsic: R = R1 R2 R3
        return mats[0] @ mats[1] @ mats[2]
    return mats[2] @ mats[1] @ mats[0]


def skew(v) -> np.ndarray:
    """Cross-product matrix ``[v]x`` so that ``skew(a) @ b == cross(a, b)``."""
    v = np.asarray(v, dtype=float)
    z = np.zeros_like(v[..., 0])
    rows = [
        [z, -v[..., 2], v[..., 1]],
        [v[..., 2], z, -v[..., 0]],
        [-v[..., 1], v[..., 0], z],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def axis_angle_to_matrix(axis, angle) -> np.ndarray:
    """Rodrigues' formula."""
    axis = np.asarray(axis, dtype=float)
    angle = np.asarray(angle, dtype=float)[..., None, None]
    k = skew(axis)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def quaternion_from_axis_angle(axis, angle) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    half = 0.5 * np.asarray(angle, dtype=float)
    return np.concatenate([np.cos(half)[..., None], axis * np.sin(half)[..., None]], axis=-1)


def quaternion_to_matrix(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    w, x, y, z = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    rows = [
        [1 - 2 * y * y - 2 * z * z, 2 * x * y - 2 * z * w, 2 * x * z + 2 * y * w],
        [2 * x * y + 2 * z * w, 1 - 2 * x * x - 2 * z * z, 2 * y * z - 2 * x * w],
        [2 * x * z - 2 * y * w, 2 * y * z + 2 * x * w, 1 - 2 * x * x - 2 * y * y],
    ]
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)


def _first_nonzero_positive(v: np.ndarray) -> np.ndarray:
    """Flip each vector in ``(..., k)`` so its first nonzero entry is positive."""
    nz = np.abs(v) > EPS_AXIS
    first = np.argmax(nz, axis=-1)
    lead = np.take_along_axis(v, first[..., None], axis=-1)[..., 0]
    sign = np.where(lead < 0, -1.0, 1.0)
    return v * sign[..., None]


def matrix_to_quaternion(r) -> np.ndarray:
    """Unit quaternion with ``w >= 0`` for a rotation matrix.

    Uses the trace formula while ``tr(R) > -1 + EPS_TR`` and the largest
    diagonal pivot otherwise, where the trace formula divides by ~0.
    """
    r = np.asarray(r, dtype=float)
    batch = r.shape[:-2]
    r = r.reshape(-1, 3, 3)
    out = np.empty((r.shape[0], 4))
    tr = np.trace(r, axis1=-2, axis2=-1)

    ok = tr > -1.0 + EPS_TR
    if ok.any():
        m = r[ok]
        w = 0.5 * np.sqrt(1.0 + tr[ok])
        out[ok, 0] = w
        out[ok, 1] = (m[:, 2, 1] - m[:, 1, 2]) / (4 * w)
        out[ok, 2] = (m[:, 0, 2] - m[:, 2, 0]) / (4 * w)
        out[ok, 3] = (m[:, 1, 0] - m[:, 0, 1]) / (4 * w)

    for i in np.flatnonzero(~ok):
        m = r[i]
        k = int(np.argmax(np.diag(m)))
        j, l = (k + 1) % 3, (k + 2) % 3
        s = np.sqrt(max(1.0 + m[k, k] - m[j, j] - m[l, l], 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (m[l, j] - m[j, l]) / s
        q[1 + k] = 0.25 * s
        q[1 + j] = (m[j, k] + m[k, j]) / s
        q[1 + l] = (m[l, k] + m[k, l]) / s
        if q[0] < 0:
            q = -q
        out[i] = q

    out /= np.linalg.norm(out, axis=-1, keepdims=True)
    half_turn = np.abs(out[:, 0]) <= EPS_AXIS
    if half_turn.any():
        out[half_turn, 1:] = _first_nonzero_positive(out[half_turn, 1:])
    return out.reshape(batch + (4,))


def quaternion_to_axis_angle(q) -> AxisAngle:
    q = np.asarray(q, dtype=float)
    q = np.where(q[..., :1] < 0, -q, q)
    vec = q[..., 1:]
    s = np.linalg.norm(vec, axis=-1)
    angle = 2.0 * np.arctan2(s, q[..., 0])
    small = s <= EPS_AXIS
    axis = np.where(small[..., None], CANONICAL_AXIS, vec / np.where(small, 1.0, s)[..., None])
    angle = np.where(small, 0.0, angle)
    half_turn = np.abs(np.pi - angle) <= EPS_AXIS
    if np.any(half_turn):
        axis = np.where(half_turn[..., None], _first_nonzero_positive(axis), axis)
    return AxisAngle(axis, angle)


def matrix_to_axis_angle(r) -> AxisAngle:
    """Axis and angle in ``[0, pi]``.

    Zero rotations get the canonical axis ``(0, 0, 1)``; half turns have their
    axis sign fixed so the first nonzero component is positive.
    """
    return quaternion_to_axis_angle(matrix_to_quaternion(r))


def quaternion_multiply(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w1, x1, y1, z1 = np.moveaxis(a, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ],
        axis=-1,
    )


def quaternion_conjugate(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def rotation_between_vectors(a1, a2, on_antipodal: str = "raise") -> np.ndarray:
    """Minimal rotation taking unit vector ``a1`` onto ``a2``.

    ``R = I + [c]x + [c]x^2 (1 - a1.a2) / |c|^2`` with ``c = a1 x a2``. Since
    ``|c|^2 = 1 - (a1.a2)^2`` the last factor is evaluated as
    ``1 / (1 + a1.a2)``, which is exact for parallel inputs too.

    ``on_antipodal`` is ``"raise"`` or ``"identity"``; the latter substitutes
    the identity for opposite pairs.
    """
    a1 = np.asarray(a1, dtype=float)
    a2 = np.asarray(a2, dtype=float)
    c = np.cross(a1, a2)
    d = np.sum(a1 * a2, axis=-1)
    anti = d < -1.0 + EPS_ANTI
    if np.any(anti) and on_antipodal == "raise":
        raise AntipodalVectors(f"{int(np.sum(anti))} antipodal vector pair(s)")
    k = skew(c)
    factor = 1.0 / np.where(anti, 1.0, 1.0 + d)
    r = np.eye(3) + k + (k @ k) * factor[..., None, None]
    if np.any(anti):
        r = np.where(anti[..., None, None], np.eye(3), r)
    return r


def random_quaternions(rng: np.random.Generator, size=()) -> np.ndarray:
    """Uniformly distributed unit quaternions with ``w >= 0``."""
    shape = (size,) if isinstance(size, int) else tuple(size)
    q = rng.standard_normal(shape + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return np.where(q[..., :1] < 0, -q, q)


def random_rotations(rng: np.random.Generator, size=()) -> np.ndarray:
    return quaternion_to_matrix(random_quaternions(rng, size))


def rotation_angle(r) -> np.ndarray:
    """Angle of each rotation matrix, robust near 0 and pi."""
    return matrix_to_axis_angle(r).angle
