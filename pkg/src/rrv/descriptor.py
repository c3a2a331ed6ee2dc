"""Rotation and relative velocity (RRV) descriptor.

An RRV sequence is a ``(N-1, 7)`` float array. Columns 0-3 hold the
rotational part ``s_r`` (a unit quaternion expressed in the normalized
frame), columns 4-6 the translational part ``s_t`` (square-root velocity of
the step velocity expressed in the local frame).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geom
from .errors import DimensionMismatch, TooShort
from .preprocess import Trajectory6D

EPS_V = 1e-8
# rotations smaller than this carry no usable axis and are left out of the SVD
EPS_BETA = 1e-6
# relative gap below which two singular values count as equal
EPS_SIGMA = 1e-9

SR = slice(0, 4)
ST = slice(4, 7)
WIDTH = 7


@dataclass(frozen=True)
class NormalizationBasis:
    u: np.ndarray
    singular_values: np.ndarray
    degenerate: bool = False


def axis_matrix(orientations) -> tuple[np.ndarray, np.ndarray]:
    """Stack the unit rotation axes as columns of a ``(3, N)`` matrix.

    Returns the matrix and the ``(N,)`` rotation angles.
    """
    aa = geom.quaternion_to_axis_angle(np.asarray(orientations, dtype=float).reshape(-1, 4))
    return aa.axis.T.copy(), aa.angle


# an entry counts as the leading one once it reaches this fraction of the row's peak
SIGN_LEAD = 0.5


def _sign_from_row(row: np.ndarray) -> float:
    """Sign making the first substantial entry (in time order) positive.

    Keying on the first entry above ``SIGN_LEAD`` of the peak rather than the
    peak itself keeps the choice stable for rows that swing symmetrically,
    where the largest positive and negative entries nearly tie.
    """
    if row.size == 0:
        return 1.0
    mag = np.abs(row)
    lead = int(np.argmax(mag >= SIGN_LEAD * mag.max()))
    return -1.0 if row[lead] < 0 else 1.0


def svd_normalize(a, betas=None) -> tuple[NormalizationBasis, np.ndarray]:
    """Rotate the axis matrix into its singular basis.

    Returns the basis ``U`` and ``U^T a``. Only columns whose angle exceeds
    ``EPS_BETA`` take part in the decomposition when ``betas`` is given.

    Signs are fixed on the rows of ``U^T a = S V^T`` (see
    :func:`_sign_from_row`), which are the same for ``a`` and ``G a`` for any
    rotation ``G``.
    The last column is then ``u1 x u2`` so ``det U = +1``. When fewer than two
    singular values are nonzero, or two of them coincide, the basis is not
    unique and ``degenerate`` is set.
    """
    a = np.asarray(a, dtype=float).reshape(3, -1)
    fit = a if betas is None else a[:, np.asarray(betas) > EPS_BETA]
    if fit.shape[1] == 0:
        return NormalizationBasis(np.eye(3), np.zeros(3), True), a.copy()

    u, s, _ = np.linalg.svd(fit, full_matrices=True)
    s = np.concatenate([s, np.zeros(3 - len(s))])
    tol = EPS_SIGMA * max(s[0], 1.0)
    rank = int(np.sum(s > tol))
    u = u.copy()
    for i in range(min(rank, 2)):
        u[:, i] *= _sign_from_row(u[:, i] @ fit)
    if rank < 2:
        # second axis unconstrained by the data; make it deterministic
        u[:, 1] *= _sign_from_row(u[:, 1])
    u[:, 2] = np.cross(u[:, 0], u[:, 1])
    degenerate = rank < 2 or bool(np.any(np.abs(np.diff(s)) < tol))
    return NormalizationBasis(u, s, degenerate), u.T @ a


def rotational_invariants(axes, betas) -> np.ndarray:
    """Quaternions ``(cos b/2, w sin b/2)`` from ``(3, N)`` axes and angles."""
    axes = np.asarray(axes, dtype=float).reshape(3, -1)
    return geom.quaternion_from_axis_angle(axes.T, np.asarray(betas, dtype=float))


def srvf(v, eps: float = EPS_V) -> np.ndarray:
    """Square-root velocity ``v / sqrt(|v|)``; zero below ``eps``."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    small = n < eps
    return np.where(small, 0.0, v / np.sqrt(np.where(small, 1.0, n)))


def local_velocity(v_global, r_tilde) -> np.ndarray:
    """Express velocities in the frame whose columns are ``r_tilde``'s axes."""
    return np.einsum("...ji,...j->...i", np.asarray(r_tilde, dtype=float), np.asarray(v_global, dtype=float))


def relative_orientations(orientations) -> np.ndarray:
    """World-frame rotation of every sample relative to the first one.

    A viewpoint change ``R -> G R`` turns these into ``G (R R0^T) G^T``:
    the angle is preserved and the axis rotates with the view.
    """
    q = np.asarray(orientations, dtype=float)
    rel = geom.quaternion_multiply(q, geom.quaternion_conjugate(q[0]))
    rel[0] = geom.IDENTITY_QUAT
    return rel / np.linalg.norm(rel, axis=-1, keepdims=True)


def compute_rrv(
    traj: Trajectory6D,
    skip_svd_normalization: bool = False,
    project: bool | None = None,
    relative: bool = True,
    return_basis: bool = False,
):
    """RRV sequence of a preprocessed 6-D trajectory.

    Sample ``t`` pairs the rotation at ``t`` with the forward difference
    ``p(t+1) - p(t)``, so ``N`` samples give ``N-1`` descriptors.

    ``relative`` first re-expresses orientations relative to the first
    sample; disable it when orientations are already incremental (virtual
    rigid bodies). ``project`` controls the local-frame projection of the
    velocity and defaults to ``not skip_svd_normalization``: a predefined
    body frame makes both steps unnecessary.
    """
    n = len(traj)
    if n < 3:
        raise TooShort(f"need at least 3 samples, got {n}")
    if project is None:
        project = not skip_svd_normalization

    q = relative_orientations(traj.orientations) if relative else traj.orientations
    a, betas = axis_matrix(q)
    if skip_svd_normalization:
        basis = NormalizationBasis(np.eye(3), np.zeros(3), False)
        a_tilde = a
    else:
        basis, a_tilde = svd_normalize(a, betas)

    s_r = rotational_invariants(a_tilde[:, : n - 1], betas[: n - 1])
    positions = traj.positions @ basis.u
    v = np.diff(positions, axis=0)
    if project:
        v = local_velocity(v, geom.quaternion_to_matrix(s_r))
    seq = np.concatenate([s_r, srvf(v)], axis=1)
    return (seq, basis) if return_basis else seq


def split(seq) -> tuple[np.ndarray, np.ndarray]:
    seq = np.asarray(seq)
    return seq[..., SR], seq[..., ST]


def rrv_distance(p, q) -> np.ndarray:
    """Quaternion-aware distance between descriptors, broadcasting over ``(..., 7)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    rot = np.minimum(
        np.linalg.norm(p[..., SR] - q[..., SR], axis=-1),
        np.linalg.norm(p[..., SR] + q[..., SR], axis=-1),
    )
    return rot + np.linalg.norm(p[..., ST] - q[..., ST], axis=-1)


def rrv_distance_l2(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return np.linalg.norm(p - q, axis=-1)


METRICS = {"rrv": rrv_distance, "l2": rrv_distance_l2}


def _blocks(x: np.ndarray) -> np.ndarray:
    if x.shape[-1] % WIDTH:
        raise DimensionMismatch(f"width {x.shape[-1]} is not a multiple of {WIDTH}")
    return x.reshape(x.shape[:-1] + (x.shape[-1] // WIDTH, WIDTH))


def multi_distance(p, q, metric: str = "rrv") -> np.ndarray:
    """Sum of per-body distances over concatenated ``(..., 7k)`` descriptors."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape[-1] != q.shape[-1]:
        raise DimensionMismatch(f"widths {p.shape[-1]} and {q.shape[-1]} differ")
    d = METRICS[metric](_blocks(p), _blocks(q))
    return d.sum(axis=-1)


def pairwise_distances(a, b, metric: str = "rrv") -> np.ndarray:
    """``(len(a), len(b))`` matrix of :func:`multi_distance` values."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise DimensionMismatch(f"widths {a.shape[-1]} and {b.shape[-1]} differ")
    return multi_distance(a[:, None, :], b[None, :, :], metric)

