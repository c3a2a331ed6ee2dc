"""Trajectory containers and conditioning: smoothing, trimming, scale."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import geom
from .errors import DegenerateTrajectory, EmptyAfterTrim, InvalidParams


@dataclass
class Trajectory6D:
    """Positions ``(N, 3)`` of a reference point plus orientations ``(N, 4)``.

    Orientations are body-to-world unit quaternions, scalar first.
    """

    positions: np.ndarray
    orientations: np.ndarray

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.orientations = np.asarray(self.orientations, dtype=float).reshape(-1, 4)
        if len(self.positions) != len(self.orientations):
            raise InvalidParams(
                f"{len(self.positions)} positions but {len(self.orientations)} orientations"
            )
        if not (np.all(np.isfinite(self.positions)) and np.all(np.isfinite(self.orientations))):
            raise InvalidParams("non-finite trajectory samples")

    def __len__(self):
        return len(self.positions)

    @classmethod
    def from_euler(cls, positions, angles, convention: str) -> "Trajectory6D":
        mats = geom.euler_to_matrix(np.asarray(angles, dtype=float).reshape(-1, 3), convention)
        return cls(positions, geom.matrix_to_quaternion(mats))

    @classmethod
    def translation_only(cls, positions) -> "Trajectory6D":
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        return cls(positions, np.tile(geom.IDENTITY_QUAT, (len(positions), 1)))

    def rotation_matrices(self) -> np.ndarray:
        return geom.quaternion_to_matrix(self.orientations)

    def slice(self, start: int, stop: int) -> "Trajectory6D":
        return Trajectory6D(self.positions[start:stop], self.orientations[start:stop])


@dataclass(frozen=True)
class SmootherParams:
    """Constant-velocity Kalman model, identical and independent per axis."""

    process_noise: float = 1e-3
    measurement_noise: float = 1e-2
    model: str = "constant_velocity"

    def validate(self) -> "SmootherParams":
        if not (self.process_noise > 0 and self.measurement_noise > 0):
            raise InvalidParams("smoother variances must be > 0")
        if self.model != "constant_velocity":
            raise InvalidParams(f"unknown motion model {self.model!r}")
        return self


def kalman_smooth(points, params: SmootherParams = SmootherParams()) -> np.ndarray:
    """Forward Kalman filter plus Rauch-Tung-Striebel backward pass.

    The state per axis is (position, velocity) with a white-acceleration
    process model. Gains do not depend on the data, so all axes share one
    covariance recursion and the smoother is an affine map of the input:
    constant signals are fixed points and translations commute with it.
    """
    params.validate()
    z = np.asarray(points, dtype=float)
    n = len(z)
    if n == 0:
        return z.copy()
    F = np.array([[1.0, 1.0], [0.0, 1.0]])
    Q = params.process_noise * np.array([[1.0 / 3.0, 0.5], [0.5, 1.0]])
    r = params.measurement_noise

    x_f = np.empty((n, 2) + z.shape[1:])
    x_p = np.empty_like(x_f)
    P_f = np.empty((n, 2, 2))
    P_p = np.empty((n, 2, 2))

    x = np.zeros((2,) + z.shape[1:])
    x[0] = z[0]
    P = np.diag([r, 1.0])
    for t in range(n):
        if t > 0:
            x = np.tensordot(F, x, axes=1)
            P = F @ P @ F.T + Q
        x_p[t], P_p[t] = x, P
        s = P[0, 0] + r
        gain = P[:, 0] / s
        innovation = z[t] - x[0]
        x = x + np.multiply.outer(gain, innovation)
        P = P - np.outer(gain, P[0, :])
        x_f[t], P_f[t] = x, P

    x_s = x_f.copy()
    for t in range(n - 2, -1, -1):
        c = P_f[t] @ F.T @ np.linalg.inv(P_p[t + 1])
        x_s[t] = x_f[t] + np.tensordot(c, x_s[t + 1] - x_p[t + 1], axes=1)
    return x_s[:, 0]


def step_motion(traj: Trajectory6D) -> tuple[np.ndarray, np.ndarray]:
    """Per-step displacement length and rotation angle, each ``(N-1,)``."""
    disp = np.linalg.norm(np.diff(traj.positions, axis=0), axis=1)
    q = traj.orientations
    rel = geom.quaternion_multiply(q[1:], geom.quaternion_conjugate(q[:-1]))
    ang = geom.quaternion_to_axis_angle(rel).angle
    return disp, ang


def stationary_bounds(traj: Trajectory6D, speed_eps: float = 1e-4) -> tuple[int, int] | None:
    """``(start, stop)`` slice spanning the first to the last moving step, or ``None``."""
    if len(traj) < 2:
        return None
    disp, ang = step_motion(traj)
    moving = np.flatnonzero((disp >= speed_eps) | (ang >= speed_eps))
    if moving.size == 0:
        return None
    return int(moving[0]), int(moving[-1]) + 2


def remove_stationary(traj: Trajectory6D, speed_eps: float = 1e-4) -> Trajectory6D:
    """Drop leading and trailing stationary runs.

    A step is stationary when both its displacement and its rotation angle
    are below ``speed_eps``. The first kept sample is the start of the first
    moving step and the last kept sample the end of the last one; interior
    pauses are never touched.
    """
    if len(traj) < 2:
        raise EmptyAfterTrim("no motion in a single-sample trajectory")
    bounds = stationary_bounds(traj, speed_eps)
    if bounds is None:
        raise EmptyAfterTrim("trajectory is stationary throughout")
    return traj.slice(*bounds)


def arc_length(points) -> float:
    points = np.asarray(points, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(points, axis=0), axis=1)))


def normalize_scale(points) -> np.ndarray:
    """Rescale so the polyline has unit arc length (translation untouched)."""
    points = np.asarray(points, dtype=float)
    length = arc_length(points)
    if not length > 0:
        raise DegenerateTrajectory("zero arc length")
    return points / length


@dataclass(frozen=True)
class PreprocessConfig:
    smooth: bool = True
    smoother: SmootherParams = field(default_factory=SmootherParams)
    trim_stationary: bool = True
    speed_eps: float = 1e-4


def preprocess(traj: Trajectory6D, cfg: PreprocessConfig = PreprocessConfig()) -> Trajectory6D:
    """Trim, scale to unit length, smooth positions, and rescale again.

    Every stage commutes with rotation, translation and uniform scaling of
    the input, so the chain does too. Orientations are never smoothed.
    """
    pos = normalize_scale(traj.positions)
    out = Trajectory6D(pos, traj.orientations)
    if cfg.trim_stationary:
        out = remove_stationary(out, cfg.speed_eps)
    if cfg.smooth:
        pos = normalize_scale(kalman_smooth(out.positions, cfg.smoother))
    else:
        pos = normalize_scale(out.positions)
    return Trajectory6D(pos, out.orientations)
