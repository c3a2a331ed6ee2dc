"""Shared generators for the test modules."""
import numpy as np

from rrv import geom
from rrv.preprocess import Trajectory6D


def random_trajectory(rng, n=40) -> Trajectory6D:
    """Smooth random 6-D trajectory whose rotation axes have a well-spread spectrum."""
    t = np.linspace(0, 1, n)
    freqs = rng.uniform(0.5, 2.0, (3, 3))
    phases = rng.uniform(0, 2 * np.pi, (3, 3))
    pos = np.stack([np.sum(np.sin(2 * np.pi * freqs[k] * t[:, None] + phases[k]), axis=1) for k in range(3)], axis=1)
    # axis sweeps through three directions with distinct weights
    w = np.array([1.0, 0.6, 0.3]) * rng.uniform(0.8, 1.2, 3)
    basis = geom.random_rotations(rng)
    rotvec = np.stack([w[0] * np.sin(3 * t), w[1] * np.cos(5 * t), w[2] * t], axis=1) @ basis.T + 0.2
    ang = np.linalg.norm(rotvec, axis=1)
    q = geom.quaternion_from_axis_angle(rotvec / ang[:, None], ang)
    return Trajectory6D(pos, q)
