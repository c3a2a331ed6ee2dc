"""Synthetic motion generators, rigid transforms and noise injection."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .. import geom
from ..errors import InvalidParams
from ..preprocess import Trajectory6D
from ..skeleton import SkeletonSequence
from .samples import LabeledSample

TAU = 2.0 * np.pi


def _helix(s):
    return np.stack([np.cos(2 * TAU * s), np.sin(2 * TAU * s), 1.2 * s], 1), np.stack(
        [0.2 * np.sin(TAU * s), 0.3 * s, 1.4 * np.sin(np.pi * s)], 1
    )


def _figure_eight(s):
    return np.stack([np.sin(TAU * s), 0.5 * np.sin(2 * TAU * s), 0.2 * s], 1), np.stack(
        [0.9 * np.sin(TAU * s), 0.3 + 0 * s, 0.5 * s], 1
    )


def _circle(s):
    return np.stack([np.cos(TAU * s), np.sin(TAU * s), 0.05 * np.sin(3 * TAU * s)], 1), np.stack(
        [0.1 + 0 * s, 1.2 * s, 0.4 * np.cos(TAU * s)], 1
    )


def _spiral(s):
    return np.stack([(0.2 + s) * np.cos(3 * TAU * s), (0.2 + s) * np.sin(3 * TAU * s), 0.6 * s**2], 1), np.stack(
        [1.0 * s, -0.6 * s, 0.3 * np.sin(2 * TAU * s)], 1
    )


def _zigzag(s):
    return np.stack([s, 0.3 * np.sin(3 * TAU * s), 0.3 * np.cos(TAU * s)], 1), np.stack(
        [0.5 * np.sin(2 * TAU * s), 0.8 * np.cos(TAU * s), 0.2 + 0 * s], 1
    )


def _lissajous(s):
    return np.stack([np.sin(1.5 * TAU * s), np.sin(TAU * s + 0.5), 0.4 * np.cos(2.5 * TAU * s)], 1), np.stack(
        [-0.8 * s, 0.6 * np.sin(np.pi * s), -0.4 * s], 1
    )


def _line(s):
    return np.stack([s, 0.5 * s, 0 * s], 1), np.stack([0 * s, 0 * s, 1.5 * s], 1)


FAMILIES = {
    "helix": _helix,
    "figure_eight": _figure_eight,
    "circle": _circle,
    "spiral": _spiral,
    "zigzag": _zigzag,
    "lissajous": _lissajous,
    "line": _line,
}


@dataclass(frozen=True)
class SynthSpec:
    """One class family plus the intra-class variation applied per sample.

    ``amplitude_jitter`` perturbs each curve axis and the rotation program by
    a relative normal factor, ``time_warp`` bounds a monotone reparameter
    ``s = u + w sin(pi u) / pi`` and ``length_jitter`` the relative spread of
    the sample count. ``rotation=False`` yields identity orientations.
    """

    family: str = "helix"
    n_samples: int = 64
    amplitude_jitter: float = 0.08
    time_warp: float = 0.2
    length_jitter: float = 0.2
    rotation: bool = True

    def validate(self) -> "SynthSpec":
        if self.family not in FAMILIES:
            raise InvalidParams(f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}")
        if self.n_samples < 3 or not 0 <= self.time_warp < 1:
            raise InvalidParams("need n_samples >= 3 and 0 <= time_warp < 1")
        return self


def synth_trajectory(spec: SynthSpec, seed, bias=None) -> Trajectory6D:
    """Deterministic sample of ``spec`` for ``seed``; ``bias`` scales the curve axes."""
    spec.validate()
    rng = np.random.default_rng(seed)
    n = int(round(spec.n_samples * (1.0 + spec.length_jitter * rng.uniform(-1, 1))))
    n = max(n, 3)
    u = np.linspace(0.0, 1.0, n)
    w = spec.time_warp * rng.uniform(-1, 1)
    s = u + w * np.sin(np.pi * u) / np.pi
    curve, rotvec = FAMILIES[spec.family](s)
    curve = curve * (1.0 + spec.amplitude_jitter * rng.standard_normal(3))
    if bias is not None:
        curve = curve * np.asarray(bias, dtype=float)
    if not spec.rotation:
        return Trajectory6D.translation_only(curve)
    rotvec = rotvec * (1.0 + spec.amplitude_jitter * rng.standard_normal(3))
    angle = np.linalg.norm(rotvec, axis=1)
    axis = rotvec / np.where(angle > 0, angle, 1.0)[:, None]
    q = geom.quaternion_from_axis_angle(axis, angle)
    return Trajectory6D(curve, q)


def apply_rigid_transform(payload, rotation=None, translation=None, scale: float = 1.0):
    """Similarity transform: ``p -> scale * G p + c``, orientations ``R -> G R``."""
    if not scale > 0:
        raise InvalidParams("scale must be > 0")
    g = np.eye(3) if rotation is None else np.asarray(rotation, dtype=float)
    c = np.zeros(3) if translation is None else np.asarray(translation, dtype=float)
    if isinstance(payload, tuple):
        return tuple(apply_rigid_transform(p, g, c, scale) for p in payload)
    if isinstance(payload, LabeledSample):
        return replace(payload, payload=apply_rigid_transform(payload.payload, g, c, scale))
    if isinstance(payload, SkeletonSequence):
        return replace(payload, joints=scale * payload.joints @ g.T + c)
    qg = geom.matrix_to_quaternion(g)
    return Trajectory6D(scale * payload.positions @ g.T + c, geom.quaternion_multiply(qg, payload.orientations))


def random_rigid_transform(rng: np.random.Generator, scale_range=(0.5, 2.0), translation_scale: float = 5.0):
    """Random (rotation, translation, scale) triple."""
    return (
        geom.random_rotations(rng),
        translation_scale * rng.standard_normal(3),
        float(np.exp(rng.uniform(np.log(scale_range[0]), np.log(scale_range[1])))),
    )


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float
    seed: int = 0


def _noise_std(signal: np.ndarray, snr_db: float) -> np.ndarray:
    """Per-channel noise std so that AC signal power / noise power hits ``snr_db``."""
    power = np.var(signal, axis=0)
    return np.sqrt(power / 10.0 ** (snr_db / 10.0))


def add_noise(payload, spec: NoiseSpec):
    """Additive white Gaussian noise at a fixed per-channel SNR.

    Signal power is the variance of each channel about its mean. Positions
    get additive noise; orientations get a random rotation ``exp(n)``
    composed on the left, with ``n`` scaled from the variance of the
    rotation-vector channels.
    """
    if not np.isfinite(spec.snr_db):
        raise InvalidParams("snr_db must be finite")
    rng = np.random.default_rng(spec.seed)
    return _add_noise(payload, spec.snr_db, rng)


def _add_noise(payload, snr_db, rng):
    if isinstance(payload, tuple):
        return tuple(_add_noise(p, snr_db, rng) for p in payload)
    if isinstance(payload, LabeledSample):
        return replace(payload, payload=_add_noise(payload.payload, snr_db, rng))
    if isinstance(payload, SkeletonSequence):
        j = payload.joints
        std = _noise_std(j.reshape(len(j), -1), snr_db).reshape(j.shape[1:])
        return replace(payload, joints=j + rng.standard_normal(j.shape) * std)
    pos = payload.positions
    pos = pos + rng.standard_normal(pos.shape) * _noise_std(pos, snr_db)
    aa = geom.quaternion_to_axis_angle(payload.orientations)
    rotvec = aa.axis * aa.angle[:, None]
    n = rng.standard_normal(rotvec.shape) * _noise_std(rotvec, snr_db)
    ang = np.linalg.norm(n, axis=1)
    axis = n / np.where(ang > 0, ang, 1.0)[:, None]
    q = geom.quaternion_multiply(geom.quaternion_from_axis_angle(axis, ang), payload.orientations)
    return Trajectory6D(pos, q / np.linalg.norm(q, axis=1, keepdims=True))


def measured_snr_db(clean, noisy) -> np.ndarray:
    clean = np.asarray(clean, dtype=float)
    noise = np.asarray(noisy, dtype=float) - clean
    return 10.0 * np.log10(np.var(clean, axis=0) / np.mean(noise**2, axis=0))


def synth_dataset(
    families,
    n_subjects: int = 5,
    n_per_subject: int = 4,
    seed: int = 0,
    spec: SynthSpec = SynthSpec(),
    view_change: bool = True,
    subject_bias: float = 0.05,
) -> list[LabeledSample]:
    """Labeled trajectories for every (family, subject, repetition).

    Each subject scales the curve axes by a fixed relative bias of spread
    ``subject_bias``; ``view_change`` applies an independent random
    similarity transform to every sample.
    """
    out = []
    for ci, fam in enumerate(families):
        for si in range(n_subjects):
            bias = 1.0 + subject_bias * np.random.default_rng([seed, 7919, si]).standard_normal(3)
            for rep in range(n_per_subject):
                rng = np.random.default_rng([seed, ci, si, rep])
                traj = synth_trajectory(replace(spec, family=fam), rng, bias)
                if view_change:
                    traj = apply_rigid_transform(traj, *random_rigid_transform(rng))
                subject = f"s{si + 1:02d}"
                name = f"{fam}_{subject}_r{rep + 1:02d}"
                out.append(LabeledSample(traj, fam, subject, name))
    return out


# ---------------------------------------------------------------------------
# skeletons

REST_POSE = np.array(
    [
        [-0.20, 1.45, 0.00],  # 1 right shoulder
        [0.20, 1.45, 0.00],  # 2 left shoulder
        [0.00, 1.50, 0.00],  # 3 shoulder center
        [0.00, 1.22, 0.00],  # 4 spine
        [-0.15, 0.95, 0.00],  # 5 right hip
        [0.15, 0.95, 0.00],  # 6 left hip
        [0.00, 1.00, 0.00],  # 7 hip center
        [-0.25, 1.15, 0.00],  # 8 right elbow
        [0.25, 1.15, 0.00],  # 9 left elbow
        [-0.27, 0.90, 0.05],  # 10 right wrist
        [0.27, 0.90, 0.05],  # 11 left wrist
        [-0.28, 0.82, 0.07],  # 12 right hand
        [0.28, 0.82, 0.07],  # 13 left hand
        [-0.15, 0.55, 0.02],  # 14 right knee
        [0.15, 0.55, 0.02],  # 15 left knee
        [-0.15, 0.10, 0.00],  # 16 right ankle
        [0.15, 0.10, 0.00],  # 17 left ankle
        [-0.15, 0.05, 0.10],  # 18 right foot
        [0.15, 0.05, 0.10],  # 19 left foot
        [0.00, 1.70, 0.00],  # 20 head
    ]
)

LEFT_ARM = (9, 11, 13)
RIGHT_ARM = (8, 10, 12)
UPPER_BODY = (1, 2, 3, 4, 8, 9, 10, 11, 12, 13, 20)


def _rot(axis: str, angle: float) -> np.ndarray:
    return geom.axis_angle_to_matrix(np.eye(3)["xyz".index(axis)], angle)


def _rotate(pose: np.ndarray, pivot: int, labels, r: np.ndarray) -> None:
    idx = np.asarray(labels) - 1
    p = pose[pivot - 1]
    pose[idx] = p + (pose[idx] - p) @ r.T


def _pose_wave_left(u, a):
    pose = REST_POSE.copy()
    _rotate(pose, 2, LEFT_ARM, _rot("z", a[0] * 2.3 * np.sin(0.5 * np.pi * min(1.0, 2 * u))))
    _rotate(pose, 9, (11, 13), _rot("z", a[1] * 0.7 * np.sin(2 * TAU * u)))
    return pose


def _pose_wave_right(u, a):
    pose = REST_POSE.copy()
    _rotate(pose, 1, RIGHT_ARM, _rot("z", -a[0] * 2.3 * np.sin(0.5 * np.pi * min(1.0, 2 * u))))
    _rotate(pose, 8, (10, 12), _rot("z", -a[1] * 0.7 * np.sin(2 * TAU * u)))
    return pose


def _pose_kick_right(u, a):
    pose = REST_POSE.copy()
    _rotate(pose, 5, (14, 16, 18), _rot("x", -a[0] * 1.3 * np.sin(np.pi * u)))
    _rotate(pose, 14, (16, 18), _rot("x", a[1] * 0.8 * np.sin(np.pi * u) ** 2))
    return pose


def _pose_bend(u, a):
    pose = REST_POSE.copy()
    _rotate(pose, 1, RIGHT_ARM, _rot("x", -a[1] * 0.4 * np.sin(np.pi * u)))
    _rotate(pose, 2, LEFT_ARM, _rot("x", -a[1] * 0.4 * np.sin(np.pi * u)))
    _rotate(pose, 7, UPPER_BODY, _rot("x", a[0] * 1.1 * np.sin(np.pi * u)))
    return pose


def _pose_punch_left(u, a):
    pose = REST_POSE.copy()
    lift = a[0] * 1.5 * np.sin(np.pi * u)
    _rotate(pose, 2, LEFT_ARM, _rot("x", -lift))
    _rotate(pose, 9, (11, 13), _rot("x", -a[1] * 1.2 * np.sin(np.pi * u) * (1 - np.sin(np.pi * u))))
    return pose


def _pose_clap(u, a):
    pose = REST_POSE.copy()
    lift = a[0] * 1.4 * np.sin(np.pi * min(1.0, 1.5 * u))
    swing = a[1] * 0.6 * np.sin(3 * TAU * u) ** 2
    _rotate(pose, 2, LEFT_ARM, _rot("x", -lift) @ _rot("y", -swing))
    _rotate(pose, 1, RIGHT_ARM, _rot("x", -lift) @ _rot("y", swing))
    return pose


ACTIONS = {
    "wave_left": _pose_wave_left,
    "wave_right": _pose_wave_right,
    "kick_right": _pose_kick_right,
    "bend": _pose_bend,
    "punch_left": _pose_punch_left,
    "clap": _pose_clap,
}


def synth_skeleton(
    action: str,
    seed,
    n_frames: int = 40,
    jitter: float = 0.08,
    time_warp: float = 0.2,
    joint_noise: float = 0.0,
    view_change: bool = True,
) -> SkeletonSequence:
    """Animated 20-joint skeleton performing one of :data:`ACTIONS`."""
    if action not in ACTIONS:
        raise InvalidParams(f"unknown action {action!r}; choose from {sorted(ACTIONS)}")
    rng = np.random.default_rng(seed)
    n = max(3, int(round(n_frames * (1.0 + 0.2 * rng.uniform(-1, 1)))))
    u = np.linspace(0.0, 1.0, n)
    w = time_warp * rng.uniform(-1, 1)
    s = u + w * np.sin(np.pi * u) / np.pi
    amp = 1.0 + jitter * rng.standard_normal(2)
    joints = np.stack([ACTIONS[action](si, amp) for si in s])
    if joint_noise > 0:
        joints = joints + joint_noise * rng.standard_normal(joints.shape)
    seq = SkeletonSequence(joints, action)
    if view_change:
        g = geom.euler_to_matrix([rng.uniform(-np.pi, np.pi), rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2)], "YXZ")
        seq = apply_rigid_transform(seq, g, rng.normal(0, 2, 3), float(rng.uniform(0.7, 1.4)))
    return seq


def synth_skeleton_dataset(actions, n_subjects: int = 4, n_per_subject: int = 2, seed: int = 0, **kwargs):
    out = []
    for ci, act in enumerate(actions):
        for si in range(n_subjects):
            for rep in range(n_per_subject):
                seq = synth_skeleton(act, [seed, ci, si, rep], **kwargs)
                subject = f"s{si + 1:02d}"
                name = f"{act}_{subject}_r{rep + 1:02d}"
                seq = replace(seq, label=act, subject=subject, name=name)
                out.append(LabeledSample(seq, act, subject, name))
    return out
