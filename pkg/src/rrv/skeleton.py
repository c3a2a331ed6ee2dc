"""Articulated skeletons as collections of (virtual) rigid bodies.

Joint indices are 1-based labels in the 20-joint Kinect v1 layout used by
the default :class:`JointMap`::

     1 right shoulder   2 left shoulder   3 shoulder center  4 spine
     5 right hip        6 left hip        7 hip center       8 right elbow
     9 left elbow      10 right wrist    11 left wrist      12 right hand
    13 left hand       14 right knee     15 left knee       16 right ankle
    17 left ankle      18 right foot     19 left foot       20 head

Files that store joints in another order are remapped through
``JointMap.file_order`` at load time.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import geom
from .descriptor import WIDTH, compute_rrv, multi_distance
from .errors import DegenerateFrame, InvalidParams, StructureMismatch, ZeroBone
from .preprocess import SmootherParams, Trajectory6D, kalman_smooth

log = logging.getLogger(__name__)

PARTS = ("LA", "RA", "TS", "LL", "RL")
SWAP = {"LA": "RA", "RA": "LA", "LL": "RL", "RL": "LL", "TS": "TS"}
# descriptor of a left/right mirrored motion, expressed in the body frame,
# equals the original with these signs applied per 7-block
REFLECT_SIGNS = np.array([1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0])
EPS_FRAME = 1e-9
EPS_BONE = 1e-9


@dataclass(frozen=True)
class JointMap:
    n_joints: int = 20
    shoulder_center: int = 3
    right_hip: int = 5
    left_hip: int = 6
    hip_center: int = 7
    # file_order[i] is the label of the i-th joint stored in a file
    file_order: tuple[int, ...] | None = None
    mirror_pairs: tuple[tuple[int, int], ...] = (
        (1, 2), (5, 6), (8, 9), (10, 11), (12, 13), (14, 15), (16, 17), (18, 19),
    )

    def validate(self) -> "JointMap":
        labels = [self.shoulder_center, self.right_hip, self.left_hip, self.hip_center]
        labels += [j for pair in self.mirror_pairs for j in pair]
        if any(not 1 <= j <= self.n_joints for j in labels):
            raise InvalidParams("joint label out of range")
        if self.file_order is not None and sorted(self.file_order) != list(range(1, self.n_joints + 1)):
            raise InvalidParams("file_order must be a permutation of 1..n_joints")
        return self

    def reorder(self, joints: np.ndarray) -> np.ndarray:
        """Map ``(..., n_joints, 3)`` joints from file order to label order."""
        if self.file_order is None:
            return joints
        out = np.empty_like(joints)
        out[..., np.asarray(self.file_order) - 1, :] = joints
        return out


DEFAULT_VRBS = {
    "LA": ((3, 11), (3, 13)),
    "RA": ((3, 10), (3, 12)),
    "LL": ((7, 19), (7, 17)),
    "RL": ((7, 18), (7, 16)),
}

# four-bone chains, proximal joint first
DEFAULT_BONES = {
    "LA": ((3, 2), (2, 9), (9, 11), (11, 13)),
    "RA": ((3, 1), (1, 8), (8, 10), (10, 12)),
    "LL": ((7, 6), (6, 15), (15, 17), (17, 19)),
    "RL": ((7, 5), (5, 14), (14, 16), (16, 18)),
}


@dataclass(frozen=True)
class VrbConfig:
    """(root, end) joint pairs per limb, for virtual and for real bones."""

    vrbs: dict = field(default_factory=lambda: dict(DEFAULT_VRBS))
    bones: dict = field(default_factory=lambda: dict(DEFAULT_BONES))

    def validate(self, n_joints: int = 20) -> "VrbConfig":
        for table in (self.vrbs, self.bones):
            if set(table) != {"LA", "RA", "LL", "RL"}:
                raise InvalidParams("limb tables need exactly LA, RA, LL, RL")
            for pairs in table.values():
                if not pairs:
                    raise InvalidParams("empty limb")
                for root, end in pairs:
                    if not (1 <= root <= n_joints and 1 <= end <= n_joints) or root == end:
                        raise InvalidParams(f"bad joint pair ({root}, {end})")
        return self


@dataclass(frozen=True)
class SkeletonConfig:
    """How a skeleton sequence becomes a descriptor.

    ``coords="lcs"`` expresses joints in the per-frame body frame and skips
    the SVD normalization and velocity projection; ``"gcs"`` keeps world
    coordinates and runs both. ``use_vrb=False`` describes each limb by its
    real bones instead of the virtual ones.
    """

    joint_map: JointMap = field(default_factory=JointMap)
    vrb: VrbConfig = field(default_factory=VrbConfig)
    coords: str = "lcs"
    body_mode: str = "per-frame"
    use_vrb: bool = True
    smooth: bool = True
    smoother: SmootherParams = field(default_factory=SmootherParams)

    def validate(self) -> "SkeletonConfig":
        if self.coords not in ("lcs", "gcs"):
            raise InvalidParams(f"coords must be lcs or gcs, got {self.coords!r}")
        if self.body_mode not in ("per-frame", "first-frame"):
            raise InvalidParams(f"unknown body_mode {self.body_mode!r}")
        self.joint_map.validate()
        self.vrb.validate(self.joint_map.n_joints)
        return self


def load_skeleton_config(path) -> SkeletonConfig:
    """Read a JSON skeleton config.

    Schema (all keys optional)::

        {"joint_map": {"shoulder_center": 3, "right_hip": 5, "left_hip": 6,
                       "hip_center": 7, "file_order": [...],
                       "mirror_pairs": [[1, 2], ...]},
         "vrbs":  {"LA": [[3, 11], [3, 13]], ...},
         "bones": {"LA": [[3, 2], [2, 9], ...], ...},
         "coords": "lcs", "body_mode": "per-frame", "use_vrb": true,
         "smooth": true, "process_noise": 1e-3, "measurement_noise": 1e-2}
    """
    raw = json.loads(Path(path).read_text())
    return skeleton_config_from_dict(raw)


def skeleton_config_from_dict(raw: dict) -> SkeletonConfig:
    jm = dict(raw.get("joint_map", {}))
    if jm.get("file_order") is not None:
        jm["file_order"] = tuple(jm["file_order"])
    if "mirror_pairs" in jm:
        jm["mirror_pairs"] = tuple(tuple(p) for p in jm["mirror_pairs"])
    vrb = VrbConfig(
        vrbs={k: tuple(tuple(p) for p in v) for k, v in raw.get("vrbs", DEFAULT_VRBS).items()},
        bones={k: tuple(tuple(p) for p in v) for k, v in raw.get("bones", DEFAULT_BONES).items()},
    )
    defaults = SmootherParams()
    return SkeletonConfig(
        joint_map=JointMap(**jm),
        vrb=vrb,
        coords=raw.get("coords", "lcs"),
        body_mode=raw.get("body_mode", "per-frame"),
        use_vrb=raw.get("use_vrb", True),
        smooth=raw.get("smooth", True),
        smoother=SmootherParams(
            raw.get("process_noise", defaults.process_noise),
            raw.get("measurement_noise", defaults.measurement_noise),
        ),
    ).validate()


@dataclass
class SkeletonSequence:
    """``joints`` is ``(N, n_joints, 3)`` in label order."""

    joints: np.ndarray
    label: str = ""
    subject: str = ""
    name: str = ""

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=float)
        if self.joints.ndim != 3 or self.joints.shape[-1] != 3:
            raise InvalidParams(f"joints must be (N, J, 3), got {self.joints.shape}")
        if not np.all(np.isfinite(self.joints)):
            raise InvalidParams("non-finite joint coordinates")

    def __len__(self):
        return len(self.joints)

    def joint(self, label: int) -> np.ndarray:
        return self.joints[:, label - 1]


@dataclass(frozen=True)
class BodyFrame:
    origin: np.ndarray  # (..., 3)
    axes: np.ndarray  # (..., 3, 3), columns h_x, h_y, h_z


def body_frame(joints, joint_map: JointMap = JointMap()) -> BodyFrame:
    """Body coordinate frame(s) of ``(..., n_joints, 3)`` joint arrays."""
    joints = np.asarray(joints, dtype=float)
    j3 = joints[..., joint_map.shoulder_center - 1, :]
    v1 = j3 - joints[..., joint_map.right_hip - 1, :]
    v2 = j3 - joints[..., joint_map.left_hip - 1, :]
    hy = v1 + v2
    hz = np.cross(v1, v2)
    ny = np.linalg.norm(hy, axis=-1)
    nz = np.linalg.norm(hz, axis=-1)
    if np.any(nz < EPS_FRAME) or np.any(ny < EPS_FRAME):
        raise DegenerateFrame("shoulder center and hips are collinear")
    hy = hy / ny[..., None]
    hz = hz / nz[..., None]
    hx = np.cross(hy, hz)
    hx /= np.linalg.norm(hx, axis=-1, keepdims=True)
    axes = np.stack([hx, hy, hz], axis=-1)
    return BodyFrame(joints[..., joint_map.hip_center - 1, :].copy(), axes)


def to_body_coords(joints, joint_map: JointMap = JointMap(), mode: str = "per-frame") -> np.ndarray:
    """Express every joint as ``axes^T (J - origin)`` of the governing body frame."""
    joints = np.asarray(joints, dtype=float)
    if mode == "per-frame":
        bf = body_frame(joints, joint_map)
        origin, axes = bf.origin[:, None, :], bf.axes
    elif mode == "first-frame":
        bf = body_frame(joints[0], joint_map)
        origin, axes = bf.origin, np.broadcast_to(bf.axes, (len(joints), 3, 3))
    else:
        raise InvalidParams(f"unknown body-frame mode {mode!r}")
    return np.einsum("tji,tkj->tki", axes, joints - origin)


def vrb_trajectory(joints, root: int, end: int, on_antipodal: str = "identity") -> Trajectory6D:
    """Virtual rigid body spanned by ``root`` and ``end`` joints.

    The reference point is the end joint. Orientation ``t`` is the minimal
    rotation taking the bone direction at ``t`` onto the one at ``t+1``; the
    last sample is padded with the identity and drops out of the descriptor.
    """
    joints = np.asarray(joints, dtype=float)
    b = joints[:, root - 1] - joints[:, end - 1]
    lengths = np.linalg.norm(b, axis=1)
    if np.any(lengths < EPS_BONE):
        raise ZeroBone(f"bone ({root}, {end}) has zero length at frame {int(np.argmin(lengths))}")
    b_hat = b / lengths[:, None]
    d = np.sum(b_hat[:-1] * b_hat[1:], axis=1)
    flips = np.flatnonzero(d < -1.0 + geom.EPS_ANTI)
    if flips.size and on_antipodal == "identity":
        log.warning("bone (%d, %d) flips direction at frame(s) %s; using identity", root, end, flips.tolist())
    rots = geom.rotation_between_vectors(b_hat[:-1], b_hat[1:], on_antipodal=on_antipodal)
    q = np.concatenate([geom.matrix_to_quaternion(rots), geom.IDENTITY_QUAT[None]], axis=0)
    return Trajectory6D(joints[:, end - 1], q)


def torso_trajectory(joints, joint_map: JointMap = JointMap(), frame: str = "first") -> Trajectory6D:
    """6-D trajectory of the body frame itself.

    ``frame="first"`` expresses origins and orientations in the body frame of
    the first sample, which removes the viewpoint without an SVD step.
    ``frame="world"`` returns the raw world-frame motion.
    """
    bf = body_frame(joints, joint_map)
    if frame == "world":
        return Trajectory6D(bf.origin, geom.matrix_to_quaternion(bf.axes))
    if frame != "first":
        raise InvalidParams(f"unknown torso frame {frame!r}")
    h0 = bf.axes[0]
    positions = (bf.origin - bf.origin[0]) @ h0
    rel = np.einsum("ji,tjk->tik", h0, bf.axes)
    return Trajectory6D(positions, geom.matrix_to_quaternion(rel))


@dataclass
class SkeletonDescriptor:
    """Per-part RRV sequences, each ``(N-1, 7k)``."""

    parts: dict

    @property
    def length(self) -> int:
        return len(next(iter(self.parts.values())))

    @property
    def width(self) -> int:
        return sum(p.shape[1] for p in self.parts.values())

    def concatenated(self) -> np.ndarray:
        return np.concatenate([self.parts[k] for k in self.parts], axis=1)

    def mirrored(self, reflect: bool = True) -> "SkeletonDescriptor":
        """Swap left and right parts; ``reflect`` also applies the mirror signs."""
        out = {}
        for name in self.parts:
            src = self.parts[SWAP.get(name, name)]
            if reflect:
                src = src * np.tile(REFLECT_SIGNS, src.shape[1] // WIDTH)
            out[name] = src
        return SkeletonDescriptor(out)


def mirror_sequence(seq: SkeletonSequence, joint_map: JointMap = JointMap()) -> SkeletonSequence:
    """Left/right mirror image: negate world x and swap paired joint labels."""
    joints = seq.joints * np.array([-1.0, 1.0, 1.0])
    perm = np.arange(joints.shape[1])
    for a, b in joint_map.mirror_pairs:
        perm[a - 1], perm[b - 1] = b - 1, a - 1
    return replace(seq, joints=joints[:, perm])


def normalize_body_scale(joints, joint_map: JointMap = JointMap()) -> np.ndarray:
    """Divide by the mean shoulder-center to hip-center distance."""
    joints = np.asarray(joints, dtype=float)
    spine = joints[:, joint_map.shoulder_center - 1] - joints[:, joint_map.hip_center - 1]
    scale = float(np.mean(np.linalg.norm(spine, axis=1)))
    if not scale > 0:
        raise DegenerateFrame("zero torso length")
    return joints / scale


def _limb_descriptor(joints, pairs, gcs: bool) -> np.ndarray:
    seqs = [
        compute_rrv(vrb_trajectory(joints, root, end), skip_svd_normalization=not gcs, relative=False)
        for root, end in pairs
    ]
    return np.concatenate(seqs, axis=1)


def _prepare(seq: SkeletonSequence, cfg: SkeletonConfig) -> np.ndarray:
    joints = normalize_body_scale(seq.joints, cfg.joint_map)
    if cfg.smooth:
        joints = kalman_smooth(joints, cfg.smoother)
    return joints


def skeleton_descriptor(seq: SkeletonSequence, cfg: SkeletonConfig = SkeletonConfig()) -> SkeletonDescriptor:
    """Five-part descriptor: LA, RA, TS, LL, RL."""
    cfg.validate()
    joints = _prepare(seq, cfg)
    gcs = cfg.coords == "gcs"
    limb_joints = joints if gcs else to_body_coords(joints, cfg.joint_map, cfg.body_mode)
    table = cfg.vrb.vrbs if cfg.use_vrb else cfg.vrb.bones
    parts = {}
    for name in PARTS:
        if name == "TS":
            torso = torso_trajectory(joints, cfg.joint_map, frame="world" if gcs else "first")
            parts[name] = compute_rrv(torso, skip_svd_normalization=not gcs)
        else:
            parts[name] = _limb_descriptor(limb_joints, table[name], gcs)
    return SkeletonDescriptor(parts)


def reality_concatenation(seq: SkeletonSequence, part: str, cfg: SkeletonConfig = SkeletonConfig()) -> np.ndarray:
    """Concatenated per-bone descriptors of one limb (the non-virtual baseline)."""
    cfg.validate()
    joints = _prepare(seq, cfg)
    gcs = cfg.coords == "gcs"
    limb_joints = joints if gcs else to_body_coords(joints, cfg.joint_map, cfg.body_mode)
    return _limb_descriptor(limb_joints, cfg.vrb.bones[part], gcs)


def check_structure(p: SkeletonDescriptor, q: SkeletonDescriptor) -> None:
    if list(p.parts) != list(q.parts):
        raise StructureMismatch(f"parts {list(p.parts)} vs {list(q.parts)}")
    for name in p.parts:
        if p.parts[name].shape[1] != q.parts[name].shape[1]:
            raise StructureMismatch(f"part {name} widths differ")


def skeleton_multi_distance(p, q, metric: str = "rrv") -> np.ndarray:
    """Frame-wise summed distance between aligned descriptor slices."""
    if isinstance(p, SkeletonDescriptor):
        check_structure(p, q)
        return sum(multi_distance(p.parts[k], q.parts[k], metric) for k in p.parts)
    p = np.asarray(p)
    q = np.asarray(q)
    if p.shape[-1] != q.shape[-1]:
        raise StructureMismatch(f"widths {p.shape[-1]} and {q.shape[-1]} differ")
    return multi_distance(p, q, metric)
