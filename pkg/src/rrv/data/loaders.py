"""Readers for the benchmark file layouts.

None of the datasets ship with the package; point the loaders at a local
copy.
"""
from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import FrameCountMismatch, ParseError, ShapeError
from ..preprocess import Trajectory6D
from ..skeleton import JointMap, SkeletonSequence
from .samples import LabeledSample

ANGLE_SCALE = {"radians": 1.0, "degrees": np.pi / 180.0, "turns": 2.0 * np.pi}


@dataclass(frozen=True)
class TrajectoryFormat:
    """Column layout of delimited 6-D trajectory files.

    Defaults follow the AUSLAN2 high-quality layout: 22 columns, eleven per
    hand (x, y, z, roll, pitch, yaw, five finger bends), left hand first.
    ``hands`` maps a hand name to its three position and three angle columns
    (0-based). With a single hand the payload is one :class:`Trajectory6D`,
    otherwise a tuple in ``hands`` order.

    Angle columns are read in file order (roll, pitch, yaw). The default
    extrinsic ``"xyz"`` sequence on that order is the same rotation as an
    intrinsic Z-Y-X (yaw, pitch, roll) composition.
    """

    n_columns: int | None = 22
    delimiter: str | None = None
    hands: dict = field(
        default_factory=lambda: {
            "left": {"position": (0, 1, 2), "angles": (3, 4, 5)},
            "right": {"position": (11, 12, 13), "angles": (14, 15, 16)},
        }
    )
    angle_unit: str = "turns"
    euler_convention: str = "xyz"
    pattern: str = "*.tsd"

    @classmethod
    def from_dict(cls, d: dict) -> "TrajectoryFormat":
        kw = dict(d)
        if "hands" in kw:
            kw["hands"] = {
                k: {"position": tuple(v["position"]), "angles": tuple(v["angles"])} for k, v in kw["hands"].items()
            }
        return cls(**kw)


def _parse_rows(path: Path, n_columns, delimiter) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split(delimiter) if delimiter else line.split()
            fields = [f.strip() for f in fields]
            if n_columns is not None and len(fields) != n_columns:
                raise ShapeError(f"expected {n_columns} columns, got {len(fields)}", path=path, line=lineno)
            values = []
            for col, f in enumerate(fields, start=1):
                try:
                    values.append(float(f))
                except ValueError:
                    raise ParseError(f"non-numeric value {f!r}", path=path, line=lineno, field=col) from None
            rows.append(values)
    if not rows:
        raise ParseError("no data rows", path=path)
    width = {len(r) for r in rows}
    if len(width) != 1:
        raise ShapeError("ragged rows", path=path)
    return np.array(rows)


def _auslan_label(path: Path) -> str:
    # "alive-1.tsd" -> "alive"
    return re.sub(r"-\d+$", "", path.stem)


def read_trajectory_file(path, fmt: TrajectoryFormat = TrajectoryFormat()):
    """Parse one file into a trajectory (or tuple of per-hand trajectories)."""
    path = Path(path)
    data = _parse_rows(path, fmt.n_columns, fmt.delimiter)
    scale = ANGLE_SCALE[fmt.angle_unit]
    hands = []
    for spec in fmt.hands.values():
        cols = list(spec["position"]) + list(spec["angles"])
        if max(cols) >= data.shape[1]:
            raise ShapeError(f"column {max(cols)} beyond {data.shape[1]} columns", path=path)
        hands.append(
            Trajectory6D.from_euler(data[:, list(spec["position"])], data[:, list(spec["angles"])] * scale, fmt.euler_convention)
        )
    return hands[0] if len(hands) == 1 else tuple(hands)


def load_trajectory6d(path, fmt: TrajectoryFormat = TrajectoryFormat()) -> list[LabeledSample]:
    """Load one file or every matching file below a directory.

    Labels come from the file stem without its trailing ``-<n>`` repetition
    index, subjects from the parent directory name.
    """
    path = Path(path)
    files = sorted(path.rglob(fmt.pattern)) if path.is_dir() else [path]
    out = []
    for f in files:
        payload = read_trajectory_file(f, fmt)
        out.append(LabeledSample(payload, _auslan_label(f), f.parent.name or "0", f"{f.parent.name}_{f.stem}"))
    return out


MSR_NAME = re.compile(r"a(\d+)_s(\d+)_e(\d+)")


def parse_msr_name(name: str) -> tuple[int, int, int]:
    m = MSR_NAME.search(name)
    if not m:
        raise ParseError(f"file name {name!r} does not match aNN_sNN_eNN")
    return int(m.group(1)), int(m.group(2)), int(m.group(3))


def read_skeleton_file(path, joint_map: JointMap = JointMap()) -> np.ndarray:
    """MSRAction3D text skeletons: one joint per line as ``x y z confidence``.

    An optional first line with two integers ``frames joints`` is accepted
    and checked.
    """
    path = Path(path)
    lines = [(i, ln.split()) for i, ln in enumerate(path.read_text().splitlines(), start=1) if ln.strip()]
    if not lines:
        raise ParseError("empty skeleton file", path=path)
    expected_frames = None
    first = lines[0][1]
    if len(first) == 2 and all(tok.lstrip("-").isdigit() for tok in first):
        expected_frames, n_joints = int(first[0]), int(first[1])
        if n_joints != joint_map.n_joints:
            raise ParseError(f"header declares {n_joints} joints, expected {joint_map.n_joints}", path=path, line=1)
        lines = lines[1:]
    values = np.empty((len(lines), 3))
    for k, (lineno, fields) in enumerate(lines):
        if len(fields) != 4:
            raise ParseError(f"expected 4 values per joint, got {len(fields)}", path=path, line=lineno)
        for col, tok in enumerate(fields[:3], start=1):
            try:
                values[k, col - 1] = float(tok)
            except ValueError:
                raise ParseError(f"non-numeric value {tok!r}", path=path, line=lineno, field=col) from None
    if len(values) % joint_map.n_joints:
        raise FrameCountMismatch(
            f"{len(values)} joint lines is not a multiple of {joint_map.n_joints}", path=path
        )
    joints = values.reshape(-1, joint_map.n_joints, 3)
    if expected_frames is not None and expected_frames != len(joints):
        raise FrameCountMismatch(f"header says {expected_frames} frames, found {len(joints)}", path=path)
    return joint_map.reorder(joints)


def read_exclusion_list(path) -> set[str]:
    """Names (file stems) to skip, one per line; ``#`` starts a comment."""
    out = set()
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.add(line)
    return out


def load_skeleton(path, joint_map: JointMap = JointMap(), exclude=(), pattern: str = "*.txt") -> list[LabeledSample]:
    """MSRAction3D-style skeleton files named ``aNN_sNN_eNN*``.

    The class label is the action number and the subject the subject number,
    both as decimal strings. Stems in ``exclude`` (or whose ``aNN_sNN_eNN``
    prefix is listed) are skipped.
    """
    path = Path(path)
    files = sorted(path.rglob(pattern)) if path.is_dir() else [path]
    exclude = set(exclude)
    out = []
    for f in files:
        action, subject, instance = parse_msr_name(f.stem)
        key = f"a{action:02d}_s{subject:02d}_e{instance:02d}"
        if f.stem in exclude or key in exclude:
            continue
        joints = read_skeleton_file(f, joint_map)
        seq = SkeletonSequence(joints, str(action), str(subject), key)
        out.append(LabeledSample(seq, str(action), str(subject), key))
    return out


def load_msrc12(root, annotation_csv, joint_map: JointMap = JointMap()) -> list[LabeledSample]:
    """MSRC-12 instances cut from whole recordings.

    ``annotation_csv`` has a header ``file,subject,label,start,end``; frames
    are 0-based and ``end`` is inclusive. Each recording row holds an optional
    timestamp followed by ``n_joints`` groups of ``x y z confidence``.
    """
    root = Path(root)
    cache: dict[str, np.ndarray] = {}
    out = []
    with open(annotation_csv, newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                fname, start, end = row["file"], int(row["start"]), int(row["end"])
                subject, label = row["subject"], row["label"]
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"bad annotation row: {exc}", path=annotation_csv, line=lineno) from exc
            if fname not in cache:
                cache[fname] = _read_msrc12_recording(root / fname, joint_map)
            joints = cache[fname][start : end + 1]
            name = f"{Path(fname).stem}_{start}_{end}"
            out.append(LabeledSample(SkeletonSequence(joints, label, subject, name), label, subject, name))
    return out


def _read_msrc12_recording(path: Path, joint_map: JointMap) -> np.ndarray:
    width = 4 * joint_map.n_joints
    with open(path) as fh:
        first = fh.readline()
    data = _parse_rows(path, None, "," if "," in first else None)
    if data.shape[1] == width + 1:
        data = data[:, 1:]
    elif data.shape[1] != width:
        raise ShapeError(f"expected {width} or {width + 1} columns, got {data.shape[1]}", path=path)
    joints = data.reshape(len(data), joint_map.n_joints, 4)[..., :3]
    return joint_map.reorder(joints)

