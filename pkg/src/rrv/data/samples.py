"""Labeled samples and the repo-native JSON sample format."""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from ..errors import ParseError
from ..preprocess import Trajectory6D
from ..skeleton import SkeletonSequence

Payload = Union[Trajectory6D, tuple, SkeletonSequence]

FORMAT = "rrv-sample"
VERSION = 1


@dataclass
class LabeledSample:
    payload: Payload
    label: str
    subject: str
    name: str = ""

    def __post_init__(self):
        if not str(self.label) or not str(self.subject):
            raise ValueError("label and subject must be nonempty")
        self.label = str(self.label)
        self.subject = str(self.subject)

    @property
    def kind(self) -> str:
        if isinstance(self.payload, SkeletonSequence):
            return "skeleton"
        if isinstance(self.payload, tuple):
            return "pair"
        return "trajectory6d"


def natural_key(s: str):
    """Sort key that orders ``"s2"`` before ``"s10"``."""
    return [int(tok) if tok.isdigit() else tok for tok in re.split(r"(\d+)", str(s))]


def _traj_to_dict(t: Trajectory6D) -> dict:
    return {"positions": t.positions.tolist(), "orientations": t.orientations.tolist()}


def _traj_from_dict(d: dict) -> Trajectory6D:
    return Trajectory6D(np.array(d["positions"], dtype=float), np.array(d["orientations"], dtype=float))


def sample_to_dict(sample: LabeledSample) -> dict:
    out = {
        "format": FORMAT,
        "version": VERSION,
        "kind": sample.kind,
        "label": sample.label,
        "subject": sample.subject,
        "name": sample.name,
    }
    p = sample.payload
    if sample.kind == "skeleton":
        out["joints"] = p.joints.tolist()
    elif sample.kind == "pair":
        out["hands"] = [_traj_to_dict(t) for t in p]
    else:
        out.update(_traj_to_dict(p))
    return out


def sample_from_dict(d: dict, path=None) -> LabeledSample:
    if d.get("format") != FORMAT:
        raise ParseError(f"not an {FORMAT} document", path=path)
    try:
        kind = d["kind"]
        if kind == "skeleton":
            payload = SkeletonSequence(np.array(d["joints"], dtype=float), d["label"], d["subject"], d.get("name", ""))
        elif kind == "pair":
            payload = tuple(_traj_from_dict(h) for h in d["hands"])
        elif kind == "trajectory6d":
            payload = _traj_from_dict(d)
        else:
            raise ParseError(f"unknown sample kind {kind!r}", path=path)
        return LabeledSample(payload, d["label"], d["subject"], d.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed sample: {exc}", path=path) from exc


def save_sample(sample: LabeledSample, path) -> None:
    Path(path).write_text(json.dumps(sample_to_dict(sample), separators=(",", ":")) + "\n")


def load_sample(path) -> LabeledSample:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=exc.lineno) from exc
    return sample_from_dict(doc, path=path)


def save_dataset(samples, directory, extra: dict | None = None) -> Path:
    """Write one JSON file per sample plus ``manifest.json``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, s in enumerate(samples):
        fname = f"{s.name or f'sample{i:05d}'}.json"
        save_sample(s, directory / fname)
        entries.append({"file": fname, "label": s.label, "subject": s.subject})
    manifest = {"format": "rrv-dataset", "version": VERSION, "samples": entries}
    if extra:
        manifest.update(extra)
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return path


def load_dataset(directory) -> list[LabeledSample]:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text())
        return [load_sample(directory / e["file"]) for e in manifest["samples"]]
    return [load_sample(p) for p in sorted(directory.glob("*.json"))]
