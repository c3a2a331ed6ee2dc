"""Descriptor extraction, recognition and evaluation over subject splits."""
from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .data.loaders import TrajectoryFormat, load_msrc12, load_skeleton, load_trajectory6d, read_exclusion_list
from .data.samples import LabeledSample, load_dataset, natural_key
from .data.splits import ALIASES, make_splits
from .descriptor import METRICS, compute_rrv
from .errors import DataError, DegenerateTrajectory, EmptyAfterTrim, EmptyTrainingSet, InvalidParams
from .preprocess import PreprocessConfig, SmootherParams, Trajectory6D, kalman_smooth, normalize_scale, stationary_bounds
from .recognize.bow import DEFAULT_SIZES, encode_bow, learn_codebook
from .recognize.dtw import dtw, part_dtw_cost
from .recognize.svm import svm_predict, svm_train
from .skeleton import SkeletonConfig, SkeletonDescriptor, SkeletonSequence, load_skeleton_config, skeleton_descriptor

FORMATS = ("native", "auslan", "msr", "msrc12")
BACKENDS = ("dtw", "bow")


@dataclass
class RunConfig:
    """Everything an evaluation run depends on.

    Paths may be ``None`` when samples are passed in directly. The skeleton
    fields override whatever ``skeleton_config`` loads.
    """

    data: str | None = None
    dataset_format: str = "native"
    format_config: str | None = None
    skeleton_config: str | None = None
    annotations: str | None = None
    exclude: str | None = None
    out: str = "results"

    backend: str = "dtw"
    metric: str = "rrv"
    protocol: str = "cs"
    train_subjects: list | None = None

    skip_svd_normalization: bool = False
    smooth: bool = True
    process_noise: float = 1e-3
    measurement_noise: float = 1e-2
    trim_stationary: bool = True
    speed_eps: float = 1e-4
    coords: str = "lcs"
    use_vrb: bool = True

    symmetric: bool = True
    window: int | None = None
    k_r: int = 120
    k_t: int = 130
    svm_c: float = 10.0
    svm_gamma: float | None = None
    seed: int = 42
    threads: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise InvalidParams(f"unknown config keys {unknown}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def validate(self) -> "RunConfig":
        if self.dataset_format not in FORMATS:
            raise InvalidParams(f"dataset_format must be one of {FORMATS}")
        if self.backend not in BACKENDS:
            raise InvalidParams(f"backend must be one of {BACKENDS}")
        if self.metric not in METRICS:
            raise InvalidParams(f"metric must be one of {sorted(METRICS)}")
        if self.protocol not in ALIASES:
            raise InvalidParams(f"unknown protocol {self.protocol!r}")
        if self.coords not in ("lcs", "gcs"):
            raise InvalidParams("coords must be lcs or gcs")
        if self.k_r < 2 or self.k_t < 2:
            raise InvalidParams("dictionary sizes must be at least 2")
        if self.svm_c <= 0 or (self.svm_gamma is not None and self.svm_gamma <= 0):
            raise InvalidParams("SVM C and gamma must be positive")
        if self.threads < 1:
            raise InvalidParams("threads must be >= 1")
        if self.window is not None and self.window < 0:
            raise InvalidParams("window must be >= 0")
        self.descriptor_config()
        return self

    def descriptor_config(self) -> "DescriptorConfig":
        smoother = SmootherParams(self.process_noise, self.measurement_noise).validate()
        skel = load_skeleton_config(self.skeleton_config) if self.skeleton_config else SkeletonConfig()
        skel = replace(skel, coords=self.coords, use_vrb=self.use_vrb, smooth=self.smooth, smoother=smoother).validate()
        pre = PreprocessConfig(self.smooth, smoother, self.trim_stationary, self.speed_eps)
        return DescriptorConfig(self.skip_svd_normalization, pre, skel)


@dataclass(frozen=True)
class DescriptorConfig:
    skip_svd_normalization: bool = False
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    skeleton: SkeletonConfig = field(default_factory=SkeletonConfig)


def _prep_positions(pos: np.ndarray, cfg: PreprocessConfig) -> np.ndarray:
    try:
        pos = normalize_scale(pos)
        if cfg.smooth:
            pos = normalize_scale(kalman_smooth(pos, cfg.smoother))
    except DegenerateTrajectory:
        pass  # a hand held still keeps its raw positions
    return pos


def _describe_hands(hands, cfg: DescriptorConfig) -> np.ndarray:
    """Hands share one clock, so they are trimmed together and concatenated."""
    start, stop = 0, len(hands[0])
    if cfg.preprocess.trim_stationary:
        bounds = [b for b in (stationary_bounds(h, cfg.preprocess.speed_eps) for h in hands) if b]
        if not bounds:
            raise EmptyAfterTrim("all hands are stationary throughout")
        start, stop = min(b[0] for b in bounds), max(b[1] for b in bounds)
    seqs = []
    for h in hands:
        h = h.slice(start, stop)
        h = Trajectory6D(_prep_positions(h.positions, cfg.preprocess), h.orientations)
        seqs.append(compute_rrv(h, cfg.skip_svd_normalization))
    return np.concatenate(seqs, axis=1)


def describe(payload, cfg: DescriptorConfig = DescriptorConfig()):
    """Descriptor of a trajectory ``(N-1, 7)``, a hand pair ``(N-1, 14)`` or a skeleton."""
    if isinstance(payload, LabeledSample):
        payload = payload.payload
    if isinstance(payload, SkeletonSequence):
        return skeleton_descriptor(payload, cfg.skeleton)
    if isinstance(payload, Trajectory6D):
        payload = (payload,)
    if isinstance(payload, tuple) and all(isinstance(h, Trajectory6D) for h in payload):
        if len({len(h) for h in payload}) != 1:
            raise DataError("hand trajectories differ in length")
        return _describe_hands(payload, cfg)
    raise InvalidParams(f"cannot describe {type(payload).__name__}")


def describe_all(samples, cfg: DescriptorConfig, threads: int = 1) -> list:
    def one(s):
        try:
            return describe(s, cfg)
        except DataError as exc:
            raise DataError(f"{s.name or s.label}: {exc}") from exc

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, samples))
    return [one(s) for s in samples]


def load_samples(cfg: RunConfig) -> list[LabeledSample]:
    if cfg.data is None:
        raise InvalidParams("no dataset path configured")
    if cfg.dataset_format == "native":
        return load_dataset(cfg.data)
    if cfg.dataset_format == "auslan":
        fmt = TrajectoryFormat()
        if cfg.format_config:
            fmt = TrajectoryFormat.from_dict(json.loads(Path(cfg.format_config).read_text()))
        return load_trajectory6d(cfg.data, fmt)
    jm = cfg.descriptor_config().skeleton.joint_map
    if cfg.dataset_format == "msr":
        exclude = read_exclusion_list(cfg.exclude) if cfg.exclude else ()
        return load_skeleton(cfg.data, jm, exclude)
    if not cfg.annotations:
        raise InvalidParams("msrc12 needs an annotations file")
    return load_msrc12(cfg.data, cfg.annotations, jm)


def dtw_cost_fn(metric: str = "rrv", symmetric: bool = True, window: int | None = None):
    def cost(p, q):
        if isinstance(p, SkeletonDescriptor):
            return part_dtw_cost(p, q, metric, symmetric, window)
        return dtw(p, q, metric, window=window).cost

    return cost


@dataclass
class SplitResult:
    index: int
    train: tuple
    test: tuple
    accuracy: float
    predictions: list  # (sample index, predicted label)
    ms_per_sample: float


@dataclass
class EvalResult:
    config: dict
    splits: list
    labels: list
    names: list
    subjects: list

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([s.accuracy for s in self.splits])

    def summary(self) -> dict:
        acc = self.accuracies
        return {
            "protocol": ALIASES[self.config["protocol"]],
            "backend": self.config["backend"],
            "metric": self.config["metric"],
            "n_splits": len(self.splits),
            "n_test_total": int(sum(len(s.predictions) for s in self.splits)),
            "accuracy_mean": float(acc.mean()),
            "accuracy_std": float(acc.std()),
            "per_split": [
                {"index": s.index, "train": list(s.train), "test": list(s.test), "accuracy": s.accuracy}
                for s in self.splits
            ],
        }

    def confusion(self) -> tuple[list, np.ndarray]:
        classes = sorted(set(self.labels), key=natural_key)
        for s in self.splits:
            classes += [p for _, p in s.predictions if p not in classes]
        pos = {c: i for i, c in enumerate(classes)}
        m = np.zeros((len(classes), len(classes)), dtype=int)
        for s in self.splits:
            for i, p in s.predictions:
                m[pos[self.labels[i]], pos[p]] += 1
        return classes, m

    def timing(self) -> dict:
        return {
            "ms_per_test_sample": [s.ms_per_sample for s in self.splits],
            "ms_per_test_sample_mean": float(np.mean([s.ms_per_sample for s in self.splits])),
        }


def _classify_dtw(desc, train, test, cost, cache, threads):
    def one(i):
        t0 = time.perf_counter()
        costs = []
        for j in train:
            key = (i, j)
            if key not in cache:
                cache[key] = cost(desc[i], desc[j])
            costs.append(cache[key])
        # argmin keeps the first minimum: ties go to the lowest training index
        return train[int(np.argmin(costs))], time.perf_counter() - t0

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(one, test))
    else:
        out = [one(i) for i in test]
    return [j for j, _ in out], sum(t for _, t in out)


def _classify_bow(desc, labels, train, test, cfg: RunConfig):
    codebook = learn_codebook([desc[j] for j in train], cfg.k_r, cfg.k_t, cfg.seed)
    x_train = np.stack([encode_bow(desc[j], codebook) for j in train])
    model = svm_train(x_train, [labels[j] for j in train], cfg.svm_gamma, cfg.svm_c)
    t0 = time.perf_counter()
    x_test = np.stack([encode_bow(desc[i], codebook) for i in test])
    pred = svm_predict(model, x_test)
    return pred, time.perf_counter() - t0


def evaluate(samples, cfg: RunConfig, descriptors=None) -> EvalResult:
    """Run the configured protocol; descriptors are computed once and reused."""
    cfg.validate()
    samples = list(samples)
    if not samples:
        raise EmptyTrainingSet("no samples")
    labels = [s.label for s in samples]
    subjects = [s.subject for s in samples]
    if descriptors is None:
        descriptors = describe_all(samples, cfg.descriptor_config(), cfg.threads)
    plans = make_splits(samples, cfg.protocol, cfg.train_subjects)
    cost = dtw_cost_fn(cfg.metric, cfg.symmetric, cfg.window)
    cache: dict = {}
    results = []
    for plan in plans:
        train = [i for i, s in enumerate(subjects) if s in plan.train]
        test = [i for i, s in enumerate(subjects) if s in plan.test]
        if not test:
            raise DataError(f"split {plan.index}: empty test set")
        if not train:
            raise EmptyTrainingSet(f"split {plan.index}: empty training set")
        if cfg.backend == "dtw":
            nn, seconds = _classify_dtw(descriptors, train, test, cost, cache, cfg.threads)
            pred = [labels[j] for j in nn]
        else:
            pred, seconds = _classify_bow(descriptors, labels, train, test, cfg)
        acc = float(np.mean([p == labels[i] for i, p in zip(test, pred)]))
        results.append(
            SplitResult(plan.index, plan.train, plan.test, acc, list(zip(test, pred)), 1000.0 * seconds / len(test))
        )
    return EvalResult(asdict(cfg), results, labels, [s.name for s in samples], subjects)


def write_bundle(result: EvalResult, out, extra_meta: dict | None = None) -> Path:
    """summary.json, confusion.csv, predictions.csv and metadata.json; timing.json on the side."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(result.summary(), indent=2, sort_keys=True) + "\n")
    classes, m = result.confusion()
    with open(out / "confusion.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\predicted", *classes])
        for c, row in zip(classes, m):
            w.writerow([c, *row.tolist()])
    rows = []
    for s in result.splits:
        for i, p in s.predictions:
            rows.append((s.index, result.names[i], result.subjects[i], result.labels[i], p))
    rows.sort(key=lambda r: (r[0], natural_key(r[1])))
    with open(out / "predictions.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["split", "name", "subject", "label", "predicted", "correct"])
        for r in rows:
            w.writerow([*r, int(r[3] == r[4])])
    meta = {"config": result.config, "seeds": {"kmeans": result.config["seed"]}, **(extra_meta or {})}
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    (out / "timing.json").write_text(json.dumps(result.timing(), indent=2, sort_keys=True) + "\n")
    return out


def default_dictionary_sizes(dataset: str) -> tuple[int, int]:
    return DEFAULT_SIZES[dataset]
