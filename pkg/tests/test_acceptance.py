"""Acceptance suite.

Criteria 1-9 run on synthetic data and always execute. Criteria 10-14
reproduce benchmark numbers and run only when the datasets are available:

    RRV_AUSLAN_DIR        AUSLAN2 high-quality signs (one directory per subject)
    RRV_MSR_DIR           MSRAction3D skeleton text files
    RRV_MSR_EXCLUDE       optional exclusion list for MSRAction3D
    RRV_MSRC12_DIR        MSRC-12 recordings
    RRV_MSRC12_ANNOTATIONS  instance annotation CSV for MSRC-12

Each criterion prints one ``ACCEPTANCE <n> PASS|FAIL|SKIP`` line.
"""
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from helpers import random_trajectory
from rrv import geom
from rrv.cli import main
from rrv.data import LabeledSample, NoiseSpec, add_noise, synth_dataset, synth_skeleton_dataset
from rrv.data.synth import random_rigid_transform
from rrv.descriptor import compute_rrv, rrv_distance
from rrv.pipeline import RunConfig, describe, describe_all, evaluate, load_samples
from rrv.preprocess import Trajectory6D
from rrv.recognize.dtw import dtw_from_costs, part_dtw_cost
from rrv.skeleton import mirror_sequence, skeleton_descriptor

FAMILIES5 = ["helix", "figure_eight", "circle", "spiral", "zigzag"]


@pytest.fixture
def verdict(capsys):
    def report(n: int, ok: bool, detail: str, limit: float | None = None, elapsed: float | None = None):
        if limit is not None:
            detail += f"; {elapsed:.2f} s (limit {limit:g} s)"
            ok = ok and elapsed < limit
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return report


def skip_line(capsys, n: int, why: str):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n:2d} SKIP: {why}")
    pytest.skip(why)


def _warm_dtw():
    # keep one-off JIT compilation out of the timed sections
    dtw_from_costs(np.ones((2, 2)))


def test_01_invariance(verdict):
    _warm_dtw()
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        traj = random_trajectory(rng, n=int(rng.integers(30, 60)))
        g, c, s = random_rigid_transform(rng)
        moved = Trajectory6D(s * traj.positions @ g.T + c, geom.quaternion_multiply(geom.matrix_to_quaternion(g), traj.orientations))
        worst = max(worst, float(np.max(np.abs(describe(traj) - describe(moved)))))
    elapsed = time.perf_counter() - t0
    verdict(1, worst < 1e-6, f"200 rigid+scale transforms, max deviation {worst:.2e} (< 1e-6)", 10, elapsed)


def test_02_special_patterns(verdict):
    rng = np.random.default_rng(102)
    t0 = time.perf_counter()
    ok_rot = ok_trans = True
    for _ in range(20):
        traj = random_trajectory(rng, n=30)
        still = Trajectory6D(np.tile(traj.positions[:1], (len(traj), 1)), traj.orientations)
        ok_rot &= bool(np.all(compute_rrv(still)[:, 4:] == 0.0))
        glide = Trajectory6D.translation_only(traj.positions)
        ok_trans &= bool(np.all(compute_rrv(glide)[:, :4] == geom.IDENTITY_QUAT))
    elapsed = time.perf_counter() - t0
    verdict(2, ok_rot and ok_trans, f"pure rotation s_t == 0: {ok_rot}; pure translation s_r == (1,0,0,0): {ok_trans}", 1, elapsed)


def _brute_force(d: np.ndarray) -> float:
    n, m = d.shape
    best = np.inf
    # a monotone path is an interleaving of down/right/diagonal steps
    def walk(i, j, acc):
        nonlocal best
        if i == n - 1 and j == m - 1:
            best = min(best, acc)
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            a, b = i + di, j + dj
            if a < n and b < m:
                walk(a, b, acc + d[a, b])

    walk(0, 0, d[0, 0])
    return best


def test_03_dtw_oracle(verdict):
    _warm_dtw()
    rng = np.random.default_rng(103)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(500):
        n, m = rng.integers(1, 7, 2)
        d = rng.random((n, m))
        mismatches += dtw_from_costs(d).cost != _brute_force(d)
    elapsed = time.perf_counter() - t0
    verdict(3, mismatches == 0, f"500 matrices up to 6x6, {mismatches} inexact costs", 30, elapsed)


def test_04_rotation_round_trips(verdict):
    rng = np.random.default_rng(104)
    t0 = time.perf_counter()
    q = geom.random_quaternions(rng, 10_000)
    r = geom.quaternion_to_matrix(q)
    q2 = geom.matrix_to_quaternion(r)
    e_q = np.max(np.minimum(np.abs(q2 - q).max(1), np.abs(q2 + q).max(1)))
    aa = geom.matrix_to_axis_angle(r)
    e_r = np.max(np.abs(geom.axis_angle_to_matrix(aa.axis, aa.angle) - r))
    aq = geom.quaternion_to_axis_angle(q)
    q3 = geom.quaternion_from_axis_angle(aq.axis, aq.angle)
    e_aa = np.max(np.minimum(np.abs(q3 - q).max(1), np.abs(q3 + q).max(1)))
    worst = float(max(e_q, e_r, e_aa))
    elapsed = time.perf_counter() - t0
    verdict(4, worst < 1e-9, f"10^4 rotations, worst loop error {worst:.2e} (< 1e-9)", 5, elapsed)


def test_05_triangle_inequality(verdict):
    rng = np.random.default_rng(105)
    t0 = time.perf_counter()

    def draw(n):
        q = rng.standard_normal((n, 4))
        q /= np.linalg.norm(q, axis=1, keepdims=True)
        return np.concatenate([q, rng.standard_normal((n, 3))], axis=1)

    a, b, c = draw(10_000), draw(10_000), draw(10_000)
    violations = int(np.sum(rrv_distance(a, c) > rrv_distance(a, b) + rrv_distance(b, c)))
    elapsed = time.perf_counter() - t0
    verdict(5, violations == 0, f"10^4 triples, {violations} triangle violations", 5, elapsed)


def _noisy(samples, snr, draw):
    return [
        LabeledSample(add_noise(s.payload, NoiseSpec(snr, [draw, i])), s.label, s.subject, s.name)
        for i, s in enumerate(samples)
    ]


def test_06_noise_trend(verdict):
    _warm_dtw()
    t0 = time.perf_counter()
    clean = synth_dataset(FAMILIES5, n_subjects=5, n_per_subject=4, seed=7)
    cfg = RunConfig()

    def acc(samples):
        return evaluate(samples, cfg).summary()["accuracy_mean"]

    a_clean = acc(clean)
    # mean over independent noise draws
    a10 = float(np.mean([acc(_noisy(clean, 10, k)) for k in range(3)]))
    a50 = float(np.mean([acc(_noisy(clean, 50, k)) for k in range(3)]))
    elapsed = time.perf_counter() - t0
    ok = a50 >= a10 >= 0.8 * a_clean
    verdict(6, ok, f"accuracy clean {a_clean:.3f}, 50 dB {a50:.3f}, 10 dB {a10:.3f} (need 50 >= 10 >= 0.8 clean)", 120, elapsed)


def test_07_sign_flip_ablation(verdict):
    _warm_dtw()
    t0 = time.perf_counter()
    samples = _noisy(synth_dataset(FAMILIES5, n_subjects=5, n_per_subject=4, seed=7), 10, 0)
    desc = describe_all(samples, RunConfig().descriptor_config())
    rng = np.random.default_rng(107)
    flipped = []
    for i, d in enumerate(desc):
        d = d.copy()
        if i % 2:
            # q and -q are the same rotation; a sensor may report either per sample
            d[rng.random(len(d)) < 0.5, :4] *= -1
        flipped.append(d)
    a_rrv = evaluate(samples, RunConfig(metric="rrv"), flipped).summary()["accuracy_mean"]
    a_l2 = evaluate(samples, RunConfig(metric="l2"), flipped).summary()["accuracy_mean"]
    elapsed = time.perf_counter() - t0
    verdict(7, a_rrv >= a_l2, f"sign-flipped streams: rrv metric {a_rrv:.3f} vs l2 {a_l2:.3f}", 120, elapsed)


def test_08_mirror_branch(verdict):
    _warm_dtw()
    t0 = time.perf_counter()
    samples = synth_skeleton_dataset(["wave_left", "kick_right", "bend"], n_subjects=3, n_per_subject=2)
    desc = [skeleton_descriptor(s.payload) for s in samples]
    mirrors = [skeleton_descriptor(mirror_sequence(s.payload)) for s in samples]
    worst_margin = np.inf
    for i, p in enumerate(desc):
        own = part_dtw_cost(p, mirrors[i])
        cross = min(part_dtw_cost(p, q) for q, s in zip(desc, samples) if s.label != samples[i].label)
        worst_margin = min(worst_margin, cross - own)
    elapsed = time.perf_counter() - t0
    verdict(8, worst_margin > 0, f"min over samples of (cross-class cost - mirror cost) = {worst_margin:.4f} (> 0)", 60, elapsed)


def test_09_determinism(verdict, tmp_path):
    assert main(["synth", "--out", str(tmp_path / "ds"), "--subjects", "4", "--per-subject", "2"]) == 0
    bundles = []
    for backend in ("dtw", "bow"):
        for _ in range(2):
            out = tmp_path / f"res_{backend}"
            argv = ["evaluate", "--data", str(tmp_path / "ds"), "--out", str(out), "--backend", backend]
            assert main(argv + ["--k-r", "8", "--k-t", "8"]) == 0
            bundles.append({p.name: p.read_bytes() for p in out.iterdir() if p.name != "timing.json"})
    same = bundles[0] == bundles[1] and bundles[2] == bundles[3]
    verdict(9, same, f"repeat runs byte-identical for dtw and bow ({sorted(bundles[0])})")


# ---------------------------------------------------------------------------
# dataset tier


def _env(capsys, n, *names):
    values = [os.environ.get(v) for v in names]
    if not all(values):
        skip_line(capsys, n, f"set {' and '.join(names)} to run")
    return values


def _accuracy(cfg: RunConfig, samples=None, descriptors=None):
    samples = load_samples(cfg) if samples is None else samples
    return evaluate(samples, cfg, descriptors).summary()["accuracy_mean"], samples


@pytest.mark.dataset
def test_10_auslan(verdict, capsys):
    (root,) = _env(capsys, 10, "RRV_AUSLAN_DIR")
    acc, _ = _accuracy(RunConfig(data=root, dataset_format="auslan", protocol="cs-twofold"))
    verdict(10, abs(100 * acc - 92.56) <= 4, f"AUSLAN2 two-fold CS {100 * acc:.2f}% (target 92.56 +- 4)")


def _msr_cfg(root, **kw):
    return RunConfig(data=root, dataset_format="msr", exclude=os.environ.get("RRV_MSR_EXCLUDE"), protocol="cs", **kw)


@pytest.mark.dataset
def test_11_msr_action3d(verdict, capsys):
    (root,) = _env(capsys, 11, "RRV_MSR_DIR")
    acc, _ = _accuracy(_msr_cfg(root))
    verdict(11, abs(100 * acc - 93.44) <= 4, f"MSRAction3D CS {100 * acc:.2f}% (target 93.44 +- 4)")


@pytest.mark.dataset
def test_12_msr_ablation_order(verdict, capsys):
    (root,) = _env(capsys, 12, "RRV_MSR_DIR")
    base, samples = _accuracy(_msr_cfg(root))
    concat, _ = _accuracy(_msr_cfg(root, use_vrb=False), samples)
    gcs, _ = _accuracy(_msr_cfg(root, coords="gcs"), samples)
    ok = base > concat and base > gcs
    verdict(12, ok, f"VRB+LCS {100 * base:.2f}% vs concatenation {100 * concat:.2f}% and GCS {100 * gcs:.2f}%")


@pytest.mark.dataset
def test_13_msrc12(verdict, capsys):
    root, ann = _env(capsys, 13, "RRV_MSRC12_DIR", "RRV_MSRC12_ANNOTATIONS")
    cfg = RunConfig(data=root, dataset_format="msrc12", annotations=ann, protocol="losubo")
    samples = load_samples(cfg)
    desc = describe_all(samples, cfg.descriptor_config())
    lo, _ = _accuracy(cfg, samples, desc)
    cs, _ = _accuracy(replace(cfg, protocol="cs"), samples, desc)
    ok = abs(100 * lo - 94.71) <= 3 and abs(100 * cs - 93.87) <= 3
    verdict(13, ok, f"MSRC-12 LOSubO {100 * lo:.2f}% (94.71 +- 3), CS {100 * cs:.2f}% (93.87 +- 3)")


@pytest.mark.dataset
def test_14_bow_speedup(verdict, capsys):
    (root,) = _env(capsys, 14, "RRV_AUSLAN_DIR")
    cfg = RunConfig(data=root, dataset_format="auslan", protocol="cs-twofold")
    samples = load_samples(cfg)
    desc = describe_all(samples, cfg.descriptor_config())
    ms_dtw = evaluate(samples, cfg, desc).timing()["ms_per_test_sample_mean"]
    bow_cfg = replace(cfg, backend="bow")
    ms_bow = evaluate(samples, bow_cfg, desc).timing()["ms_per_test_sample_mean"]
    ratio = ms_dtw / ms_bow
    verdict(14, ratio >= 10, f"DTW {ms_dtw:.1f} ms vs BoW {ms_bow:.1f} ms per sample, {ratio:.1f}x (>= 10x)")

