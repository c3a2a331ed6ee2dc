import numpy as np
import pytest

from rrv.data import synth_dataset, synth_skeleton_dataset
from rrv.errors import DataError, ParseError
from rrv.pipeline import describe
from rrv.recognize import encode_bow, learn_codebook, learn_dictionary, svm_predict, svm_train
from rrv.serialize import (
    descriptor_columns,
    load_bow_model,
    load_descriptor_bin,
    load_descriptor_csv,
    load_dictionary,
    read_container,
    save_bow_model,
    save_descriptor_bin,
    save_descriptor_csv,
    save_dictionary,
    write_container,
)
from rrv.skeleton import SkeletonDescriptor


@pytest.fixture(scope="module")
def traj_desc():
    return describe(synth_dataset(["spiral"], 1, 1)[0])


def test_columns():
    assert descriptor_columns(7) == ["qw", "qx", "qy", "qz", "tx", "ty", "tz"]
    assert descriptor_columns(14)[7] == "qw1"
    assert descriptor_columns(7, "LA_")[0] == "LA_qw"


def test_csv_round_trip_exact(tmp_path, traj_desc):
    save_descriptor_csv(tmp_path / "d.csv", traj_desc)
    back = load_descriptor_csv(tmp_path / "d.csv")
    assert back.tobytes() == traj_desc.tobytes()
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "qw,qx,qy,qz,tx,ty,tz" and len(lines) == len(traj_desc) + 1


def test_bin_round_trip_exact(tmp_path, traj_desc):
    save_descriptor_bin(tmp_path / "d.bin", traj_desc)
    raw = (tmp_path / "d.bin").read_bytes()
    assert len(raw) == 16 + 8 * traj_desc.size
    assert load_descriptor_bin(tmp_path / "d.bin").tobytes() == traj_desc.tobytes()
    (tmp_path / "d.bin").write_bytes(raw[:-8])
    with pytest.raises(ParseError):
        load_descriptor_bin(tmp_path / "d.bin")


def test_skeleton_csv(tmp_path):
    d = describe(synth_skeleton_dataset(["bend"], 1, 1)[0])
    assert isinstance(d, SkeletonDescriptor)
    save_descriptor_csv(tmp_path / "s.csv", d)
    header = (tmp_path / "s.csv").read_text().splitlines()[0].split(",")
    assert len(header) == 63
    back = load_descriptor_csv(tmp_path / "s.csv")
    assert list(back.parts) == list(d.parts)
    for k in d.parts:
        assert back.parts[k].tobytes() == np.ascontiguousarray(d.parts[k]).tobytes()


def test_csv_malformed(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("qw,qx\n1.0,zz\n")
    with pytest.raises(ParseError) as exc:
        load_descriptor_csv(p)
    assert exc.value.line == 2


def test_container(tmp_path, rng):
    arrays = {"a": rng.standard_normal((3, 4)), "b/c": rng.standard_normal(5), "s": np.array(2.5)}
    write_container(tmp_path / "x.rrv", arrays, {"k": 1})
    back, meta = read_container(tmp_path / "x.rrv")
    assert meta == {"k": 1}
    for k in arrays:
        assert back[k].shape == arrays[k].shape and np.array_equal(back[k], arrays[k])
    assert (tmp_path / "x.rrv").read_bytes()[:4] == b"RRV1"
    (tmp_path / "y.rrv").write_bytes(b"XXXX")
    with pytest.raises(DataError):
        read_container(tmp_path / "y.rrv")
    (tmp_path / "z.rrv").write_bytes((tmp_path / "x.rrv").read_bytes()[:30])
    with pytest.raises(DataError):
        read_container(tmp_path / "z.rrv")


def test_dictionary_round_trip(tmp_path, rng):
    d = learn_dictionary(rng.standard_normal((50, 3)), 4, kind="translational")
    save_dictionary(tmp_path / "d.rrv", d, seed=42)
    back = load_dictionary(tmp_path / "d.rrv")
    assert back.kind == "translational" and np.array_equal(back.words, d.words)


def test_bow_model_reload_same_predictions(tmp_path):
    samples = synth_dataset(["helix", "circle", "zigzag"], 2, 2)
    descs = [describe(s) for s in samples]
    cb = learn_codebook(descs, 6, 6, seed=42)
    x = np.stack([encode_bow(d, cb) for d in descs])
    model = svm_train(x, [s.label for s in samples])
    save_bow_model(tmp_path / "m.rrv", cb, model, {"k_r": 6})
    cb2, model2, meta = load_bow_model(tmp_path / "m.rrv")
    assert meta["k_r"] == 6 and model2.classes == model.classes
    x2 = np.stack([encode_bow(d, cb2) for d in descs])
    assert np.array_equal(x, x2)
    assert svm_predict(model2, x2) == svm_predict(model, x)
    assert np.array_equal(model2.decision(x2), model.decision(x))
