import struct

import numpy as np
import pytest

from gibbsbound import data
from gibbsbound.fixtures import fixture_bytes

IMAGES = struct.pack(">IIII", 0x00000803, 2, 2, 2) + bytes([0, 128, 255, 64, 10, 20, 30, 40])
LABELS = struct.pack(">II", 0x00000801, 2) + bytes([3, 7])


def test_load_idx_parses_the_hand_built_fixture():
    raw = data.load_idx(IMAGES, LABELS)
    assert raw.n == 2
    assert raw.features.shape == (2, 4)
    assert raw.features[0, 2] == 1.0  # byte 255 scales to exactly 1
    assert raw.features[0, 1] == 128 / 255
    assert list(raw.raw_labels) == [3, 7]


def test_load_idx_matches_packaged_fixture():
    raw = data.load_idx(fixture_bytes("idx_images.bin"), fixture_bytes("idx_labels.bin"))
    assert raw.n == 2 and raw.features.shape[1] == 4


def test_load_idx_rejects_bad_magic():
    bad = struct.pack(">IIII", 0x00000802, 2, 2, 2) + IMAGES[16:]
    with pytest.raises(data.BadMagic):
        data.load_idx(bad, LABELS)
    bad_labels = struct.pack(">II", 0x00000803, 2) + LABELS[8:]
    with pytest.raises(data.BadMagic):
        data.load_idx(IMAGES, bad_labels)


def test_load_idx_rejects_count_mismatch():
    labels3 = struct.pack(">II", 0x00000801, 3) + bytes([3, 7, 1])
    with pytest.raises(data.CountMismatch):
        data.load_idx(IMAGES, labels3)
    with pytest.raises(data.CountMismatch):
        data.load_idx(IMAGES + b"\x00", LABELS)


def test_load_idx_rejects_every_truncation():
    # every strict prefix of either stream must raise some format error
    for cut in range(len(IMAGES)):
        with pytest.raises(data.DataFormatError):
            data.load_idx(IMAGES[:cut], LABELS)
    for cut in range(len(LABELS)):
        with pytest.raises(data.DataFormatError):
            data.load_idx(IMAGES, LABELS[:cut])


def test_load_cifar_binary():
    rec0 = bytes([0]) + bytes(3072)
    rec1 = bytes([5]) + bytes([255] * 3072)
    raw = data.load_cifar_binary(rec0 + rec1)
    assert raw.n == 2
    assert list(raw.raw_labels) == [0, 5]
    assert raw.features[0].sum() == 0.0
    assert raw.features[1, 0] == 1.0
    with pytest.raises(data.TruncatedStream):
        data.load_cifar_binary(rec0[:-1])
    with pytest.raises(data.TruncatedStream):
        data.load_cifar_binary(b"")


def test_binarize_mnist_rule():
    raw = data.load_idx(IMAGES, LABELS)  # raw labels 3 and 7
    ds = data.binarize(raw, data.BinarizationRule(data.MNIST_POSITIVE_DIGITS))
    assert list(ds.labels) == [1, -1]
    assert ds.features is raw.features


def test_binarize_cifar_vehicle_rule():
    raw = data.RawDataset(np.zeros((3, 2)), np.array([0, 5, 9]))
    ds = data.binarize(raw, data.BinarizationRule(data.CIFAR_VEHICLE_CLASSES))
    assert list(ds.labels) == [1, -1, 1]


def test_binarize_rejects_unknown_labels():
    raw = data.RawDataset(np.zeros((1, 2)), np.array([11]))
    with pytest.raises(data.UnknownLabel):
        data.binarize(raw, data.BinarizationRule(frozenset({0, 1})))


def test_rule_validation():
    with pytest.raises(ValueError):
        data.BinarizationRule(frozenset())
    with pytest.raises(ValueError):
        data.BinarizationRule(frozenset(range(10)))  # not a proper subset


def test_randomize_labels_deterministic_and_feature_preserving():
    ds = data.make_synthetic(200, 3, separation=1.0, flip_rate=0.1, seed=4)
    r1 = data.randomize_labels(ds, 99)
    r2 = data.randomize_labels(ds, 99)
    assert np.array_equal(r1.labels, r2.labels)
    assert r1.features is ds.features
    assert not np.array_equal(r1.labels, data.randomize_labels(ds, 100).labels)


def test_randomize_labels_is_roughly_balanced():
    ds = data.LabeledDataset(np.zeros((10000, 1)), np.ones(10000, dtype=np.int64))
    out = data.randomize_labels(ds, 0)
    frac = np.mean(out.labels == 1)
    assert 0.47 <= frac <= 0.53


def test_make_synthetic_separable_case():
    ds = data.make_synthetic(1000, 5, separation=100.0, flip_rate=0.0, seed=2)
    # a threshold on the first coordinate classifies perfectly
    predicted = np.where(ds.features[:, 0] > 0, 1, -1)
    assert np.array_equal(predicted, ds.labels)


def test_make_synthetic_symmetric_case_and_determinism():
    a = data.make_synthetic(500, 4, separation=0.0, flip_rate=0.0, seed=3)
    b = data.make_synthetic(500, 4, separation=0.0, flip_rate=0.0, seed=3)
    assert np.array_equal(a.features, b.features)
    assert np.array_equal(a.labels, b.labels)
    with pytest.raises(ValueError):
        data.make_synthetic(0, 4, 1.0, 0.0, 0)
    with pytest.raises(ValueError):
        data.make_synthetic(10, 4, 1.0, 0.7, 0)


def test_labeled_dataset_validation():
    with pytest.raises(ValueError):
        data.LabeledDataset(np.zeros((2, 1)), np.array([1, 2]))
    with pytest.raises(data.CountMismatch):
        data.LabeledDataset(np.zeros((2, 1)), np.array([1]))
