"""Dataset ingestion and labeling: IDX, CIFAR-10 binary, synthetic clusters.

Loaders return raw integer labels; `binarize` maps them to {-1, +1}.
Datasets are immutable after construction and safe to share across chains.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DataFormatError",
    "BadMagic",
    "CountMismatch",
    "TruncatedStream",
    "UnknownLabel",
    "RawDataset",
    "LabeledDataset",
    "BinarizationRule",
    "MNIST_POSITIVE_DIGITS",
    "CIFAR_VEHICLE_CLASSES",
    "load_idx",
    "load_cifar_binary",
    "binarize",
    "randomize_labels",
    "make_synthetic",
]

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801
CIFAR_RECORD_BYTES = 3073  # 1 label byte + 3 * 32 * 32 pixels

# Digits 0-4 form the positive class for the MNIST binary task; for CIFAR-10
# the vehicles (airplane, automobile, ship, truck) are positive in the
# canonical class ordering.
MNIST_POSITIVE_DIGITS = frozenset(range(5))
CIFAR_VEHICLE_CLASSES = frozenset({0, 1, 8, 9})


class DataFormatError(Exception):
    """Base class for malformed input streams."""


class BadMagic(DataFormatError):
    pass


class CountMismatch(DataFormatError):
    pass


class TruncatedStream(DataFormatError):
    pass


class UnknownLabel(DataFormatError):
    pass


@dataclass(frozen=True)
class RawDataset:
    """Features plus raw integer labels, prior to binarization."""

    features: np.ndarray
    raw_labels: np.ndarray
    name: str = "raw"

    def __post_init__(self):
        if self.features.shape[0] != self.raw_labels.shape[0]:
            raise CountMismatch("feature rows and labels differ in count")

    @property
    def n(self):
        return self.features.shape[0]


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with labels in {-1, +1}."""

    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise CountMismatch("feature rows and labels differ in count")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")
        if not np.all(np.isin(self.labels, (-1, 1))):
            raise ValueError("labels must be -1 or +1")

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d_in(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class BinarizationRule:
    """Raw labels in positive_classes map to +1, the rest of the alphabet to -1."""

    positive_classes: frozenset
    alphabet: frozenset = field(default_factory=lambda: frozenset(range(10)))

    def __post_init__(self):
        pos = frozenset(self.positive_classes)
        object.__setattr__(self, "positive_classes", pos)
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        if not pos:
            raise ValueError("positive class set must be nonempty")
        if not pos < self.alphabet:
            raise ValueError("positive class set must be a proper subset of the alphabet")


def _read_exact(buf, offset, count, what):
    if offset + count > len(buf):
        raise TruncatedStream(f"stream ends inside {what}")
    return buf[offset : offset + count], offset + count


def load_idx(image_bytes, label_bytes, name="idx"):
    """Parse big-endian IDX image and label streams into a RawDataset.

    Pixels are scaled to [0, 1] by dividing by 255 and flattened row-major.
    """
    header, off = _read_exact(image_bytes, 0, 16, "image header")
    magic, n, rows, cols = struct.unpack(">IIII", header)
    if magic != IDX_IMAGE_MAGIC:
        raise BadMagic(f"image magic 0x{magic:08x}, expected 0x{IDX_IMAGE_MAGIC:08x}")
    pixels, off = _read_exact(image_bytes, off, n * rows * cols, "pixel data")
    if off != len(image_bytes):
        raise CountMismatch("trailing bytes after pixel data")

    header, off = _read_exact(label_bytes, 0, 8, "label header")
    magic, n_labels = struct.unpack(">II", header)
    if magic != IDX_LABEL_MAGIC:
        raise BadMagic(f"label magic 0x{magic:08x}, expected 0x{IDX_LABEL_MAGIC:08x}")
    if n_labels != n:
        raise CountMismatch(f"{n} images but {n_labels} labels")
    raw, off = _read_exact(label_bytes, off, n, "label data")
    if off != len(label_bytes):
        raise CountMismatch("trailing bytes after label data")

    features = np.frombuffer(pixels, dtype=np.uint8).astype(np.float64) / 255.0
    return RawDataset(
        features=features.reshape(n, rows * cols),
        raw_labels=np.frombuffer(raw, dtype=np.uint8).astype(np.int64),
        name=name,
    )


def load_cifar_binary(record_bytes, name="cifar"):
    """Parse CIFAR-10 binary records (1 label byte + 3072 channel-major pixels)."""
    if len(record_bytes) == 0 or len(record_bytes) % CIFAR_RECORD_BYTES != 0:
        raise TruncatedStream(
            f"stream length {len(record_bytes)} is not a positive multiple of {CIFAR_RECORD_BYTES}"
        )
    records = np.frombuffer(record_bytes, dtype=np.uint8).reshape(-1, CIFAR_RECORD_BYTES)
    return RawDataset(
        features=records[:, 1:].astype(np.float64) / 255.0,
        raw_labels=records[:, 0].astype(np.int64),
        name=name,
    )


def binarize(raw, rule):
    """Map raw integer labels through the rule; features are shared, not copied."""
    unknown = set(np.unique(raw.raw_labels)) - set(rule.alphabet)
    if unknown:
        raise UnknownLabel(f"labels {sorted(unknown)} outside alphabet")
    positive = np.isin(raw.raw_labels, sorted(rule.positive_classes))
    labels = np.where(positive, 1, -1).astype(np.int64)
    return LabeledDataset(features=raw.features, labels=labels, name=raw.name)


def randomize_labels(ds, seed):
    """Resample every label uniformly from {-1, +1}; features are shared."""
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=ds.n) * 2 - 1
    return LabeledDataset(features=ds.features, labels=labels, name=f"{ds.name}-random")


def make_synthetic(n, d_in, separation, flip_rate, seed, name="synthetic"):
    """Two unit-variance Gaussian clusters at +-(separation/2) along axis 0.

    Labels follow cluster membership and are then flipped independently with
    probability flip_rate.
    """
    if n < 1 or d_in < 1:
        raise ValueError("n and d_in must be positive")
    if not 0.0 <= flip_rate <= 0.5:
        raise ValueError("flip_rate must lie in [0, 0.5]")
    rng = np.random.default_rng(seed)
    cluster = rng.integers(0, 2, size=n) * 2 - 1
    features = rng.standard_normal((n, d_in))
    features[:, 0] += cluster * (separation / 2.0)
    flips = rng.random(n) < flip_rate
    labels = np.where(flips, -cluster, cluster).astype(np.int64)
    return LabeledDataset(features=features, labels=labels, name=name)
