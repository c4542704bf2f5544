"""Epoch/dataset containers, EPO1 file I/O, preprocessing and a synthetic
motor-imagery generator with known ground-truth filters.

Samples are held as one ``(n_epochs, n_channels, n_samples)`` float64 array;
:class:`Epoch` is a light view used where a single trial is handed around.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import signal

from .errors import (
    BadMagic,
    DataError,
    EmptyDataset,
    EpochTooShort,
    EvenTaps,
    InconsistentShape,
    InvalidBand,
    InvalidLabel,
    InvalidWindow,
    NonFiniteSample,
    TruncatedPayload,
    UnsupportedVersion,
)

MAGIC = b"EPO1"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIf")


@dataclass(frozen=True)
class Epoch:
    samples: np.ndarray  # (C, T)
    label: int

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 2:
            raise InconsistentShape(f"epoch must be 2-D (channels x samples), got shape {x.shape}")
        if x.shape[0] < 2:
            raise InconsistentShape("an epoch needs at least 2 channels")
        if not np.all(np.isfinite(x)):
            raise NonFiniteSample("epoch contains non-finite samples")
        if self.label not in (0, 1):
            raise InvalidLabel(f"label must be 0 or 1, got {self.label!r}")
        object.__setattr__(self, "samples", x)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labelled epochs sharing one channel count, length and sample rate."""

    samples: np.ndarray  # (N, C, T)
    labels: np.ndarray  # (N,), values in {0, 1}
    sample_rate_hz: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        y = np.asarray(self.labels)
        if x.ndim != 3:
            raise InconsistentShape(f"samples must be (epochs, channels, time), got {x.shape}")
        if y.shape != (x.shape[0],):
            raise InconsistentShape("need exactly one label per epoch")
        if y.size and not np.all((y == 0) | (y == 1)):
            raise InvalidLabel("labels must be 0 or 1")
        if not np.all(np.isfinite(x)):
            raise NonFiniteSample("dataset contains non-finite samples")
        if not (self.sample_rate_hz > 0 and math.isfinite(self.sample_rate_hz)):
            raise DataError("sample_rate_hz must be positive and finite")
        if x.shape[0] and x.shape[1] < 2:
            raise InconsistentShape("need at least 2 channels")
        if x.shape[0] and x.shape[2] < x.shape[1]:
            warnings.warn(
                f"T={x.shape[2]} < C={x.shape[1]}: per-trial covariances are rank-deficient",
                stacklevel=3,
            )
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "labels", y.astype(np.int64))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @classmethod
    def from_epochs(cls, epochs: Iterable[Epoch], sample_rate_hz: float) -> "Dataset":
        epochs = list(epochs)
        if not epochs:
            raise EmptyDataset("no epochs given")
        shapes = {e.samples.shape for e in epochs}
        if len(shapes) != 1:
            raise InconsistentShape(f"epochs have differing shapes: {sorted(shapes)}")
        return cls(
            np.stack([e.samples for e in epochs]),
            np.array([e.label for e in epochs]),
            sample_rate_hz,
        )

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __getitem__(self, i: int) -> Epoch:
        return Epoch(self.samples[i], int(self.labels[i]))

    def __iter__(self) -> Iterator[Epoch]:
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.sample_rate_hz == other.sample_rate_hz
            and self.samples.shape == other.samples.shape
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.samples, other.samples)
        )

    @property
    def n_channels(self) -> int:
        return self.samples.shape[1]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[2]

    def class_counts(self) -> tuple[int, int]:
        return int(np.sum(self.labels == 0)), int(np.sum(self.labels == 1))

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(self.samples[idx], self.labels[idx], self.sample_rate_hz)

    def with_samples(self, samples: np.ndarray) -> "Dataset":
        return Dataset(samples, self.labels, self.sample_rate_hz)


# -- EPO1 I/O -----------------------------------------------------------------


def read_epo(path) -> Dataset:
    """Read an EPO1 file (little-endian header, u8 labels, f32 samples)."""
    raw = Path(path).read_bytes()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagic(f"{path}: not an EPO1 file (magic {raw[:4]!r})")
    if len(raw) < _HEADER.size:
        raise TruncatedPayload(f"{path}: header truncated")
    _, version, n, c, t, fs = _HEADER.unpack_from(raw, 0)
    if version != VERSION:
        raise UnsupportedVersion(f"{path}: version {version}, expected {VERSION}")
    payload = _HEADER.size + n + 4 * n * c * t
    if len(raw) < payload:
        raise TruncatedPayload(f"{path}: expected {payload} bytes, found {len(raw)}")
    if len(raw) > payload:
        raise DataError(f"{path}: {len(raw) - payload} trailing bytes after payload")
    labels = np.frombuffer(raw, dtype=np.uint8, count=n, offset=_HEADER.size)
    if np.any(labels > 1):
        raise InvalidLabel(f"{path}: label byte outside {{0, 1}}")
    data = np.frombuffer(raw, dtype="<f4", count=n * c * t, offset=_HEADER.size + n)
    if not np.all(np.isfinite(data)):
        raise NonFiniteSample(f"{path}: non-finite sample value")
    return Dataset(
        data.astype(np.float64).reshape(n, c, t), labels.astype(np.int64), float(fs)
    )


def encode_epo(dataset: Dataset) -> bytes:
    if len(dataset) == 0:
        raise EmptyDataset("refusing to write an empty dataset")
    n, c, t = dataset.samples.shape
    header = _HEADER.pack(MAGIC, VERSION, n, c, t, dataset.sample_rate_hz)
    labels = dataset.labels.astype(np.uint8).tobytes()
    return header + labels + dataset.samples.astype("<f4").tobytes(order="C")


def write_epo(dataset: Dataset, path) -> None:
    """Write ``dataset`` as EPO1. Samples are stored as float32."""
    Path(path).write_bytes(encode_epo(dataset))


# -- preprocessing ------------------------------------------------------------


def _sample_index(t_s: float, fs: float) -> int:
    # round half up; Python's round() is half-to-even
    return int(math.floor(t_s * fs + 0.5))


def extract_window(dataset: Dataset, t_start_s: float, t_end_s: float) -> Dataset:
    """Keep samples ``[round(t_start*fs), round(t_end*fs))`` of every epoch."""
    fs = dataset.sample_rate_hz
    duration = dataset.n_samples / fs
    if not (0 <= t_start_s < t_end_s <= duration):
        raise InvalidWindow(
            f"window [{t_start_s}, {t_end_s}] s not inside epoch extent [0, {duration}] s"
        )
    i0, i1 = _sample_index(t_start_s, fs), _sample_index(t_end_s, fs)
    if i1 <= i0:
        raise InvalidWindow(f"window [{t_start_s}, {t_end_s}] s contains no samples")
    return dataset.with_samples(dataset.samples[:, :, i0:i1])


def design_bandpass(lo_hz: float, hi_hz: float, taps: int, fs: float) -> np.ndarray:
    """Hamming-windowed sinc band-pass taps (linear phase, odd length)."""
    if taps % 2 == 0:
        raise EvenTaps(f"taps must be odd, got {taps}")
    if taps < 3:
        raise EvenTaps(f"taps must be >= 3, got {taps}")
    if not (0 < lo_hz < hi_hz < fs / 2):
        raise InvalidBand(f"need 0 < lo < hi < fs/2, got lo={lo_hz}, hi={hi_hz}, fs={fs}")
    return signal.firwin(taps, [lo_hz, hi_hz], pass_zero=False, window="hamming", fs=fs)


def bandpass_fir(dataset: Dataset, lo_hz: float, hi_hz: float, taps: int = 129) -> Dataset:
    """Band-pass every channel and trim the (taps-1)/2 group delay at each end.

    The output has ``T - (taps - 1)`` samples; sample ``i`` of the output is
    centred on input sample ``i + (taps - 1) // 2``.
    """
    h = design_bandpass(lo_hz, hi_hz, taps, dataset.sample_rate_hz)
    t = dataset.n_samples
    if t <= taps - 1:
        raise EpochTooShort(f"epochs of {t} samples are too short for {taps} taps")
    x = dataset.samples
    t_out = t - (taps - 1)
    y = np.zeros(x.shape[:2] + (t_out,))
    # direct-form 'valid' convolution, fixed summation order
    for k in range(taps):
        start = taps - 1 - k
        y += h[k] * x[:, :, start:start + t_out]
    return dataset.with_samples(y)


# -- synthetic generator ------------------------------------------------------


@dataclass(frozen=True)
class SynthParams:
    """Two-class source model: source 1 is louder in class 0, source 2 in class 1."""

    channels: int = 8
    samples: int = 500
    epochs_per_class: int = 100
    source_std_high: float = 3.0
    source_std_low: float = 1.0
    noise_std: float = 0.5
    mixing_condition_max: float = 10.0
    seed: int = 0
    sample_rate_hz: float = 250.0

    def __post_init__(self):
        if self.channels < 2:
            raise ValueError("channels must be >= 2")
        if self.samples < 1 or self.epochs_per_class < 1:
            raise ValueError("samples and epochs_per_class must be positive")
        if not self.source_std_high >= self.source_std_low > 0:
            raise ValueError("need source_std_high >= source_std_low > 0")
        if self.noise_std < 0:
            raise ValueError("noise_std must be >= 0")
        if self.mixing_condition_max < 1:
            raise ValueError("mixing_condition_max must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _mixing_matrix(rng: np.random.Generator, c: int, kappa: float, max_tries: int = 500) -> np.ndarray:
    if kappa == 1:
        return np.eye(c)
    g = None
    for _ in range(max_tries):
        g = rng.standard_normal((c, c))
        if np.linalg.cond(g) <= kappa:
            return g
    # large C almost never passes: clip the singular spectrum of the last draw
    u, s, vt = np.linalg.svd(g)
    s = np.clip(s, s[0] / kappa, s[0])
    return (u * s) @ vt


def generate_synthetic(params: SynthParams) -> tuple[Dataset, np.ndarray]:
    """Draw ``X = A S + noise_std * E`` for both classes.

    Returns the dataset (class 0 epochs first) and the unit-norm demixing
    filters for sources 1 and 2, i.e. the first two columns of ``inv(A).T``.
    """
    p = params
    rng = np.random.default_rng(p.seed)
    c, t, n = p.channels, p.samples, p.epochs_per_class
    a = _mixing_matrix(rng, c, p.mixing_condition_max)

    stds = np.full((2, c), p.source_std_low)
    stds[0, 0] = p.source_std_high
    stds[1, 1] = p.source_std_high
    labels = np.repeat([0, 1], n)

    sources = rng.standard_normal((2 * n, c, t)) * stds[labels][:, :, None]
    noise = rng.standard_normal((2 * n, c, t))
    x = np.einsum("ij,njt->nit", a, sources) + p.noise_std * noise

    demix = np.linalg.inv(a).T[:, :2]
    demix = demix / np.linalg.norm(demix, axis=0)
    return Dataset(x, labels, p.sample_rate_hz), demix
