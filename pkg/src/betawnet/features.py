"""Audio ingestion and MFCC feature extraction.

Turns an isolated-word recording into a fixed-length feature vector:
pre-emphasis, Hamming-windowed frames, magnitude spectrum, triangular
mel filterbank, log energies, orthonormal DCT, then segment averaging
down to a single concatenated vector.
"""

from __future__ import annotations

import csv
import json
import os
import struct
from dataclasses import dataclass

import numpy as np

from .transforms import dct_matrix, next_pow2, rfft_magnitude

LOG_FLOOR = 1e-10


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-d sequence")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be > 0, got {self.sample_rate}")
        object.__setattr__(self, "samples", samples)

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class MfccConfig:
    frame_len_ms: float = 25.0
    hop_ms: float = 10.0
    n_mels: int = 26
    n_coeffs: int = 13
    pre_emphasis: float = 0.97
    fmin_hz: float = 0.0
    fmax_hz: float | None = None  # None means Nyquist at use time

    def __post_init__(self):
        if not 0 < self.hop_ms <= self.frame_len_ms:
            raise ValueError(
                f"need 0 < hop_ms <= frame_len_ms, got {self.hop_ms}/{self.frame_len_ms}"
            )
        if not 1 <= self.n_coeffs <= self.n_mels:
            raise ValueError(
                f"need 1 <= n_coeffs <= n_mels, got {self.n_coeffs}/{self.n_mels}"
            )
        if self.fmin_hz < 0:
            raise ValueError(f"fmin_hz must be >= 0, got {self.fmin_hz}")


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))


# ---------------------------------------------------------------------------
# WAV ingestion (RIFF PCM 16-bit mono)

def load_wav(path: str) -> AudioClip:
    """Decode a RIFF/WAVE file holding 16-bit mono PCM.

    Samples are scaled by 1/32768 into [-1, 1).  Anything else (float
    encodings, stereo, other bit depths) is rejected with an error
    naming the offending header field.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 12 or blob[0:4] != b"RIFF":
        raise ValueError(f"{path}: missing RIFF magic")
    if blob[8:12] != b"WAVE":
        raise ValueError(f"{path}: RIFF form type is {blob[8:12]!r}, want b'WAVE'")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(blob):
        chunk_id = blob[pos : pos + 4]
        (chunk_len,) = struct.unpack_from("<I", blob, pos + 4)
        body = blob[pos + 8 : pos + 8 + chunk_len]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise ValueError(f"{path}: fmt chunk truncated ({len(body)} bytes)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_len:
                raise ValueError(f"{path}: data chunk truncated")
            data = body
        pos += 8 + chunk_len + (chunk_len & 1)

    if fmt is None:
        raise ValueError(f"{path}: no fmt chunk")
    if data is None:
        raise ValueError(f"{path}: no data chunk")
    audio_format, channels, sample_rate, _, _, bits = fmt
    if audio_format != 1:
        raise ValueError(f"{path}: audio_format={audio_format}, want 1 (PCM)")
    if channels != 1:
        raise ValueError(f"{path}: channels={channels}, want mono")
    if bits != 16:
        raise ValueError(f"{path}: bits_per_sample={bits}, want 16")
    if len(data) == 0:
        raise ValueError(f"{path}: empty data chunk")

    raw = np.frombuffer(data[: len(data) - (len(data) % 2)], dtype="<i2")
    return AudioClip(samples=raw.astype(float) / 32768.0, sample_rate=sample_rate)


def save_wav(clip: AudioClip, path: str) -> None:
    """Write a clip as RIFF PCM 16-bit mono."""
    scaled = np.clip(np.round(clip.samples * 32768.0), -32768, 32767).astype("<i2")
    data = scaled.tobytes()
    header = b"RIFF" + struct.pack("<I", 36 + len(data)) + b"WAVE"
    fmt = b"fmt " + struct.pack(
        "<IHHIIHH", 16, 1, 1, clip.sample_rate, clip.sample_rate * 2, 2, 16
    )
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header + fmt + b"data" + struct.pack("<I", len(data)) + data)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# MFCC pipeline

def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=float) / 2595.0) - 1.0)


def mel_center_freqs(n_mels: int, fmin_hz: float, fmax_hz: float) -> np.ndarray:
    """Peak frequencies (Hz) of the triangular filters, mel-equally spaced."""
    mels = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2)
    return mel_to_hz(mels)[1:-1]


def mel_filterbank(
    n_mels: int, n_fft: int, sample_rate: int, fmin_hz: float, fmax_hz: float
) -> np.ndarray:
    """Triangular filters on the positive-frequency bins: (n_mels, n_fft//2 + 1).

    Centers are equally spaced on the mel scale; each triangle is linear
    in Hz from its left neighbor's center up to its own and back down to
    its right neighbor's center.
    """
    nyquist = sample_rate / 2.0
    if not fmin_hz < fmax_hz <= nyquist:
        raise ValueError(
            f"need fmin < fmax <= Nyquist, got {fmin_hz}/{fmax_hz}/{nyquist}"
        )
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_mels + 2))
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    bank = np.zeros((n_mels, freqs.size))
    for i in range(n_mels):
        left, center, right = edges[i], edges[i + 1], edges[i + 2]
        up = (freqs - left) / (center - left)
        down = (right - freqs) / (right - center)
        bank[i] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def frame_signal(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    """Split into overlapping frames: (1 + (len - frame_len)//hop, frame_len)."""
    n = samples.size
    if n < frame_len:
        raise ValueError(f"clip of {n} samples is shorter than one {frame_len}-sample frame")
    n_frames = 1 + (n - frame_len) // hop
    idx = np.arange(frame_len)[None, :] + hop * np.arange(n_frames)[:, None]
    return samples[idx]


def mfcc(clip: AudioClip, config: MfccConfig = MfccConfig()) -> np.ndarray:
    """Cepstral coefficient matrix, one row per frame: (n_frames, n_coeffs)."""
    sr = clip.sample_rate
    frame_len = int(round(config.frame_len_ms * sr / 1000.0))
    hop = int(round(config.hop_ms * sr / 1000.0))
    fmax = sr / 2.0 if config.fmax_hz is None else config.fmax_hz

    x = clip.samples
    emphasized = np.empty_like(x)
    emphasized[0] = x[0]
    emphasized[1:] = x[1:] - config.pre_emphasis * x[:-1]

    frames = frame_signal(emphasized, frame_len, hop) * np.hamming(frame_len)
    n_fft = next_pow2(frame_len)
    spectrum = rfft_magnitude(frames, n_fft)

    bank = mel_filterbank(config.n_mels, n_fft, sr, config.fmin_hz, fmax)
    energies = spectrum @ bank.T
    log_energies = np.log(np.maximum(energies, LOG_FLOOR))

    dct = dct_matrix(config.n_mels)
    return log_energies @ dct.T[:, : config.n_coeffs]


def fixed_length_embedding(frames: np.ndarray, n_segments: int = 4, label: str | None = None) -> FeatureVector:
    """Average contiguous frame blocks into one fixed-size vector.

    Frames are padded by repeating the last row up to n_segments, split
    into near-equal contiguous blocks, block-averaged, and concatenated:
    the result has n_segments * n_coeffs values.
    """
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise ValueError("frames must be a non-empty (n_frames, n_coeffs) matrix")
    if n_segments < 1:
        raise ValueError(f"n_segments must be >= 1, got {n_segments}")
    if frames.shape[0] < n_segments:
        pad = np.tile(frames[-1:], (n_segments - frames.shape[0], 1))
        frames = np.vstack([frames, pad])
    n = frames.shape[0]
    bounds = [(i * n) // n_segments for i in range(n_segments + 1)]
    blocks = [frames[bounds[i] : bounds[i + 1]].mean(axis=0) for i in range(n_segments)]
    return FeatureVector(values=np.concatenate(blocks), label=label)


def clip_to_features(clip: AudioClip, config: MfccConfig = MfccConfig(), n_segments: int = 4,
                     label: str | None = None) -> FeatureVector:
    return fixed_length_embedding(mfcc(clip, config), n_segments, label=label)


# ---------------------------------------------------------------------------
# Dataset files

def save_features_csv(vectors: list[FeatureVector], path: str) -> None:
    """One row per example: label,v1,...,vS (floats keep full precision)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for vec in vectors:
            writer.writerow([vec.label or ""] + [repr(float(v)) for v in vec.values])
    os.replace(tmp, path)


def load_features_csv(path: str) -> list[FeatureVector]:
    vectors = []
    with open(path, "r", newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            label = row[0] or None
            vectors.append(FeatureVector(values=np.array([float(v) for v in row[1:]]), label=label))
    return vectors


def save_manifest(items: list[tuple[str, str]], path: str) -> None:
    """Persist file -> label pairs as JSON."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump({"items": [{"file": f, "label": lab} for f, lab in items]}, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def load_manifest(path: str) -> list[tuple[str, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return [(item["file"], item["label"]) for item in doc["items"]]
