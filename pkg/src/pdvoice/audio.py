"""WAV ingest, resampling, spectral-subtraction denoising and fixed-length segmentation."""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import get_window, resample_poly

LABELS = ("PD", "HC", "unknown")

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3
_WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class WavReadError(IOError):
    """The file could not be opened or is not a RIFF/WAVE container."""


class UnsupportedEncodingError(ValueError):
    """The WAV file uses an encoding other than PCM16/PCM32/float."""


@dataclass(frozen=True)
class AudioSegment:
    samples: np.ndarray
    sample_rate: int
    speaker_id: str = ""
    label: str = "unknown"
    segment_index: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("samples must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def with_samples(self, samples, sample_rate=None) -> "AudioSegment":
        return replace(
            self,
            samples=samples,
            sample_rate=self.sample_rate if sample_rate is None else sample_rate,
        )


@dataclass(frozen=True)
class NoiseProfile:
    magnitude_spectrum: np.ndarray
    frame_size: int = 1024
    hop: int = 512

    def __post_init__(self):
        mag = np.asarray(self.magnitude_spectrum, dtype=np.float64)
        if mag.shape != (self.frame_size // 2 + 1,):
            raise ValueError("magnitude_spectrum must have frame_size/2 + 1 bins")
        if np.any(mag < 0):
            raise ValueError("noise magnitudes must be non-negative")
        object.__setattr__(self, "magnitude_spectrum", mag)

    @classmethod
    def zeros(cls, frame_size=1024, hop=512) -> "NoiseProfile":
        return cls(np.zeros(frame_size // 2 + 1), frame_size, hop)


def _wav_format(path: Path) -> tuple[int, int]:
    """Return (format tag, bits per sample) from the fmt chunk."""
    try:
        with open(path, "rb") as fh:
            header = fh.read(12)
            if len(header) < 12 or header[:4] != b"RIFF" or header[8:12] != b"WAVE":
                raise WavReadError(f"{path}: not a RIFF/WAVE file")
            while True:
                chunk = fh.read(8)
                if len(chunk) < 8:
                    raise WavReadError(f"{path}: no fmt chunk")
                cid, size = chunk[:4], struct.unpack("<I", chunk[4:])[0]
                if cid == b"fmt ":
                    body = fh.read(size)
                    tag, _, _, _, _, bits = struct.unpack("<HHIIHH", body[:16])
                    if tag == _WAVE_FORMAT_EXTENSIBLE and len(body) >= 26:
                        tag = struct.unpack("<H", body[24:26])[0]
                    return tag, bits
                fh.seek(size + (size & 1), 1)
    except OSError as exc:
        raise WavReadError(f"{path}: {exc}") from exc


def read_wav(path, speaker_id: str = "", label: str = "unknown") -> AudioSegment:
    """Read a PCM16/PCM32/float WAV file as a mono segment scaled to [-1, 1].

    Stereo input is averaged to mono. Raises :class:`WavReadError` for
    unreadable files and :class:`UnsupportedEncodingError` for anything other
    than integer PCM (16/32 bit) or IEEE float.
    """
    path = Path(path)
    tag, bits = _wav_format(path)
    if tag == _WAVE_FORMAT_PCM and bits not in (16, 32):
        raise UnsupportedEncodingError(f"{path}: {bits}-bit PCM is not supported")
    if tag == _WAVE_FORMAT_IEEE_FLOAT and bits not in (32, 64):
        raise UnsupportedEncodingError(f"{path}: {bits}-bit float is not supported")
    if tag not in (_WAVE_FORMAT_PCM, _WAVE_FORMAT_IEEE_FLOAT):
        raise UnsupportedEncodingError(f"{path}: WAV format tag {tag:#x} is not supported")
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise WavReadError(f"{path}: {exc}") from exc

    if data.dtype == np.int16:
        x = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        x = data.astype(np.float64) / 2147483648.0
    else:
        x = np.clip(data.astype(np.float64), -1.0, 1.0)
    if x.ndim == 2:
        if x.shape[1] > 2:
            raise UnsupportedEncodingError(f"{path}: {x.shape[1]} channels")
        x = x.mean(axis=1)
    if x.size == 0:
        raise WavReadError(f"{path}: no samples")
    return AudioSegment(x, int(rate), speaker_id=speaker_id, label=label)


def write_wav(seg: AudioSegment, path) -> None:
    """Write a segment as 16-bit PCM."""
    pcm = np.clip(np.round(seg.samples * 32768.0), -32768, 32767).astype(np.int16)
    wavfile.write(path, seg.sample_rate, pcm)


def resample(seg: AudioSegment, target_rate: int) -> AudioSegment:
    """Band-limited polyphase resampling (Kaiser-windowed sinc FIR)."""
    target_rate = int(target_rate)
    if target_rate <= 0:
        raise ValueError("target_rate must be positive")
    if target_rate == seg.sample_rate:
        return seg
    ratio = Fraction(target_rate, seg.sample_rate)
    y = resample_poly(seg.samples, ratio.numerator, ratio.denominator)
    return seg.with_samples(np.clip(y, -1.0, 1.0), target_rate)


def _stft(x, frame_size, hop, window):
    n_frames = 1 + (x.size - frame_size) // hop
    idx = np.arange(frame_size)[None, :] + hop * np.arange(n_frames)[:, None]
    return np.fft.rfft(x[idx] * window, axis=1)


def estimate_noise_profile(
    seg: AudioSegment, start: float = 0.0, end: float = 0.5, frame_size: int = 1024, hop: int = 512
) -> NoiseProfile:
    """Mean Hann-windowed magnitude spectrum over the noise-only interval [start, end) seconds."""
    if frame_size & (frame_size - 1):
        raise ValueError("frame_size must be a power of two")
    lo = max(int(round(start * seg.sample_rate)), 0)
    hi = min(int(round(end * seg.sample_rate)), seg.samples.size)
    x = seg.samples[lo:hi]
    if x.size < frame_size:
        raise ValueError(
            f"noise interval has {x.size} samples, shorter than one {frame_size}-sample frame"
        )
    window = get_window("hann", frame_size)
    spec = _stft(x, frame_size, hop, window)
    return NoiseProfile(np.abs(spec).mean(axis=0), frame_size, hop)


def reduce_noise(
    seg: AudioSegment,
    profile: NoiseProfile,
    over_subtraction: float = 1.5,
    floor: float = 0.05,
) -> AudioSegment:
    """Magnitude spectral subtraction with a spectral floor.

    Each frame's magnitude becomes ``max(|X| - over_subtraction * noise, floor * |X|)``
    with the noisy phase kept; frames are recombined by weighted overlap-add so
    the output has the input's length.
    """
    n, hop = profile.frame_size, profile.hop
    if n & (n - 1):
        raise ValueError("profile frame_size must be a power of two")
    if not 0 < floor < 1:
        raise ValueError("floor must lie in (0, 1)")
    if over_subtraction < 1:
        raise ValueError("over_subtraction must be >= 1")
    x = seg.samples
    if x.size < n:
        raise ValueError(f"segment has {x.size} samples, shorter than one {n}-sample frame")

    # pad so every input sample is covered by full overlap of frames
    pad_tail = (-(x.size + n)) % hop
    padded = np.concatenate([np.zeros(n), x, np.zeros(n + pad_tail)])
    window = get_window("hann", n)
    spec = _stft(padded, n, hop, window)
    mag = np.abs(spec)
    cleaned = np.maximum(mag - over_subtraction * profile.magnitude_spectrum, floor * mag)
    with np.errstate(invalid="ignore", divide="ignore"):
        gain = np.where(mag > 0, cleaned / mag, 0.0)
    frames = np.fft.irfft(spec * gain, n=n, axis=1)

    out = np.zeros(padded.size)
    norm = np.zeros(padded.size)
    for i, frame in enumerate(frames):
        s = i * hop
        out[s : s + n] += frame * window
        norm[s : s + n] += window**2
    safe = norm > 1e-12
    out[safe] /= norm[safe]
    y = out[n : n + x.size]
    return seg.with_samples(np.clip(y, -1.0, 1.0))


def segment(seg: AudioSegment, window_s: float = 10.0) -> list[AudioSegment]:
    """Split into consecutive non-overlapping windows, dropping the short remainder."""
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    width = int(round(window_s * seg.sample_rate))
    count = seg.samples.size // width
    return [
        replace(seg, samples=seg.samples[i * width : (i + 1) * width], segment_index=i)
        for i in range(count)
    ]
