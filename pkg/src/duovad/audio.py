"""Audio containers, 16-bit WAV I/O, framing, and windowed spectra."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile

PCM_FULL_SCALE = 32768  # 2**15
WINDOW_NAMES = ("rectangular", "hamming", "hann")


def window_vector(name: str, length: int) -> np.ndarray:
    """Return the analysis window of the given name and length."""
    if name == "rectangular":
        return np.ones(length)
    if name == "hamming":
        return np.hamming(length)
    if name == "hann":
        return np.hanning(length)
    raise ValueError(f"unknown window {name!r}; expected one of {WINDOW_NAMES}")


def next_pow2(n: int) -> int:
    """Smallest power of two >= n."""
    if n <= 1:
        return 1
    return 1 << (n - 1).bit_length()


@dataclass
class Waveform:
    """A mono sampled signal with float amplitudes, nominal range [-1, 1)."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError("Waveform samples must be one-dimensional")
        if int(self.sample_rate_hz) <= 0:
            raise ValueError("sample_rate_hz must be positive")
        self.sample_rate_hz = int(self.sample_rate_hz)
        if self.samples.size and not np.all(np.isfinite(self.samples)):
            raise ValueError("Waveform samples must all be finite")

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass
class StereoWaveform:
    """A synchronized pair of microphone channels."""

    ch1: Waveform
    ch2: Waveform

    def __post_init__(self):
        if len(self.ch1) != len(self.ch2):
            raise ValueError("stereo channels must have equal length")
        if self.ch1.sample_rate_hz != self.ch2.sample_rate_hz:
            raise ValueError("stereo channels must have equal sample rate")

    def __len__(self) -> int:
        return len(self.ch1)

    @property
    def sample_rate_hz(self) -> int:
        return self.ch1.sample_rate_hz


@dataclass
class FrameParams:
    """Framing contract: frame length, shift and analysis window (in samples)."""

    frame_len: int
    frame_shift: int
    window: str = "hamming"

    def __post_init__(self):
        if not (0 < self.frame_shift <= self.frame_len):
            raise ValueError("require 0 < frame_shift <= frame_len")
        if self.window not in WINDOW_NAMES:
            raise ValueError(f"unknown window {self.window!r}")

    @classmethod
    def from_ms(
        cls,
        sample_rate_hz: int,
        frame_ms: float = 25.0,
        shift_ms: float = 10.0,
        window: str = "hamming",
    ) -> "FrameParams":
        return cls(
            frame_len=int(round(sample_rate_hz * frame_ms / 1000.0)),
            frame_shift=int(round(sample_rate_hz * shift_ms / 1000.0)),
            window=window,
        )

    def num_frames(self, origin_len: int) -> int:
        if origin_len < self.frame_len:
            return 0
        return (origin_len - self.frame_len) // self.frame_shift + 1


@dataclass
class FrameSequence:
    """Frames cut from one signal: a (num_frames, frame_len) array plus its contract."""

    frames: np.ndarray
    params: FrameParams
    origin_len: int

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2 or self.frames.shape[1] != self.params.frame_len:
            raise ValueError("frames must be (num_frames, frame_len)")
        if self.frames.shape[0] != self.params.num_frames(self.origin_len):
            raise ValueError("frame count inconsistent with origin length")

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def starts(self) -> np.ndarray:
        return np.arange(len(self)) * self.params.frame_shift


def load_wav(path) -> Waveform | StereoWaveform:
    """Read a 16-bit PCM RIFF/WAVE file.

    Sample values are scaled to [-1, 1) by dividing by 2**15. Mono files
    yield a Waveform, two-channel files a StereoWaveform.
    """
    rate, data = wavfile.read(path)
    if data.dtype != np.int16:
        raise ValueError(f"{path}: only 16-bit PCM WAV is supported, got {data.dtype}")
    if data.size == 0:
        raise ValueError(f"{path}: zero-length audio")
    scaled = data.astype(np.float64) / PCM_FULL_SCALE
    if scaled.ndim == 1:
        return Waveform(scaled, rate)
    if scaled.ndim == 2 and scaled.shape[1] == 2:
        return StereoWaveform(Waveform(scaled[:, 0], rate), Waveform(scaled[:, 1], rate))
    raise ValueError(f"{path}: expected 1 or 2 channels, got shape {data.shape}")


def save_wav(w: Waveform | StereoWaveform, path) -> None:
    """Write 16-bit PCM WAV.

    Amplitudes are clipped to [-1, 1 - 2**-15] and quantized by round(a * 2**15),
    so a load/save round trip is lossless at the integer level.
    """
    if isinstance(w, StereoWaveform):
        data = np.stack([w.ch1.samples, w.ch2.samples], axis=1)
        rate = w.sample_rate_hz
    else:
        data = w.samples
        rate = w.sample_rate_hz
    clipped = np.clip(data, -1.0, 1.0 - 2.0 ** -15)
    pcm = np.round(clipped * PCM_FULL_SCALE).astype(np.int16)
    wavfile.write(path, rate, pcm)


def frame_signal(w: Waveform, p: FrameParams) -> FrameSequence:
    """Cut a signal into overlapping frames; the trailing partial frame is dropped.

    Frame t covers samples [t*frame_shift, t*frame_shift + frame_len). No window
    is applied here; windowing happens in the spectral front ends.
    """
    n = len(w)
    if n < p.frame_len:
        raise ValueError(f"signal of {n} samples is shorter than one frame ({p.frame_len})")
    view = np.lib.stride_tricks.sliding_window_view(w.samples, p.frame_len)
    frames = view[:: p.frame_shift][: p.num_frames(n)].copy()
    return FrameSequence(frames, p, n)


def windowed_spectrum(frame: np.ndarray, window: str, fft_size: int) -> np.ndarray:
    """DFT of a windowed, zero-padded frame.

    Returns the full fft_size-point complex spectrum; bin 0 is DC. fft_size must
    be a power of two and at least the frame length.
    """
    frame = np.asarray(frame, dtype=np.float64)
    if fft_size < frame.size:
        raise ValueError("fft_size must be >= frame length")
    if fft_size < 1 or (fft_size & (fft_size - 1)) != 0:
        raise ValueError(f"fft_size must be a power of two, got {fft_size}")
    win = window_vector(window, frame.size)
    return np.fft.fft(frame * win, n=fft_size)
