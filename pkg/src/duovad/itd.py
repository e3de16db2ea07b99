"""Per-frame interchannel time difference via GCC-PHAT, plus array geometry math."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from duovad.audio import FrameParams, StereoWaveform, frame_signal, next_pow2, window_vector

SPEED_OF_SOUND_MPS = 343.0


@dataclass
class ArrayGeometry:
    """Two-microphone array: spacing, sample rate, and speed of sound."""

    mic_spacing_m: float
    sample_rate_hz: int
    speed_of_sound_mps: float = SPEED_OF_SOUND_MPS

    def __post_init__(self):
        if self.mic_spacing_m <= 0:
            raise ValueError("mic_spacing_m must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.speed_of_sound_mps <= 0:
            raise ValueError("speed_of_sound_mps must be positive")


@dataclass
class ItdTrack:
    """Per-frame integer lag estimates with the PHAT correlation peak as confidence."""

    tau_per_frame: np.ndarray
    confidence_per_frame: np.ndarray

    def __post_init__(self):
        self.tau_per_frame = np.asarray(self.tau_per_frame, dtype=np.int64)
        self.confidence_per_frame = np.asarray(self.confidence_per_frame, dtype=np.float64)
        if self.tau_per_frame.shape != self.confidence_per_frame.shape:
            raise ValueError("tau and confidence tracks must have equal length")

    def __len__(self) -> int:
        return self.tau_per_frame.size


def max_itd(g: ArrayGeometry) -> int:
    """Total count of distinguishable integer lags for the array, symmetric about 0.

    floor(f_s / (c / d)) * 2 + 1; always odd and >= 1.
    """
    return int(math.floor(g.sample_rate_hz * g.mic_spacing_m / g.speed_of_sound_mps)) * 2 + 1


def max_abs_lag(g: ArrayGeometry) -> int:
    """Largest one-sided integer lag the geometry can produce: (max_itd - 1) / 2."""
    return (max_itd(g) - 1) // 2


def angle_resolution_deg(g: ArrayGeometry) -> float:
    """Angular width of one lag slice: 180 degrees divided by the lag count."""
    return 180.0 / max_itd(g)


def fov_deg(g: ArrayGeometry, thr1: int, thr2: int) -> float:
    """Angular width of the field of view spanned by lags thr1..thr2 inclusive."""
    if thr1 > thr2:
        raise ValueError("require thr1 <= thr2")
    half = max_abs_lag(g)
    if abs(thr1) > half or abs(thr2) > half:
        raise ValueError(f"thresholds must lie within +/-{half} for this geometry")
    return (thr2 - thr1 + 1) * angle_resolution_deg(g)


def gcc_phat(
    frame1: np.ndarray,
    frame2: np.ndarray,
    max_lag: int,
    fft_size: int | None = None,
) -> tuple[int, float]:
    """Integer-lag delay estimate between two frames via GCC-PHAT.

    The cross-power spectrum S1 * conj(S2) is whitened to unit magnitude
    (guarded by a small epsilon relative to its mean magnitude) and inverse
    transformed; the returned lag in [-max_lag, +max_lag] maximizes the
    resulting correlation and the peak value is returned as confidence.

    Sign convention: a positive lag means channel 2 lags channel 1, i.e.
    channel 1 received the wavefront first.

    Ties at equal peak value resolve to the smallest |lag|, negative before
    positive. An all-zero frame pair returns (0, 0.0).
    """
    frame1 = np.asarray(frame1, dtype=np.float64)
    frame2 = np.asarray(frame2, dtype=np.float64)
    if frame1.shape != frame2.shape or frame1.ndim != 1:
        raise ValueError("frames must be 1-d and of equal length")
    n = frame1.size
    if max_lag < 0 or max_lag >= n:
        raise ValueError("require 0 <= max_lag < frame length")
    if fft_size is None:
        fft_size = next_pow2(2 * n)
    if fft_size < 2 * n:
        raise ValueError("fft_size must be >= 2 * frame length to avoid circular aliasing")

    if not np.any(frame1) or not np.any(frame2):
        return 0, 0.0

    s1 = np.fft.fft(frame1, n=fft_size)
    s2 = np.fft.fft(frame2, n=fft_size)
    cross = s1 * np.conj(s2)
    mag = np.abs(cross)
    mean_mag = float(np.mean(mag))
    if mean_mag == 0.0:
        return 0, 0.0
    cc = np.fft.ifft(cross / (mag + 1e-12 * mean_mag)).real

    # correlation at lag L sits at index (-L) mod fft_size
    lags = np.arange(-max_lag, max_lag + 1)
    values = cc[np.mod(-lags, fft_size)]
    order = sorted(range(lags.size), key=lambda i: (abs(int(lags[i])), int(lags[i])))
    best = order[0]
    for i in order[1:]:
        if values[i] > values[best]:
            best = i
    return int(lags[best]), float(values[best])


def estimate_itd(s: StereoWaveform, p: FrameParams, g: ArrayGeometry) -> ItdTrack:
    """Per-frame ITD track of a stereo signal, constrained to the geometry's lag range."""
    if g.sample_rate_hz != s.sample_rate_hz:
        raise ValueError("geometry sample rate does not match the signal")
    frames1 = frame_signal(s.ch1, p)
    frames2 = frame_signal(s.ch2, p)
    win = window_vector(p.window, p.frame_len)
    lag_limit = max_abs_lag(g)
    fft_size = next_pow2(2 * p.frame_len)
    taus = np.empty(len(frames1), dtype=np.int64)
    peaks = np.empty(len(frames1), dtype=np.float64)
    for t in range(len(frames1)):
        lag, peak = gcc_phat(win * frames1.frames[t], win * frames2.frames[t], lag_limit, fft_size)
        taus[t] = lag
        peaks[t] = peak
    return ItdTrack(taus, peaks)
