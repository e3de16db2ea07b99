"""Synthetic speech-like utterances for tests and benchmarks.

Target material is bursts of broadband band-limited noise with mild syllabic
modulation and true silences, so energy labels are crisp and GCC-PHAT has
full-band content to lock onto (the role wideband voicing and consonants play
in real speech). Competing-speaker material is near-continuous, low-band
formant-colored and deeply modulated, so a summed bed fluctuates the way
overlapping talkers do while staying spectrally distinct from the target.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import butter, lfilter

from duovad.audio import Waveform

FS_DEFAULT = 8000


def _formant_filters(
    rng: np.random.Generator, fs: int, bands: tuple[tuple[float, float], ...]
) -> list[tuple[np.ndarray, np.ndarray]]:
    filters = []
    for lo, hi in bands:
        f = rng.uniform(lo, hi)
        bw = rng.uniform(80.0, 200.0)
        r = np.exp(-np.pi * bw / fs)
        theta = 2.0 * np.pi * f / fs
        filters.append((np.array([1.0 - r]), np.array([1.0, -2.0 * r * np.cos(theta), r * r])))
    return filters


def _burst(
    rng: np.random.Generator,
    fs: int,
    length: int,
    f0: float,
    filters: list[tuple[np.ndarray, np.ndarray]],
    noise_frac: float,
) -> np.ndarray:
    if noise_frac >= 1.0:
        excitation = rng.standard_normal(length)
    else:
        period = fs / (f0 * rng.uniform(0.92, 1.08))
        excitation = np.zeros(length)
        pos = rng.uniform(0.0, period)
        while pos < length:
            excitation[int(pos)] = 3.0
            pos += period * rng.uniform(0.98, 1.02)
        excitation = (1.0 - noise_frac) * excitation + noise_frac * rng.standard_normal(length)
    y = excitation
    for b, a in filters:
        y = lfilter(b, a, y)
    return y


def _utterance(
    rng: np.random.Generator,
    fs: int,
    duration_s: float,
    amplitude: float,
    burst_range_s: tuple[float, float],
    gap_range_s: tuple[float, float],
    jitter_db: float,
    noise_frac: float,
    formant_bands: tuple[tuple[float, float], ...] | None,
    syllabic_depth: float,
) -> Waveform:
    n = int(fs * duration_s)
    x = np.zeros(n)
    f0 = rng.uniform(90.0, 240.0)
    filters = _formant_filters(rng, fs, formant_bands) if formant_bands else []
    bandpass = butter(4, [200.0 / (fs / 2), 3400.0 / (fs / 2)], btype="band")

    pos = int(fs * rng.uniform(0.02, 0.15))
    while pos < n - int(0.2 * fs):
        burst_len = min(int(fs * rng.uniform(*burst_range_s)), n - pos)
        v = lfilter(*bandpass, _burst(rng, fs, burst_len, f0, filters, noise_frac))
        t = np.arange(burst_len) / fs
        syllabic = (1.0 - syllabic_depth) + syllabic_depth * np.cos(
            2 * np.pi * rng.uniform(2.5, 5.0) * t + rng.uniform(0.0, 6.28)
        )
        ramp = min(int(0.01 * fs), max(burst_len // 4, 1))
        envelope = np.ones(burst_len)
        envelope[:ramp] = np.linspace(0.0, 1.0, ramp)
        envelope[-ramp:] = np.linspace(1.0, 0.0, ramp)
        gain = 10.0 ** (rng.uniform(-jitter_db, 0.0) / 20.0)
        peak = np.max(np.abs(v)) or 1.0
        x[pos : pos + burst_len] = amplitude * gain * (v / peak) * syllabic * envelope
        pos += burst_len + int(fs * rng.uniform(*gap_range_s))
    return Waveform(x, fs)


def synthetic_utterance(
    rng: np.random.Generator,
    fs: int = FS_DEFAULT,
    duration_s: float = 2.5,
    amplitude: float = 0.3,
) -> Waveform:
    """Target material: broadband noise bursts separated by true silence."""
    return _utterance(
        rng,
        fs,
        duration_s,
        amplitude,
        burst_range_s=(0.35, 0.7),
        gap_range_s=(0.25, 0.5),
        jitter_db=0.0,
        noise_frac=1.0,
        formant_bands=None,
        syllabic_depth=0.08,
    )


def competing_utterance(
    rng: np.random.Generator, fs: int = FS_DEFAULT, duration_s: float = 2.5
) -> Waveform:
    """Competing-talker material: near-continuous, low-band voiced, deeply modulated."""
    return _utterance(
        rng,
        fs,
        duration_s,
        amplitude=0.3,
        burst_range_s=(0.8, 2.2),
        gap_range_s=(0.05, 0.2),
        jitter_db=10.0,
        noise_frac=0.3,
        formant_bands=((250.0, 700.0), (900.0, 1800.0)),
        syllabic_depth=0.7,
    )


def constant_tone(
    fs: int = FS_DEFAULT, duration_s: float = 1.0, freq_hz: float = 440.0, amp: float = 0.3
) -> Waveform:
    t = np.arange(int(fs * duration_s)) / fs
    return Waveform(amp * np.sin(2 * np.pi * freq_hz * t), fs)
