"""Single-channel VAD engines: statistical likelihood-ratio (Sohn-style) and energy.

Engines consume frames in order and emit one score per frame (higher = more
speech-like). Scores are the pre-threshold statistic used for ROC sweeps;
hangover smoothing applies only to hard decisions at a fixed operating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from duovad.audio import FrameSequence, next_pow2, window_vector

ENERGY_EPS = 1e-12
NOISE_PSD_FLOOR = 1e-12
LOG_LR_CLAMP = 50.0


@dataclass
class SohnParams:
    """Parameters of the statistical likelihood-ratio engine."""

    dd_alpha: float = 0.99
    noise_init_frames: int = 10
    min_gain_floor: float = NOISE_PSD_FLOOR
    threshold_eta: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.dd_alpha < 1.0):
            raise ValueError("dd_alpha must be in [0, 1)")
        if self.noise_init_frames < 1:
            raise ValueError("noise_init_frames must be >= 1")
        if self.min_gain_floor <= 0:
            raise ValueError("min_gain_floor must be positive")


@dataclass
class HangoverParams:
    """Counter-based decision smoothing."""

    hang_frames: int = 8
    onset_frames: int = 1

    def __post_init__(self):
        if self.hang_frames < 0:
            raise ValueError("hang_frames must be >= 0")
        if self.onset_frames < 1:
            raise ValueError("onset_frames must be >= 1")


@runtime_checkable
class SvadScorer(Protocol):
    """Scoring contract: one finite score per frame, higher = more speech-like."""

    decision_threshold: float

    def score_frames(self, frames: np.ndarray) -> np.ndarray: ...


def sohn_frame_score(
    frame_spectrum: np.ndarray,
    noise_psd: np.ndarray,
    prev_xi_state: np.ndarray,
    params: SohnParams,
) -> tuple[float, np.ndarray]:
    """Mean per-bin log likelihood ratio of one frame, with decision-directed state.

    Per bin: a posteriori SNR gamma = |S|^2 / noise_psd; a priori SNR estimated
    by the decision-directed rule xi = alpha * prev_state + (1 - alpha) *
    max(gamma - 1, 0); log LR = gamma * xi / (1 + xi) - log(1 + xi), clamped to
    +/-LOG_LR_CLAMP. The new state is the Wiener-gain-filtered posterior
    (xi / (1 + xi))^2 * gamma, carried to the next frame.
    """
    power = np.abs(np.asarray(frame_spectrum)) ** 2
    lam = np.maximum(np.asarray(noise_psd, dtype=np.float64), params.min_gain_floor)
    if power.shape != lam.shape or power.shape != np.shape(prev_xi_state):
        raise ValueError("spectrum, noise PSD, and state must have equal shapes")
    gamma = power / lam
    xi = params.dd_alpha * np.asarray(prev_xi_state) + (1.0 - params.dd_alpha) * np.maximum(
        gamma - 1.0, 0.0
    )
    log_lr = gamma * xi / (1.0 + xi) - np.log1p(xi)
    score = float(np.mean(np.clip(log_lr, -LOG_LR_CLAMP, LOG_LR_CLAMP)))
    gain = xi / (1.0 + xi)
    new_state = gain * gain * gamma
    return score, new_state


def update_noise_psd(
    noise_psd: np.ndarray,
    frame_spectrum: np.ndarray,
    speech_decision: int,
    smoothing: float,
    floor: float = NOISE_PSD_FLOOR,
) -> np.ndarray:
    """Recursive noise PSD tracking, frozen during speech frames."""
    if not (0.0 <= smoothing < 1.0):
        raise ValueError("smoothing must be in [0, 1)")
    noise_psd = np.asarray(noise_psd, dtype=np.float64)
    if speech_decision:
        return noise_psd.copy()
    power = np.abs(np.asarray(frame_spectrum)) ** 2
    return np.maximum(smoothing * noise_psd + (1.0 - smoothing) * power, floor)


def energy_score(frame: np.ndarray) -> float:
    """Frame energy in dB: 10*log10(mean squared sample + 1e-12)."""
    frame = np.asarray(frame, dtype=np.float64)
    return float(10.0 * np.log10(np.mean(frame**2) + ENERGY_EPS))


def threshold_scores(scores: np.ndarray, eta: float) -> np.ndarray:
    """Hard decisions: 1 where score > eta (strict), else 0."""
    if not np.isfinite(eta):
        raise ValueError("eta must be finite")
    return (np.asarray(scores, dtype=np.float64) > eta).astype(np.int64)


def hangover(decisions: np.ndarray, p: HangoverParams) -> np.ndarray:
    """Smooth hard decisions: drop 1-runs shorter than onset_frames, then extend
    every surviving 1-run by hang_frames past its last raw 1."""
    dec = np.asarray(decisions).astype(np.int64)
    out = np.zeros_like(dec)
    n = dec.size
    i = 0
    while i < n:
        if dec[i] == 0:
            i += 1
            continue
        j = i
        while j < n and dec[j] == 1:
            j += 1
        if j - i >= p.onset_frames:
            out[i : min(j + p.hang_frames, n)] = 1
        i = j
    return out


class SohnVad:
    """Statistical likelihood-ratio VAD over windowed frame spectra.

    The noise PSD is initialized from the first noise_init_frames frames and
    then tracked recursively during frames whose immediate score falls below
    threshold_eta. score_frames is a full-utterance pass; all state is local
    to the call, so one instance may be reused across runs.
    """

    def __init__(
        self,
        params: SohnParams | None = None,
        window: str = "hamming",
        fft_size: int | None = None,
        noise_smoothing: float = 0.98,
    ):
        self.params = params or SohnParams()
        self.window = window
        self.fft_size = fft_size
        if not (0.0 <= noise_smoothing < 1.0):
            raise ValueError("noise_smoothing must be in [0, 1)")
        self.noise_smoothing = noise_smoothing

    @property
    def decision_threshold(self) -> float:
        return self.params.threshold_eta

    def score_frames(self, frames: np.ndarray | FrameSequence) -> np.ndarray:
        if isinstance(frames, FrameSequence):
            frames = frames.frames
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 2:
            raise ValueError("frames must be (num_frames, frame_len)")
        n_frames, frame_len = frames.shape
        nfft = self.fft_size or next_pow2(frame_len)
        win = window_vector(self.window, frame_len)
        n_bins = nfft // 2 + 1

        p = self.params
        scores = np.empty(n_frames)
        xi_state = np.zeros(n_bins)
        psd_accum = np.zeros(n_bins)
        noise_psd = np.full(n_bins, p.min_gain_floor)
        for t in range(n_frames):
            spectrum = np.fft.rfft(win * frames[t], n=nfft)
            if t < p.noise_init_frames:
                psd_accum += np.abs(spectrum) ** 2
                noise_psd = np.maximum(psd_accum / (t + 1), p.min_gain_floor)
            score, xi_state = sohn_frame_score(spectrum, noise_psd, xi_state, p)
            scores[t] = score
            if t >= p.noise_init_frames and score <= p.threshold_eta:
                noise_psd = update_noise_psd(
                    noise_psd, spectrum, 0, self.noise_smoothing, p.min_gain_floor
                )
        return scores


class EnergyVad:
    """Energy baseline: frame energy in dB."""

    def __init__(self, threshold_db: float = -50.0):
        self.decision_threshold = float(threshold_db)

    def score_frames(self, frames: np.ndarray | FrameSequence) -> np.ndarray:
        if isinstance(frames, FrameSequence):
            frames = frames.frames
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 2:
            raise ValueError("frames must be (num_frames, frame_len)")
        return 10.0 * np.log10(np.mean(frames**2, axis=1) + ENERGY_EPS)


class ExternalScorer:
    """Adapter for scores computed by a third-party VAD (frame-scores CSV)."""

    def __init__(self, scores: np.ndarray, decision_threshold: float = 0.0):
        self.scores = np.asarray(scores, dtype=np.float64)
        if self.scores.ndim != 1:
            raise ValueError("external scores must be a 1-d sequence")
        self.decision_threshold = float(decision_threshold)

    def score_frames(self, frames: np.ndarray | FrameSequence) -> np.ndarray:
        n = len(frames) if isinstance(frames, FrameSequence) else np.asarray(frames).shape[0]
        if n != self.scores.size:
            raise ValueError(
                f"external scores cover {self.scores.size} frames, input has {n}"
            )
        return self.scores.copy()
