"""Spatial pre-processing: ITD-gate detector, frame filter, AND combination,
delay-and-sum beamformer, and the composed detection pipelines."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from duovad.audio import FrameParams, FrameSequence, StereoWaveform, Waveform, frame_signal
from duovad.engines import SvadScorer, threshold_scores
from duovad.itd import ArrayGeometry, ItdTrack, estimate_itd, fov_deg, max_abs_lag

# Score assigned to frames suppressed by the spatial detector in AND modes.
# Sorts below every real engine score at any finite threshold.
SCORE_FLOOR = float(np.finfo(np.float64).min)


class PreprocessMode(Enum):
    """Pipeline variants: no pre-processing, detector-as-filter (F),
    detector-as-spatial-VAD ANDed with the engine (A), beamformer only (B),
    and the beamformed combinations (FB, AB)."""

    NONE = "none"
    F = "f"
    A = "a"
    B = "b"
    FB = "fb"
    AB = "ab"

    @property
    def needs_detector(self) -> bool:
        return self in (PreprocessMode.F, PreprocessMode.A, PreprocessMode.FB, PreprocessMode.AB)

    @property
    def needs_beamformer(self) -> bool:
        return self in (PreprocessMode.B, PreprocessMode.FB, PreprocessMode.AB)


@dataclass
class DetectorConfig:
    """Spatial detector thresholds (integer lags) and the array geometry."""

    thr1: int
    thr2: int
    geometry: ArrayGeometry

    def __post_init__(self):
        if self.thr1 > self.thr2:
            raise ValueError("require thr1 <= thr2")
        half = max_abs_lag(self.geometry)
        if abs(self.thr1) > half or abs(self.thr2) > half:
            raise ValueError(f"thresholds must lie within +/-{half} for this geometry")

    @property
    def fov_deg(self) -> float:
        return fov_deg(self.geometry, self.thr1, self.thr2)


@dataclass
class DetectorOutput:
    """Per-frame binary target-presence flags F(t)."""

    f_per_frame: np.ndarray

    def __post_init__(self):
        self.f_per_frame = np.asarray(self.f_per_frame).astype(np.int64)
        if self.f_per_frame.ndim != 1:
            raise ValueError("detector output must be a 1-d binary sequence")

    def __len__(self) -> int:
        return self.f_per_frame.size


def spatial_detect(itd: ItdTrack, cfg: DetectorConfig) -> DetectorOutput:
    """F(t) = 1 iff thr1 <= tau(t) <= thr2 (both bounds inclusive)."""
    tau = itd.tau_per_frame
    half = max_abs_lag(cfg.geometry)
    if np.any(np.abs(tau) > half):
        raise ValueError("ITD track contains lags outside the geometry's range")
    return DetectorOutput(((cfg.thr1 <= tau) & (tau <= cfg.thr2)).astype(np.int64))


def filter_frames(frames: FrameSequence, det: DetectorOutput) -> FrameSequence:
    """Zero out the frames where the detector saw no in-view target."""
    if len(frames) != len(det):
        raise ValueError(f"frame count {len(frames)} != detector length {len(det)}")
    out = frames.frames.copy()
    out[det.f_per_frame == 0] = 0.0
    return FrameSequence(out, frames.params, frames.origin_len)


def and_combine(det: DetectorOutput | np.ndarray, vad: np.ndarray) -> np.ndarray:
    """Elementwise AND of the spatial detector output and a VAD decision sequence."""
    f = det.f_per_frame if isinstance(det, DetectorOutput) else np.asarray(det).astype(np.int64)
    v = np.asarray(vad).astype(np.int64)
    if f.shape != v.shape:
        raise ValueError("sequences must have equal length")
    return f & v


def ds_beamform(s: StereoWaveform, steer_lag: int) -> Waveform:
    """Delay-and-sum: out(k) = (ch1(k) + ch2(k + steer_lag)) / 2.

    Channel-2 samples read outside the signal are treated as zero; the output
    has the input length.
    """
    n = len(s)
    if abs(steer_lag) >= n:
        raise ValueError("steer_lag magnitude must be smaller than the signal length")
    shifted = np.zeros(n)
    if steer_lag >= 0:
        shifted[: n - steer_lag] = s.ch2.samples[steer_lag:]
    else:
        shifted[-steer_lag:] = s.ch2.samples[: n + steer_lag]
    return Waveform((s.ch1.samples + shifted) / 2.0, s.sample_rate_hz)


def run_pipeline(
    s: StereoWaveform,
    mode: PreprocessMode,
    cfg: DetectorConfig,
    svad: SvadScorer,
    p: FrameParams,
    itd: ItdTrack | None = None,
    steer_lag: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Run one detection pipeline and return (scores, decisions) per frame.

    Wiring per mode:
      none  engine on channel 1 only.
      f     engine on channel-1 frames zeroed where the detector says off-view.
      a     engine on channel 1; decisions ANDed with the detector. Suppressed
            frames carry SCORE_FLOOR so threshold sweeps respect the AND.
      b     engine on the delay-and-sum output (steered at the view center).
      fb    detector from the raw stereo pair; engine on beamformed frames
            zeroed where off-view.
      ab    detector from the raw stereo pair; engine on beamformed frames;
            AND + SCORE_FLOOR as in mode a.

    Scores are the engine's pre-threshold statistic; decisions are scores
    thresholded at the engine's decision_threshold (no hangover). A
    precomputed ITD track may be passed to avoid recomputation.
    """
    det: DetectorOutput | None = None
    if mode.needs_detector:
        if itd is None:
            itd = estimate_itd(s, p, cfg.geometry)
        det = spatial_detect(itd, cfg)

    if mode.needs_beamformer:
        mono = ds_beamform(s, steer_lag)
    else:
        mono = s.ch1
    frames = frame_signal(mono, p)

    if det is not None and len(det) != len(frames):
        raise ValueError("detector output and frame count disagree")

    if mode in (PreprocessMode.F, PreprocessMode.FB):
        scores = np.asarray(svad.score_frames(filter_frames(frames, det)), dtype=np.float64)
    else:
        scores = np.asarray(svad.score_frames(frames), dtype=np.float64)
        if mode in (PreprocessMode.A, PreprocessMode.AB):
            scores = np.where(det.f_per_frame == 1, scores, SCORE_FLOOR)

    decisions = threshold_scores(scores, svad.decision_threshold)
    return scores, decisions
