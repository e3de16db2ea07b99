"""Dual-channel voice activity detection toolkit.

Spatial pre-processing (ITD gating via GCC-PHAT, delay-and-sum beamforming)
in front of pluggable single-channel VAD engines, with an image-source room
simulator and frame-level ROC/AUC evaluation.
"""

from duovad.audio import (
    FrameParams,
    FrameSequence,
    StereoWaveform,
    Waveform,
    frame_signal,
    load_wav,
    save_wav,
    windowed_spectrum,
)
from duovad.engines import (
    EnergyVad,
    ExternalScorer,
    HangoverParams,
    SohnParams,
    SohnVad,
    energy_score,
    hangover,
    threshold_scores,
)
from duovad.frontend import (
    SCORE_FLOOR,
    DetectorConfig,
    DetectorOutput,
    PreprocessMode,
    and_combine,
    ds_beamform,
    filter_frames,
    run_pipeline,
    spatial_detect,
)
from duovad.itd import (
    ArrayGeometry,
    ItdTrack,
    angle_resolution_deg,
    estimate_itd,
    fov_deg,
    gcc_phat,
    max_itd,
)
from duovad.metrics import ConfusionCounts, RocCurve, auc, confusion, roc_sweep
from duovad.room import (
    MixSpec,
    Rir,
    RoomScene,
    active_speech_level,
    build_scene,
    convolve,
    default_scene,
    generate_labels,
    generate_rir,
    measured_t60,
    scale_noise_to_snr,
)

__version__ = "0.1.0"
