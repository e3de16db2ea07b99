"""Image-source room simulation and scene synthesis.

Generates dual-channel reverberant mixtures: target speech plus competing
sources placed in a shoebox room, mixed at a controlled SNR defined as active
speech level (P.56-style) over noise RMS, with oracle frame labels derived
from the dry target signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml
from scipy.signal import fftconvolve, lfilter

from duovad.audio import FrameParams, StereoWaveform, Waveform, frame_signal
from duovad.engines import ENERGY_EPS

SPEED_OF_SOUND_MPS = 343.0

# Relative amplitude below the direct path at which image contributions are
# dropped when no explicit reflection order is requested (60 dB down).
IMAGE_AMPLITUDE_CUTOFF = 1e-3

ASL_MARGIN_DB = 15.9
ASL_TIME_CONSTANT_S = 0.03
LABEL_THRESHOLD_DB = 40.0

Vec3 = tuple[float, float, float]


def _surface_area(dims: Vec3) -> float:
    length, width, height = dims
    return 2.0 * (length * width + length * height + width * height)


def eyring_reflection(room_dims_m: Vec3, t60_s: float) -> float:
    """Uniform amplitude reflection coefficient for the requested decay time by
    the Eyring diffuse-field relation (equal absorption on all six surfaces)."""
    if t60_s <= 0:
        raise ValueError("t60_s must be positive")
    volume = float(np.prod(room_dims_m))
    return math.exp(-0.161 * volume / (2.0 * _surface_area(room_dims_m) * t60_s))


def eyring_t60(room_dims_m: Vec3, reflection_coeff: float) -> float:
    """Eyring diffuse-field decay time for a uniform amplitude reflection coefficient."""
    if not (0.0 <= reflection_coeff < 1.0):
        raise ValueError("reflection_coeff must be in [0, 1)")
    if reflection_coeff == 0.0:
        return 0.0
    volume = float(np.prod(room_dims_m))
    return 0.161 * volume / (-2.0 * _surface_area(room_dims_m) * math.log(reflection_coeff))


def _measurement_pair(room_dims_m: Vec3) -> tuple[np.ndarray, np.ndarray]:
    """A fixed, well-separated, asymmetric source/receiver pair inside the room,
    used to characterize the room's decay independently of the scene layout."""
    dims = np.asarray(room_dims_m, dtype=np.float64)
    return dims * np.array([0.313, 0.427, 0.398]), dims * np.array([0.683, 0.611, 0.571])


def room_decay_time(
    room_dims_m: Vec3, reflection_coeff: float, sample_rate_hz: int = 8000
) -> float:
    """Schroeder-measured decay time of the simulated room at the given
    reflection coefficient, evaluated on the fixed measurement pair."""
    if not (0.0 <= reflection_coeff < 1.0):
        raise ValueError("reflection_coeff must be in [0, 1)")
    if reflection_coeff == 0.0:
        return 0.0
    src, mic = _measurement_pair(room_dims_m)
    guess = eyring_t60(room_dims_m, reflection_coeff)
    length_s = max(0.3, 3.0 * guess)
    rir = _ism_rir(room_dims_m, reflection_coeff, src, mic, sample_rate_hz, length_s)
    return measured_t60(rir)


def calibrated_reflection(
    room_dims_m: Vec3, t60_s: float, sample_rate_hz: int = 8000
) -> float:
    """Reflection coefficient whose *simulated* room decays in t60_s.

    The deterministic image method decays more slowly than the diffuse-field
    formulas predict (axial image chains dominate the late tail), so the
    Eyring value serves only as a starting point: the coefficient is bisected
    until the Schroeder measurement of a synthesized in-room response matches
    the requested time.
    """
    if t60_s <= 0:
        raise ValueError("t60_s must be positive")
    seed = eyring_reflection(room_dims_m, t60_s)
    lo, hi = 0.05, max(0.98, seed)

    def measure(beta: float) -> float:
        try:
            return room_decay_time(room_dims_m, beta, sample_rate_hz)
        except ValueError:
            # decay range unreachable: sparse near-anechoic tail below the
            # seed, too-slow decay above it
            return 0.0 if beta < seed else math.inf

    for _ in range(30):
        mid = 0.5 * (lo + hi)
        if measure(mid) < t60_s:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class RoomScene:
    """Shoebox room with a two-mic array, one target source, and noise positions.

    Exactly one of reflection_coeff and t60_s must be given; the other is
    derived through the Eyring relation.
    """

    room_dims_m: Vec3
    mic_positions_m: tuple[Vec3, Vec3]
    target_position_m: Vec3
    noise_positions_m: list[Vec3] = field(default_factory=list)
    sample_rate_hz: int = 8000
    rir_length_s: float = 0.25
    reflection_coeff: float | None = None
    t60_s: float | None = None
    seed: int = 0

    def __post_init__(self):
        if (self.reflection_coeff is None) == (self.t60_s is None):
            raise ValueError("give exactly one of reflection_coeff and t60_s")
        if self.reflection_coeff is not None and not (0.0 <= self.reflection_coeff < 1.0):
            raise ValueError("reflection_coeff must be in [0, 1)")
        if self.t60_s is not None and self.t60_s <= 0:
            raise ValueError("t60_s must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        if self.rir_length_s <= 0:
            raise ValueError("rir_length_s must be positive")
        for pos in [*self.mic_positions_m, self.target_position_m, *self.noise_positions_m]:
            if not all(0.0 < pos[i] < self.room_dims_m[i] for i in range(3)):
                raise ValueError(f"position {pos} is not strictly inside the room")
        if tuple(self.mic_positions_m[0]) == tuple(self.mic_positions_m[1]):
            raise ValueError("microphone positions must be distinct")
        self._beta_cache: float | None = None
        self._t60_cache: float | None = None

    @property
    def beta(self) -> float:
        """Amplitude reflection coefficient; calibrated from t60_s when that is
        the given quantity (see calibrated_reflection)."""
        if self.reflection_coeff is not None:
            return self.reflection_coeff
        if self._beta_cache is None:
            self._beta_cache = calibrated_reflection(
                self.room_dims_m, self.t60_s, self.sample_rate_hz
            )
        return self._beta_cache

    @property
    def t60(self) -> float:
        """Decay time; Schroeder-measured from the simulated room when
        reflection_coeff is the given quantity."""
        if self.t60_s is not None:
            return self.t60_s
        if self._t60_cache is None:
            self._t60_cache = room_decay_time(
                self.room_dims_m, self.reflection_coeff, self.sample_rate_hz
            )
        return self._t60_cache


@dataclass
class Rir:
    """Room impulse response taps at a given sample rate."""

    taps: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        self.taps = np.asarray(self.taps, dtype=np.float64)
        if not np.all(np.isfinite(self.taps)):
            raise ValueError("RIR taps must be finite")


@dataclass
class MixSpec:
    """Target SNR and which speech-level measure defines it."""

    snr_db: float
    snr_reference: str = "p56_active_speech"

    def __post_init__(self):
        if not np.isfinite(self.snr_db):
            raise ValueError("snr_db must be finite")
        if self.snr_reference not in ("p56_active_speech", "rms"):
            raise ValueError("snr_reference must be 'p56_active_speech' or 'rms'")


def default_max_order(beta: float) -> int:
    """Reflection count at which image amplitudes fall 60 dB below the direct path."""
    if beta <= 0.0:
        return 0
    return max(0, math.ceil(math.log(IMAGE_AMPLITUDE_CUTOFF) / math.log(beta)))


def _ism_rir(
    room_dims_m: Vec3,
    beta: float,
    source,
    mic,
    sample_rate_hz: int,
    rir_length_s: float,
    max_order: int | None = None,
    fractional: bool = False,
) -> Rir:
    """Image-source RIR between two points of a shoebox room with uniform
    amplitude reflection coefficient beta."""
    dims = np.asarray(room_dims_m, dtype=np.float64)
    src = np.asarray(source, dtype=np.float64)
    mic_pos = np.asarray(mic, dtype=np.float64)
    if np.linalg.norm(src - mic_pos) < 1e-9:
        raise ValueError("source coincides with the microphone")
    if max_order is None:
        max_order = default_max_order(beta)
    fs = sample_rate_hz

    npts = int(round(rir_length_s * fs))
    h = np.zeros(npts)
    reach_m = SPEED_OF_SOUND_MPS * rir_length_s + float(np.linalg.norm(dims))
    order_bound = (max_order + 1) // 2  # per-axis |n| implied by the total order

    n_ranges = []
    for axis in range(3):
        bound = min(order_bound, math.ceil(reach_m / (2.0 * dims[axis])) + 1)
        n_ranges.append(np.arange(-bound, bound + 1))
    nx, ny, nz = np.meshgrid(*n_ranges, indexing="ij")
    n_grid = np.stack([nx.ravel(), ny.ravel(), nz.ravel()], axis=1)

    for p_bits in range(8):
        p = np.array([(p_bits >> 2) & 1, (p_bits >> 1) & 1, p_bits & 1])
        reflections = np.sum(np.abs(n_grid - p) + np.abs(n_grid), axis=1)
        keep = reflections <= max_order
        if not np.any(keep):
            continue
        n_kept = n_grid[keep]
        images = (1 - 2 * p) * src + 2.0 * n_kept * dims
        dist = np.linalg.norm(images - mic_pos, axis=1)
        amp = beta ** reflections[keep] / (4.0 * math.pi * dist)
        delay = dist / SPEED_OF_SOUND_MPS * fs
        if fractional:
            _add_fractional_taps(h, delay, amp, fs)
        else:
            idx = np.round(delay).astype(np.int64)
            ok = (idx >= 0) & (idx < npts)
            np.add.at(h, idx[ok], amp[ok])
    return Rir(h, fs)


def generate_rir(
    scene: RoomScene,
    source: Vec3,
    mic: Vec3,
    max_order: int | None = None,
    fractional: bool = False,
) -> Rir:
    """Classical image-source RIR from one scene source to one microphone.

    Mirror sources over all six walls up to max_order total reflections, each
    contributing amplitude beta**reflections / (4*pi*r) at delay r/c. By
    default image delays are rounded to the nearest sample; with
    fractional=True each image is spread with a windowed-sinc fractional-delay
    kernel instead. When max_order is not given it is chosen so that dropped
    images lie 60 dB below the direct path.
    """
    return _ism_rir(
        scene.room_dims_m,
        scene.beta,
        source,
        mic,
        scene.sample_rate_hz,
        scene.rir_length_s,
        max_order,
        fractional,
    )


def _add_fractional_taps(h: np.ndarray, delay: np.ndarray, amp: np.ndarray, fs: int) -> None:
    """Spread each image over a Hann-windowed sinc kernel centered at its
    fractional delay (kernel width 40 samples, cutoff 0.9 * Nyquist)."""
    width = 40
    cutoff = 0.9 * fs / 2.0
    npts = h.size
    base = np.ceil(delay - width / 2.0).astype(np.int64)
    for j in range(width + 1):
        n = base + j
        t = (n - delay) / fs
        kernel = 0.5 * (1.0 + np.cos(2.0 * math.pi * t * fs / width)) * np.sinc(2.0 * cutoff * t)
        ok = (n >= 0) & (n < npts) & (np.abs(n - delay) <= width / 2.0)
        np.add.at(h, n[ok], (amp * kernel)[ok])


def measured_t60(rir: Rir) -> float:
    """Decay time from Schroeder backward integration.

    A line is fit to the energy decay curve between -5 and -25 dB and
    extrapolated to 60 dB of decay.
    """
    energy = rir.taps**2
    total = float(np.sum(energy))
    if total <= 0.0:
        raise ValueError("RIR has no energy")
    edc = np.cumsum(energy[::-1])[::-1]
    with np.errstate(divide="ignore"):
        edc_db = 10.0 * np.log10(edc / total)
    t = np.arange(rir.taps.size) / rir.sample_rate_hz
    region = (edc_db <= -5.0) & (edc_db >= -25.0)
    if np.count_nonzero(region) < 2:
        raise ValueError("decay range -5..-25 dB not reached within the RIR length")
    slope, _ = np.polyfit(t[region], edc_db[region], 1)
    if slope >= 0:
        raise ValueError("energy decay curve is not decaying")
    return float(-60.0 / slope)


def convolve(w: Waveform, rir: Rir) -> Waveform:
    """Full linear convolution of a signal with an RIR (length n + m - 1)."""
    if w.sample_rate_hz != rir.sample_rate_hz:
        raise ValueError("sample rates of signal and RIR do not match")
    return Waveform(fftconvolve(w.samples, rir.taps), w.sample_rate_hz)


def active_speech_level(w: Waveform, margin_db: float = ASL_MARGIN_DB) -> float:
    """Active speech level in dB (10*log10 of mean-square over active samples).

    P.56 Method-B style: the envelope is the rectified signal passed through
    two cascaded exponential averagers (30 ms time constant); for a ladder of
    candidate thresholds the level over samples whose envelope exceeds the
    threshold is computed, and the level is read where it sits margin_db above
    the threshold, interpolating between ladder rungs.
    """
    x = w.samples
    if not np.any(x):
        raise ValueError("signal has no activity at any threshold")
    g = math.exp(-1.0 / (w.sample_rate_hz * ASL_TIME_CONSTANT_S))
    p = lfilter([1.0 - g], [1.0, -g], np.abs(x))
    q = lfilter([1.0 - g], [1.0, -g], p)
    sq = float(np.sum(x**2))
    qmax = float(np.max(q))
    if qmax <= 0.0:
        raise ValueError("signal has no activity at any threshold")

    prev_level = None
    prev_margin = None
    for j in range(1, 41):
        c = qmax * 2.0**-j
        active = int(np.count_nonzero(q >= c))
        level_db = 10.0 * math.log10(sq / active)
        margin = level_db - 20.0 * math.log10(c)
        if margin >= margin_db:
            if prev_margin is None:
                return level_db
            weight = (margin_db - prev_margin) / (margin - prev_margin)
            return prev_level + weight * (level_db - prev_level)
        prev_level, prev_margin = level_db, margin
    raise ValueError("signal has no activity at any threshold")


def _rms_db(x: np.ndarray) -> float:
    return 10.0 * math.log10(float(np.mean(x**2)))


def speech_level_db(w: Waveform, spec: MixSpec) -> float:
    """The speech-level measure selected by the mix spec, in dB."""
    if spec.snr_reference == "p56_active_speech":
        return active_speech_level(w)
    return _rms_db(w.samples)


def scale_noise_to_snr(
    speech: Waveform, noise: Waveform, spec: MixSpec
) -> tuple[Waveform, float]:
    """Gain the noise so that speech level minus scaled-noise RMS equals snr_db.

    Returns the scaled noise and the linear gain that was applied.
    """
    if speech.sample_rate_hz != noise.sample_rate_hz:
        raise ValueError("speech and noise sample rates do not match")
    if not np.any(noise.samples):
        raise ValueError("noise has zero energy")
    ref_db = speech_level_db(speech, spec)
    noise_db = _rms_db(noise.samples)
    gain = 10.0 ** ((ref_db - noise_db - spec.snr_db) / 20.0)
    return Waveform(noise.samples * gain, noise.sample_rate_hz), gain


def measure_snr(speech: Waveform, noise: Waveform, spec: MixSpec) -> float:
    """SNR as defined by the mix spec: speech level minus noise RMS level, in dB."""
    return speech_level_db(speech, spec) - _rms_db(noise.samples)


def loop_to_length(w: Waveform, n: int, crossfade_ms: float = 10.0) -> Waveform:
    """Repeat a signal out to n samples with linear crossfades at the seams,
    or truncate if it is already long enough."""
    x = w.samples
    if x.size >= n:
        return Waveform(x[:n].copy(), w.sample_rate_hz)
    cf = int(round(w.sample_rate_hz * crossfade_ms / 1000.0))
    if cf >= x.size:
        cf = 0
    out = x.copy()
    fade_in = np.linspace(0.0, 1.0, cf) if cf else np.empty(0)
    fade_out = 1.0 - fade_in
    while out.size < n:
        if cf:
            seam = out[-cf:] * fade_out + x[:cf] * fade_in
            out = np.concatenate([out[:-cf], seam, x[cf:]])
        else:
            out = np.concatenate([out, x])
    return Waveform(out[:n], w.sample_rate_hz)


def generate_labels(dry_speech: Waveform, p: FrameParams) -> np.ndarray:
    """Oracle frame labels from the dry (pre-reverberation) target signal.

    Frame t is speech iff its energy exceeds the signal's active speech level
    minus 40 dB. Frames are cut with the same contract the pipelines use, so
    label indices align frame-for-frame.
    """
    frames = frame_signal(dry_speech, p)
    energies = 10.0 * np.log10(np.mean(frames.frames**2, axis=1) + ENERGY_EPS)
    if not np.any(dry_speech.samples):
        return np.zeros(len(frames), dtype=np.int64)
    threshold = active_speech_level(dry_speech) - LABEL_THRESHOLD_DB
    return (energies > threshold).astype(np.int64)


def scene_rirs(
    scene: RoomScene, max_order: int | None = None, fractional: bool = False
) -> dict[tuple[str, int], Rir]:
    """All RIRs of a scene keyed by (source, mic index): ('target', 0), ('noise3', 1), ..."""
    rirs: dict[tuple[str, int], Rir] = {}
    for m, mic in enumerate(scene.mic_positions_m):
        rirs[("target", m)] = generate_rir(scene, scene.target_position_m, mic, max_order, fractional)
        for j, pos in enumerate(scene.noise_positions_m):
            rirs[(f"noise{j}", m)] = generate_rir(scene, pos, mic, max_order, fractional)
    return rirs


def build_scene(
    scene: RoomScene,
    target_speech: Waveform,
    noise_utterances: list[Waveform],
    spec: MixSpec,
    frame_params: FrameParams | None = None,
    rirs: dict[tuple[str, int], Rir] | None = None,
) -> tuple[StereoWaveform, StereoWaveform, np.ndarray]:
    """Synthesize one noisy reverberant scene.

    The target is convolved with its two RIRs to form the clean-at-mics pair.
    Each noise position receives one utterance (cycling through the list),
    looped out to the mix length, convolved with that position's RIRs, and
    summed into a stereo noise bed. The bed is gained so that channel 1 meets
    the requested SNR against the clean channel 1, then added to the clean
    pair. Labels come from the dry target, zero-padded to the mix length so
    frame counts line up with the mixture.

    Returns (stereo_mix, clean_at_mics, labels).
    """
    if not noise_utterances:
        raise ValueError("at least one noise utterance is required")
    if not scene.noise_positions_m:
        raise ValueError("scene has no noise positions")
    fs = scene.sample_rate_hz
    for w in (target_speech, *noise_utterances):
        if w.sample_rate_hz != fs:
            raise ValueError("all utterances must match the scene sample rate")
    if rirs is None:
        rirs = scene_rirs(scene)

    clean1 = convolve(target_speech, rirs[("target", 0)])
    clean2 = convolve(target_speech, rirs[("target", 1)])
    mix_len = len(clean1)

    bed1 = np.zeros(mix_len)
    bed2 = np.zeros(mix_len)
    for j in range(len(scene.noise_positions_m)):
        utt = noise_utterances[j % len(noise_utterances)]
        dry = loop_to_length(utt, mix_len)
        bed1 += convolve(dry, rirs[(f"noise{j}", 0)]).samples[:mix_len]
        bed2 += convolve(dry, rirs[(f"noise{j}", 1)]).samples[:mix_len]

    scaled1, gain = scale_noise_to_snr(clean1, Waveform(bed1, fs), spec)
    mix = StereoWaveform(
        Waveform(clean1.samples + scaled1.samples, fs),
        Waveform(clean2.samples + gain * bed2, fs),
    )
    clean = StereoWaveform(clean1, clean2)

    padded = np.zeros(mix_len)
    padded[: len(target_speech)] = target_speech.samples
    labels = generate_labels(Waveform(padded, fs), frame_params or FrameParams.from_ms(fs))
    return mix, clean, labels


def white_noise_utterances(
    scene: RoomScene, n_samples: int, rng: np.random.Generator | None = None
) -> list[Waveform]:
    """One seeded Gaussian white-noise utterance per noise position."""
    if rng is None:
        rng = np.random.default_rng(scene.seed)
    return [
        Waveform(0.05 * rng.standard_normal(n_samples), scene.sample_rate_hz)
        for _ in scene.noise_positions_m
    ]


def circle_positions(
    center_xy: tuple[float, float], radius_m: float, height_m: float, angles_deg: list[float]
) -> list[Vec3]:
    """Positions on a horizontal circle; 0 degrees points along -y (the default
    scene's target bearing), angles increase toward +x."""
    out = []
    for a in angles_deg:
        rad = math.radians(a)
        out.append(
            (
                center_xy[0] + radius_m * math.sin(rad),
                center_xy[1] - radius_m * math.cos(rad),
                height_m,
            )
        )
    return out


def default_scene(seed: int = 0) -> RoomScene:
    """The built-in office scene: 9.5 x 6.5 x 5 m room at T60 = 0.2 s, a 15 cm
    broadside array, the target 0.39 m in front of the array center, and six
    noise positions on a 3 m circle at off-view bearings."""
    return RoomScene(
        room_dims_m=(9.5, 6.5, 5.0),
        mic_positions_m=((4.825, 3.25, 1.7), (4.675, 3.25, 1.7)),
        target_position_m=(4.75, 2.857, 1.7),
        noise_positions_m=circle_positions(
            (4.75, 3.25), 3.0, 1.7, [30.0, 90.0, 150.0, 210.0, 270.0, 330.0]
        ),
        sample_rate_hz=8000,
        rir_length_s=0.25,
        t60_s=0.2,
        seed=seed,
    )


def save_scene(scene: RoomScene, path) -> None:
    """Write a scene as a YAML key-value file (see load_scene for the schema)."""
    doc = {
        "room_dims_m": list(scene.room_dims_m),
        "mic_positions_m": [list(p) for p in scene.mic_positions_m],
        "target_position_m": list(scene.target_position_m),
        "noise_positions_m": [list(p) for p in scene.noise_positions_m],
        "sample_rate_hz": scene.sample_rate_hz,
        "rir_length_s": scene.rir_length_s,
        "seed": scene.seed,
    }
    if scene.t60_s is not None:
        doc["t60_s"] = scene.t60_s
    else:
        doc["reflection_coeff"] = scene.reflection_coeff
    with open(path, "w") as f:
        yaml.safe_dump(doc, f, sort_keys=False)


def load_scene(path) -> RoomScene:
    """Read a scene from a YAML file whose keys mirror the RoomScene fields."""
    with open(path) as f:
        doc = yaml.safe_load(f)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: scene file must be a mapping of scene fields")
    known = {
        "room_dims_m",
        "mic_positions_m",
        "target_position_m",
        "noise_positions_m",
        "sample_rate_hz",
        "rir_length_s",
        "reflection_coeff",
        "t60_s",
        "seed",
    }
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"{path}: unknown scene keys {sorted(unknown)}")
    try:
        return RoomScene(
            room_dims_m=tuple(doc["room_dims_m"]),
            mic_positions_m=tuple(tuple(p) for p in doc["mic_positions_m"]),
            target_position_m=tuple(doc["target_position_m"]),
            noise_positions_m=[tuple(p) for p in doc.get("noise_positions_m", [])],
            sample_rate_hz=int(doc.get("sample_rate_hz", 8000)),
            rir_length_s=float(doc.get("rir_length_s", 0.25)),
            reflection_coeff=doc.get("reflection_coeff"),
            t60_s=doc.get("t60_s"),
            seed=int(doc.get("seed", 0)),
        )
    except KeyError as e:
        raise ValueError(f"{path}: missing scene key {e}") from e
