"""Benchmark driver: the full noise-type x SNR x pipeline-mode x engine matrix."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from duovad.audio import FrameParams, Waveform
from duovad.engines import EnergyVad, SohnParams, SohnVad, SvadScorer
from duovad.frontend import DetectorConfig, PreprocessMode, run_pipeline
from duovad.itd import ArrayGeometry, estimate_itd
from duovad.metrics import auc, pool_frames, roc_sweep
from duovad.room import MixSpec, RoomScene, build_scene, scene_rirs, white_noise_utterances

DEFAULT_SNRS_DB = (-5.0, 0.0, 10.0, 20.0)
NOISE_TYPES = ("white", "babble")
ALL_MODES = tuple(PreprocessMode)


def make_engine(name: str, eta: float | None = None) -> SvadScorer:
    """Instantiate a scoring engine by its CLI name."""
    if name == "sohn":
        params = SohnParams() if eta is None else SohnParams(threshold_eta=eta)
        return SohnVad(params)
    if name == "energy":
        return EnergyVad() if eta is None else EnergyVad(threshold_db=eta)
    raise ValueError(f"unknown engine {name!r} (external engines cannot run in a bench)")


def geometry_from_scene(scene: RoomScene) -> ArrayGeometry:
    m1 = np.asarray(scene.mic_positions_m[0])
    m2 = np.asarray(scene.mic_positions_m[1])
    return ArrayGeometry(
        mic_spacing_m=float(np.linalg.norm(m1 - m2)), sample_rate_hz=scene.sample_rate_hz
    )


@dataclass
class BenchResult:
    """Per-cell frame data and pooled AUCs of a benchmark run.

    cells[(engine, mode, noise, snr)] is a list over utterances of
    (scores, labels) pairs; aucs[(engine, mode, noise, snr)] is the
    micro-averaged AUC over the pooled frames.
    """

    engines: tuple[str, ...]
    modes: tuple[PreprocessMode, ...]
    noise_types: tuple[str, ...]
    snrs_db: tuple[float, ...]
    cells: dict = field(default_factory=dict)
    aucs: dict = field(default_factory=dict)

    def compute_aucs(self) -> None:
        for key, pairs in self.cells.items():
            scores, labels = pool_frames(pairs)
            self.aucs[key] = auc(roc_sweep(scores, labels))

    def table_rows(self) -> tuple[list[dict], list[str]]:
        """Rows (engine, mode, one column per noise/SNR condition) for the AUC table."""
        columns = [f"{n}_{s:g}dB" for n in self.noise_types for s in self.snrs_db]
        rows = []
        for engine in self.engines:
            for mode in self.modes:
                row = {"engine": engine, "mode": mode.value}
                for noise in self.noise_types:
                    for snr in self.snrs_db:
                        row[f"{noise}_{snr:g}dB"] = self.aucs[(engine, mode.value, noise, snr)]
                rows.append(row)
        return rows, columns


def draw_babble(
    speech: list[Waveform],
    target_index: int,
    n_positions: int,
    rng: np.random.Generator,
    pool: list[Waveform] | None = None,
) -> list[Waveform]:
    """Competing-speaker utterances for one target: drawn from the given pool,
    or from the other utterances of the speech list when no pool is supplied."""
    if pool:
        candidates = list(range(len(pool)))
        source = pool
    else:
        candidates = [i for i in range(len(speech)) if i != target_index]
        source = speech
        if not candidates:
            raise ValueError("need at least two utterances to draw competing speakers")
    picks = rng.choice(len(candidates), size=n_positions, replace=len(candidates) < n_positions)
    return [source[candidates[int(k)]] for k in picks]


def run_bench(
    scene: RoomScene,
    speech: list[Waveform],
    *,
    thr1: int = -1,
    thr2: int = 1,
    snrs_db: tuple[float, ...] = DEFAULT_SNRS_DB,
    noise_types: tuple[str, ...] = NOISE_TYPES,
    engine_names: tuple[str, ...] = ("sohn", "energy"),
    modes: tuple[PreprocessMode, ...] = ALL_MODES,
    frame_params: FrameParams | None = None,
    snr_reference: str = "p56_active_speech",
    babble_pool: list[Waveform] | None = None,
    seed: int | None = None,
) -> BenchResult:
    """Evaluate every (noise, SNR, mode, engine) cell on the given utterances.

    Each utterance becomes the target of one simulated scene per condition;
    white-noise beds are seeded per utterance (stable across SNRs), and
    competing-speaker beds draw utterances from babble_pool or, failing that,
    from the rest of the speech list. Scores and labels are kept per utterance
    so pooled ROC/AUC and per-utterance checks are both possible.
    """
    if not speech:
        raise ValueError("speech list is empty")
    for nt in noise_types:
        if nt not in NOISE_TYPES:
            raise ValueError(f"unknown noise type {nt!r}")
    if seed is None:
        seed = scene.seed
    p = frame_params or FrameParams.from_ms(scene.sample_rate_hz)
    geometry = geometry_from_scene(scene)
    cfg = DetectorConfig(thr1=thr1, thr2=thr2, geometry=geometry)
    engines = {name: make_engine(name) for name in engine_names}
    rirs = scene_rirs(scene)
    rir_len = int(round(scene.rir_length_s * scene.sample_rate_hz))

    result = BenchResult(
        engines=tuple(engine_names),
        modes=tuple(modes),
        noise_types=tuple(noise_types),
        snrs_db=tuple(snrs_db),
    )
    for key in (
        (e, m.value, n, s) for e in engine_names for m in modes for n in noise_types for s in snrs_db
    ):
        result.cells[key] = []

    for i, target in enumerate(speech):
        for noise in noise_types:
            if noise == "white":
                rng = np.random.default_rng(np.random.SeedSequence([seed, 1, i]))
                utts = white_noise_utterances(scene, len(target) + rir_len, rng)
            else:
                rng = np.random.default_rng(np.random.SeedSequence([seed, 2, i]))
                utts = draw_babble(speech, i, len(scene.noise_positions_m), rng, babble_pool)
            for snr in snrs_db:
                spec = MixSpec(snr_db=snr, snr_reference=snr_reference)
                mix, _, labels = build_scene(scene, target, utts, spec, p, rirs=rirs)
                itd = estimate_itd(mix, p, geometry)
                for engine_name, engine in engines.items():
                    for mode in modes:
                        scores, _ = run_pipeline(mix, mode, cfg, engine, p, itd=itd)
                        result.cells[(engine_name, mode.value, noise, snr)].append(
                            (scores, labels)
                        )
    result.compute_aucs()
    return result
