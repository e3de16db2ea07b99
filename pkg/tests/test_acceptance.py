"""Acceptance suite: one test per release criterion, each printing a
pass/fail line with the measured values."""

import filecmp
import math
import time

import numpy as np
import pytest

from duovad.audio import StereoWaveform, Waveform, save_wav
from duovad.bench import run_bench
from duovad.cli import main
from duovad.frontend import ds_beamform
from duovad.itd import ArrayGeometry, fov_deg, gcc_phat, max_itd
from duovad.metrics import auc, roc_sweep
from duovad.room import (
    MixSpec,
    RoomScene,
    default_scene,
    generate_rir,
    measure_snr,
    measured_t60,
    scale_noise_to_snr,
)
from oracles import mann_whitney_auc, xcorr_peak_lag
from synth import competing_utterance, synthetic_utterance

N_BENCH_UTTERANCES = 20


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    print(f"[criterion {num}] {'PASS' if ok else 'FAIL'}: {name} {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


@pytest.fixture(scope="session")
def bench_result():
    """Desk-scale bench: 20 utterances, competing-speaker noise, -5 and 0 dB."""
    scene = default_scene()
    speech = [synthetic_utterance(np.random.default_rng(i)) for i in range(N_BENCH_UTTERANCES)]
    babble = [competing_utterance(np.random.default_rng(10_000 + i)) for i in range(24)]
    start = time.perf_counter()
    result = run_bench(
        scene,
        speech,
        snrs_db=(-5.0, 0.0),
        noise_types=("babble",),
        engine_names=("sohn", "energy"),
        babble_pool=babble,
        seed=0,
    )
    result.elapsed_s = time.perf_counter() - start
    return result


def test_criterion_1_geometry_exactness():
    start = time.perf_counter()
    g = ArrayGeometry(mic_spacing_m=0.15, sample_rate_hz=8000, speed_of_sound_mps=343.0)
    lag_count = max_itd(g)
    view = fov_deg(g, -1, 1)
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    ok = (
        lag_count == 7
        and view == pytest.approx(3 * 180.0 / 7)
        and (1 - (-1) + 1) == 3
        and elapsed_ms < 1.0
    )
    _report(1, "array geometry", ok, f"lag_count={lag_count} fov={view:.2f} ({elapsed_ms:.3f} ms)")


def test_criterion_2_itd_oracle():
    rng = np.random.default_rng(42)
    start = time.perf_counter()
    n = 512
    exact = 0
    oracle_agree = 0
    trials = 200
    for _ in range(trials):
        delay = int(rng.integers(-3, 4))
        master = rng.standard_normal(n + 8)
        ch1 = master[4 : 4 + n].copy()
        ch2 = master[4 - delay : 4 - delay + n].copy()
        noise_scale = 10.0 ** (-20.0 / 20.0)  # 20 dB SNR
        ch1 += noise_scale * rng.standard_normal(n)
        ch2 += noise_scale * rng.standard_normal(n)
        lag, _ = gcc_phat(ch1, ch2, 3)
        exact += lag == delay
        oracle_agree += lag == xcorr_peak_lag(ch1, ch2, 3)
    elapsed = time.perf_counter() - start
    ok = exact / trials >= 0.95 and oracle_agree / trials >= 0.95 and elapsed < 10.0
    _report(
        2,
        "GCC-PHAT delay recovery",
        ok,
        f"exact={exact}/{trials} oracle_agreement={oracle_agree}/{trials} ({elapsed:.1f} s)",
    )


def test_criterion_3_ism_physics():
    start = time.perf_counter()
    scene = default_scene()
    anechoic = RoomScene(
        room_dims_m=scene.room_dims_m,
        mic_positions_m=scene.mic_positions_m,
        target_position_m=scene.target_position_m,
        sample_rate_hz=8000,
        rir_length_s=0.05,
        reflection_coeff=0.0,
    )
    rir = generate_rir(anechoic, anechoic.target_position_m, anechoic.mic_positions_m[0])
    r = float(
        np.linalg.norm(np.array(anechoic.target_position_m) - np.array(anechoic.mic_positions_m[0]))
    )
    nonzero = np.flatnonzero(rir.taps)
    single_tap = (
        nonzero.size == 1
        and nonzero[0] == int(round(r / 343.0 * 8000))
        and abs(rir.taps[nonzero[0]] - 1.0 / (4 * math.pi * r)) < 1e-9
    )
    # decay measured between well-separated points (outside the direct field)
    reverb = generate_rir(scene, scene.noise_positions_m[0], scene.mic_positions_m[0])
    t60 = measured_t60(reverb)
    elapsed = time.perf_counter() - start
    ok = single_tap and abs(t60 - 0.2) / 0.2 < 0.30 and elapsed < 30.0
    _report(3, "image-source physics", ok, f"single_tap={single_tap} t60={t60:.3f} ({elapsed:.1f} s)")


def test_criterion_4_snr_closed_loop():
    start = time.perf_counter()
    speech = synthetic_utterance(np.random.default_rng(1))
    noise = Waveform(0.05 * np.random.default_rng(2).standard_normal(len(speech)), 8000)
    errors = []
    for snr in (-5.0, 0.0, 10.0, 20.0):
        spec = MixSpec(snr_db=snr)
        scaled, _ = scale_noise_to_snr(speech, noise, spec)
        errors.append(abs(measure_snr(speech, scaled, spec) - snr))
    elapsed = time.perf_counter() - start
    ok = max(errors) < 0.01 and elapsed < 5.0
    _report(4, "SNR closed loop", ok, f"max_error={max(errors):.2e} dB ({elapsed:.1f} s)")


def test_criterion_5_auc_rank_statistic():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        scores = rng.standard_normal(1000)
        labels = (rng.random(1000) < rng.uniform(0.3, 0.7)).astype(int)
        got = auc(roc_sweep(scores, labels))
        worst = max(worst, abs(got - mann_whitney_auc(scores, labels)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 5.0
    _report(5, "trapezoid AUC vs rank statistic", ok, f"max_diff={worst:.2e} ({elapsed:.1f} s)")


def test_criterion_6_beamformer_array_gain():
    rng = np.random.default_rng(4)
    n = 10 * 8000
    target = 0.1 * rng.standard_normal(n)
    n1 = 0.1 * rng.standard_normal(n)
    n2 = 0.1 * rng.standard_normal(n)
    mixed = StereoWaveform(Waveform(target + n1, 8000), Waveform(target + n2, 8000))
    out = ds_beamform(mixed, 0)
    # component-wise bookkeeping: the beamformer is linear
    target_out = ds_beamform(StereoWaveform(Waveform(target, 8000), Waveform(target, 8000)), 0)
    noise_out = Waveform(out.samples - target_out.samples, 8000)
    snr_in = 10 * np.log10(np.mean(target**2) / np.mean(n1**2))
    snr_out = 10 * np.log10(np.mean(target_out.samples**2) / np.mean(noise_out.samples**2))
    gain = snr_out - snr_in
    ok = abs(gain - 3.0) <= 0.5
    _report(6, "delay-and-sum array gain", ok, f"gain={gain:.2f} dB")


def test_criterion_7_trend_reproduction(bench_result):
    details = []
    ok = True
    for engine in ("sohn", "energy"):
        for snr in (-5.0, 0.0):
            a = bench_result.aucs[(engine, "a", "babble", snr)]
            f = bench_result.aucs[(engine, "f", "babble", snr)]
            none = bench_result.aucs[(engine, "none", "babble", snr)]
            best_mode = "a" if a >= f else "f"
            best = max(a, f)
            combined = bench_result.aucs[(engine, best_mode + "b", "babble", snr)]
            margin_ok = best - none >= 0.05
            combo_ok = combined >= best - 0.01
            ok = ok and margin_ok and combo_ok
            details.append(
                f"{engine}@{snr:g}dB none={none:.3f} best({best_mode})={best:.3f} "
                f"comb={combined:.3f}"
            )
    runtime_ok = bench_result.elapsed_s < 600.0
    ok = ok and runtime_ok
    _report(
        7,
        "spatial pre-processing trend",
        ok,
        "; ".join(details) + f" ({bench_result.elapsed_s:.0f} s, {N_BENCH_UTTERANCES} utterances)",
    )


def test_criterion_8_and_mode_monotone_safety(bench_result):
    violations = 0
    cells = 0
    for snr in (-5.0, 0.0):
        for engine in ("sohn", "energy"):
            per_utt_a = bench_result.cells[(engine, "a", "babble", snr)]
            per_utt_none = bench_result.cells[(engine, "none", "babble", snr)]
            for (scores_a, labels), (scores_none, _) in zip(per_utt_a, per_utt_none):
                nonspeech = np.asarray(labels) == 0
                etas = np.unique(scores_none)
                far_a = (scores_a[None, :] > etas[:, None])[:, nonspeech].sum(axis=1)
                far_none = (scores_none[None, :] > etas[:, None])[:, nonspeech].sum(axis=1)
                violations += int(np.sum(far_a > far_none))
                cells += 1
    ok = violations == 0
    _report(
        8,
        "AND mode can only lower FAR",
        ok,
        f"{violations} violations over {cells} utterance-cells, exhaustive thresholds",
    )


def test_criterion_9_bench_determinism(tmp_path):
    speech_dir = tmp_path / "speech"
    speech_dir.mkdir()
    for i in range(3):
        save_wav(synthetic_utterance(np.random.default_rng(i), duration_s=1.2),
                 speech_dir / f"utt{i}.wav")
    args_common = [
        "bench", "--speech", str(speech_dir), "--noise-types", "white", "babble",
        "--snrs", "0", "--engines", "sohn", "energy", "--seed", "11", "--no-plot",
    ]
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    rc1 = main(args_common + ["--out", str(out1)])
    rc2 = main(args_common + ["--out", str(out2)])
    identical = filecmp.cmp(out1 / "auc_table.csv", out2 / "auc_table.csv", shallow=False)
    ok = rc1 == 0 and rc2 == 0 and identical
    _report(9, "repeated bench is byte-identical", ok, f"auc_table.csv identical={identical}")
