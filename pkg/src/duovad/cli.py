"""Command-line entry point: simulate scenes, generate RIRs, run VAD pipelines,
evaluate decisions, sweep ROC curves, and run the full benchmark matrix.

Exit codes: 0 success, 2 usage/precondition error, 1 internal error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from duovad import csvio
from duovad.audio import FrameParams, StereoWaveform, Waveform, load_wav, save_wav
from duovad.bench import DEFAULT_SNRS_DB, NOISE_TYPES, make_engine, run_bench
from duovad.engines import ExternalScorer, HangoverParams, hangover
from duovad.frontend import DetectorConfig, PreprocessMode, run_pipeline, spatial_detect
from duovad.itd import ArrayGeometry, estimate_itd
from duovad.metrics import auc, confusion, pool_frames, roc_sweep
from duovad.plotting import plot_auc_lines, plot_roc
from duovad.room import (
    MixSpec,
    build_scene,
    default_scene,
    load_scene,
    measure_snr,
    measured_t60,
)


class UsageError(Exception):
    """Bad arguments or unmet preconditions; maps to exit code 2."""


MODE_CHOICES = [m.value for m in PreprocessMode]
ENGINE_CHOICES = ["sohn", "energy", "external"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duovad",
        description="Dual-channel VAD toolkit: spatial pre-processing for single-channel VADs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="synthesize a noisy reverberant stereo scene")
    p_sim.add_argument("--target", required=True, help="mono 16-bit WAV of clean target speech")
    p_sim.add_argument(
        "--noise",
        required=True,
        help="noise source: 'white' or 'babble:<dir>' of competing-speaker WAVs",
    )
    p_sim.add_argument("--scene", help="scene YAML (defaults to the built-in office scene)")
    p_sim.add_argument("--snr", type=float, default=0.0, help="target SNR in dB")
    p_sim.add_argument(
        "--snr-ref",
        choices=["p56_active_speech", "rms"],
        default="p56_active_speech",
        help="speech-level measure defining the SNR",
    )
    p_sim.add_argument("--seed", type=int, default=None, help="override the scene seed")
    p_sim.add_argument("--out", required=True, help="output directory")

    p_rir = sub.add_parser("rir", help="export the scene's room impulse responses")
    p_rir.add_argument("--scene", help="scene YAML (defaults to the built-in office scene)")
    p_rir.add_argument("--format", choices=["wav", "csv"], default="wav")
    p_rir.add_argument("--max-order", type=int, default=None)
    p_rir.add_argument("--fractional", action="store_true", help="windowed-sinc image delays")
    p_rir.add_argument("--out", required=True)

    p_vad = sub.add_parser("vad", help="run one detection pipeline on a WAV file")
    p_vad.add_argument("--input", required=True, help="stereo WAV (mono allowed for --mode none)")
    p_vad.add_argument("--mode", choices=MODE_CHOICES, default="none")
    p_vad.add_argument("--engine", choices=ENGINE_CHOICES, default="sohn")
    p_vad.add_argument("--scores", help="frame-scores CSV (required for --engine external)")
    p_vad.add_argument("--eta", type=float, default=None, help="decision threshold override")
    p_vad.add_argument("--frame-ms", type=float, default=25.0)
    p_vad.add_argument("--shift-ms", type=float, default=10.0)
    p_vad.add_argument("--window", choices=["rectangular", "hamming", "hann"], default="hamming")
    p_vad.add_argument("--spacing", type=float, default=0.15, help="mic spacing in meters")
    p_vad.add_argument("--sound-speed", type=float, default=343.0)
    p_vad.add_argument("--thr1", type=int, default=-1)
    p_vad.add_argument("--thr2", type=int, default=1)
    p_vad.add_argument("--hang-frames", type=int, default=8)
    p_vad.add_argument("--onset-frames", type=int, default=1)
    p_vad.add_argument("--out", required=True)

    p_eval = sub.add_parser("eval", help="score a decisions file against reference labels")
    p_eval.add_argument("--decisions", required=True)
    p_eval.add_argument("--labels", required=True)
    p_eval.add_argument("--out", required=True)

    p_roc = sub.add_parser("roc", help="sweep an ROC curve from frame scores and labels")
    p_roc.add_argument("--scores", required=True, nargs="+", help="one or more scores CSVs")
    p_roc.add_argument("--labels", required=True, nargs="+", help="matching labels CSVs")
    p_roc.add_argument("--n-thresholds", type=int, default=None, help="quantile sweep size")
    p_roc.add_argument("--no-plot", action="store_true")
    p_roc.add_argument("--out", required=True)

    p_bench = sub.add_parser("bench", help="run the full noise x SNR x mode x engine matrix")
    p_bench.add_argument("--speech", required=True, help="directory of mono target WAVs")
    p_bench.add_argument("--scene", help="scene YAML (defaults to the built-in office scene)")
    p_bench.add_argument(
        "--babble-dir",
        help="competing-speaker WAVs; omitted: drawn from the other speech utterances",
    )
    p_bench.add_argument("--noise-types", nargs="+", choices=list(NOISE_TYPES), default=list(NOISE_TYPES))
    p_bench.add_argument("--snrs", type=float, nargs="+", default=list(DEFAULT_SNRS_DB))
    p_bench.add_argument("--engines", nargs="+", choices=["sohn", "energy"], default=["sohn", "energy"])
    p_bench.add_argument("--modes", nargs="+", choices=MODE_CHOICES, default=MODE_CHOICES)
    p_bench.add_argument("--thr1", type=int, default=-1)
    p_bench.add_argument("--thr2", type=int, default=1)
    p_bench.add_argument("--frame-ms", type=float, default=25.0)
    p_bench.add_argument("--shift-ms", type=float, default=10.0)
    p_bench.add_argument("--seed", type=int, default=None, help="override the scene seed")
    p_bench.add_argument("--max-utterances", type=int, default=None)
    p_bench.add_argument("--no-plot", action="store_true")
    p_bench.add_argument("--out", required=True)

    return parser


def _load_scene_arg(path: str | None):
    if path is None:
        return default_scene()
    try:
        return load_scene(path)
    except FileNotFoundError as e:
        raise UsageError(f"scene file not found: {path}") from e
    except ValueError as e:
        raise UsageError(str(e)) from e


def _load_mono(path, expected_rate: int | None = None) -> Waveform:
    try:
        w = load_wav(path)
    except FileNotFoundError as e:
        raise UsageError(f"input file not found: {path}") from e
    except ValueError as e:
        raise UsageError(str(e)) from e
    if isinstance(w, StereoWaveform):
        raise UsageError(f"{path}: expected a mono file")
    if expected_rate is not None and w.sample_rate_hz != expected_rate:
        raise UsageError(
            f"{path}: sample rate {w.sample_rate_hz} does not match the scene ({expected_rate})"
        )
    return w


def _wav_files(directory: str) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"not a directory: {directory}")
    return sorted(d.glob("*.wav"))


def _parse_noise_arg(noise: str, scene, n_samples: int) -> list[Waveform]:
    from duovad.room import white_noise_utterances

    if noise == "white":
        rng = np.random.default_rng(scene.seed)
        return white_noise_utterances(scene, n_samples, rng)
    if noise.startswith("babble:"):
        files = _wav_files(noise.split(":", 1)[1])
        if not files:
            raise UsageError("babble directory contains no WAV files")
        return [_load_mono(f, scene.sample_rate_hz) for f in files]
    raise UsageError("noise must be 'white' or 'babble:<dir>'")


def cmd_simulate(args) -> int:
    scene = _load_scene_arg(args.scene)
    if args.seed is not None:
        scene.seed = args.seed
    target = _load_mono(args.target, scene.sample_rate_hz)
    rir_len = int(round(scene.rir_length_s * scene.sample_rate_hz))
    noise_utts = _parse_noise_arg(args.noise, scene, len(target) + rir_len)
    spec = MixSpec(snr_db=args.snr, snr_reference=args.snr_ref)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mix, clean, labels = build_scene(scene, target, noise_utts, spec)
    save_wav(mix, out / "mix.wav")
    save_wav(clean, out / "clean.wav")
    csvio.write_labels(out / "labels.csv", labels)

    recovered_noise = Waveform(mix.ch1.samples - clean.ch1.samples, scene.sample_rate_hz)
    achieved = measure_snr(clean.ch1, recovered_noise, spec)
    print(f"achieved_snr_db {achieved:.2f}")
    print(f"wrote {out / 'mix.wav'}, {out / 'clean.wav'}, {out / 'labels.csv'}")
    return 0


def cmd_rir(args) -> int:
    from duovad.room import scene_rirs

    scene = _load_scene_arg(args.scene)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rirs = scene_rirs(scene, max_order=args.max_order, fractional=args.fractional)
    for (source, mic), rir in rirs.items():
        stem = f"rir_{source}_mic{mic + 1}"
        if args.format == "wav":
            peak = float(np.max(np.abs(rir.taps)))
            scale = 0.9 / peak if peak > 0 else 1.0
            save_wav(Waveform(rir.taps * scale, rir.sample_rate_hz), out / f"{stem}.wav")
        else:
            csvio.write_rir_taps(out / f"{stem}.csv", rir.taps)
    # reverberation is measured between well-separated points; prefer a far pair
    probe = ("noise0", 0) if ("noise0", 0) in rirs else ("target", 0)
    try:
        t60 = measured_t60(rirs[probe])
        print(f"measured_t60_s {t60:.3f}")
    except ValueError:
        print("measured_t60_s undefined (no reverberant tail)")
    print(f"wrote {len(rirs)} RIRs to {out}")
    return 0


def cmd_vad(args) -> int:
    try:
        w = load_wav(args.input)
    except FileNotFoundError as e:
        raise UsageError(f"input file not found: {args.input}") from e
    except ValueError as e:
        raise UsageError(str(e)) from e

    mode = PreprocessMode(args.mode)
    if isinstance(w, Waveform):
        if mode is not PreprocessMode.NONE:
            raise UsageError(f"mode {mode.value} needs a two-channel input; got mono")
        stereo = StereoWaveform(w, Waveform(w.samples.copy(), w.sample_rate_hz))
    else:
        stereo = w

    p = FrameParams.from_ms(stereo.sample_rate_hz, args.frame_ms, args.shift_ms, args.window)
    geometry = ArrayGeometry(args.spacing, stereo.sample_rate_hz, args.sound_speed)
    try:
        cfg = DetectorConfig(thr1=args.thr1, thr2=args.thr2, geometry=geometry)
    except ValueError as e:
        raise UsageError(str(e)) from e

    if args.engine == "external":
        if not args.scores:
            raise UsageError("--engine external requires --scores")
        if mode not in (PreprocessMode.NONE, PreprocessMode.A):
            raise UsageError("external engines support only modes none and a")
        engine = ExternalScorer(csvio.read_scores(args.scores), args.eta or 0.0)
    else:
        engine = make_engine(args.engine, args.eta)

    itd = None
    f_flags = None
    if mode.needs_detector:
        itd = estimate_itd(stereo, p, geometry)
        f_flags = spatial_detect(itd, cfg).f_per_frame
    try:
        scores, raw_decisions = run_pipeline(stereo, mode, cfg, engine, p, itd=itd)
    except ValueError as e:
        raise UsageError(str(e)) from e
    decisions = hangover(raw_decisions, HangoverParams(args.hang_frames, args.onset_frames))
    if f_flags is None:
        f_flags = np.ones(len(scores), dtype=np.int64)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csvio.write_frame_report(out / "vad_report.csv", f_flags, scores, decisions)
    csvio.write_scores(out / "scores.csv", scores)
    csvio.write_decisions(out / "decisions.csv", decisions)
    if itd is not None:
        csvio.write_itd(out / "itd.csv", itd)
    speech_pct = 100.0 * float(np.mean(decisions))
    print(f"frames {len(scores)}  speech_frames_pct {speech_pct:.1f}")
    return 0


def cmd_eval(args) -> int:
    try:
        decisions = csvio.read_decisions(args.decisions)
        labels = csvio.read_labels(args.labels)
    except (FileNotFoundError, ValueError) as e:
        raise UsageError(str(e)) from e
    if decisions.size != labels.size:
        raise UsageError(
            f"frame-count mismatch: {decisions.size} decisions vs {labels.size} labels"
        )
    try:
        counts = confusion(decisions, labels)
    except ValueError as e:
        raise UsageError(str(e)) from e
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csvio.write_confusion(out / "confusion.csv", counts)
    sdr = f"{counts.sdr:.4f}" if counts.sdr_defined else "undefined"
    far = f"{counts.far:.4f}" if counts.far_defined else "undefined"
    print(f"tp {counts.tp}  fp {counts.fp}  tn {counts.tn}  fn {counts.fn}  sdr {sdr}  far {far}")
    return 0


def cmd_roc(args) -> int:
    if len(args.scores) != len(args.labels):
        raise UsageError("need one labels file per scores file")
    pairs = []
    for s_path, l_path in zip(args.scores, args.labels):
        try:
            scores = csvio.read_scores(s_path)
            labels = csvio.read_labels(l_path)
        except (FileNotFoundError, ValueError) as e:
            raise UsageError(str(e)) from e
        if scores.size != labels.size:
            raise UsageError(
                f"frame-count mismatch: {s_path} has {scores.size} frames, "
                f"{l_path} has {labels.size}"
            )
        pairs.append((scores, labels))
    try:
        pooled_scores, pooled_labels = pool_frames(pairs)
        curve = roc_sweep(pooled_scores, pooled_labels, args.n_thresholds)
    except ValueError as e:
        raise UsageError(str(e)) from e
    area = auc(curve)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csvio.write_roc(out / "roc.csv", curve, area)
    if not args.no_plot:
        plot_roc({"pooled": (curve, area)}, out / "roc.png")
    print(f"auc {area:.6f}")
    return 0


def cmd_bench(args) -> int:
    scene = _load_scene_arg(args.scene)
    if args.seed is not None:
        scene.seed = args.seed
    files = _wav_files(args.speech)
    if args.max_utterances is not None:
        files = files[: args.max_utterances]
    if not files:
        raise UsageError("speech directory contains no WAV files")
    speech = [_load_mono(f, scene.sample_rate_hz) for f in files]

    babble_pool = None
    if args.babble_dir:
        babble_files = _wav_files(args.babble_dir)
        if not babble_files:
            raise UsageError("babble directory contains no WAV files")
        babble_pool = [_load_mono(f, scene.sample_rate_hz) for f in babble_files]
    elif "babble" in args.noise_types and len(speech) < 2:
        raise UsageError("competing-speaker noise needs --babble-dir or >= 2 speech utterances")

    p = FrameParams.from_ms(scene.sample_rate_hz, args.frame_ms, args.shift_ms)
    modes = tuple(PreprocessMode(m) for m in args.modes)
    try:
        result = run_bench(
            scene,
            speech,
            thr1=args.thr1,
            thr2=args.thr2,
            snrs_db=tuple(args.snrs),
            noise_types=tuple(args.noise_types),
            engine_names=tuple(args.engines),
            modes=modes,
            frame_params=p,
            babble_pool=babble_pool,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, columns = result.table_rows()
    csvio.write_auc_table(out / "auc_table.csv", rows, columns)

    header = f"{'engine':8s} {'mode':5s} " + " ".join(f"{c:>14s}" for c in columns)
    print(header)
    for row in rows:
        cells = " ".join(f"{row[c]:14.4f}" for c in columns)
        print(f"{row['engine']:8s} {row['mode']:5s} {cells}")

    if not args.no_plot:
        for noise in result.noise_types:
            for engine in result.engines:
                lines = {
                    mode.value: {
                        snr: result.aucs[(engine, mode.value, noise, snr)]
                        for snr in result.snrs_db
                    }
                    for mode in result.modes
                }
                plot_auc_lines(
                    lines,
                    out / f"auc_{noise}_{engine}.png",
                    title=f"{engine} engine, {noise} noise",
                )
    print(f"wrote {out / 'auc_table.csv'}")
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "rir": cmd_rir,
    "vad": cmd_vad,
    "eval": cmd_eval,
    "roc": cmd_roc,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Exception as e:  # pragma: no cover - defensive
        print(f"internal error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
