"""The toolkit's delimited file formats.

All files carry a header row. Floats are rendered with %.12g so identical
runs produce byte-identical files.
"""

from __future__ import annotations

import csv

import numpy as np

from duovad.itd import ItdTrack
from duovad.metrics import ConfusionCounts, RocCurve


def _fmt(x: float) -> str:
    return f"{float(x):.12g}"


def write_labels(path, labels: np.ndarray) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["frame_index", "label"])
        for i, v in enumerate(labels):
            w.writerow([i, int(v)])


def read_labels(path) -> np.ndarray:
    return _read_indexed_column(path, "label").astype(np.int64)


def write_decisions(path, decisions: np.ndarray) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["frame_index", "decision"])
        for i, v in enumerate(decisions):
            w.writerow([i, int(v)])


def read_decisions(path) -> np.ndarray:
    return _read_indexed_column(path, "decision").astype(np.int64)


def write_scores(path, scores: np.ndarray) -> None:
    """Frame-scores exchange format used to plug in external VAD engines."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["frame_index", "score"])
        for i, v in enumerate(scores):
            w.writerow([i, _fmt(v)])


def read_scores(path) -> np.ndarray:
    """Read scores from the exchange format or from a frame-report file;
    any file with a 'score' column qualifies."""
    return _read_indexed_column(path, "score")


def write_frame_report(path, f_flags: np.ndarray, scores: np.ndarray, decisions: np.ndarray) -> None:
    """Combined per-frame output of a pipeline run."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["frame_index", "F", "score", "decision"])
        for i in range(len(scores)):
            w.writerow([i, int(f_flags[i]), _fmt(scores[i]), int(decisions[i])])


def write_itd(path, itd: ItdTrack) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["frame_index", "tau", "peak"])
        for i in range(len(itd)):
            w.writerow([i, int(itd.tau_per_frame[i]), _fmt(itd.confidence_per_frame[i])])


def read_itd(path) -> ItdTrack:
    taus = _read_indexed_column(path, "tau").astype(np.int64)
    peaks = _read_indexed_column(path, "peak")
    return ItdTrack(taus, peaks)


def write_roc(path, curve: RocCurve, auc_value: float) -> None:
    """ROC points as threshold,far,sdr rows followed by a summary line auc,<value>."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["threshold", "far", "sdr"])
        for eta, (far, sdr) in zip(curve.thresholds, curve.points):
            w.writerow([_fmt(eta), _fmt(far), _fmt(sdr)])
        w.writerow(["auc", _fmt(auc_value)])


def write_confusion(path, counts: ConfusionCounts) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["tp", "fp", "tn", "fn", "sdr", "far"])
        w.writerow(
            [
                counts.tp,
                counts.fp,
                counts.tn,
                counts.fn,
                _fmt(counts.sdr) if counts.sdr_defined else "undefined",
                _fmt(counts.far) if counts.far_defined else "undefined",
            ]
        )


def write_rir_taps(path, taps: np.ndarray) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sample_index", "amplitude"])
        for i, v in enumerate(taps):
            w.writerow([i, _fmt(v)])


def write_auc_table(path, rows: list[dict], columns: list[str]) -> None:
    """Wide AUC table: one row per engine/mode, one column per condition."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["engine", "mode", *columns])
        for row in rows:
            w.writerow(
                [row["engine"], row["mode"]]
                + [_fmt(row[c]) if row[c] == row[c] else "undefined" for c in columns]
            )


def _read_indexed_column(path, column: str) -> np.ndarray:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ValueError(f"{path}: missing required column {column!r}")
        values = []
        for row in reader:
            if row.get(column) is None or row[column] == "":
                raise ValueError(f"{path}: empty {column!r} value")
            values.append(float(row[column]))
    return np.asarray(values, dtype=np.float64)
