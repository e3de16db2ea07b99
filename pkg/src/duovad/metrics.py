"""Frame-level detector scoring: confusion counts, ROC sweep, trapezoid AUC."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class ConfusionCounts:
    """2x2 frame counts. SDR = tp/(tp+fn), FAR = fp/(fp+tn); a rate whose
    denominator is zero is undefined and reported as NaN."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def sdr(self) -> float:
        total = self.tp + self.fn
        return self.tp / total if total else math.nan

    @property
    def far(self) -> float:
        total = self.fp + self.tn
        return self.fp / total if total else math.nan

    @property
    def sdr_defined(self) -> bool:
        return (self.tp + self.fn) > 0

    @property
    def far_defined(self) -> bool:
        return (self.fp + self.tn) > 0


@dataclass
class RocCurve:
    """Operating points (far, sdr) sorted by far ascending, with the score
    threshold that produced each point (+inf/-inf at the augmented endpoints)."""

    points: np.ndarray
    thresholds: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.thresholds = np.asarray(self.thresholds, dtype=np.float64)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError("points must be an (n, 2) array of (far, sdr)")
        if self.thresholds.shape != (self.points.shape[0],):
            raise ValueError("one threshold per point required")

    @property
    def far(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def sdr(self) -> np.ndarray:
        return self.points[:, 1]


def confusion(decisions: np.ndarray, labels: np.ndarray) -> ConfusionCounts:
    """Standard 2x2 counts of frame decisions against reference labels."""
    d = np.asarray(decisions).astype(bool)
    l = np.asarray(labels).astype(bool)
    if d.shape != l.shape or d.ndim != 1:
        raise ValueError("decisions and labels must be 1-d and of equal length")
    if d.size == 0:
        raise ValueError("empty input")
    tp = int(np.count_nonzero(d & l))
    fp = int(np.count_nonzero(d & ~l))
    tn = int(np.count_nonzero(~d & ~l))
    fn = int(np.count_nonzero(~d & l))
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn)


def roc_sweep(
    scores: np.ndarray, labels: np.ndarray, n_thresholds: int | None = None
) -> RocCurve:
    """Sweep decision thresholds over the scores and collect (FAR, SDR) points.

    By default one threshold per distinct score (exhaustive); pass n_thresholds
    to sweep score quantiles instead for very long inputs. Decisions use the
    strict rule score > threshold. The curve is augmented with (0, 0) and
    (1, 1) and consecutive duplicate points are collapsed.
    """
    s = np.asarray(scores, dtype=np.float64)
    l = np.asarray(labels).astype(np.int64)
    if s.shape != l.shape or s.ndim != 1:
        raise ValueError("scores and labels must be 1-d and of equal length")
    n_pos = int(np.count_nonzero(l == 1))
    n_neg = int(np.count_nonzero(l == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("labels are degenerate: need at least one of each class")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    l_sorted = l[order]
    cum_tp = np.cumsum(l_sorted)
    cum_fp = np.cumsum(1 - l_sorted)

    if n_thresholds is None:
        # group starts mark the distinct score values in descending order
        starts = np.flatnonzero(np.concatenate(([True], s_sorted[1:] != s_sorted[:-1])))
        etas = s_sorted[starts]
        # decisions "score > eta" include exactly the samples before the group
        tp = np.where(starts > 0, cum_tp[starts - 1], 0)
        fp = np.where(starts > 0, cum_fp[starts - 1], 0)
    else:
        if n_thresholds < 1:
            raise ValueError("n_thresholds must be >= 1")
        etas = np.quantile(s, np.linspace(1.0, 0.0, n_thresholds))
        counts = np.searchsorted(-s_sorted, -etas, side="left")
        tp = np.where(counts > 0, cum_tp[np.maximum(counts - 1, 0)], 0)
        fp = np.where(counts > 0, cum_fp[np.maximum(counts - 1, 0)], 0)

    far = np.concatenate(([0.0], fp / n_neg, [1.0]))
    sdr = np.concatenate(([0.0], tp / n_pos, [1.0]))
    thresholds = np.concatenate(([np.inf], etas, [-np.inf]))

    points = np.stack([far, sdr], axis=1)
    keep = np.concatenate(([True], np.any(points[1:] != points[:-1], axis=1)))
    return RocCurve(points[keep], thresholds[keep])


def auc(curve: RocCurve) -> float:
    """Area under the ROC curve by trapezoidal integration over FAR."""
    far = curve.far
    sdr = curve.sdr
    if far.size < 2:
        raise ValueError("curve needs at least two points")
    if np.any(np.diff(far) < 0):
        raise ValueError("curve points must be sorted by FAR ascending")
    eps = 1e-12
    if far.min() < -eps or far.max() > 1 + eps or sdr.min() < -eps or sdr.max() > 1 + eps:
        raise ValueError("curve points must lie in the unit square")
    return float(np.sum(0.5 * (sdr[1:] + sdr[:-1]) * np.diff(far)))


def pool_frames(
    pairs: list[tuple[np.ndarray, np.ndarray]]
) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate per-utterance (scores, labels) for a micro-averaged sweep.

    Utterances whose labels contain only one class would make SDR or FAR
    undefined on their own and are excluded with a warning.
    """
    kept_scores, kept_labels = [], []
    for i, (scores, labels) in enumerate(pairs):
        labels = np.asarray(labels).astype(np.int64)
        if np.all(labels == 1) or np.all(labels == 0):
            warnings.warn(f"utterance {i} has single-class labels; excluded from pooling")
            continue
        kept_scores.append(np.asarray(scores, dtype=np.float64))
        kept_labels.append(labels)
    if not kept_scores:
        raise ValueError("no utterance with both label classes to pool")
    return np.concatenate(kept_scores), np.concatenate(kept_labels)
