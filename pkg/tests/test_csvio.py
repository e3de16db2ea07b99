import numpy as np
import pytest

from duovad import csvio
from duovad.itd import ItdTrack
from duovad.metrics import ConfusionCounts, RocCurve


def test_labels_round_trip(tmp_path):
    labels = np.array([0, 1, 1, 0, 1])
    csvio.write_labels(tmp_path / "l.csv", labels)
    assert np.array_equal(csvio.read_labels(tmp_path / "l.csv"), labels)
    header = (tmp_path / "l.csv").read_text().splitlines()[0]
    assert header == "frame_index,label"


def test_scores_round_trip_full_precision(tmp_path):
    scores = np.array([0.123456789012, -7.5e-11, 3.0])
    csvio.write_scores(tmp_path / "s.csv", scores)
    assert np.allclose(csvio.read_scores(tmp_path / "s.csv"), scores, rtol=1e-11)


def test_decisions_round_trip(tmp_path):
    d = np.array([1, 0, 1])
    csvio.write_decisions(tmp_path / "d.csv", d)
    assert np.array_equal(csvio.read_decisions(tmp_path / "d.csv"), d)


def test_itd_round_trip(tmp_path):
    track = ItdTrack(np.array([-3, 0, 2]), np.array([0.5, 1.0, 0.25]))
    csvio.write_itd(tmp_path / "itd.csv", track)
    back = csvio.read_itd(tmp_path / "itd.csv")
    assert np.array_equal(back.tau_per_frame, track.tau_per_frame)
    assert np.allclose(back.confidence_per_frame, track.confidence_per_frame)


def test_frame_report_readable_as_scores(tmp_path):
    csvio.write_frame_report(
        tmp_path / "r.csv", np.array([1, 0]), np.array([0.5, -2.0]), np.array([1, 0])
    )
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "frame_index,F,score,decision"
    assert np.allclose(csvio.read_scores(tmp_path / "r.csv"), [0.5, -2.0])


def test_roc_file_has_points_then_auc_line(tmp_path):
    curve = RocCurve(np.array([[0, 0], [0.25, 0.8], [1, 1]]), np.array([np.inf, 0.3, -np.inf]))
    csvio.write_roc(tmp_path / "roc.csv", curve, 0.875)
    lines = (tmp_path / "roc.csv").read_text().splitlines()
    assert lines[0] == "threshold,far,sdr"
    assert lines[-1] == "auc,0.875"
    assert len(lines) == 5


def test_confusion_file(tmp_path):
    counts = ConfusionCounts(tp=8, fp=2, tn=5, fn=1)
    csvio.write_confusion(tmp_path / "c.csv", counts)
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "tp,fp,tn,fn,sdr,far"
    cells = lines[1].split(",")
    assert cells[:4] == ["8", "2", "5", "1"]
    assert float(cells[4]) == pytest.approx(8 / 9)


def test_auc_table(tmp_path):
    rows = [
        {"engine": "sohn", "mode": "none", "babble_0dB": 0.75},
        {"engine": "sohn", "mode": "a", "babble_0dB": 0.9},
    ]
    csvio.write_auc_table(tmp_path / "t.csv", rows, ["babble_0dB"])
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "engine,mode,babble_0dB"
    assert lines[1] == "sohn,none,0.75"


def test_missing_column_rejected(tmp_path):
    (tmp_path / "bad.csv").write_text("frame_index,foo\n0,1\n")
    with pytest.raises(ValueError, match="score"):
        csvio.read_scores(tmp_path / "bad.csv")
