import os
import tempfile

import pandas as pd
import pytest

from hwpd.errors import DatasetNotFound
from hwpd.signals.ingest import INGEST_COLUMNS, STATUS_OK, ingest_dataset
from hwpd.signals.recording import read_dataset_manifest, write_recording
from .conftest import two_strokes


def _dataset(tmp, broken=False, missing=False):
    write_recording(two_strokes(), os.path.join(tmp, "good.csv"))
    rows = [["S001", "PD", 70, "F", "Circle", "good.csv"]]
    if broken:
        with open(os.path.join(tmp, "broken.csv"), "w", encoding="utf-8") as f:
            f.write("t_ms,x_mm,y_mm,p,pen_state\n")
        rows.append(["S002", "YHC", 24, "M", "Spiral", "broken.csv"])
    if missing:
        rows.append(["S003", "EHC", 66, "M", "House", "nowhere.csv"])
    path = os.path.join(tmp, "manifest.csv")
    pd.DataFrame(rows, columns=["subject_id", "group", "age", "sex", "task", "file_path"]).to_csv(path, index=False)
    return read_dataset_manifest(path)


def test_summary_of_a_good_recording():
    with tempfile.TemporaryDirectory(prefix="hwpd_ingest_") as tmp:
        summary = ingest_dataset(_dataset(tmp))

    assert list(summary.columns) == INGEST_COLUMNS
    row = summary.iloc[0]
    assert row["status"] == STATUS_OK
    assert row["strokes"] == 2 and row["discarded_runs"] == 0
    assert row["duration_s"] == pytest.approx(2.5, abs=0.01)
    assert row["pen_down_s"] == pytest.approx(2.0, abs=0.05)


def test_broken_recordings_are_reported():
    with tempfile.TemporaryDirectory(prefix="hwpd_ingest_") as tmp:
        summary = ingest_dataset(_dataset(tmp, broken=True))

    assert summary["status"].tolist()[0] == STATUS_OK
    assert summary["status"].tolist()[1].startswith("EmptyRecording:")
    assert pd.isna(summary.iloc[1]["strokes"])


def test_missing_files_stop_the_ingest():
    with tempfile.TemporaryDirectory(prefix="hwpd_ingest_") as tmp:
        dataset = _dataset(tmp, missing=True)
        with pytest.raises(DatasetNotFound):
            ingest_dataset(dataset)
