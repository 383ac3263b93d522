"""
Dataset ingestion check: every recording of a dataset manifest is parsed,
resampled and segmented, and summarized in one row.
"""
import logging
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from hwpd.config import Settings
from hwpd.errors import DatasetNotFound, HwpdError
from hwpd.signals.preprocessing import preprocess
from hwpd.signals.recording import parse_recording
from hwpd.signals.strokes import segment_strokes
from hwpd.tasks import Group, TaskId
from hwpd.utils import parallel_map

logger = logging.getLogger(__name__)

INGEST_COLUMNS = ["subject_id", "group", "task", "samples", "duration_s", "pen_down_s", "strokes",
                  "discarded_runs", "pressure_corrections", "status"]
STATUS_OK = "ok"


def inspect_recording(row: Dict[str, str], settings: Settings) -> Dict[str, Any]:
    """
    :param row: a dataset manifest row with ``file_path`` resolved
    :return: a summary row; ``status`` holds ``<ErrorName>: <message>`` for a broken recording
    """
    summary: Dict[str, Any] = {c: None for c in INGEST_COLUMNS}
    summary.update(subject_id=row["subject_id"], group=row["group"], task=row["task"])
    pre = settings.preprocessing
    try:
        rec = parse_recording(row["file_path"], row["subject_id"], Group(row["group"]), TaskId(row["task"]))
        summary.update(samples=len(rec), duration_s=rec.duration, pressure_corrections=rec.pressure_corrections)
        clean = preprocess(rec, pre.target_rate, pre.cutoff, pre.filter_order)
        summary["pen_down_s"] = float(np.sum(clean.pen_down)) / pre.target_rate
        strokes = segment_strokes(clean, pre.min_stroke_samples)
        summary.update(strokes=len(strokes), discarded_runs=strokes.discarded, status=STATUS_OK)
    except DatasetNotFound:
        raise
    except HwpdError as e:
        logger.warning(f"{row['subject_id']}/{row['task']}: {type(e).__name__}: {e}")
        summary["status"] = f"{type(e).__name__}: {e}"
    return summary


def ingest_dataset(dataset: pd.DataFrame, settings: Optional[Settings] = None, threads: int = 1) -> pd.DataFrame:
    """One summary row per recording, in manifest order."""
    settings = settings or Settings()
    rows = dataset[["subject_id", "group", "task", "file_path"]].astype(str).to_dict("records")
    summaries = parallel_map(inspect_recording, rows, n_workers=threads, desc="ingest", settings=settings)
    frame = pd.DataFrame(summaries, columns=INGEST_COLUMNS)
    broken = int((frame["status"] != STATUS_OK).sum())
    logger.info(f"Ingested {len(frame)} recordings, {broken} unusable")
    return frame
