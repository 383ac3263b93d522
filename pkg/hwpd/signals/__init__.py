from hwpd.signals.recording import (
    PenSample,
    PenState,
    TaskRecording,
    parse_recording,
    read_dataset_manifest,
    write_recording,
)
from hwpd.signals.preprocessing import lowpass, pen_down_runs, preprocess
from hwpd.signals.ingest import INGEST_COLUMNS, ingest_dataset, inspect_recording
from hwpd.signals.strokes import KinematicProfiles, Stroke, StrokeList, kinematic_derivatives, segment_strokes

__all__ = [
    "PenSample", "PenState", "TaskRecording", "parse_recording", "read_dataset_manifest", "write_recording",
    "lowpass", "pen_down_runs", "preprocess",
    "INGEST_COLUMNS", "ingest_dataset", "inspect_recording",
    "KinematicProfiles", "Stroke", "StrokeList", "kinematic_derivatives", "segment_strokes",
]
