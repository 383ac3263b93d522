from hwpd.synth.cohort import CohortConfig, ProfileRanges, load_cohort_config, read_ground_truth, synth_cohort
from hwpd.synth.generator import (
    GroundTruth,
    RenderedStroke,
    SubjectProfile,
    render_stroke,
    synth_task,
    tremor_term,
)

__all__ = [
    "CohortConfig",
    "GroundTruth",
    "ProfileRanges",
    "RenderedStroke",
    "SubjectProfile",
    "load_cohort_config",
    "read_ground_truth",
    "render_stroke",
    "synth_cohort",
    "synth_task",
    "tremor_term",
]
