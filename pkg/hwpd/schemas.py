"""
Data transfer objects written to and read from disk: grids, model files,
score sets and evaluation reports.
"""
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, field_validator

from hwpd.features.standardization import StandardizationParams

MODEL_FORMAT_VERSION = 1
REPORT_FORMAT_VERSION = 1


class GridSpec(BaseModel):
    """Candidate meta-parameters of every classifier."""
    knn_k: List[int] = [3, 5, 7, 9, 11, 15]
    svm_c: List[float] = [0.001, 0.01, 0.1, 1, 10, 1000, 2000, 10000]
    svm_gamma: List[float] = [1e-6, 1e-5, 1e-4, 0.01, 0.1, 1, 10, 1000]
    mlp_layouts: List[int] = [5, 15, 30]

    @field_validator("knn_k", "svm_c", "svm_gamma", "mlp_layouts")
    @classmethod
    def _non_empty_positive(cls, values: List[Any]) -> List[Any]:
        if not values:
            raise ValueError("grid candidate lists must not be empty")
        if any(v <= 0 for v in values):
            raise ValueError(f"grid candidates must be positive, got {values}")
        return values


class ModelFile(BaseModel):
    format_version: int = MODEL_FORMAT_VERSION
    kind: str
    params: Dict[str, Any]
    state: Dict[str, Any]
    seed: int
    converged: bool = True
    features: List[str] = []
    manifest_hash: Optional[str] = None
    task: Optional[str] = None
    experiment: Optional[str] = None
    standardization: Optional[StandardizationParams] = None


class ScoreEntry(BaseModel):
    subject_id: str
    label: int
    raw_score: float
    normalized_score: float
    predicted: int

    @field_validator("normalized_score")
    @classmethod
    def _unit_interval(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"normalized score must lie in [0, 1], got {value}")
        return value


class ScoreSet(BaseModel):
    """Per-subject scores of one task; ``task`` is None for fused scores."""
    experiment: str
    task: Optional[str]
    family: str
    classifier: str
    entries: List[ScoreEntry]

    @property
    def labels(self) -> List[int]:
        return [e.label for e in self.entries]

    @property
    def scores(self) -> List[float]:
        return [e.normalized_score for e in self.entries]

    @property
    def predicted(self) -> List[int]:
        return [e.predicted for e in self.entries]

    @property
    def subject_ids(self) -> List[str]:
        return [e.subject_id for e in self.entries]


class GridPoint(BaseModel):
    params: Dict[str, Any]
    accuracy: float


class TaskResult(BaseModel):
    task: str
    accuracy: float
    confusion: List[List[int]]
    auc: Optional[float] = None
    n_subjects: int
    training_only: bool = False


class FamilyResult(BaseModel):
    family: str
    classifier: str
    selected_params: Dict[str, Any]
    training: TaskResult
    grid: List[GridPoint]
    tasks: List[TaskResult]
    omitted_tasks: List[str] = []
    fused: Optional[TaskResult] = None
    fused_roc: List[List[float]] = []


class Provenance(BaseModel):
    version: str
    command: str
    config_hash: str
    manifest_hash: str
    seed: int
    protocol: str = ("meta-parameters by leave-one-out grid search on Circle; per-task scores by "
                     "subject-level leave-one-out with fixed meta-parameters; mean-rule fusion")


class EvaluationReport(BaseModel):
    format_version: int = REPORT_FORMAT_VERSION
    provenance: Provenance
    experiment: str
    results: List[FamilyResult]
    audit: Dict[str, int] = {}
    incomplete_subjects: List[str] = []
