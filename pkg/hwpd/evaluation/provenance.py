import logging
from typing import Dict, List, Optional, Sequence

from hwpd.errors import ProtocolLeak
from hwpd.tasks import OPTIMIZATION_TASK

logger = logging.getLogger(__name__)


class ProvenanceCollector:
    """
    This collector receives the row provenance of every training step of an evaluation run
    """

    def log_grid_rows(self, task: Optional[str], ids: Sequence[str]):
        """
        :param task: the task whose rows drive meta-parameter selection
        :param ids: subjects of those rows
        """
        pass

    def log_fold(self, task: Optional[str], held_out: str, standardization_rows: Sequence[str],
                 training_rows: Sequence[str]):
        """
        :param task: the task of the fold
        :param held_out: the subject scored in this fold
        :param standardization_rows: subjects the standardization was fitted on
        :param training_rows: subjects the classifier was trained on
        """
        pass


class LeakageAuditor(ProvenanceCollector):
    """Counts folds and records every held-out row that reached standardization, training or grid selection."""

    def __init__(self):
        self.folds = 0
        self.grid_rows = 0
        self.violations: List[str] = []

    def log_grid_rows(self, task: Optional[str], ids: Sequence[str]):
        self.grid_rows += len(ids)
        if task is not None and task != OPTIMIZATION_TASK.value:
            self.violations.append(f"grid selection used rows of task {task}")

    def log_fold(self, task: Optional[str], held_out: str, standardization_rows: Sequence[str],
                 training_rows: Sequence[str]):
        self.folds += 1
        if held_out in set(standardization_rows):
            self.violations.append(f"{task}: held-out {held_out} entered the standardization fit")
        if held_out in set(training_rows):
            self.violations.append(f"{task}: held-out {held_out} entered the training rows")

    def summary(self) -> Dict[str, int]:
        return {"folds": self.folds, "grid_rows": self.grid_rows, "leaks": len(self.violations)}


def audit_provenance(collector: LeakageAuditor) -> Dict[str, int]:
    """
    :return: the audit counters
    :raises ProtocolLeak: on any recorded violation
    """
    if collector.violations:
        raise ProtocolLeak(f"{len(collector.violations)} provenance violations, first: {collector.violations[0]}")
    summary = collector.summary()
    logger.info(f"Provenance audit passed: {summary}")
    return summary
