from hwpd.evaluation.fusion import fuse_scores_mean, normalize_score, normalize_scores
from hwpd.evaluation.metrics import RocCurve, accuracy_confusion, roc_auc
from hwpd.evaluation.provenance import LeakageAuditor, ProvenanceCollector, audit_provenance
from hwpd.evaluation.protocol import ProtocolRun, evaluate_family, run_protocol
from hwpd.evaluation.report import read_score_sets, write_report

__all__ = [
    "LeakageAuditor",
    "ProtocolRun",
    "ProvenanceCollector",
    "RocCurve",
    "accuracy_confusion",
    "audit_provenance",
    "evaluate_family",
    "fuse_scores_mean",
    "normalize_score",
    "normalize_scores",
    "read_score_sets",
    "roc_auc",
    "run_protocol",
    "write_report",
]
