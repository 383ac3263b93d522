import pytest

from hwpd.errors import ProtocolLeak
from hwpd.evaluation.provenance import LeakageAuditor, ProvenanceCollector, audit_provenance


def test_base_collector_ignores_everything():
    collector = ProvenanceCollector()
    collector.log_grid_rows("Cube", ["S1"])
    collector.log_fold("Cube", "S1", ["S1"], ["S1"])


def test_clean_run():
    auditor = LeakageAuditor()
    auditor.log_grid_rows("Circle", ["S1", "S2", "S3"])
    auditor.log_fold("Cube", "S1", ["S2", "S3"], ["S2", "S3"])
    auditor.log_fold("Cube", "S2", ["S1", "S3"], ["S1", "S3"])

    assert audit_provenance(auditor) == {"folds": 2, "grid_rows": 3, "leaks": 0}


@pytest.mark.parametrize(
    "input,expected_output",
    [
        (("grid", "Spiral", None, None, None), "grid selection used rows of task Spiral"),
        (("fold", "Cube", "S1", ["S1", "S2"], ["S2"]), "Cube: held-out S1 entered the standardization fit"),
        (("fold", "Cube", "S1", ["S2"], ["S2", "S1"]), "Cube: held-out S1 entered the training rows"),
    ]
)
def test_violations(input, expected_output):
    kind, task, held_out, standardization_rows, training_rows = input
    auditor = LeakageAuditor()
    if kind == "grid":
        auditor.log_grid_rows(task, ["S1", "S2"])
    else:
        auditor.log_fold(task, held_out, standardization_rows, training_rows)

    assert auditor.violations == [expected_output]
    assert auditor.summary()["leaks"] == 1
    with pytest.raises(ProtocolLeak):
        audit_provenance(auditor)
