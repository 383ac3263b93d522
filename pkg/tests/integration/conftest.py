import logging
import logging.config
import os

import numpy as np
import pandas as pd
import pytest

from hwpd.features.assembly import write_feature_matrix
from hwpd.features.manifest import FeatureManifest, FeatureSpec, write_manifest
from hwpd.tasks import ALL_TASKS, NEUROMOTOR_SKIP_TASKS, Group
from hwpd.utils import make_log_config_dict

TOY_MANIFEST = FeatureManifest([
    FeatureSpec(0, "kin.speed_mean", "task", "mm/s", "kin.speed_mean"),
    FeatureSpec(1, "nl.speed.hurst", "task", "1", "nl.speed.hurst"),
    FeatureSpec(2, "nm.count_mean", "stroke", "count", "nm.count_mean"),
])


def write_toy_matrix(out_dir: str, n_per_group: int = 5, seed: int = 0):
    """
    A feature matrix over the three toy features where PD rows sit 4 units above
    the healthy groups. Returns (matrix path, feature manifest path).
    """
    rng = np.random.default_rng(seed)
    records = []
    for group in Group:
        shift = 4.0 if group is Group.PD else 0.0
        for i in range(n_per_group):
            for task in ALL_TASKS:
                values = rng.normal(shift, 0.5, size=len(TOY_MANIFEST))
                if task in NEUROMOTOR_SKIP_TASKS:
                    values[2] = np.nan
                records.append([f"{group.value}{i:02d}", group.value, task.value, *values])
    frame = pd.DataFrame(records, columns=["subject_id", "group", "task", *TOY_MANIFEST.names])

    os.makedirs(out_dir, exist_ok=True)
    matrix_path = os.path.join(out_dir, "features.csv")
    manifest_path = os.path.join(out_dir, "feature_manifest.csv")
    write_feature_matrix(frame, matrix_path)
    write_manifest(TOY_MANIFEST, manifest_path)
    return matrix_path, manifest_path


@pytest.fixture(autouse=True)
def reset_logging():
    """Every CLI run installs its own handlers; closes the sidecar file afterwards."""
    root = logging.getLogger()
    saved = list(root.handlers), root.level
    yield
    for handler in logging.getLogger("hwpd").handlers:
        handler.close()
    logging.config.dictConfig(make_log_config_dict())
    root.handlers[:], root.level = saved
