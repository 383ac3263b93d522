import json
import os
import tempfile

import pytest
import yaml

from hwpd.config import (
    ClassificationSettings, PreprocessingSettings, Settings, load_settings, read_structured_file
)
from hwpd.schemas import GridSpec


def test_shipped_config_is_the_default(conf_path):
    assert load_settings(os.path.join(conf_path, "config.yaml")) == Settings()
    assert load_settings() == Settings()


def test_shipped_grid_is_the_default(conf_path):
    assert GridSpec.model_validate(read_structured_file(os.path.join(conf_path, "grid.yaml"))) == GridSpec()


def test_overrides_are_merged():
    settings = load_settings(overrides={"functionals": {"include_range": True},
                                        "classification": {"mlp_interpretation": "depth"}})
    assert settings.functionals.include_range
    assert settings.classification.mlp_interpretation == "depth"
    assert settings.classification.mlp_epochs == 500
    assert settings.config_hash() != Settings().config_hash()


@pytest.mark.parametrize("suffix,dump", [(".yaml", yaml.safe_dump), (".json", json.dumps)])
def test_partial_files(suffix, dump):
    with tempfile.TemporaryDirectory(prefix="hwpd_config_") as tmp:
        path = os.path.join(tmp, f"config{suffix}")
        with open(path, "w", encoding="utf-8") as f:
            f.write(dump({"preprocessing": {"target_rate": 100.0, "cutoff": 10.0}}))
        settings = load_settings(path)

    assert settings.preprocessing.target_rate == 100.0
    assert settings.preprocessing.filter_order == 4
    assert settings.nonlinear == Settings().nonlinear


def test_config_hash_is_stable():
    assert Settings().config_hash() == Settings().config_hash()
    assert len(Settings().config_hash()) == 64


@pytest.mark.parametrize(
    "input",
    [
        lambda: PreprocessingSettings(target_rate=20.0, cutoff=12.0),
        lambda: PreprocessingSettings(min_stroke_samples=0),
        lambda: ClassificationSettings(mlp_interpretation="height"),
    ]
)
def test_invalid_settings(input):
    with pytest.raises(ValueError):
        input()
