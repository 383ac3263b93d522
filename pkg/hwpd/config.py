"""
Pipeline settings: defaults from ``conf/config.yaml`` merged with
CLI overrides, validated by pydantic.
"""
import json
import logging
import os
from typing import Any, Dict, List, Optional

import yaml
from pydantic import BaseModel, model_validator

from hwpd.errors import DatasetNotFound
from hwpd.utils import sha256_of_text

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "conf", "config.yaml")


class PreprocessingSettings(BaseModel):
    target_rate: float = 180.0
    cutoff: float = 12.0
    filter_order: int = 4
    min_stroke_samples: int = 10

    @model_validator(mode="after")
    def _check_nyquist(self) -> "PreprocessingSettings":
        if self.target_rate <= 2 * self.cutoff:
            raise ValueError(f"target_rate ({self.target_rate}) must exceed 2*cutoff ({2 * self.cutoff})")
        if self.min_stroke_samples < 1:
            raise ValueError("min_stroke_samples must be positive")
        return self


class KinematicSettings(BaseModel):
    peak_prominence: float = 0.05
    direction_sectors: int = 8


class NonlinearSettings(BaseModel):
    series: List[str] = ["speed", "pressure", "x", "y"]
    entropy_bins: int = 64
    lyapunov_max_steps: int = 500
    max_pair_points: int = 2000
    max_embedding_dim: int = 10


class NeuromotorSettings(BaseModel):
    max_components: int = 12
    target_snr_db: float = 25.0
    min_fit_samples: int = 20


class FunctionalSettings(BaseModel):
    include_range: bool = False


class ClassificationSettings(BaseModel):
    mlp_interpretation: str = "width"
    mlp_depth_width: int = 10
    mlp_epochs: int = 500
    mlp_learning_rate: float = 0.01
    mlp_momentum: float = 0.9
    mlp_batch_size: int = 16
    svm_tol: float = 1e-3
    svm_max_iter: int = 100_000

    @model_validator(mode="after")
    def _check_interpretation(self) -> "ClassificationSettings":
        if self.mlp_interpretation not in ("width", "depth"):
            raise ValueError(f"mlp_interpretation must be 'width' or 'depth', got {self.mlp_interpretation}")
        return self


class Settings(BaseModel):
    preprocessing: PreprocessingSettings = PreprocessingSettings()
    kinematic: KinematicSettings = KinematicSettings()
    nonlinear: NonlinearSettings = NonlinearSettings()
    neuromotor: NeuromotorSettings = NeuromotorSettings()
    functionals: FunctionalSettings = FunctionalSettings()
    classification: ClassificationSettings = ClassificationSettings()

    def config_hash(self) -> str:
        return sha256_of_text(self.model_dump_json())


def read_structured_file(path: str) -> Dict[str, Any]:
    """Reads a YAML or JSON file (JSON is valid YAML, but json gives better errors)."""
    if not os.path.isfile(path):
        raise DatasetNotFound(f"config file not found: {path}")
    logger.info(f"Reading config from path: {os.path.abspath(path)}")
    with open(path, "r", encoding="utf-8") as f:
        if path.endswith(".json"):
            return json.load(f)
        return yaml.safe_load(f) or dict()


def _deep_update(base: Dict[str, Any], updates: Dict[str, Any]) -> Dict[str, Any]:
    result = dict(base)
    for key, value in updates.items():
        if isinstance(value, dict) and isinstance(result.get(key), dict):
            result[key] = _deep_update(result[key], value)
        else:
            result[key] = value
    return result


def load_settings(config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Settings:
    """
    Builds the effective settings.

    :param config_path: a yaml file with settings; the packaged defaults are used when omitted
    :param overrides: nested dict of values set from the command line
    """
    config: Dict[str, Any] = dict()
    if config_path is not None:
        config = read_structured_file(config_path)
    elif os.path.exists(DEFAULT_CONFIG_PATH):
        config = read_structured_file(DEFAULT_CONFIG_PATH)

    if overrides:
        config = _deep_update(config, overrides)

    return Settings.model_validate(config)
