"""
The feature manifest: the ordered list of feature columns every feature
vector, matrix and model is aligned to.

A manifest row binds a column ``name`` to a ``formula_id`` of the feature
registry, i.e. one value the producers can compute. The shipped manifest
selects the default inventory; a custom manifest may rename, reorder or
select a subset of the registry.
"""
import logging
import os
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence

import pandas as pd

from hwpd.config import Settings
from hwpd.errors import DatasetNotFound, ManifestMismatch
from hwpd.features.functionals import functional_names
from hwpd.features.kinematic import DEFAULT_STROKE_QUANTITIES, STROKE_QUANTITY_UNITS, kinematic_feature_names, \
    kinematic_feature_units
from hwpd.features.neuromotor import NEUROMOTOR_FEATURE_UNITS, neuromotor_feature_names
from hwpd.features.nonlinear.battery import MEASURE_UNITS, nonlinear_feature_names
from hwpd.utils import sha256_of_text

logger = logging.getLogger(__name__)

MANIFEST_COLUMNS = ["index", "name", "scope", "units", "formula_id"]
SCOPE_TASK = "task"
SCOPE_STROKE = "stroke"

FAMILY_PREFIXES = OrderedDict([("kinematic", "kin."), ("nonlinear", "nl."), ("neuromotor", "nm.")])
FAMILIES = tuple(FAMILY_PREFIXES)

DEFAULT_MANIFEST_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data", "manifest.csv")


@dataclass(frozen=True)
class FeatureSpec:
    index: int
    name: str
    scope: str
    units: str
    formula_id: str

    @property
    def family(self) -> str:
        return family_of(self.formula_id)


def family_of(formula_id: str) -> str:
    for family, prefix in FAMILY_PREFIXES.items():
        if formula_id.startswith(prefix):
            return family
    raise ManifestMismatch(f"formula id '{formula_id}' belongs to no feature family")


def feature_registry(settings: Optional[Settings] = None) -> "OrderedDict[str, FeatureSpec]":
    """Every value the producers compute under ``settings``, in canonical order."""
    settings = settings or Settings()
    include_range = settings.functionals.include_range
    registry: "OrderedDict[str, FeatureSpec]" = OrderedDict()

    def add(formula_id: str, scope: str, units: str):
        registry[formula_id] = FeatureSpec(len(registry), formula_id, scope, units, formula_id)

    for fid in kinematic_feature_names(include_range):
        add(fid, SCOPE_STROKE if fid.startswith("kin.stroke.") else SCOPE_TASK, kinematic_feature_units(fid))
    for fid in nonlinear_feature_names(settings.nonlinear.series):
        add(fid, SCOPE_TASK, MEASURE_UNITS[fid.rsplit(".", 1)[1]])
    for fid in neuromotor_feature_names():
        add(fid, SCOPE_STROKE, NEUROMOTOR_FEATURE_UNITS[fid.split(".", 1)[1]])
    return registry


class FeatureManifest:
    """Ordered, named feature columns."""

    def __init__(self, specs: Sequence[FeatureSpec]):
        self.specs: List[FeatureSpec] = [
            FeatureSpec(i, s.name, s.scope, s.units, s.formula_id) for i, s in enumerate(specs)
        ]
        names = [s.name for s in self.specs]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ManifestMismatch(f"duplicate feature names in manifest: {duplicates}")
        self._index = {s.name: s.index for s in self.specs}

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self) -> Iterator[FeatureSpec]:
        return iter(self.specs)

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureManifest) and self.specs == other.specs

    @property
    def names(self) -> List[str]:
        return [s.name for s in self.specs]

    @property
    def formula_ids(self) -> List[str]:
        return [s.formula_id for s in self.specs]

    def index_of(self, name: str) -> int:
        return self._index[name]

    def family_indices(self, family: str) -> List[int]:
        """Column positions of a family; ``all`` selects every column."""
        if family == "all":
            return list(range(len(self.specs)))
        if family not in FAMILY_PREFIXES:
            raise ValueError(f"Unknown feature family '{family}'. Available: {list(FAMILIES) + ['all']}")
        return [s.index for s in self.specs if s.family == family]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([[s.index, s.name, s.scope, s.units, s.formula_id] for s in self.specs],
                            columns=MANIFEST_COLUMNS)

    def to_csv_text(self) -> str:
        return self.to_frame().to_csv(index=False, lineterminator="\n")

    def content_hash(self) -> str:
        return sha256_of_text(self.to_csv_text())

    def check_against(self, registry: Dict[str, FeatureSpec]) -> None:
        """Raises ManifestMismatch if a row references a formula no producer computes."""
        unknown = [s.formula_id for s in self.specs if s.formula_id not in registry]
        if unknown:
            raise ManifestMismatch(f"manifest references {len(unknown)} unknown formula ids, e.g. {unknown[:5]}")


def build_manifest(settings: Optional[Settings] = None) -> FeatureManifest:
    """
    The default inventory: task-level kinematics, functionals of the default
    stroke quantities, the nonlinear battery and the neuromotor block.
    """
    settings = settings or Settings()
    registry = feature_registry(settings)
    skipped = [q for q in STROKE_QUANTITY_UNITS if q not in DEFAULT_STROKE_QUANTITIES]
    skipped_ids = {f"kin.stroke.{q}.{f}" for q in skipped for f in functional_names(True)}
    return FeatureManifest([s for fid, s in registry.items() if fid not in skipped_ids])


def write_manifest(manifest: FeatureManifest, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(manifest.to_csv_text())


def read_manifest(path: str, settings: Optional[Settings] = None) -> FeatureManifest:
    """Reads a manifest file and checks it against the registry for ``settings``."""
    if not os.path.exists(path):
        raise DatasetNotFound(f"feature manifest not found: {path}")
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    missing = [c for c in MANIFEST_COLUMNS if c not in df.columns]
    if missing:
        raise ManifestMismatch(f"feature manifest {path} lacks columns {missing}")
    order = df["index"].astype(int).tolist()
    if order != list(range(len(df))):
        raise ManifestMismatch(f"feature manifest {path} indices are not 0..{len(df) - 1} in order")

    manifest = FeatureManifest([
        FeatureSpec(int(r["index"]), r["name"], r["scope"], r["units"], r["formula_id"])
        for _, r in df.iterrows()
    ])
    manifest.check_against(feature_registry(settings))
    return manifest


def load_manifest(path: Optional[str] = None, settings: Optional[Settings] = None) -> FeatureManifest:
    """A manifest file if given, else the default inventory for ``settings``."""
    if path is not None:
        return read_manifest(path, settings)
    return build_manifest(settings)
