import os
import tempfile

import pandas as pd
import pytest

from hwpd.config import FunctionalSettings, NonlinearSettings, Settings
from hwpd.errors import DatasetNotFound, ManifestMismatch
from hwpd.features.manifest import (
    DEFAULT_MANIFEST_PATH, FeatureManifest, FeatureSpec, build_manifest, feature_registry, load_manifest,
    read_manifest, write_manifest
)


def test_shipped_manifest_is_the_default_inventory():
    with open(DEFAULT_MANIFEST_PATH, "r", encoding="utf-8", newline="") as f:
        assert f.read() == build_manifest(Settings()).to_csv_text()


def test_default_inventory():
    manifest = build_manifest()

    assert len(manifest) == 176
    assert len(manifest.family_indices("kinematic")) == 30 + 7 * 10
    assert len(manifest.family_indices("nonlinear")) == 48
    assert len(manifest.family_indices("neuromotor")) == 28
    assert manifest.family_indices("all") == list(range(176))
    assert "kin.stroke.pressure_mean.mean" not in manifest.names
    assert manifest.names[0] == "kin.duration_total"
    assert manifest.names[-1] == "nm.residual_energy_max"


def test_registry_follows_settings():
    settings = Settings(functionals=FunctionalSettings(include_range=True),
                        nonlinear=NonlinearSettings(series=["speed"]))
    registry = feature_registry(settings)

    assert "kin.stroke.duration.range" in registry
    assert "nl.speed.d2" in registry
    assert "nl.pressure.d2" not in registry
    assert len(build_manifest(settings)) == 30 + 7 * 11 + 12 + 28


def test_unknown_family():
    with pytest.raises(ValueError):
        build_manifest().family_indices("spectral")


def test_write_read():
    manifest = build_manifest()
    with tempfile.TemporaryDirectory(prefix="hwpd_manifest_") as tmp:
        path = os.path.join(tmp, "features.csv")
        write_manifest(manifest, path)
        assert read_manifest(path) == manifest
        assert load_manifest(path).content_hash() == manifest.content_hash()
    assert load_manifest(None) == manifest


def test_custom_manifest_renames_columns():
    """A manifest may select and rename registry entries"""
    manifest = FeatureManifest([
        FeatureSpec(0, "speed", "task", "mm/s", "kin.speed_mean"),
        FeatureSpec(0, "lognormals", "stroke", "count", "nm.count_mean"),
    ])
    assert [s.index for s in manifest] == [0, 1]
    assert manifest.family_indices("neuromotor") == [1]
    assert manifest.index_of("lognormals") == 1


def test_duplicate_names():
    with pytest.raises(ManifestMismatch):
        FeatureManifest([FeatureSpec(0, "a", "task", "1", "kin.speed_mean"),
                         FeatureSpec(1, "a", "task", "1", "kin.speed_max")])


@pytest.mark.parametrize(
    "rows,columns",
    [
        ([[0, "a", "task", "1", "kin.no_such_feature"]], ["index", "name", "scope", "units", "formula_id"]),
        ([[0, "a", "task", "1", "spectral.power"]], ["index", "name", "scope", "units", "formula_id"]),
        ([[1, "a", "task", "1", "kin.speed_mean"]], ["index", "name", "scope", "units", "formula_id"]),
        ([[0, "a", "task", "1"]], ["index", "name", "scope", "units"]),
    ]
)
def test_read_rejects_bad_manifests(rows, columns):
    with tempfile.TemporaryDirectory(prefix="hwpd_manifest_") as tmp:
        path = os.path.join(tmp, "features.csv")
        pd.DataFrame(rows, columns=columns).to_csv(path, index=False)
        with pytest.raises(ManifestMismatch):
            read_manifest(path)


def test_missing_manifest():
    with pytest.raises(DatasetNotFound):
        read_manifest("/nonexistent/features.csv")
