from hwpd.features.assembly import (
    FeatureVector,
    assemble_task_vector,
    build_feature_matrix,
    extract_task_vector,
    read_feature_matrix,
    write_feature_matrix,
)
from hwpd.features.functionals import FunctionalSet, functionals
from hwpd.features.kinematic import global_kinematic_features, stroke_kinematic_series
from hwpd.features.manifest import FeatureManifest, build_manifest, load_manifest, read_manifest, write_manifest
from hwpd.features.neuromotor import (
    LognormalComponent,
    SigmaLognormalFit,
    extract_sigma_lognormal,
    lognormal_eval,
    neuromotor_features,
)
from hwpd.features.standardization import StandardizationParams, standardize

__all__ = [
    "FeatureManifest",
    "FeatureVector",
    "FunctionalSet",
    "LognormalComponent",
    "SigmaLognormalFit",
    "StandardizationParams",
    "assemble_task_vector",
    "build_feature_matrix",
    "build_manifest",
    "extract_sigma_lognormal",
    "extract_task_vector",
    "functionals",
    "global_kinematic_features",
    "load_manifest",
    "lognormal_eval",
    "neuromotor_features",
    "read_feature_matrix",
    "read_manifest",
    "standardize",
    "stroke_kinematic_series",
    "write_feature_matrix",
    "write_manifest",
]
