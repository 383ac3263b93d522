from hwpd.features.nonlinear.battery import (
    MEASURE_NAMES,
    NonlinearFeatureSet,
    nonlinear_feature_names,
    nonlinear_features,
    series_features,
)
from hwpd.features.nonlinear.complexity import energy_snr, entropy, hurst_rs, lempel_ziv, teager_kaiser
from hwpd.features.nonlinear.dynamics import correlation_dimension, largest_lyapunov
from hwpd.features.nonlinear.embedding import EmbeddingParams, embed_delay, select_embedding
from hwpd.features.nonlinear.emd import decompose, emd_features

__all__ = [
    "EmbeddingParams",
    "MEASURE_NAMES",
    "NonlinearFeatureSet",
    "correlation_dimension",
    "decompose",
    "embed_delay",
    "emd_features",
    "energy_snr",
    "entropy",
    "hurst_rs",
    "largest_lyapunov",
    "lempel_ziv",
    "nonlinear_feature_names",
    "nonlinear_features",
    "select_embedding",
    "series_features",
    "teager_kaiser",
]
