from .config import KINDS, LABEL_SPACES, NETWORK_KINDS, REGRESSION_KINDS, ConfigError, ModelConfig
from .features import Batch, FeatureEncoder, MetadataEncoding
from .network import Model, build
from .regression import (
    DegenerateFeatures,
    LinearRegressionClassifier,
    OneVsRestLogistic,
    OrdinalLogistic,
    RegressionFeaturizer,
    fit_regression,
)

__all__ = [
    "KINDS",
    "LABEL_SPACES",
    "NETWORK_KINDS",
    "REGRESSION_KINDS",
    "Batch",
    "ConfigError",
    "DegenerateFeatures",
    "FeatureEncoder",
    "LinearRegressionClassifier",
    "MetadataEncoding",
    "Model",
    "ModelConfig",
    "OneVsRestLogistic",
    "OrdinalLogistic",
    "RegressionFeaturizer",
    "build",
    "fit_regression",
]
