"""Evolving diverse easy and hard TSP instances for 2-OPT, with feature
extraction and SVM-based hardness separation."""

from ._kernels import BACKEND, HAVE_COMPILED
from .diversity import (
    EvaluatedInstance,
    Population,
    WeightSpec,
    prune,
    single_feature_contributions,
    weighted_contributions,
)
from .ea import EaConfig, RunLog, bootstrap, evolve, mutate, reference_config, save_run
from .errors import (
    BootstrapBudgetError,
    ConfigError,
    InstanceForgeError,
    InstanceFormatError,
    OracleCapacityError,
    OracleError,
    OracleInconsistencyError,
)
from .features import (
    FEATURE_IDS,
    FeatureVector,
    compute_all,
    feature_bound,
    feature_bounds,
)
from .instances import RandomSource, TspInstance, random_instance, read_instance, write_instance
from .solvers import (
    CachedOracle,
    CommandOracle,
    ExactOracle,
    SolveReport,
    approximation_ratio,
    exact_optimum,
    make_oracle,
    two_opt,
    two_opt_mean_quality,
)
from .svm import Dataset, KernelSpec, SvmModel, combination_sweep, predict, train, training_accuracy

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "BootstrapBudgetError",
    "CachedOracle",
    "CommandOracle",
    "ConfigError",
    "Dataset",
    "EaConfig",
    "EvaluatedInstance",
    "ExactOracle",
    "FEATURE_IDS",
    "FeatureVector",
    "InstanceForgeError",
    "InstanceFormatError",
    "KernelSpec",
    "OracleCapacityError",
    "OracleError",
    "OracleInconsistencyError",
    "Population",
    "RandomSource",
    "RunLog",
    "SolveReport",
    "SvmModel",
    "TspInstance",
    "WeightSpec",
    "approximation_ratio",
    "bootstrap",
    "combination_sweep",
    "compute_all",
    "evolve",
    "exact_optimum",
    "feature_bound",
    "feature_bounds",
    "make_oracle",
    "mutate",
    "reference_config",
    "predict",
    "prune",
    "random_instance",
    "read_instance",
    "save_run",
    "single_feature_contributions",
    "train",
    "training_accuracy",
    "two_opt",
    "two_opt_mean_quality",
    "weighted_contributions",
    "write_instance",
]
