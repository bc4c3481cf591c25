from estimators.base import BinningConfig, EstimatorConfig, MIEstimate
from estimators.discrete import binning_mi, entropy_bits, plugin_discrete_mi
from estimators.gcmi import conditional_gcmi, copula_transform, gcmi
from estimators.kde import kde_mi_label
from estimators.lagrangian import ib_lagrangian
from estimators.projection import guard_dimension, guard_pair

__all__ = [
    "BinningConfig",
    "EstimatorConfig",
    "MIEstimate",
    "binning_mi",
    "conditional_gcmi",
    "copula_transform",
    "entropy_bits",
    "gcmi",
    "guard_dimension",
    "guard_pair",
    "ib_lagrangian",
    "kde_mi_label",
    "plugin_discrete_mi",
]
