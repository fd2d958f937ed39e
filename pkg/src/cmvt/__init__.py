"""Conditional matrix-variate Student t estimation for Bayesian VAR(p) models.

Two model types share one parameter shape (pi0, Lambda0, nu0, V0): the
whole-sample Type I model (a single coefficient/covariance draw) and the
per-period Type II model (independent draws every period). Each comes in a
general and a Minnesota-prior flavour, estimated by EM with a monotone
observed-data objective.
"""

__version__ = "0.1.0"

from . import cli, data, estimators, minnesota, simulate, special, type1, type2
from .data import DesignMatrices, TimeSeriesDataset, build_design, load_dataset
from .estimators import (
    MinnesotaType1MatrixT,
    MinnesotaType2MatrixT,
    Type1MatrixT,
    Type2MatrixT,
)
from .exceptions import FactorizationError, NoSignChangeError, NumericError
from .fitting import EMTrace, FitOptions, run_em
from .minnesota import MinnesotaHyper
from .params import TParams, default_params
from .simulate import RngStream, sample_coeff_vector, sample_inverse_wishart, simulate_bvar

__all__ = [
    "DesignMatrices",
    "EMTrace",
    "FactorizationError",
    "FitOptions",
    "MinnesotaHyper",
    "MinnesotaType1MatrixT",
    "MinnesotaType2MatrixT",
    "NoSignChangeError",
    "NumericError",
    "RngStream",
    "TParams",
    "TimeSeriesDataset",
    "Type1MatrixT",
    "Type2MatrixT",
    "build_design",
    "cli",
    "data",
    "default_params",
    "estimators",
    "load_dataset",
    "minnesota",
    "sample_coeff_vector",
    "sample_inverse_wishart",
    "simulate",
    "simulate_bvar",
    "special",
    "type1",
    "type2",
    "__version__",
]
