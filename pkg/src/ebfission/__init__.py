"""Empirical Bayes estimation via data fission.

Split each observation into two synthetic replicates (f, g), regress g on f by
isotonic regression, plug in at f, and average over repeated splits. Includes
the classical comparison estimators (identity MLE, grid NPMLE, oracle Bayes)
and a seeded Monte Carlo harness that benchmarks them all.
"""

from .aurora import AuroraConfig, aurora_estimate, fission_rep_seeds, mse, single_fission_estimate
from .baselines import NpmleFit, fit_npmle, mle_estimate, npmle_estimate, oracle_bayes_estimate
from .errors import ConfigurationError, InputError, NumericError
from .fission import (
    FissionConfig,
    FissionedSample,
    fission_arrays,
    fission_dataset,
    fission_gaussian,
    fission_poisson,
    tau_from_info_split,
)
from .harness import (
    EstimatorSpec,
    ExperimentConfig,
    FigureData,
    SimulationReport,
    export_figure_data,
    run_experiment,
    true_mean_curve,
)
from .isotonic import MonotoneStepFn, fit_isotonic
from .model import (
    Dataset,
    LikelihoodModel,
    PriorSpec,
    bayes_posterior_mean,
    bayes_risk_mc,
    posterior_mean,
    sample_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "AuroraConfig",
    "ConfigurationError",
    "Dataset",
    "EstimatorSpec",
    "ExperimentConfig",
    "FigureData",
    "FissionConfig",
    "FissionedSample",
    "InputError",
    "LikelihoodModel",
    "MonotoneStepFn",
    "NpmleFit",
    "NumericError",
    "PriorSpec",
    "SimulationReport",
    "aurora_estimate",
    "bayes_posterior_mean",
    "bayes_risk_mc",
    "export_figure_data",
    "fission_arrays",
    "fission_dataset",
    "fission_gaussian",
    "fission_poisson",
    "fission_rep_seeds",
    "fit_isotonic",
    "fit_npmle",
    "mle_estimate",
    "mse",
    "npmle_estimate",
    "oracle_bayes_estimate",
    "posterior_mean",
    "run_experiment",
    "sample_dataset",
    "single_fission_estimate",
    "tau_from_info_split",
    "true_mean_curve",
]
