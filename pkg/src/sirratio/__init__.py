"""Simulation and estimation toolkit for the discrete-time stochastic SIR model."""

from .api import (
    ARReproduction,
    BinomialML,
    GammaPoissonPosterior,
    GaussianAML,
    InstantaneousR,
    PoissonAML,
    PoissonGaussian,
    UnfeasibleGaussian,
    check_count_path,
    check_incidence,
)
from .core import CountPath, EpidemicState, ModelParams, TransitionCounts, simulate, step, transition_matrix
from .estimators import METHODS, FitResult, build_stats, fit, rolling_fit
from .exceptions import *  # noqa: F401,F403
from .reproduction import RzeroConfig, basic_r0, effective_r0, rzero_path
from .rng import DEFAULT_SEED, RngStream

__version__ = "0.1.0"
