"""Local asymptotic normality laboratory for diffusions with a periodic drift signal.

Simulates d xi = [S_theta(t/T) + b(xi)] dt + sigma(xi) dW, computes scores,
Fisher information and likelihood expansions, and estimates (theta, T) jointly.
"""

from .errors import (
    BoundaryMaximum,
    InvalidModel,
    InvalidParameter,
    NeedsPathEstimate,
    ResourceLimit,
    S7Violation,
    SingularNormalEquations,
)
from .estimator import EstimationResult, profile_mle, quasi_log_likelihood, rate_experiment
from .fisher import FisherMatrix, check_S7, fisher_matrix, fisher_path_estimate
from .lan import LanReport, LocalScale, lan_report, log_likelihood_ratio_obs, log_likelihood_ratio_sim, score
from .sde import DiffusionSpec, PathRecord, grid_chain, simulate_path
from .signals import SignalSpec, derivatives, evaluate

__version__ = "0.1.0"
