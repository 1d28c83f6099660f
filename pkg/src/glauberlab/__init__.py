"""Exact-analysis and simulation laboratory for heat-bath Glauber dynamics
on the mean-field Ising model: magnetization chains, spectral gaps,
electrical networks, Monte Carlo estimators, and regime scans."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    ConsistencyError,
    DomainError,
    ModelParams,
    SpinConfiguration,
    gibbs_log_weight,
    gibbs_log_weights,
    magnetization,
    update_probabilities,
)
