"""Optimal low-rank approximations of linear Gaussian posteriors."""

import json

from . import _core
from ._core import (
    DegeneracyError,
    DomainError,
    InputError,
    LrpostError,
    NumericalError,
    NumericalIntegrationError,
    Problem,
    RangeError,
    SingularityError,
    covariance_loss,
    divergence,
    joint_loss,
    mean_loss_hs_oracle,
    optimal_covariance,
    optimal_mean,
    posterior,
    posterior_covariance,
    posterior_mean_operator,
    sample_data,
    spectrum,
)

__all__ = [
    "DegeneracyError", "DomainError", "InputError", "LrpostError", "NumericalError",
    "NumericalIntegrationError", "Problem", "RangeError", "SingularityError",
    "covariance_loss", "deconvolution_problem", "divergence", "heat_problem", "joint_loss",
    "mean_loss_hs_oracle", "optimal_covariance", "optimal_mean", "posterior",
    "posterior_covariance", "posterior_mean_operator", "sample_data", "spectrum", "sweep",
]


def heat_problem(**config):
    return _core.heat_problem(json.dumps(config))


def deconvolution_problem(**config):
    return _core.deconvolution_problem(json.dumps(config))


def sweep(problem=None, **config):
    """Loss table as CSV text. Keyword arguments follow the experiment config keys."""
    text = json.dumps(config)
    if problem is None:
        return _core.sweep_csv(text)
    return _core.sweep_problem_csv(problem, text)
