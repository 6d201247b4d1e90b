"""Steady-state predictions for fixed-step and variable-step NLMS.

All functions are closed-form and stateless. They assume a converged
filter, small misadjustment and delta much smaller than |x|^2; the minimum
mean-square error is the system-noise power sigma_v2.
"""
from dataclasses import dataclass
from typing import *

import numpy as np

from adaptfilt.errors import BetaBoundError, ParameterError, require
from adaptfilt.vss import VssParams


@dataclass(frozen=True)
class SteadyStateInputs:
    M: int
    alpha: float
    beta: float
    mu_min: float
    mu_max: float
    sigma_v2: float
    sigma_x2: float = 1.0
    delta: float = 0.0

    def __post_init__(self):
        require(self.M >= 1, 'M must be >= 1 [{}]'.format(self.M))
        require(0 <= self.alpha < 1,
                'alpha must satisfy 0 <= alpha < 1 [{}]'.format(self.alpha))
        require(self.beta >= 0, 'beta must be >= 0 [{}]'.format(self.beta))
        require(0 < self.mu_min <= self.mu_max < 2,
                'need 0 < mu_min <= mu_max < 2 [{}, {}]'.format(
                    self.mu_min, self.mu_max))
        require(self.sigma_v2 >= 0,
                'sigma_v2 must be >= 0 [{}]'.format(self.sigma_v2))
        require(self.sigma_x2 > 0,
                'sigma_x2 must be > 0 [{}]'.format(self.sigma_x2))
        require(self.delta >= 0, 'delta must be >= 0 [{}]'.format(self.delta))

    @classmethod
    def from_params(cls,
                    params: VssParams,
                    M: int,
                    sigma_v2: float,
                    sigma_x2: float = 1.0,
                    delta: float = 0.0):
        return cls(M=M,
                   alpha=params.alpha,
                   beta=params.beta,
                   mu_min=params.mu_min,
                   mu_max=params.mu_max,
                   sigma_v2=sigma_v2,
                   sigma_x2=sigma_x2,
                   delta=delta)

    @property
    def smoothing_ratio(self) -> float:
        # (1 - alpha)/(1 + alpha), the steady-state gain of the estimators
        return (1 - self.alpha) / (1 + self.alpha)

    @property
    def spread_term(self) -> float:
        """beta*M*(mu_max - mu_min)*(1 - alpha)*sigma_v2."""
        return (self.beta * self.M * (self.mu_max - self.mu_min) *
                (1 - self.alpha) * self.sigma_v2)


def _check_mu(mu: float):
    if not 0 < mu < 2:
        raise ParameterError(
            'step size outside the stable range 0 < mu < 2 [{}]'.format(mu))


def misadjustment(mu: float) -> float:
    _check_mu(mu)
    return mu / (2 - mu)


def expected_steady_mu(inputs: SteadyStateInputs) -> float:
    return inputs.mu_min + (inputs.mu_max - inputs.mu_min) * (
        inputs.beta * inputs.M * inputs.smoothing_ratio * inputs.sigma_v2)


def beta_upper_bound(inputs: SteadyStateInputs) -> float:
    """Largest beta (exclusive) that keeps the steady-state EMSE finite."""
    if inputs.sigma_v2 == 0 or inputs.mu_max == inputs.mu_min:
        return np.inf

    return (2 - inputs.mu_min) * (1 + inputs.alpha) / (
        inputs.M * (inputs.mu_max - inputs.mu_min) *
        (1 - inputs.alpha) * inputs.sigma_v2)


def check_beta(inputs: SteadyStateInputs):
    beta_max = beta_upper_bound(inputs)
    if not inputs.beta < beta_max:
        raise BetaBoundError(inputs.beta, beta_max)


def steady_emse(inputs: SteadyStateInputs) -> float:
    numer = inputs.mu_min * (1 + inputs.alpha) + inputs.spread_term
    denom = (2 - inputs.mu_min) * (1 + inputs.alpha) - inputs.spread_term
    if denom <= 0:
        raise BetaBoundError(inputs.beta, beta_upper_bound(inputs))

    return numer / denom * inputs.sigma_v2


def steady_msd_nlms(mu: float, M: int, sigma_v2: float, sigma_x2: float,
                    delta: float) -> float:
    _check_mu(mu)
    require(M >= 1, 'M must be >= 1 [{}]'.format(M))

    return mu * M * sigma_v2 / ((2 - mu) * M * sigma_x2 + 2 * delta)


def steady_msd(inputs: SteadyStateInputs) -> float:
    """Steady-state MSD of the variable-step filter, delta included."""
    M = inputs.M
    spread = inputs.beta * M**2 * (1 - inputs.alpha) * (inputs.mu_max -
                                                        inputs.mu_min)
    numer = (inputs.mu_min * M * (1 + inputs.alpha) * inputs.sigma_v2 +
             spread * inputs.sigma_v2**2)
    denom = ((1 + inputs.alpha) *
             ((2 - inputs.mu_min) * M * inputs.sigma_x2 + 2 * inputs.delta) -
             spread * inputs.sigma_x2 * inputs.sigma_v2)
    if denom <= 0:
        raise BetaBoundError(inputs.beta, beta_upper_bound(inputs))

    return numer / denom
