"""Variable step size control for NLMS.

The step size follows the estimated tracking-error power
sigma_c2 = |gamma_ex|^2/(rho + sigma_x2), where gamma_ex is the smoothed
error/regressor cross-correlation and sigma_x2 the smoothed input power:

    mu = mu_max - (mu_max - mu_min)*exp(-beta*sigma_c2)

A filter far from the optimum sees a large cross-correlation and adapts
fast; near the optimum the error decorrelates from the input and mu falls
back to mu_min, regardless of the noise level.
"""
import warnings
from dataclasses import dataclass
from typing import *

import numpy as np

from adaptfilt.errors import ParameterError, ParameterWarning, require
from adaptfilt.nlms import (FilterRun, NlmsConfig, NlmsFilter, _check_lengths,
                            _streams, _window, inner, iter_filter, run_filter)

TABLE_MU_MIN = 0.001
TABLE_MU_MAX = 1.2
TABLE_KAPPA = 2.0
TABLE_BETA = 20.0
HIGH_NOISE_BETA = 5.0
DEFAULT_RHO = 1e-6


@dataclass(frozen=True)
class VssParams:
    alpha: float
    mu_min: float = TABLE_MU_MIN
    mu_max: float = TABLE_MU_MAX
    beta: float = TABLE_BETA
    rho: float = DEFAULT_RHO

    def __post_init__(self):
        require(0 < self.mu_min,
                'mu_min must be > 0 [{}]'.format(self.mu_min))
        require(self.mu_min <= self.mu_max,
                'mu_min must not exceed mu_max [{} > {}]'.format(
                    self.mu_min, self.mu_max))
        require(self.mu_max < 2, 'mu_max must be < 2 [{}]'.format(self.mu_max))
        require(0 <= self.alpha < 1,
                'alpha must satisfy 0 <= alpha < 1 [{}]'.format(self.alpha))
        require(self.rho > 0, 'rho must be > 0 [{}]'.format(self.rho))
        require(self.beta >= 0, 'beta must be >= 0 [{}]'.format(self.beta))

    @classmethod
    def for_length(cls, M: int, kappa: float = TABLE_KAPPA, **kwargs):
        """Parameters with alpha = 1 - 1/(kappa*M); other fields as given."""
        return cls(alpha=default_alpha(M, kappa), **kwargs)


@dataclass
class VssState:
    sigma_x2: np.ndarray
    gamma_ex: np.ndarray
    last_mu: np.ndarray
    last_sigma_c2: np.ndarray

    @classmethod
    def zeros(cls, M: int, mu_min: float, batch_shape=()):
        batch_shape = tuple(batch_shape)
        return cls(sigma_x2=np.zeros(batch_shape),
                   gamma_ex=np.zeros(batch_shape + (M, )),
                   last_mu=np.full(batch_shape, float(mu_min)),
                   last_sigma_c2=np.zeros(batch_shape))

    @property
    def M(self):
        return self.gamma_ex.shape[-1]


# The three estimator updates modify the state in place and return it.


def update_input_power(state: VssState, x_n, alpha: float) -> VssState:
    require(0 <= alpha < 1, 'alpha must satisfy 0 <= alpha < 1 [{}]'.format(
        alpha))
    state.sigma_x2 = alpha * state.sigma_x2 + (1 - alpha) * np.square(x_n)
    return state


def update_crosscorr(state: VssState, e, x, alpha: float) -> VssState:
    require(0 <= alpha < 1, 'alpha must satisfy 0 <= alpha < 1 [{}]'.format(
        alpha))
    x = _window(x)
    _check_lengths(state.gamma_ex, x)

    e = np.asarray(e, dtype=np.float64)
    state.gamma_ex = alpha * state.gamma_ex + (1 - alpha) * e[..., None] * x
    return state


def tracking_error_power(state: VssState, rho: float) -> np.ndarray:
    require(rho > 0, 'rho must be > 0 [{}]'.format(rho))
    sigma_c2 = inner(state.gamma_ex, state.gamma_ex) / (rho + state.sigma_x2)
    state.last_sigma_c2 = sigma_c2
    return sigma_c2


def step_size(sigma_c2, params: VssParams):
    """Map sigma_c2 >= 0 to a step in [mu_min, mu_max]."""
    sigma_c2 = np.asarray(sigma_c2, dtype=np.float64)
    require(np.all(sigma_c2 >= 0),
            'sigma_c2 must be >= 0 [{}]'.format(sigma_c2))

    exponent = params.beta * sigma_c2
    span = params.mu_max - params.mu_min
    mu = np.where(exponent == 0, params.mu_min,
                  params.mu_max - span * np.exp(-exponent))
    mu = np.clip(mu, params.mu_min, params.mu_max)

    return mu[()]


def step_size_curve(params: VssParams, sigma_c2_grid,
                    betas: Sequence[float]) -> np.ndarray:
    """mu over sigma_c2_grid for each beta; shape (len(betas), len(grid))."""
    params_dict = dict(alpha=params.alpha,
                       mu_min=params.mu_min,
                       mu_max=params.mu_max,
                       rho=params.rho)
    return np.stack([
        np.atleast_1d(step_size(sigma_c2_grid, VssParams(beta=b, **params_dict)))
        for b in betas
    ])


def default_alpha(M: int, kappa: float = TABLE_KAPPA) -> float:
    require(M >= 1, 'M must be >= 1 [{}]'.format(M))
    require(kappa * M >= 1,
            'kappa*M must be >= 1 for a valid weighting factor [{}]'.format(
                kappa * M))
    if kappa < 2:
        warnings.warn(
            'kappa={:g} is below the recommended minimum of 2'.format(kappa),
            ParameterWarning)

    return 1 - 1 / (kappa * M)


def regularization_delta(M: int, sigma_x2: float, snr_linear: float) -> float:
    """delta = M*(1 + sqrt(1 + SNR))*sigma_x2/SNR, SNR as a linear ratio."""
    if not snr_linear > 0:
        raise ParameterError(
            'snr must be a positive linear ratio [{}]'.format(snr_linear))
    require(sigma_x2 >= 0, 'sigma_x2 must be >= 0 [{}]'.format(sigma_x2))

    return M * (1 + np.sqrt(1 + snr_linear)) * sigma_x2 / snr_linear


class VssNlmsFilter(NlmsFilter):
    """NLMS whose step comes from the tracking-error power estimate.

    Per sample: error, input power, cross-correlation, sigma_c2, mu, then
    the weight update, all using the current sample.
    """
    def __init__(self,
                 params: VssParams,
                 M: int,
                 delta: float,
                 batch_shape=(),
                 w0=None):
        super().__init__(M, delta, params.mu_min, batch_shape, w0)
        self.params = params
        self.state = VssState.zeros(M, params.mu_min, self.batch_shape)

    def step_size(self, e):
        alpha = self.params.alpha
        update_input_power(self.state, self.buffer.window[..., 0], alpha)
        update_crosscorr(self.state, e, self.buffer, alpha)
        sigma_c2 = tracking_error_power(self.state, self.params.rho)

        mu = step_size(sigma_c2, self.params)
        self.state.last_mu = mu
        return mu, sigma_c2


def iter_vss_nlms(params: VssParams, config: NlmsConfig, x, d, w0=None):
    x, d = _streams(x, d)
    filt = VssNlmsFilter(params, config.M, config.delta, x.shape[:-1], w0)
    return iter_filter(filt, x, d)


def run_vss_nlms(params: VssParams,
                 config: NlmsConfig,
                 x,
                 d,
                 w0=None,
                 keep_weights=False) -> FilterRun:
    """The full variable-step algorithm over streams of shape (..., N).

    config.mu is ignored; FilterRun.mu and .sigma_c2 hold the per-iteration
    step and tracking-error power.
    """
    x, d = _streams(x, d)
    filt = VssNlmsFilter(params, config.M, config.delta, x.shape[:-1], w0)
    return run_filter(filt, x, d, keep_weights)
