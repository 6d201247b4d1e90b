"""Transversal NLMS filter with an externally supplied step size.

All arrays carry an optional leading batch shape, so one NlmsFilter can
drive R independent runs at once: weights are (..., M), scalars per sample
are (...). With an empty batch shape everything reduces to the textbook
single-filter case.
"""
from dataclasses import dataclass
from typing import *

import numpy as np

from adaptfilt.errors import NumericError, StructuralError, require


def inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum('...i,...i->...', a, b)


class RegressorBuffer:
    """Sliding window [x(n), x(n-1), ..., x(n-M+1)], zero before the first push."""
    def __init__(self, M: int, batch_shape: Tuple[int, ...] = ()):
        require(M >= 1, 'filter length must be >= 1 [{}]'.format(M))
        self.window = np.zeros(tuple(batch_shape) + (M, ))

    @property
    def M(self) -> int:
        return self.window.shape[-1]

    def push(self, x_n):
        self.window[..., 1:] = self.window[..., :-1]
        self.window[..., 0] = x_n

    def energy(self) -> np.ndarray:
        return inner(self.window, self.window)

    def __len__(self):
        return self.M


@dataclass(frozen=True)
class NlmsConfig:
    M: int
    delta: float = 1e-6
    # only used by fixed-step runs
    mu: float = 1.0

    def __post_init__(self):
        require(self.M >= 1, 'M must be >= 1 [{}]'.format(self.M))
        require(self.delta > 0, 'delta must be > 0 [{}]'.format(self.delta))
        require(0 <= self.mu < 2,
                'fixed step size must satisfy 0 <= mu < 2 [{}]'.format(
                    self.mu))


def _window(x) -> np.ndarray:
    if isinstance(x, RegressorBuffer):
        return x.window
    return np.asarray(x, dtype=np.float64)


def _check_lengths(w, x):
    if w.shape[-1] != x.shape[-1]:
        raise StructuralError(
            'tap vector has {} taps but the regressor holds {}'.format(
                w.shape[-1], x.shape[-1]))


def filter_error(w, x, d) -> Tuple[np.ndarray, np.ndarray]:
    """y = w.x and e = d - y."""
    w = np.asarray(w, dtype=np.float64)
    x = _window(x)
    _check_lengths(w, x)

    y = inner(w, x)
    return y, d - y


def nlms_update(w, x, e, mu, delta) -> np.ndarray:
    """w + mu*e*x/(delta + |x|^2), returned as a new array.

    delta may be 0 here; a zero regressor then leaves w unchanged.
    """
    w = np.asarray(w, dtype=np.float64)
    x = _window(x)
    _check_lengths(w, x)
    require(np.all(np.asarray(delta) >= 0),
            'delta must be >= 0 [{}]'.format(delta))

    for name, value in (('w', w), ('x', x), ('e', e), ('mu', mu)):
        if not np.all(np.isfinite(value)):
            raise NumericError('non-finite {} in NLMS update'.format(name))

    denom = delta + inner(x, x)
    numer = np.multiply(mu, e)
    gain = np.divide(numer,
                     denom,
                     out=np.zeros(np.broadcast(numer, denom).shape),
                     where=denom != 0)

    return w + gain[..., None] * x


@dataclass
class Step:
    """Quantities of one iteration; w_prior is w(n), w is w(n+1)."""
    n: int
    y: np.ndarray
    e: np.ndarray
    mu: np.ndarray
    sigma_c2: np.ndarray
    w_prior: np.ndarray
    w: np.ndarray


class NlmsFilter:
    """Fixed-step NLMS. Subclasses override step_size()."""
    def __init__(self,
                 M: int,
                 delta: float,
                 mu: float = 1.0,
                 batch_shape: Tuple[int, ...] = (),
                 w0=None):
        require(delta >= 0, 'delta must be >= 0 [{}]'.format(delta))
        self.delta = delta
        self.mu = mu
        self.buffer = RegressorBuffer(M, batch_shape)
        self.w = np.zeros(tuple(batch_shape) + (M, ))
        if w0 is not None:
            w0 = np.asarray(w0, dtype=np.float64)
            _check_lengths(self.w, w0)
            self.w[...] = w0
        self.n = 0

    @classmethod
    def from_config(cls, config: NlmsConfig, batch_shape=(), w0=None):
        return cls(config.M,
                   config.delta,
                   mu=config.mu,
                   batch_shape=batch_shape,
                   w0=w0)

    @property
    def M(self) -> int:
        return self.buffer.M

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.w.shape[:-1]

    def error(self, x_n, d_n):
        self.buffer.push(x_n)
        return filter_error(self.w, self.buffer, d_n)

    def step_size(self, e) -> Tuple[np.ndarray, np.ndarray]:
        mu = np.full(self.batch_shape, self.mu, dtype=np.float64)
        return mu, np.full(self.batch_shape, np.nan)

    def update(self, e, mu):
        self.w = nlms_update(self.w, self.buffer, e, mu, self.delta)

    def step(self, x_n, d_n) -> Step:
        w_prior = self.w
        y, e = self.error(x_n, d_n)
        bad = ~np.isfinite(e)
        if np.any(bad):
            err = NumericError('non-finite error at iteration {}'.format(
                self.n))
            # batch rows that failed, for callers driving many runs
            err.rows = np.flatnonzero(bad)
            raise err

        mu, sigma_c2 = self.step_size(e)
        self.update(e, mu)
        result = Step(self.n, y, e, mu, sigma_c2, w_prior, self.w)
        self.n += 1

        return result


@dataclass
class FilterRun:
    e: np.ndarray
    y: np.ndarray
    mu: np.ndarray
    sigma_c2: np.ndarray
    # w after the last update
    w: np.ndarray
    # w(n) before each update, shape (..., N, M), when requested
    weights: Optional[np.ndarray] = None


def _streams(x, d):
    x = np.asarray(x, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if x.shape != d.shape:
        raise StructuralError(
            'input stream {} and desired stream {} differ in shape'.format(
                x.shape, d.shape))

    return x, d


def iter_filter(filt: NlmsFilter, x, d) -> Iterator[Step]:
    x, d = _streams(x, d)
    for n in range(x.shape[-1]):
        yield filt.step(x[..., n], d[..., n])


def run_filter(filt: NlmsFilter, x, d, keep_weights=False) -> FilterRun:
    x, d = _streams(x, d)
    shape = x.shape
    e = np.empty(shape)
    y = np.empty(shape)
    mu = np.empty(shape)
    sigma_c2 = np.empty(shape)
    weights = np.empty(shape + (filt.M, )) if keep_weights else None

    for step in iter_filter(filt, x, d):
        n = step.n
        e[..., n] = step.e
        y[..., n] = step.y
        mu[..., n] = step.mu
        sigma_c2[..., n] = step.sigma_c2
        if keep_weights:
            weights[..., n, :] = step.w_prior

    return FilterRun(e, y, mu, sigma_c2, filt.w, weights)


def iter_fixed_nlms(config: NlmsConfig, x, d, w0=None) -> Iterator[Step]:
    x, d = _streams(x, d)
    filt = NlmsFilter.from_config(config, x.shape[:-1], w0)
    return iter_filter(filt, x, d)


def run_fixed_nlms(config: NlmsConfig, x, d, w0=None,
                   keep_weights=False) -> FilterRun:
    """Fixed-step NLMS over whole streams (shape (..., N)), starting from w0 or 0."""
    x, d = _streams(x, d)
    filt = NlmsFilter.from_config(config, x.shape[:-1], w0)
    return run_filter(filt, x, d, keep_weights)
