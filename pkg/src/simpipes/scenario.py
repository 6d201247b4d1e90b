"""Experiment definitions: unknown systems, scenarios and algorithms."""
import dataclasses
import hashlib
from dataclasses import dataclass, field
from typing import *

import numpy as np
import scipy.signal as sig

from adaptfilt.errors import ParameterError, StructuralError, require
from adaptfilt.nlms import NlmsFilter
from adaptfilt.signals import (INPUT_STREAM, NOISE_STREAM, SYSTEM_STREAM,
                               NoiseSchedule, Seed, SignalSpec, gen_noise,
                               make_signal, run_seed)
from adaptfilt.vss import VssNlmsFilter, VssParams, regularization_delta

SYSTEM_KINDS = ('random_normalized', 'echo_path', 'explicit')

AEC_TAPS = 512
AEC_ITERATIONS = 20000
AEC_FLIP = 10000
AEC_DECAY = 64.0
AEC_NOISE = 0.01


def _normalized(taps: np.ndarray) -> np.ndarray:
    return taps / np.sqrt(np.sum(taps**2))


def make_unknown_system(M: int, seed: Seed,
                        zero_mean: bool = False) -> np.ndarray:
    """Uniform(0, 1) taps scaled to unit energy.

    zero_mean draws from uniform(-0.5, 0.5) instead.
    """
    require(M >= 1, 'M must be >= 1 [{}]'.format(M))

    taps = np.random.default_rng(seed).uniform(0.0, 1.0, M)
    if zero_mean:
        taps -= 0.5

    return _normalized(taps)


def make_echo_path(M: int, decay_constant: float, seed: Seed) -> np.ndarray:
    """Gaussian taps under an exp(-k/decay_constant) envelope, unit energy."""
    require(M >= 1, 'M must be >= 1 [{}]'.format(M))
    require(decay_constant > 0,
            'decay constant must be > 0 [{}]'.format(decay_constant))

    taps = np.random.default_rng(seed).standard_normal(M)
    return _normalized(taps * np.exp(-np.arange(M) / decay_constant))


@dataclass(frozen=True)
class UnknownSystem:
    kind: str = 'random_normalized'
    # None draws a fresh system per run from the run's own seed
    seed: Optional[int] = None
    decay: float = AEC_DECAY
    taps: Optional[Tuple[float, ...]] = None
    zero_mean: bool = False

    def __post_init__(self):
        require(self.kind in SYSTEM_KINDS,
                'unknown system kind [{}], expected one of {}'.format(
                    self.kind, ', '.join(SYSTEM_KINDS)))
        require(self.kind != 'explicit' or self.taps is not None,
                'explicit system requires taps')
        require(self.decay > 0, 'decay must be > 0 [{}]'.format(self.decay))
        if self.taps is not None:
            object.__setattr__(self, 'taps',
                               tuple(float(t) for t in self.taps))

    @classmethod
    def explicit(cls, taps):
        return cls(kind='explicit', taps=tuple(np.asarray(taps).reshape(-1)))

    def generate(self, M: int, seed: Seed) -> np.ndarray:
        """Taps for one run; seed is used only when self.seed is None."""
        if self.kind == 'explicit':
            if len(self.taps) != M:
                raise StructuralError(
                    'echo path has {} taps, expected M={}'.format(
                        len(self.taps), M))
            return np.array(self.taps)

        seed = seed if self.seed is None else self.seed
        if self.kind == 'echo_path':
            return make_echo_path(M, self.decay, seed)

        return make_unknown_system(M, seed, self.zero_mean)

    def __str__(self):
        if self.kind == 'explicit':
            return 'explicit({} taps)'.format(len(self.taps))
        if self.kind == 'echo_path':
            return 'echo_path(decay={:g}, seed={})'.format(
                self.decay, self.seed)
        return 'random_normalized(seed={})'.format(self.seed)


@dataclass(frozen=True)
class Scenario:
    M: int = 10
    system: UnknownSystem = field(default_factory=UnknownSystem)
    # w_o is replaced by -w_o from this iteration on
    flip_iteration: Optional[int] = None
    input: SignalSpec = field(default_factory=SignalSpec)
    noise: NoiseSchedule = field(default_factory=NoiseSchedule)
    iterations: int = 2000
    runs: int = 100
    master_seed: int = 0

    def __post_init__(self):
        require(self.M >= 1, 'M must be >= 1 [{}]'.format(self.M))
        require(self.iterations > 0,
                'iterations must be > 0 [{}]'.format(self.iterations))
        require(self.runs >= 1, 'runs must be >= 1 [{}]'.format(self.runs))
        require(self.master_seed >= 0,
                'master_seed must be >= 0 [{}]'.format(self.master_seed))
        if self.flip_iteration is not None:
            require(
                0 <= self.flip_iteration < self.iterations,
                'flip_iteration must lie in [0, iterations) [{}]'.format(
                    self.flip_iteration))
        if self.system.kind == 'explicit' and len(self.system.taps) != self.M:
            raise StructuralError('echo path has {} taps, expected M={}'.format(
                len(self.system.taps), self.M))

    def replace(self, **changes) -> 'Scenario':
        return dataclasses.replace(self, **changes)

    @property
    def events(self) -> Tuple[int, ...]:
        """Iterations where the unknown system or the noise level changes."""
        starts = {start for start, _ in self.noise.segments if start > 0}
        if self.flip_iteration is not None and self.flip_iteration > 0:
            starts.add(self.flip_iteration)
        return tuple(sorted(s for s in starts if s < self.iterations))

    @property
    def hash(self) -> str:
        return hashlib.sha1(repr(self).encode('utf-8')).hexdigest()[:12]

    def unknown_systems(self, run_indices: Sequence[int]) -> np.ndarray:
        return np.stack([
            self.system.generate(self.M,
                                 run_seed(self.master_seed, r, SYSTEM_STREAM))
            for r in run_indices
        ])

    def synthesize(self, run_indices: Sequence[int]):
        """Input, noise and unknown systems for the given runs.

        Returns x and v with shape (R, iterations) and w_o with shape (R, M).
        """
        n = self.iterations
        x = np.stack([
            make_signal(self.input, n,
                        run_seed(self.master_seed, r, INPUT_STREAM))
            for r in run_indices
        ])
        v = np.stack([
            gen_noise(self.noise, n,
                      run_seed(self.master_seed, r, NOISE_STREAM))
            for r in run_indices
        ])

        return x, v, self.unknown_systems(run_indices)

    def echo(self, x: np.ndarray, w_o: np.ndarray) -> np.ndarray:
        """Noise-free desired signal w_o(n).x(n), sign-flipped after the flip."""
        result = np.stack([sig.lfilter(w, [1.0], row) for w, row in zip(w_o, x)])
        if self.flip_iteration is not None:
            result[:, self.flip_iteration:] *= -1

        return result

    def target(self, w_o: np.ndarray, n: int) -> np.ndarray:
        if self.flip_iteration is not None and n >= self.flip_iteration:
            return -w_o
        return w_o


@dataclass(frozen=True)
class Algorithm:
    kind: str = 'vss'
    mu: float = 1.0
    params: Optional[VssParams] = None
    delta: float = 1e-6

    def __post_init__(self):
        require(self.kind in ('nlms', 'vss'),
                'unknown algorithm [{}], expected nlms or vss'.format(
                    self.kind))
        require(self.kind != 'vss' or self.params is not None,
                'vss algorithm requires parameters')
        require(self.delta > 0, 'delta must be > 0 [{}]'.format(self.delta))
        if self.kind == 'nlms':
            require(0 <= self.mu < 2,
                    'fixed step size must satisfy 0 <= mu < 2 [{}]'.format(
                        self.mu))

    @classmethod
    def nlms(cls, mu: float, delta: float = 1e-6):
        return cls(kind='nlms', mu=mu, delta=delta)

    @classmethod
    def vss(cls, params: VssParams, delta: float = 1e-6):
        return cls(kind='vss', params=params, delta=delta)

    @property
    def id(self) -> str:
        if self.kind == 'nlms':
            return 'nlms(mu={:g})'.format(self.mu)
        p = self.params
        return 'vss(mu_min={:g}, mu_max={:g}, beta={:g}, alpha={:.8g})'.format(
            p.mu_min, p.mu_max, p.beta, p.alpha)

    def with_beta(self, beta: float) -> 'Algorithm':
        require(self.kind == 'vss', 'beta applies to the vss algorithm only')
        p = self.params
        return Algorithm.vss(
            VssParams(alpha=p.alpha,
                      mu_min=p.mu_min,
                      mu_max=p.mu_max,
                      beta=beta,
                      rho=p.rho), self.delta)

    def make_filter(self, M: int, batch_shape=()) -> NlmsFilter:
        if self.kind == 'nlms':
            return NlmsFilter(M, self.delta, self.mu, batch_shape)
        return VssNlmsFilter(self.params, M, self.delta, batch_shape)


def identification_scenario(M: int = 10,
                            noise: Union[float, NoiseSchedule] = 0.01,
                            input: Optional[SignalSpec] = None,
                            **kwargs) -> Scenario:
    """System identification with a random unit-norm w_o and unit-power input."""
    if not isinstance(noise, NoiseSchedule):
        noise = NoiseSchedule.constant(noise)

    return Scenario(M=M,
                    input=input or SignalSpec('white_gaussian', 1.0),
                    noise=noise,
                    **kwargs)


def aec_scenario(input: Optional[SignalSpec] = None,
                 system: Optional[UnknownSystem] = None,
                 **kwargs) -> Scenario:
    """Single-run echo cancellation with a synthetic or recorded talker."""
    values = dict(M=AEC_TAPS,
                  iterations=AEC_ITERATIONS,
                  flip_iteration=AEC_FLIP,
                  runs=1,
                  noise=NoiseSchedule.constant(AEC_NOISE))
    values.update(kwargs)

    if system is None:
        system = UnknownSystem('echo_path', seed=values.get('master_seed', 0),
                               decay=AEC_DECAY)
    if input is None:
        input = SignalSpec('speech_like', 1.0)

    return Scenario(input=input, system=system, **values)


def aec_delta(scenario: Scenario, input_power: float = 1.0) -> float:
    """Regularization from the echo-to-noise ratio of the scenario."""
    noise_power = scenario.noise.max_variance
    if noise_power == 0:
        raise ParameterError('regularization rule needs a nonzero noise power')

    return regularization_delta(scenario.M, input_power,
                                input_power / noise_power)
