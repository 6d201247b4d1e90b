"""Experiment configuration files.

An experiment is an INI file with the sections [scenario], [input],
[noise], [system], [algorithm] and [output]; every key is optional and
falls back to the defaults of the sim or aec command. See README.md for
the full grammar.
"""
import configparser
import os
from dataclasses import dataclass, replace
from typing import *

import simpipes
from adaptfilt.errors import (AdaptFiltError, BetaBoundError, IngestionError,
                              ParameterError)
from adaptfilt.signals import NoiseSchedule, SignalSpec
from adaptfilt.theory import SteadyStateInputs, check_beta
from adaptfilt.vss import (DEFAULT_RHO, TABLE_BETA, TABLE_KAPPA, TABLE_MU_MAX,
                           TABLE_MU_MIN, VssParams, default_alpha,
                           regularization_delta)
from simpipes.fileutils import VerifiedFile, read_coefficients
from simpipes.scenario import (AEC_DECAY, AEC_FLIP, AEC_ITERATIONS, AEC_NOISE,
                               AEC_TAPS, Algorithm, Scenario, UnknownSystem)

SECTIONS = ('scenario', 'input', 'noise', 'system', 'algorithm', 'output')

SIM_DEFAULTS = {
    'scenario': {
        'M': '10',
        'iterations': '2000',
        'runs': '100',
        'seed': '0',
        'flip_iteration': 'none'
    },
    'input': {
        'kind': 'white_gaussian',
        'variance': '1.0',
        'pole': '0.5'
    },
    'noise': {
        'schedule': '0.01'
    },
    'system': {
        'kind': 'random_normalized',
        'seed': 'none',
        'decay': str(AEC_DECAY),
        'zero_mean': 'false'
    },
    'algorithm': {
        'kind': 'vss',
        'mu': '1.0',
        'mu_min': str(TABLE_MU_MIN),
        'mu_max': str(TABLE_MU_MAX),
        'beta': str(TABLE_BETA),
        'kappa': str(TABLE_KAPPA),
        'alpha': 'none',
        'rho': str(DEFAULT_RHO),
        'delta': '1e-6',
        'snr_db': 'none'
    },
    'output': {
        'csv': 'trace.csv',
        'theory_check': 'true',
        'tolerance': '0.15',
        'window': '0.25'
    }
}

AEC_DEFAULTS = {
    'scenario': {
        'M': str(AEC_TAPS),
        'iterations': str(AEC_ITERATIONS),
        'runs': '1',
        'flip_iteration': str(AEC_FLIP)
    },
    'input': {
        'kind': 'speech_like'
    },
    'noise': {
        'schedule': str(AEC_NOISE)
    },
    'system': {
        'kind': 'echo_path',
        'seed': '0'
    },
    'algorithm': {
        'delta': 'auto'
    },
    'output': {
        'csv': 'aec.csv',
        'theory_check': 'false'
    }
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    kind: str = 'vss'
    mu: float = 1.0
    params: Optional[VssParams] = None
    # None applies the regularization rule
    delta: Optional[float] = 1e-6
    snr_linear: Optional[float] = None
    output: str = 'trace.csv'
    theory_check: bool = True
    tolerance: float = 0.15
    window_fraction: float = 0.25
    jobs: int = 1

    @property
    def input_power(self) -> float:
        variance = self.scenario.input.variance
        return 1.0 if variance is None else variance

    @property
    def snr(self) -> float:
        """Linear SNR for the regularization rule."""
        if self.snr_linear is not None:
            return self.snr_linear

        noise_power = self.scenario.noise.max_variance
        if noise_power == 0:
            raise ParameterError(
                'delta = auto needs snr_db or a nonzero noise power')
        return self.input_power / noise_power

    @property
    def resolved_delta(self) -> float:
        if self.delta is not None:
            return self.delta
        return regularization_delta(self.scenario.M, self.input_power,
                                    self.snr)

    @property
    def algorithm(self) -> Algorithm:
        if self.kind == 'nlms':
            return Algorithm.nlms(self.mu, self.resolved_delta)
        return Algorithm.vss(self.params, self.resolved_delta)

    def steady_state_inputs(self) -> SteadyStateInputs:
        """Theory inputs at the largest scheduled noise power."""
        if self.kind != 'vss':
            raise ParameterError('[algorithm] theory needs kind = vss')
        return SteadyStateInputs.from_params(self.params, self.scenario.M,
                                             self.scenario.noise.max_variance,
                                             self.input_power)

    def check_beta(self):
        if self.kind == 'vss':
            check_beta(self.steady_state_inputs())

    def with_overrides(self,
                       seed: Optional[int] = None,
                       runs: Optional[int] = None,
                       iterations: Optional[int] = None,
                       output: Optional[str] = None,
                       snr_db: Optional[float] = None,
                       jobs: Optional[int] = None) -> 'ExperimentConfig':
        scenario_changes = {}
        if seed is not None:
            scenario_changes['master_seed'] = seed
        if runs is not None:
            scenario_changes['runs'] = runs
        if iterations is not None:
            scenario_changes['iterations'] = iterations

        changes = {}
        if scenario_changes:
            changes['scenario'] = self.scenario.replace(**scenario_changes)
        if output is not None:
            changes['output'] = output
        if snr_db is not None:
            changes['snr_linear'] = db_to_linear(snr_db)
        if jobs is not None:
            changes['jobs'] = jobs

        return replace(self, **changes)


def db_to_linear(snr_db: float) -> float:
    return 10**(snr_db / 10)


def _optional(value: str) -> Optional[str]:
    if value is None or value.strip().lower() in ('', 'none'):
        return None
    return value.strip()


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, base_dir: str):
        self.parser = parser
        self.base_dir = base_dir

    def get(self, section: str, key: str, convert=str, optional=False):
        raw = self.parser.get(section, key, fallback=None)
        if optional:
            raw = _optional(raw)
            if raw is None:
                return None
        if raw is None:
            raise ParameterError('[{}] {} is required'.format(section, key))

        try:
            if convert is bool:
                return self.parser.getboolean(section, key)
            return convert(raw)
        except ValueError:
            raise ParameterError('[{}] {} = {} is not a valid {}'.format(
                section, key, raw, convert.__name__))

    def path(self, section: str, key: str) -> Optional[str]:
        raw = self.get(section, key, optional=True)
        if raw is None:
            return None
        if not os.path.isabs(raw):
            raw = os.path.join(self.base_dir, raw)
        return VerifiedFile(raw, exists=True, mkparents=False).path


def _build(section: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except BetaBoundError:
        raise
    except AdaptFiltError as e:
        raise type(e)('[{}] {}'.format(section, e))
    except ValueError as e:
        raise ParameterError('[{}] {}'.format(section, e))


def _read_input(reader: _Reader) -> SignalSpec:
    variance = reader.get('input', 'variance')
    variance = None if variance.strip().lower() == 'native' else _build(
        'input', float, variance)

    return _build('input',
                  SignalSpec,
                  kind=reader.get('input', 'kind'),
                  variance=variance,
                  pole=reader.get('input', 'pole', float),
                  path=reader.path('input', 'path'))


def _read_system(reader: _Reader, M: int) -> UnknownSystem:
    kind = reader.get('system', 'kind')
    if kind == 'explicit':
        path = reader.path('system', 'path')
        if path is None:
            raise ParameterError('[system] explicit echo path requires path')
        return UnknownSystem.explicit(read_coefficients(path, M))

    return _build('system',
                  UnknownSystem,
                  kind=kind,
                  seed=reader.get('system', 'seed', int, optional=True),
                  decay=reader.get('system', 'decay', float),
                  zero_mean=reader.get('system', 'zero_mean', bool))


def _read_params(reader: _Reader, M: int) -> VssParams:
    alpha = reader.get('algorithm', 'alpha', float, optional=True)
    if alpha is None:
        alpha = _build('algorithm', default_alpha, M,
                       reader.get('algorithm', 'kappa', float))

    return _build('algorithm',
                  VssParams,
                  alpha=alpha,
                  mu_min=reader.get('algorithm', 'mu_min', float),
                  mu_max=reader.get('algorithm', 'mu_max', float),
                  beta=reader.get('algorithm', 'beta', float),
                  rho=reader.get('algorithm', 'rho', float))


def read_config(path: Optional[str] = None,
                mode: str = 'sim') -> ExperimentConfig:
    """Parse an experiment file; path None gives the defaults of mode."""
    parser = configparser.ConfigParser(inline_comment_prefixes=('#', ';'))
    parser.optionxform = str
    parser.read_dict(SIM_DEFAULTS)
    if mode == 'aec':
        parser.read_dict(AEC_DEFAULTS)

    base_dir = os.getcwd()
    if path is not None:
        config_file = VerifiedFile(path, exists=True, mkparents=False)
        base_dir = os.path.dirname(config_file.path)

        if simpipes.__verbose__:
            print('reading configuration from', config_file.path)

        try:
            with open(config_file.path, encoding='utf-8') as config_fd:
                parser.read_file(config_fd)
        except configparser.Error as e:
            raise IngestionError('malformed config [{}]: {}'.format(path, e))

        unknown = [s for s in parser.sections() if s not in SECTIONS]
        if unknown:
            raise ParameterError('unknown section [{}] in [{}]'.format(
                unknown[0], path))

    reader = _Reader(parser, base_dir)
    M = reader.get('scenario', 'M', int)
    scenario = _build('scenario',
                      Scenario,
                      M=M,
                      system=_read_system(reader, M),
                      flip_iteration=reader.get('scenario',
                                                'flip_iteration',
                                                int,
                                                optional=True),
                      input=_read_input(reader),
                      noise=_build('noise', NoiseSchedule.parse,
                                   reader.get('noise', 'schedule')),
                      iterations=reader.get('scenario', 'iterations', int),
                      runs=reader.get('scenario', 'runs', int),
                      master_seed=reader.get('scenario', 'seed', int))

    kind = reader.get('algorithm', 'kind')
    if kind not in ('nlms', 'vss'):
        raise ParameterError(
            '[algorithm] kind = {} is not one of nlms, vss'.format(kind))

    delta = reader.get('algorithm', 'delta')
    delta = None if delta.strip().lower() == 'auto' else _build(
        'algorithm', float, delta)
    snr_db = reader.get('algorithm', 'snr_db', float, optional=True)

    config = ExperimentConfig(
        scenario=scenario,
        kind=kind,
        mu=reader.get('algorithm', 'mu', float),
        params=_read_params(reader, M) if kind == 'vss' else None,
        delta=delta,
        snr_linear=None if snr_db is None else db_to_linear(snr_db),
        output=reader.get('output', 'csv'),
        theory_check=reader.get('output', 'theory_check', bool),
        tolerance=reader.get('output', 'tolerance', float),
        window_fraction=reader.get('output', 'window', float))

    # validates mu and delta
    _build('algorithm', lambda: config.algorithm)

    return config
