"""Excitation and noise sources for the identification experiments.

Every generator is a pure function of its arguments and a seed, so the
same (spec, seed) pair always yields the same samples. Ensemble runs get
their seeds from run_seed().
"""
import os
import warnings
from dataclasses import dataclass
from typing import *

import numpy as np
import scipy.signal as sig
import soundfile  #type: ignore

from adaptfilt.errors import (IngestionError, ParameterError,
                              SampleRateWarning, require)

SIGNAL_KINDS = ('white_gaussian', 'ar1', 'wav_file', 'speech_like')

CANONICAL_SAMPLE_RATE = 8000
PCM16_SCALE = 32768.0

SPEECH_POLE = 0.9
SPEECH_PERIOD = 4000
SPEECH_ACTIVE_FRACTION = 0.7
SPEECH_GAIN_RANGE = (0.3, 1.0)

# stream ids used by run_seed
INPUT_STREAM = 0
NOISE_STREAM = 1
SYSTEM_STREAM = 2

Seed = Union[int, np.random.SeedSequence]


def run_seed(master_seed: int, run_index: int,
             stream: int) -> np.random.SeedSequence:
    """Seed for one stream of one ensemble run.

    The mapping is SeedSequence(master_seed, spawn_key=(run_index, stream)),
    i.e. grandchild `stream` of child `run_index` of the master sequence.
    Distinct (run_index, stream) pairs give independent generator states.
    """
    require(master_seed >= 0,
            'master seed must be non-negative [{}]'.format(master_seed))
    require(run_index >= 0,
            'run index must be non-negative [{}]'.format(run_index))
    return np.random.SeedSequence(master_seed, spawn_key=(run_index, stream))


def _rng(seed: Seed):
    if isinstance(seed, (int, np.integer)):
        require(seed >= 0, 'seed must be non-negative [{}]'.format(seed))
    return np.random.default_rng(seed)


def gen_white(n_samples: int, variance: float, seed: Seed) -> np.ndarray:
    require(n_samples >= 0, 'n_samples must be >= 0 [{}]'.format(n_samples))
    require(variance >= 0, 'variance must be >= 0 [{}]'.format(variance))

    return _rng(seed).standard_normal(n_samples) * np.sqrt(variance)


def gen_ar1(n_samples: int, pole: float, target_variance: float,
            seed: Seed) -> np.ndarray:
    """x(n) = pole*x(n-1) + u(n) with x(-1) = 0.

    The drive u is scaled to target_variance*(1 - pole^2) so the stationary
    output power equals target_variance.
    """
    require(abs(pole) < 1,
            'unstable AR(1) recursion: |pole| must be < 1 [{}]'.format(pole))
    require(target_variance >= 0,
            'target_variance must be >= 0 [{}]'.format(target_variance))

    drive = gen_white(n_samples, target_variance * (1 - pole**2), seed)
    if pole == 0 or n_samples == 0:
        # no recursion
        return drive

    return sig.lfilter([1.0], [1.0, -pole], drive)


def gen_speech_like(n_samples: int, seed: Seed) -> np.ndarray:
    """Synthetic stand-in for a speech excitation.

    AR(1) noise (pole 0.9) shaped by a syllable envelope: each
    SPEECH_PERIOD-sample period is a raised-sine burst over its first
    SPEECH_ACTIVE_FRACTION with a random gain, followed by exact silence.
    The result is peak-normalized to 1.
    """
    require(n_samples >= 0, 'n_samples must be >= 0 [{}]'.format(n_samples))
    if n_samples == 0:
        return np.zeros(0)

    rng = _rng(seed)
    offset = int(rng.integers(0, SPEECH_PERIOD))
    n_periods = (n_samples + offset) // SPEECH_PERIOD + 1
    gains = rng.uniform(*SPEECH_GAIN_RANGE, size=n_periods)
    drive = rng.standard_normal(n_samples) * np.sqrt(1 - SPEECH_POLE**2)
    carrier = sig.lfilter([1.0], [1.0, -SPEECH_POLE], drive)

    n = np.arange(n_samples) + offset
    phase = (n % SPEECH_PERIOD) / (SPEECH_ACTIVE_FRACTION * SPEECH_PERIOD)
    envelope = np.where(phase < 1, np.sin(np.pi * phase)**2, 0.0)
    envelope *= gains[n // SPEECH_PERIOD]

    result = carrier * envelope
    peak = np.max(np.abs(result))
    if peak > 0:
        result /= peak

    return result


def load_wav(path: str) -> Tuple[np.ndarray, int]:
    """Read a mono 16-bit PCM RIFF file as floats in [-1, 1)."""
    if not os.path.isfile(path):
        raise IngestionError('missing file [{}]'.format(path))

    try:
        info = soundfile.info(path)
    except RuntimeError as e:
        raise IngestionError('malformed header in [{}]: {}'.format(path, e))

    if info.format != 'WAV':
        raise IngestionError('format={} unsupported in [{}]'.format(
            info.format, path))
    if info.channels != 1:
        raise IngestionError('channels={} unsupported in [{}]'.format(
            info.channels, path))
    if info.subtype != 'PCM_16':
        raise IngestionError(
            'subtype={} unsupported in [{}], expected 16-bit PCM'.format(
                info.subtype, path))

    if info.frames == 0:
        samples = np.zeros(0, dtype=np.int16)
    else:
        try:
            samples, _ = soundfile.read(path, dtype='int16')
        except RuntimeError as e:
            raise IngestionError('malformed data in [{}]: {}'.format(path, e))

    if info.samplerate != CANONICAL_SAMPLE_RATE:
        warnings.warn(
            'sample rate {} Hz in [{}], experiments assume {} Hz'.format(
                info.samplerate, path, CANONICAL_SAMPLE_RATE),
            SampleRateWarning)

    return samples.astype(np.float64) / PCM16_SCALE, info.samplerate


def rescale_power(samples: np.ndarray,
                  variance: Optional[float]) -> np.ndarray:
    if variance is None:
        return samples

    power = np.mean(samples**2) if len(samples) else 0.0
    if power == 0:
        return samples

    return samples * np.sqrt(variance / power)


@dataclass(frozen=True)
class SignalSpec:
    kind: str = 'white_gaussian'
    # target output power; None keeps the native level of wav/speech sources
    variance: Optional[float] = 1.0
    pole: float = 0.0
    path: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        require(self.kind in SIGNAL_KINDS,
                'unknown signal kind [{}], expected one of {}'.format(
                    self.kind, ', '.join(SIGNAL_KINDS)))
        if self.kind in ('white_gaussian', 'ar1'):
            require(self.variance is not None,
                    'variance is required for {} input'.format(self.kind))
        require(self.variance is None or self.variance >= 0,
                'variance must be >= 0 [{}]'.format(self.variance))
        require(abs(self.pole) < 1,
                'pole must satisfy |pole| < 1 [{}]'.format(self.pole))
        require(self.kind != 'wav_file' or self.path is not None,
                'wav_file input requires a path')
        require(self.seed >= 0,
                'seed must be non-negative [{}]'.format(self.seed))


def make_signal(spec: SignalSpec,
                n_samples: int,
                seed: Optional[Seed] = None) -> np.ndarray:
    """Draw n_samples from spec; seed overrides spec.seed."""
    seed = spec.seed if seed is None else seed

    if spec.kind == 'white_gaussian':
        return gen_white(n_samples, spec.variance, seed)

    if spec.kind == 'ar1':
        return gen_ar1(n_samples, spec.pole, spec.variance, seed)

    if spec.kind == 'speech_like':
        return rescale_power(gen_speech_like(n_samples, seed), spec.variance)

    samples, _ = load_wav(spec.path)
    if len(samples) < n_samples:
        raise ParameterError(
            'wav file [{}] holds {} samples, {} requested'.format(
                spec.path, len(samples), n_samples))

    return rescale_power(samples[:n_samples], spec.variance)


@dataclass(frozen=True)
class NoiseSchedule:
    """Piecewise-constant system noise power.

    segments are (start_iteration, variance) pairs; each variance holds
    until the next start.
    """
    segments: Tuple[Tuple[int, float], ...] = ((0, 0.01), )

    def __post_init__(self):
        segments = tuple((int(s), float(v)) for s, v in self.segments)
        object.__setattr__(self, 'segments', segments)

        require(len(segments) > 0, 'noise schedule needs a segment')
        require(segments[0][0] == 0,
                'first noise segment must start at 0 [{}]'.format(
                    segments[0][0]))
        for (start, _), (next_start, _) in zip(segments[:-1], segments[1:]):
            require(next_start > start,
                    'noise segment starts must increase [{} -> {}]'.format(
                        start, next_start))
        for start, variance in segments:
            require(variance >= 0,
                    'noise variance must be >= 0 [{} at {}]'.format(
                        variance, start))

    @classmethod
    def constant(cls, variance: float):
        return cls(((0, variance), ))

    @classmethod
    def parse(cls, text: str):
        """Parse '0:0.01, 1000:0.09'; a bare number is a constant schedule."""
        text = text.strip()
        if ':' not in text:
            return cls.constant(float(text))

        segments = []
        for item in text.split(','):
            start, _, variance = item.partition(':')
            try:
                segments.append((int(start), float(variance)))
            except ValueError:
                raise ParameterError(
                    'bad noise segment [{}], expected start:variance'.format(
                        item.strip()))

        return cls(tuple(segments))

    def variances(self, n_samples: int) -> np.ndarray:
        result = np.empty(n_samples)
        for i, (start, variance) in enumerate(self.segments):
            end = self.segments[i + 1][0] if i + 1 < len(
                self.segments) else n_samples
            result[start:end] = variance

        return result

    def variance_at(self, n: int) -> float:
        current = self.segments[0][1]
        for start, variance in self.segments:
            if start > n:
                break
            current = variance

        return current

    @property
    def max_variance(self) -> float:
        return max(v for _, v in self.segments)

    def __str__(self):
        return ', '.join('{}:{:g}'.format(s, v) for s, v in self.segments)


def gen_noise(schedule: NoiseSchedule, n_samples: int,
              seed: Seed) -> np.ndarray:
    return gen_white(n_samples, 1.0, seed) * np.sqrt(
        schedule.variances(n_samples))
