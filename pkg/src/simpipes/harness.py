"""Monte Carlo execution of scenarios and the measurements taken on them.

All runs of a chunk are driven as one batched filter. Ensembles split the
run indices into fixed-size chunks, simulate the chunks (optionally in
parallel with joblib) and add the per-chunk sums in chunk order, so the
result does not depend on how many workers were used.
"""
import warnings
from dataclasses import dataclass, field
from typing import *

import numpy as np
import pandas
from joblib import Parallel, delayed  #type: ignore
from tqdm import tqdm  #type: ignore

import simpipes
from adaptfilt.errors import NumericError, TransientWarning, require
from adaptfilt.nlms import iter_filter
from adaptfilt.signals import SignalSpec
from adaptfilt.theory import (SteadyStateInputs, misadjustment, steady_emse,
                              steady_msd_nlms)
from adaptfilt.vss import HIGH_NOISE_BETA, TABLE_BETA, VssParams
from simpipes.scenario import Algorithm, Scenario, identification_scenario

FLOOR_DB = -300.0
STEADY_WINDOW = 0.25
CONVERGENCE_MARGIN_DB = 3.0
RUN_CHUNK = 25
AR1_POLE = 0.5

TRACE_FIELDS = ('ratio', 'mu', 'sigma_c2', 'e', 'c', 'c2')


def to_db(ratio) -> np.ndarray:
    """20*log10(ratio), floored at FLOOR_DB."""
    ratio = np.asarray(ratio, dtype=np.float64)
    with np.errstate(divide='ignore'):
        result = 20 * np.log10(ratio)

    return np.maximum(np.where(ratio > 0, result, FLOOR_DB), FLOOR_DB)


def misalignment_ratio(w, w_o) -> np.ndarray:
    w_o = np.asarray(w_o, dtype=np.float64)
    return np.linalg.norm(w_o - w, axis=-1) / np.linalg.norm(w_o, axis=-1)


def misalignment_db(w, w_o) -> np.ndarray:
    return to_db(misalignment_ratio(w, w_o))


@dataclass
class RunTrace:
    misalignment_db: np.ndarray
    mu: np.ndarray
    sigma_c2: np.ndarray
    e: np.ndarray
    c: np.ndarray
    # mean of c^2, which is not the square of the mean c
    c2: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.misalignment_db)

    def window_start(self, window_fraction: float = STEADY_WINDOW) -> int:
        require(0 < window_fraction <= 1,
                'window fraction must lie in (0, 1] [{}]'.format(
                    window_fraction))
        return min(int(self.iterations * (1 - window_fraction)),
                   self.iterations - 1)


def _simulate(scenario: Scenario, algorithm: Algorithm,
              run_indices: Sequence[int],
              progress: bool = False) -> Dict[str, np.ndarray]:
    """Per-run arrays, shape (R, iterations), for the given run indices."""
    run_indices = list(run_indices)
    x, v, w_o = scenario.synthesize(run_indices)
    w_norm = np.linalg.norm(w_o, axis=-1)
    require(np.all(w_norm > 0), 'unknown system has zero energy')

    d = scenario.echo(x, w_o) + v
    filt = algorithm.make_filter(scenario.M, (len(run_indices), ))
    result = {
        name: np.empty(x.shape)
        for name in ('ratio', 'mu', 'sigma_c2', 'e')
    }

    steps = iter_filter(filt, x, d)
    try:
        for step in tqdm(steps,
                         total=scenario.iterations,
                         disable=not progress,
                         desc=algorithm.id):
            n = step.n
            target = scenario.target(w_o, n)
            result['ratio'][:, n] = np.linalg.norm(
                target - step.w_prior, axis=-1) / w_norm
            result['mu'][:, n] = step.mu
            result['sigma_c2'][:, n] = step.sigma_c2
            result['e'][:, n] = step.e
    except NumericError as err:
        row = getattr(err, 'rows', [0])[0]
        raise NumericError('run {} failed: {}'.format(run_indices[row], err))

    result['c'] = result['e'] - v
    result['c2'] = result['c']**2

    return result


def _simulate_sums(scenario, algorithm, run_indices, progress=False):
    runs = _simulate(scenario, algorithm, run_indices, progress)
    return {name: runs[name].sum(axis=0) for name in TRACE_FIELDS}


def _trace(sums, runs, scenario, algorithm, run) -> RunTrace:
    mean = {name: sums[name] / runs for name in TRACE_FIELDS}
    return RunTrace(misalignment_db=to_db(mean['ratio']),
                    mu=mean['mu'],
                    sigma_c2=mean['sigma_c2'],
                    e=mean['e'],
                    c=mean['c'],
                    c2=mean['c2'],
                    metadata={
                        'scenario': scenario.hash,
                        'algorithm': algorithm.id,
                        'run': run,
                        'runs': runs,
                        'events': scenario.events
                    })


def run_once(scenario: Scenario, algorithm: Algorithm,
             run_index: int) -> RunTrace:
    require(run_index >= 0,
            'run index must be >= 0 [{}]'.format(run_index))
    sums = _simulate_sums(scenario, algorithm, [run_index],
                          progress=simpipes.__verbose__)
    return _trace(sums, 1, scenario, algorithm, run_index)


def run_ensemble(scenario: Scenario,
                 algorithm: Algorithm,
                 n_jobs: int = 1,
                 chunk_size: int = RUN_CHUNK) -> RunTrace:
    """Average scenario.runs independent runs."""
    require(chunk_size >= 1, 'chunk size must be >= 1 [{}]'.format(chunk_size))
    chunks = [
        range(start, min(start + chunk_size, scenario.runs))
        for start in range(0, scenario.runs, chunk_size)
    ]

    if simpipes.__verbose__:
        print('simulating {} runs of {} in {} chunks'.format(
            scenario.runs, algorithm.id, len(chunks)))

    results = Parallel(n_jobs=n_jobs)(
        delayed(_simulate_sums)(scenario, algorithm, chunk)
        for chunk in tqdm(chunks, disable=not simpipes.__verbose__))

    sums = results[0]
    for chunk_sums in results[1:]:
        sums = {name: sums[name] + chunk_sums[name] for name in TRACE_FIELDS}

    return _trace(sums, scenario.runs, scenario, algorithm, 'ensemble')


def steady_misalignment(trace: RunTrace,
                        window_fraction: float = STEADY_WINDOW) -> float:
    """Mean misalignment in dB over the final window."""
    return float(np.mean(
        trace.misalignment_db[trace.window_start(window_fraction):]))


def convergence_iteration(trace: RunTrace,
                          floor_db: Optional[float] = None,
                          margin_db: float = CONVERGENCE_MARGIN_DB,
                          start: int = 0) -> int:
    """First iteration at or after start within margin_db of the floor.

    The floor defaults to the steady-state misalignment of the trace.
    Returns trace.iterations when the level is never reached.
    """
    if floor_db is None:
        floor_db = steady_misalignment(trace)

    reached = np.flatnonzero(
        trace.misalignment_db[start:] <= floor_db + margin_db)
    if len(reached) == 0:
        return trace.iterations

    return start + int(reached[0])


def measure_emse(trace: RunTrace,
                 window_fraction: float = STEADY_WINDOW) -> float:
    """Mean of c(n)^2 over the final window of the trace.

    Warns with TransientWarning when the window overlaps the initial
    convergence or a flip or noise step recorded in the trace metadata.
    """
    start = trace.window_start(window_fraction)
    converged = convergence_iteration(trace)
    if converged > start:
        warnings.warn(
            'measurement window starts at {} but the filter converges at {}'.
            format(start, converged), TransientWarning)

    late_events = [
        n for n in trace.metadata.get('events', ())
        if start <= n < trace.iterations
    ]
    if late_events:
        event = late_events[0]
        tail = max(1, (trace.iterations - event) // 4)
        floor_db = float(np.mean(trace.misalignment_db[-tail:]))
        settled = convergence_iteration(trace, floor_db, start=event)
        warnings.warn(
            'measurement window starts at {} but the scenario changes at {} '
            'and the filter reconverges at {}'.format(start, event, settled),
            TransientWarning)

    return float(np.mean(trace.c2[start:]))


def predicted_emse(scenario: Scenario, algorithm: Algorithm,
                   input_power: float = 1.0) -> Optional[float]:
    """Theoretical steady-state EMSE for the noise level at the end of the run."""
    sigma_v2 = scenario.noise.variance_at(scenario.iterations - 1)

    if algorithm.kind == 'nlms':
        if algorithm.mu == 0:
            return None
        return misadjustment(algorithm.mu) * sigma_v2

    inputs = SteadyStateInputs.from_params(algorithm.params, scenario.M,
                                           sigma_v2, input_power)
    return steady_emse(inputs)


def nlms_floor_db(scenario: Scenario, mu: float, delta: float = 0.0) -> float:
    """Theoretical steady-state misalignment of fixed-step NLMS, in dB."""
    sigma_v2 = scenario.noise.variance_at(scenario.iterations - 1)
    msd = steady_msd_nlms(mu, scenario.M, sigma_v2, 1.0, delta)
    return float(10 * np.log10(msd)) if msd > 0 else FLOOR_DB


def sweep_beta(scenario: Scenario,
               algorithm: Algorithm,
               betas: Sequence[float],
               n_jobs: int = 1) -> Dict[float, RunTrace]:
    require(algorithm.kind == 'vss', 'beta sweeps need the vss algorithm')

    result = {}
    for beta in betas:
        if simpipes.__verbose__:
            print('beta = {:g}'.format(beta))
        result[beta] = run_ensemble(scenario, algorithm.with_beta(beta),
                                    n_jobs)

    return result


@dataclass(frozen=True)
class EmseCase:
    input: str
    M: int
    sigma_v2: float
    beta: float
    # values as printed in the published comparison table
    published_theory: float
    published_measured: float

    def signal(self) -> SignalSpec:
        if self.input == 'ar1':
            return SignalSpec('ar1', 1.0, pole=AR1_POLE)
        return SignalSpec('white_gaussian', 1.0)

    def params(self) -> VssParams:
        return VssParams.for_length(self.M, beta=self.beta)

    def inputs(self) -> SteadyStateInputs:
        return SteadyStateInputs.from_params(self.params(), self.M,
                                             self.sigma_v2)


EMSE_TABLE_CASES = (
    EmseCase('white_gaussian', 64, 0.01, TABLE_BETA, 3.1558e-4, 3.2384e-4),
    EmseCase('white_gaussian', 128, 0.01, TABLE_BETA, 3.1495e-4, 3.1704e-4),
    EmseCase('ar1', 64, 0.01, TABLE_BETA, 3.1558e-4, 3.2491e-4),
    EmseCase('ar1', 128, 0.01, TABLE_BETA, 3.1495e-4, 3.3004e-4),
    EmseCase('white_gaussian', 64, 0.09, HIGH_NOISE_BETA, 6.5881e-3,
             6.3221e-3),
    EmseCase('white_gaussian', 128, 0.09, HIGH_NOISE_BETA, 6.5774e-3,
             5.8086e-3),
    EmseCase('ar1', 64, 0.09, HIGH_NOISE_BETA, 6.5881e-3, 6.0021e-3),
    EmseCase('ar1', 128, 0.09, HIGH_NOISE_BETA, 6.5774e-3, 5.8274e-3),
)


def emse_table(runs: int = 100,
               iterations: int = 20000,
               master_seed: int = 0,
               simulate: bool = True,
               n_jobs: int = 1,
               cases: Sequence[EmseCase] = EMSE_TABLE_CASES
               ) -> pandas.DataFrame:
    """Theoretical (and optionally simulated) steady-state EMSE per case."""
    rows = []
    for case in cases:
        theory = steady_emse(case.inputs())
        row = {
            'input': case.input,
            'M': case.M,
            'sigma_v2': case.sigma_v2,
            'beta': case.beta,
            'theory': theory
        }

        if simulate:
            scenario = identification_scenario(case.M,
                                               case.sigma_v2,
                                               input=case.signal(),
                                               iterations=iterations,
                                               runs=runs,
                                               master_seed=master_seed)
            trace = run_ensemble(scenario, Algorithm.vss(case.params()),
                                 n_jobs)
            measured = measure_emse(trace)
            row['measured'] = measured
            row['relative_error'] = abs(theory - measured) / theory

        rows.append(row)

    return pandas.DataFrame(rows)
