"""Per-iteration arithmetic cost of the filters.

The reference formulations below perform one iteration with scalar
operations routed through CountingArithmetic. Divisions count as
multiplications and subtractions as additions. Recursive quantities
(input power, regressor energy, cross-correlation) are updated in the
cheapest recursive form; constants such as 1 - alpha are precomputed.
"""
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import *

import numpy as np

from adaptfilt.errors import require
from adaptfilt.vss import VssParams

OPERATION_CLASSES = ('multiplications', 'additions', 'exponents',
                     'square_roots')


class CountingArithmetic:
    def __init__(self):
        self.counts = Counter()

    def mul(self, a, b):
        self.counts['multiplications'] += 1
        return a * b

    def div(self, a, b):
        self.counts['multiplications'] += 1
        return a / b

    def add(self, a, b):
        self.counts['additions'] += 1
        return a + b

    def sub(self, a, b):
        self.counts['additions'] += 1
        return a - b

    def exp(self, a):
        self.counts['exponents'] += 1
        return math.exp(a)

    def sqrt(self, a):
        self.counts['square_roots'] += 1
        return math.sqrt(a)

    def dot(self, a, b):
        result = self.mul(a[0], b[0])
        for a_k, b_k in zip(a[1:], b[1:]):
            result = self.add(result, self.mul(a_k, b_k))
        return result

    def report(self) -> Dict[str, int]:
        return {name: self.counts[name] for name in OPERATION_CLASSES}

    def reset(self):
        self.counts.clear()


@dataclass
class ReferenceState:
    w: List[float]
    # x(n), ..., x(n-M); one sample longer than the filter
    window: List[float]
    energy: float = 0.0
    sigma_x2: float = 0.0
    gamma: List[float] = field(default_factory=list)
    mu: float = 0.0

    @classmethod
    def zeros(cls, M: int):
        return cls(w=[0.0] * M,
                   window=[0.0] * (M + 1),
                   gamma=[0.0] * M)

    @property
    def M(self):
        return len(self.w)

    def push(self, x_n):
        self.window = [float(x_n)] + self.window[:-1]


def _filter_output(arith, state, x_n, d_n):
    M = state.M
    state.push(x_n)
    regressor = state.window[:M]
    y = arith.dot(state.w, regressor)
    e = arith.sub(d_n, y)

    p = arith.mul(x_n, x_n)
    oldest = state.window[M]
    state.energy = arith.sub(arith.add(state.energy, p),
                             arith.mul(oldest, oldest))

    return regressor, e, p


def _weight_update(arith, state, regressor, e, mu, delta):
    r = arith.div(1.0, arith.add(delta, state.energy))
    q = arith.mul(arith.mul(mu, e), r)
    state.w = [
        arith.add(w_k, arith.mul(q, x_k))
        for w_k, x_k in zip(state.w, regressor)
    ]


def nlms_reference_step(arith: CountingArithmetic, state: ReferenceState,
                        x_n: float, d_n: float, mu: float, delta: float):
    regressor, e, _ = _filter_output(arith, state, x_n, d_n)
    state.mu = mu
    _weight_update(arith, state, regressor, e, mu, delta)
    return e


def vss_reference_step(arith: CountingArithmetic, state: ReferenceState,
                       x_n: float, d_n: float, params: VssParams,
                       delta: float):
    one_minus_alpha = 1 - params.alpha
    neg_beta = -params.beta
    span = params.mu_max - params.mu_min

    regressor, e, p = _filter_output(arith, state, x_n, d_n)
    state.sigma_x2 = arith.add(
        state.sigma_x2, arith.mul(one_minus_alpha, arith.sub(p,
                                                             state.sigma_x2)))
    state.gamma = [
        arith.add(g_k,
                  arith.mul(one_minus_alpha, arith.sub(arith.mul(e, x_k), g_k)))
        for g_k, x_k in zip(state.gamma, regressor)
    ]

    g = arith.dot(state.gamma, state.gamma)
    sigma_c2 = arith.div(g, arith.add(params.rho, state.sigma_x2))
    decay = arith.exp(arith.mul(neg_beta, sigma_c2))
    state.mu = arith.add(params.mu_min, arith.mul(span, arith.sub(1.0, decay)))

    _weight_update(arith, state, regressor, e, state.mu, delta)
    return e


def reference_run(kind: str,
                  x,
                  d,
                  M: int,
                  delta: float,
                  mu: float = 1.0,
                  params: Optional[VssParams] = None):
    """Drive a reference formulation over whole streams.

    Returns (final weights, error stream, step-size stream) as arrays.
    """
    arith = CountingArithmetic()
    state = ReferenceState.zeros(M)
    errors, steps = [], []

    for x_n, d_n in zip(x, d):
        if kind == 'vss':
            e = vss_reference_step(arith, state, x_n, d_n, params, delta)
        else:
            e = nlms_reference_step(arith, state, x_n, d_n, mu, delta)
        errors.append(e)
        steps.append(state.mu)

    return np.array(state.w), np.array(errors), np.array(steps)


def count_arithmetic(kind: str,
                     M: int,
                     params: Optional[VssParams] = None,
                     delta: float = 1e-6,
                     mu: float = 1.0,
                     seed: int = 0) -> Dict[str, int]:
    """Operation counts of one steady-state iteration of 'vss' or 'nlms'."""
    require(M >= 1, 'M must be >= 1 [{}]'.format(M))
    require(kind in ('vss', 'nlms'),
            'unknown algorithm [{}], expected nlms or vss'.format(kind))
    params = params or VssParams.for_length(M)

    rng = np.random.default_rng(seed)
    state = ReferenceState.zeros(M)
    state.w = list(rng.standard_normal(M))
    state.window = list(rng.standard_normal(M + 1))
    state.energy = float(np.sum(np.square(state.window[:M])))
    state.gamma = list(0.01 * rng.standard_normal(M))
    state.sigma_x2 = 1.0
    x_n, d_n = rng.standard_normal(2)

    arith = CountingArithmetic()
    if kind == 'vss':
        vss_reference_step(arith, state, x_n, d_n, params, delta)
    else:
        nlms_reference_step(arith, state, x_n, d_n, mu, delta)

    return arith.report()


@dataclass(frozen=True)
class CountFormula:
    """Counts linear in M: (per-tap, constant) pairs."""
    multiplications: Tuple[int, int]
    additions: Tuple[int, int]
    exponents: int = 0
    square_roots: int = 0

    def evaluate(self, M: int) -> Dict[str, int]:
        return {
            'multiplications': self.multiplications[0] * M +
            self.multiplications[1],
            'additions': self.additions[0] * M + self.additions[1],
            'exponents': self.exponents,
            'square_roots': self.square_roots
        }


PUBLISHED_COUNTS = {
    'npvss': CountFormula((3, 6), (3, 6), 0, 2),
    'nvs-nlms': CountFormula((3, 6), (3, 6), 0, 0),
    'new-npvss': CountFormula((5, 16), (5, 10), 0, 1),
    'vss': CountFormula((5, 9), (5, 7), 1, 0),
}

NLMS_COUNTS = CountFormula((2, 5), (2, 3))
