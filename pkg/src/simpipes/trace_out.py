from typing import *

import numpy as np
import pandas

import simpipes
from simpipes.fileutils import VerifiedFile
from simpipes.harness import RunTrace

CSV_COLUMNS = ('iter', 'misalignment_db', 'mu_mean', 'sigma_c2_mean',
               'emse_running')
CSV_FORMAT = dict(index=False,
                  float_format='%.9g',
                  na_rep='nan',
                  lineterminator='\n')
EMSE_RUNNING_WINDOW = 100


def trace_frame(trace: RunTrace) -> pandas.DataFrame:
    c2 = pandas.Series(trace.c2)
    return pandas.DataFrame({
        'iter':
        np.arange(trace.iterations),
        'misalignment_db':
        trace.misalignment_db,
        'mu_mean':
        trace.mu,
        'sigma_c2_mean':
        trace.sigma_c2,
        'emse_running':
        c2.rolling(EMSE_RUNNING_WINDOW, min_periods=1).mean()
    }, columns=list(CSV_COLUMNS))


class TraceCsvGenerator:
    """Writes one RunTrace per file; generate_result may be called once."""
    def __init__(self, output_fn: str):
        self.output_fn = VerifiedFile(output_fn).path

    def generate_result(self, trace: RunTrace):
        if simpipes.__verbose__:
            print('writing {} rows to {}'.format(trace.iterations,
                                                 self.output_fn))

        trace_frame(trace).to_csv(self.output_fd, **CSV_FORMAT)

    def __enter__(self):
        self.output_fd = open(self.output_fn, 'w', encoding='utf-8',
                              newline='')
        return self

    def __exit__(self, type, value, traceback):
        self.output_fd.close()


def write_trace(trace: RunTrace, output_fn: str) -> str:
    with TraceCsvGenerator(output_fn) as generator:
        generator.generate_result(trace)
    return generator.output_fn


def write_step_size_curve(output_fn: str, sigma_c2_grid,
                          betas: Sequence[float], curve) -> str:
    columns = {'sigma_c2': np.asarray(sigma_c2_grid)}
    for beta, row in zip(betas, curve):
        columns['beta={:g}'.format(beta)] = row

    path = VerifiedFile(output_fn).path
    with open(path, 'w', encoding='utf-8', newline='') as output_fd:
        pandas.DataFrame(columns).to_csv(output_fd, **CSV_FORMAT)

    return path
