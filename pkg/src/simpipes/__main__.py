import argparse
import sys
from dataclasses import replace
from typing import *

import numpy as np

import simpipes
from adaptfilt.errors import AdaptFiltError, ParameterError, require
from adaptfilt.theory import (SteadyStateInputs, beta_upper_bound,
                              expected_steady_mu, steady_emse, steady_msd)
from adaptfilt.vss import (TABLE_BETA, TABLE_KAPPA, TABLE_MU_MAX, TABLE_MU_MIN,
                           VssParams, default_alpha, regularization_delta,
                           step_size_curve)
from simpipes import config_in, harness, trace_out
from simpipes.fileutils import sibling_path

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2

CURVE_GRID = np.linspace(0.0, 0.5, 501)
CURVE_BETAS = '5,15,20,40'


def report(*args):
    if not simpipes.__quiet__:
        print(*args)


def _relative_error(theory, measured):
    return abs(theory - measured) / theory


def _check_emse(config, trace, label=''):
    measured = harness.measure_emse(trace, config.window_fraction)
    report('{}measured EMSE   = {:.4e}'.format(label, measured))
    if not config.theory_check:
        return True

    predicted = harness.predicted_emse(config.scenario, config.algorithm,
                                       config.input_power)
    if predicted is None:
        return True

    error = _relative_error(predicted, measured)
    report('{}predicted EMSE  = {:.4e}  relative error {:.2%}'.format(
        label, predicted, error))
    return error <= config.tolerance


def simulate(config: config_in.ExperimentConfig,
             beta_sweep: Optional[List[float]] = None) -> int:
    if beta_sweep is None:
        config.check_beta()
        trace = harness.run_ensemble(config.scenario, config.algorithm,
                                     config.jobs)
        path = trace_out.write_trace(trace, config.output)
        report('wrote {}'.format(path))
        passed = _check_emse(config, trace)
        return EXIT_OK if passed else EXIT_CHECK_FAILED

    require(config.kind == 'vss', 'a beta sweep needs [algorithm] kind = vss')
    passed = True
    for beta in beta_sweep:
        beta_config = replace(config, params=replace(config.params, beta=beta))
        beta_config.check_beta()
        trace = harness.run_ensemble(beta_config.scenario,
                                     beta_config.algorithm, config.jobs)
        path = trace_out.write_trace(
            trace, sibling_path(config.output, '.beta{:g}'.format(beta)))
        report('wrote {}'.format(path))
        passed &= _check_emse(beta_config, trace,
                              'beta={:g}: '.format(beta))

    return EXIT_OK if passed else EXIT_CHECK_FAILED


def echo_cancel(config: config_in.ExperimentConfig) -> int:
    scenario = config.scenario
    report('echo cancellation, M={}, {}, noise {}, delta={:.4g}'.format(
        scenario.M, scenario.system, scenario.noise, config.resolved_delta))

    if scenario.runs == 1:
        trace = harness.run_once(scenario, config.algorithm, 0)
    else:
        trace = harness.run_ensemble(scenario, config.algorithm, config.jobs)

    path = trace_out.write_trace(trace, config.output)
    report('wrote {}'.format(path))
    report('final misalignment = {:.2f} dB'.format(
        trace.misalignment_db[-1]))

    return EXIT_OK


def print_theory(inputs: SteadyStateInputs):
    report('E[mu_inf]  = {:.4e}'.format(expected_steady_mu(inputs)))
    report('xi_ex      = {:.4e}'.format(steady_emse(inputs)))
    report('MSD_inf    = {:.4e}'.format(steady_msd(inputs)))
    report('beta_max   = {:.4e}'.format(beta_upper_bound(inputs)))


def print_table(args) -> int:
    table = harness.emse_table(runs=args.runs or 100,
                               iterations=args.iters or 20000,
                               master_seed=args.seed or 0,
                               simulate=args.simulate,
                               n_jobs=args.jobs or 1)
    formatters = {
        name: '{:.4e}'.format
        for name in ('theory', 'measured')
    }
    formatters['relative_error'] = '{:.2%}'.format
    report(table.to_string(index=False, formatters=formatters))

    if args.simulate and (table['relative_error'] > args.tolerance).any():
        return EXIT_CHECK_FAILED
    return EXIT_OK


def theory(args) -> int:
    if args.table:
        return print_table(args)

    if args.config is not None:
        config = config_in.read_config(args.config)
        inputs = config.steady_state_inputs()
    else:
        alpha = args.alpha
        if alpha is None:
            alpha = default_alpha(args.M, args.kappa)
        params = VssParams(alpha=alpha,
                           mu_min=args.mu_min,
                           mu_max=args.mu_max,
                           beta=args.beta)
        inputs = SteadyStateInputs.from_params(params, args.M, args.sigma_v2,
                                               args.sigma_x2, args.delta)

    if args.snr_db is not None:
        snr = config_in.db_to_linear(args.snr_db)
        report('SNR        = {:.4e} (linear)'.format(snr))
        report('delta      = {:.4e}'.format(
            regularization_delta(inputs.M, inputs.sigma_x2, snr)))

    print_theory(inputs)

    if args.curve_out is not None:
        betas = parse_floats(args.curve_betas)
        params = VssParams(alpha=inputs.alpha,
                           mu_min=inputs.mu_min,
                           mu_max=inputs.mu_max)
        path = trace_out.write_step_size_curve(
            args.curve_out, CURVE_GRID, betas,
            step_size_curve(params, CURVE_GRID, betas))
        report('wrote {}'.format(path))

    return EXIT_OK


def parse_floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise ParameterError(
            'expected comma-separated numbers [{}]'.format(text))


def add_common_args(parser):
    parser.add_argument('--config',
                        metavar='fn',
                        type=str,
                        required=False,
                        help='experiment configuration (INI)')
    parser.add_argument('--out',
                        metavar='fn',
                        type=str,
                        required=False,
                        help='output CSV path, overrides [output] csv')
    parser.add_argument('--seed', metavar='n', type=int, required=False)
    parser.add_argument('--runs', metavar='n', type=int, required=False)
    parser.add_argument('--iters', metavar='n', type=int, required=False)
    parser.add_argument('--jobs',
                        metavar='n',
                        type=int,
                        required=False,
                        help='parallel workers for ensemble chunks')
    parser.add_argument(
        '--snr-db',
        metavar='db',
        type=float,
        required=False,
        help='SNR in dB; converted to a linear ratio for the delta rule')
    parser.add_argument('--verbose',
                        required=False,
                        action='store_true',
                        help='print progress while simulating')
    parser.add_argument('--quiet',
                        required=False,
                        action='store_true',
                        help='print nothing but errors')


def process_common_args(args):
    simpipes.__verbose__ = args.verbose and not args.quiet
    simpipes.__quiet__ = args.quiet


def load_config(args, mode):
    config = config_in.read_config(args.config, mode)
    return config.with_overrides(seed=args.seed,
                                 runs=args.runs,
                                 iterations=args.iters,
                                 output=args.out,
                                 snr_db=args.snr_db,
                                 jobs=args.jobs)


def main(argv: Optional[List[str]] = None) -> int:
    # Basic structure:
    #	* Parse arguments once to figure out which command to run.
    # 	* Parse arguments a second time with that command's parser.
    # 	* Pass arguments to a method designed to execute the command.

    argv = sys.argv[1:] if argv is None else list(argv)

    parser = argparse.ArgumentParser(
        description='Variable step size NLMS experiments.')
    parser.add_argument('command', choices=('sim', 'theory', 'aec'))
    command = parser.parse_known_args(argv)[0].command

    command_parser = argparse.ArgumentParser(prog='simpipes ' + command)
    command_parser.add_argument('command', choices=(command, ))
    add_common_args(command_parser)

    if command == 'sim':
        command_parser.description = 'Run a system identification ensemble.'
        command_parser.add_argument(
            '--beta-sweep',
            metavar='b1,b2',
            type=str,
            required=False,
            help='one ensemble per beta, written next to --out')

    elif command == 'theory':
        command_parser.description = 'Evaluate the steady-state predictions.'
        command_parser.add_argument('--M', type=int, default=64)
        command_parser.add_argument('--sigma-v2', type=float, default=0.01)
        command_parser.add_argument('--sigma-x2', type=float, default=1.0)
        command_parser.add_argument('--beta', type=float, default=TABLE_BETA)
        command_parser.add_argument('--kappa', type=float, default=TABLE_KAPPA)
        command_parser.add_argument('--alpha', type=float, required=False)
        command_parser.add_argument('--mu-min',
                                    type=float,
                                    default=TABLE_MU_MIN)
        command_parser.add_argument('--mu-max',
                                    type=float,
                                    default=TABLE_MU_MAX)
        command_parser.add_argument('--delta', type=float, default=0.0)
        command_parser.add_argument('--table',
                                    action='store_true',
                                    help='print the eight-case EMSE table')
        command_parser.add_argument('--simulate',
                                    action='store_true',
                                    help='with --table, also measure EMSE')
        command_parser.add_argument('--tolerance', type=float, default=0.15)
        command_parser.add_argument('--curve-out',
                                    metavar='fn',
                                    type=str,
                                    required=False,
                                    help='write mu over sigma_c2 as CSV')
        command_parser.add_argument('--curve-betas',
                                    type=str,
                                    default=CURVE_BETAS)

    else:
        command_parser.description = 'Run the echo cancellation scenario.'

    args = command_parser.parse_args(argv)
    process_common_args(args)

    try:
        if command == 'sim':
            sweep = None
            if args.beta_sweep is not None:
                sweep = parse_floats(args.beta_sweep)
            return simulate(load_config(args, 'sim'), sweep)
        if command == 'theory':
            return theory(args)
        return echo_cancel(load_config(args, 'aec'))
    except (AdaptFiltError, OSError) as e:
        print('error: {}'.format(e), file=sys.stderr)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
