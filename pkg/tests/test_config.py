import os
import textwrap

import numpy as np
import pytest
import soundfile

from adaptfilt.errors import (BetaBoundError, IngestionError, ParameterError,
                              StructuralError)
from adaptfilt.signals import NoiseSchedule
from simpipes.config_in import db_to_linear, read_config


@pytest.fixture
def config_dir(tmp_path):
    return tmp_path


def write_config(directory, text, name='experiment.ini'):
    path = os.path.join(str(directory), name)
    with open(path, 'w', encoding='utf-8') as config_fd:
        config_fd.write(textwrap.dedent(text))
    return path


def test_sim_defaults():
    config = read_config()
    assert config.scenario.M == 10
    assert config.scenario.runs == 100
    assert config.scenario.iterations == 2000
    assert config.scenario.flip_iteration is None
    assert config.scenario.system.kind == 'random_normalized'
    assert config.kind == 'vss'
    assert config.params.alpha == pytest.approx(0.95)
    assert config.params.beta == 20.0
    assert config.resolved_delta == 1e-6
    assert config.theory_check


def test_aec_defaults():
    config = read_config(mode='aec')
    assert config.scenario.M == 512
    assert config.scenario.flip_iteration == 10000
    assert config.scenario.runs == 1
    assert config.scenario.input.kind == 'speech_like'
    assert config.scenario.system.kind == 'echo_path'
    assert config.delta is None
    assert config.resolved_delta == pytest.approx(56.5754, rel=1e-5)
    assert not config.theory_check


def test_reads_sections(config_dir):
    path = write_config(
        config_dir, """
        [scenario]
        M = 64
        iterations = 5000   # inline comments are allowed
        runs = 20
        seed = 9
        flip_iteration = 2500

        [input]
        kind = ar1
        pole = 0.5

        [noise]
        schedule = 0:0.01, 1000:0.09

        [algorithm]
        beta = 5
        kappa = 3

        [output]
        csv = result.csv
        tolerance = 0.2
        """)
    config = read_config(path)

    assert config.scenario.M == 64
    assert config.scenario.master_seed == 9
    assert config.scenario.flip_iteration == 2500
    assert config.scenario.input.kind == 'ar1'
    assert config.scenario.input.pole == 0.5
    assert config.scenario.noise == NoiseSchedule(((0, 0.01), (1000, 0.09)))
    assert config.params.beta == 5.0
    assert config.params.alpha == pytest.approx(1 - 1 / 192)
    assert config.output == 'result.csv'
    assert config.tolerance == 0.2


def test_theory_inputs_use_largest_noise(config_dir):
    path = write_config(
        config_dir, """
        [scenario]
        M = 64
        [noise]
        schedule = 0:0.01, 1000:0.09
        """)
    inputs = read_config(path).steady_state_inputs()
    assert inputs.sigma_v2 == 0.09
    assert inputs.M == 64


def test_fixed_step_algorithm(config_dir):
    path = write_config(config_dir, """
        [algorithm]
        kind = nlms
        mu = 0.5
        """)
    config = read_config(path)
    assert config.params is None
    assert config.algorithm.kind == 'nlms'
    assert config.algorithm.mu == 0.5
    config.check_beta()


def test_bad_integer(config_dir):
    path = write_config(config_dir, """
        [scenario]
        M = ten
        """)
    with pytest.raises(ParameterError, match=r'\[scenario\] M = ten'):
        read_config(path)


def test_bad_signal_kind(config_dir):
    path = write_config(config_dir, """
        [input]
        kind = pink
        """)
    with pytest.raises(ParameterError, match=r'\[input\] unknown signal kind'):
        read_config(path)


def test_bad_step_size(config_dir):
    path = write_config(config_dir, """
        [algorithm]
        kind = nlms
        mu = 2.5
        """)
    with pytest.raises(ParameterError, match=r'\[algorithm\]'):
        read_config(path)


def test_bad_algorithm_kind(config_dir):
    path = write_config(config_dir, """
        [algorithm]
        kind = rls
        """)
    with pytest.raises(ParameterError, match='not one of nlms, vss'):
        read_config(path)


def test_unknown_section(config_dir):
    path = write_config(config_dir, """
        [extra]
        key = value
        """)
    with pytest.raises(ParameterError, match=r'unknown section \[extra\]'):
        read_config(path)


def test_missing_config(config_dir):
    with pytest.raises(IngestionError, match='missing file'):
        read_config(os.path.join(str(config_dir), 'nowhere.ini'))


def test_malformed_config(config_dir):
    path = write_config(config_dir, 'no section header\n')
    with pytest.raises(IngestionError, match='malformed config'):
        read_config(path)


def test_beta_bound(config_dir):
    path = write_config(config_dir, """
        [scenario]
        M = 64
        [algorithm]
        beta = 1000
        """)
    config = read_config(path)
    with pytest.raises(BetaBoundError) as excinfo:
        config.check_beta()
    assert excinfo.value.beta_max == pytest.approx(664.29, rel=1e-4)


def test_explicit_echo_path(config_dir):
    with open(os.path.join(str(config_dir), 'echo.txt'), 'w') as echo_fd:
        echo_fd.write('0.5\n0.25\n-0.125\n')

    path = write_config(
        config_dir, """
        [scenario]
        M = 3
        [system]
        kind = explicit
        path = echo.txt
        """)
    config = read_config(path)
    assert config.scenario.system.taps == (0.5, 0.25, -0.125)

    path = write_config(
        config_dir, """
        [scenario]
        M = 4
        [system]
        kind = explicit
        path = echo.txt
        """)
    with pytest.raises(StructuralError,
                       match='echo path has 3 taps, expected M=4'):
        read_config(path)


def test_wav_path_is_relative_to_config(config_dir):
    soundfile.write(os.path.join(str(config_dir), 'talk.wav'),
                    np.zeros(100, dtype=np.int16), 8000, subtype='PCM_16')
    path = write_config(
        config_dir, """
        [input]
        kind = wav_file
        variance = native
        path = talk.wav
        """)
    spec = read_config(path).scenario.input
    assert spec.variance is None
    assert spec.path == os.path.join(str(config_dir), 'talk.wav')


def test_missing_wav(config_dir):
    path = write_config(config_dir, """
        [input]
        kind = wav_file
        path = absent.wav
        """)
    with pytest.raises(IngestionError, match='missing file'):
        read_config(path)


def test_snr_from_config(config_dir):
    path = write_config(config_dir, """
        [algorithm]
        delta = auto
        snr_db = 30
        """)
    config = read_config(path)
    assert config.snr == pytest.approx(1000.0)
    assert config.resolved_delta == pytest.approx(
        10 * (1 + np.sqrt(1001)) / 1000)


def test_auto_delta_needs_noise(config_dir):
    path = write_config(config_dir, """
        [noise]
        schedule = 0
        [algorithm]
        delta = auto
        """)
    with pytest.raises(ParameterError, match='snr_db'):
        read_config(path)


def test_overrides():
    config = read_config().with_overrides(seed=3,
                                          runs=5,
                                          iterations=100,
                                          output='x.csv',
                                          snr_db=20.0,
                                          jobs=2)
    assert config.scenario.master_seed == 3
    assert config.scenario.runs == 5
    assert config.scenario.iterations == 100
    assert config.output == 'x.csv'
    assert config.snr_linear == 100.0
    assert config.jobs == 2


def test_overrides_keep_unset_values():
    config = read_config()
    assert config.with_overrides() == config


def test_db_to_linear():
    assert db_to_linear(20.0) == 100.0
    assert db_to_linear(0.0) == 1.0
