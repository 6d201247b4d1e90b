import numpy as np
import pytest

from adaptfilt.errors import NumericError, ParameterError, StructuralError
from adaptfilt.nlms import (NlmsConfig, NlmsFilter, RegressorBuffer,
                            filter_error, iter_fixed_nlms, nlms_update,
                            run_fixed_nlms)
from adaptfilt.signals import gen_white


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def identification_streams(M, N, seed, noise=0.0):
    """White input through a random system, plus optional white noise."""
    rng = np.random.default_rng(seed)
    w_o = rng.standard_normal(M)
    x = gen_white(N, 1.0, seed)
    d = np.convolve(x, w_o)[:N] + np.sqrt(noise) * rng.standard_normal(N)
    return w_o, x, d


def misalignment_db(w, w_o):
    return 20 * np.log10(np.linalg.norm(w_o - w) / np.linalg.norm(w_o))


def assert_unchanged(before, after):
    assert np.array_equal(before, after)


def test_regressor_buffer_shifts():
    buffer = RegressorBuffer(3)
    assert np.array_equal(buffer.window, [0, 0, 0])

    for x_n in (1.0, 2.0, 3.0, 4.0):
        buffer.push(x_n)
    assert np.array_equal(buffer.window, [4, 3, 2])
    assert buffer.energy() == 29.0
    assert len(buffer) == 3


def test_regressor_buffer_batch():
    buffer = RegressorBuffer(2, (3, ))
    buffer.push(np.array([1.0, 2.0, 3.0]))
    buffer.push(np.array([4.0, 5.0, 6.0]))
    assert np.array_equal(buffer.window, [[4, 1], [5, 2], [6, 3]])


def test_regressor_buffer_rejects_empty():
    with pytest.raises(ParameterError):
        RegressorBuffer(0)


def test_config_validation():
    with pytest.raises(ParameterError):
        NlmsConfig(0)
    with pytest.raises(ParameterError, match='delta'):
        NlmsConfig(4, delta=0.0)
    with pytest.raises(ParameterError):
        NlmsConfig(4, mu=2.0)
    with pytest.raises(ParameterError):
        NlmsConfig(4, mu=-0.1)
    assert NlmsConfig(4, mu=0.0).mu == 0.0


def test_filter_error_zero_filter():
    y, e = filter_error(np.zeros(3), [1.0, 2.0, 3.0], 0.5)
    assert y == 0.0
    assert e == 0.5


def test_filter_error_exact_model():
    w = np.array([0.5, -0.25])
    x = np.array([2.0, 4.0])
    y, e = filter_error(w, x, 0.0)
    assert y == 0.0
    assert e == 0.0

    y, e = filter_error(w, x, 1.0)
    assert e == 1.0


def test_filter_error_length_mismatch():
    with pytest.raises(StructuralError):
        filter_error(np.zeros(3), np.zeros(4), 0.0)


def test_update_zero_error_leaves_weights():
    w = np.array([0.1, 0.2, 0.3])
    assert_unchanged(w, nlms_update(w, [1.0, -1.0, 2.0], 0.0, 1.0, 1e-6))


def test_update_single_tap():
    w = nlms_update([0.0], [1.0], 1.0, 1.0, 1.0)
    assert np.array_equal(w, [0.5])


def test_update_does_not_modify_input():
    w = np.array([0.1, 0.2])
    nlms_update(w, [1.0, 1.0], 1.0, 1.0, 1e-6)
    assert np.array_equal(w, [0.1, 0.2])


def test_update_zero_regressor_without_regularization():
    w = np.array([0.1, 0.2])
    assert_unchanged(w, nlms_update(w, [0.0, 0.0], 1.0, 1.0, 0.0))


def test_update_a_posteriori_error(rng):
    for _ in range(20):
        M = rng.integers(1, 16)
        w = rng.standard_normal(M)
        x = rng.standard_normal(M)
        d = rng.standard_normal()
        mu = rng.uniform(0.01, 1.9)
        delta = rng.uniform(0.0, 0.5)

        _, e = filter_error(w, x, d)
        w_next = nlms_update(w, x, e, mu, delta)
        _, e_post = filter_error(w_next, x, d)

        energy = x @ x
        expected = e * (1 - mu * energy / (delta + energy))
        assert e_post == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_update_unit_step_cancels_error():
    x = np.array([0.6, 0.8])
    w_next = nlms_update(np.zeros(2), x, 2.0, 1.0, 1e-12)
    _, e_post = filter_error(w_next, x, 2.0)
    assert abs(e_post) < 1e-10


@pytest.mark.parametrize('scale', [1e-3, 1e3])
def test_update_scale_invariance(rng, scale):
    M = 8
    w_o = rng.standard_normal(M)
    w = rng.standard_normal(M)
    x = rng.standard_normal(M)

    def increment(k):
        _, e = filter_error(w, k * x, (k * x) @ w_o)
        return nlms_update(w, k * x, e, 1.0, 1e-12) - w

    assert np.allclose(increment(scale), increment(1.0), rtol=1e-6)


def test_update_rejects_non_finite():
    with pytest.raises(NumericError, match='non-finite x'):
        nlms_update(np.zeros(2), [np.nan, 0.0], 1.0, 1.0, 1e-6)
    with pytest.raises(NumericError, match='non-finite e'):
        nlms_update(np.zeros(2), [1.0, 0.0], np.inf, 1.0, 1e-6)


def test_update_rejects_negative_delta():
    with pytest.raises(ParameterError):
        nlms_update(np.zeros(2), [1.0, 0.0], 1.0, 1.0, -1.0)


def test_zero_input_keeps_weights():
    run = run_fixed_nlms(NlmsConfig(4), np.zeros(50), np.ones(50))
    assert np.all(run.w == 0)
    assert np.all(run.e == 1)


def test_zero_step_freezes_weights(rng):
    w0 = rng.standard_normal(5)
    _, x, d = identification_streams(5, 100, 2)
    run = run_fixed_nlms(NlmsConfig(5, mu=0.0), x, d, w0=w0,
                         keep_weights=True)
    assert np.all(run.weights == w0)
    assert np.array_equal(run.w, w0)


def test_noiseless_identification_converges():
    w_o, x, d = identification_streams(10, 500, 3)
    run = run_fixed_nlms(NlmsConfig(10, mu=1.0), x, d)
    assert misalignment_db(run.w, w_o) < -80


def test_noisy_identification_reaches_floor():
    w_o, x, d = identification_streams(10, 5000, 4, noise=0.01)
    run = run_fixed_nlms(NlmsConfig(10, mu=0.5), x, d)
    assert misalignment_db(run.w, w_o) < -15


def test_run_records_step_size():
    _, x, d = identification_streams(4, 30, 5)
    run = run_fixed_nlms(NlmsConfig(4, mu=0.7), x, d)
    assert np.all(run.mu == 0.7)
    assert np.all(np.isnan(run.sigma_c2))
    assert run.e.shape == (30, )


def test_batch_matches_single_runs():
    streams = [identification_streams(6, 200, seed) for seed in range(3)]
    x = np.stack([s[1] for s in streams])
    d = np.stack([s[2] for s in streams])
    config = NlmsConfig(6, mu=0.8)

    batch = run_fixed_nlms(config, x, d)
    for r in range(3):
        single = run_fixed_nlms(config, x[r], d[r])
        assert np.allclose(batch.e[r], single.e, rtol=1e-12, atol=1e-14)
        assert np.allclose(batch.w[r], single.w, rtol=1e-12, atol=1e-14)


def test_iterator_exposes_prior_weights():
    _, x, d = identification_streams(3, 10, 6)
    steps = list(iter_fixed_nlms(NlmsConfig(3), x, d))
    assert len(steps) == 10
    assert np.all(steps[0].w_prior == 0)
    assert [s.n for s in steps] == list(range(10))
    for prev, curr in zip(steps, steps[1:]):
        assert np.array_equal(prev.w, curr.w_prior)


def test_weights_history_is_prior():
    _, x, d = identification_streams(3, 20, 7)
    run = run_fixed_nlms(NlmsConfig(3), x, d, keep_weights=True)
    steps = list(iter_fixed_nlms(NlmsConfig(3), x, d))
    assert run.weights.shape == (20, 3)
    assert np.array_equal(run.weights[5], steps[5].w_prior)


def test_stream_shape_mismatch():
    with pytest.raises(StructuralError):
        run_fixed_nlms(NlmsConfig(3), np.zeros(10), np.zeros(11))


def test_initial_weights_length():
    with pytest.raises(StructuralError):
        NlmsFilter(3, 1e-6, w0=np.zeros(4))


def test_non_finite_desired_names_rows():
    d = np.zeros((3, 10))
    d[1, 4] = np.nan
    with pytest.raises(NumericError) as excinfo:
        run_fixed_nlms(NlmsConfig(2), np.ones((3, 10)), d)
    assert list(excinfo.value.rows) == [1]
    assert 'iteration 4' in str(excinfo.value)
