import numpy as np
import pytest

from adaptfilt.errors import BetaBoundError, ParameterError
from adaptfilt.theory import (SteadyStateInputs, beta_upper_bound, check_beta,
                              expected_steady_mu, misadjustment, steady_emse,
                              steady_msd, steady_msd_nlms)
from adaptfilt.vss import VssParams


def inputs_for(M, sigma_v2, beta, **kwargs):
    return SteadyStateInputs.from_params(VssParams.for_length(M, beta=beta),
                                         M, sigma_v2, **kwargs)


def assert_printed(value, text):
    assert '{:.4e}'.format(value) == text


@pytest.mark.parametrize('M, sigma_v2, beta, expected', [
    (64, 0.01, 20.0, '3.1558e-04'),
    (128, 0.01, 20.0, '3.1495e-04'),
    (64, 0.09, 5.0, '6.5881e-03'),
    (128, 0.09, 5.0, '6.5744e-03'),
])
def test_steady_emse_table(M, sigma_v2, beta, expected):
    assert_printed(steady_emse(inputs_for(M, sigma_v2, beta)), expected)


STEADY_GRID = [(M, sigma_v2, beta) for M in (64, 128)
               for sigma_v2 in (0.01, 0.09)
               for beta in (0.0, 1.0, 5.0, 20.0)]


@pytest.mark.parametrize('M, sigma_v2, beta', STEADY_GRID)
def test_emse_is_misadjustment_of_mean_step(M, sigma_v2, beta):
    inputs = inputs_for(M, sigma_v2, beta)
    predicted = misadjustment(expected_steady_mu(inputs)) * sigma_v2
    assert predicted == pytest.approx(steady_emse(inputs), rel=1e-12)


@pytest.mark.parametrize('M, sigma_v2, beta', STEADY_GRID)
def test_msd_matches_emse_on_white_input(M, sigma_v2, beta):
    inputs = inputs_for(M, sigma_v2, beta)
    assert steady_msd(inputs) * inputs.sigma_x2 == pytest.approx(
        steady_emse(inputs), rel=1e-12)


def test_steady_msd_table_row():
    assert_printed(steady_msd(inputs_for(64, 0.01, 20.0)), '3.1558e-04')


def test_steady_emse_without_beta():
    # beta = 0 is fixed-step NLMS at mu_min
    inputs = inputs_for(64, 0.01, 0.0)
    assert steady_emse(inputs) == pytest.approx(misadjustment(0.001) * 0.01)


def test_steady_emse_grows_with_beta():
    values = [steady_emse(inputs_for(64, 0.01, b)) for b in (0, 5, 20, 40)]
    assert values == sorted(values)


def test_steady_emse_rejects_bound():
    with pytest.raises(BetaBoundError) as excinfo:
        steady_emse(inputs_for(64, 0.01, 700.0))
    assert excinfo.value.beta_max == pytest.approx(664.29, rel=1e-4)


def test_misadjustment():
    assert misadjustment(0.001) == pytest.approx(5.0025e-4, rel=1e-4)
    assert misadjustment(1.0) == 1.0


@pytest.mark.parametrize('mu', [0.0, 2.0, -0.5, 3.0])
def test_misadjustment_range(mu):
    with pytest.raises(ParameterError):
        misadjustment(mu)


def test_expected_steady_mu():
    assert expected_steady_mu(inputs_for(64, 0.01, 20.0)) == pytest.approx(
        0.061185, rel=1e-5)
    assert expected_steady_mu(inputs_for(10, 0.01, 20.0)) == pytest.approx(
        0.0625, rel=1e-9)


def test_expected_steady_mu_noiseless():
    assert expected_steady_mu(inputs_for(64, 0.0, 20.0)) == 0.001


def test_beta_upper_bound():
    assert beta_upper_bound(inputs_for(64, 0.01, 20.0)) == pytest.approx(
        664.29, rel=1e-4)


def test_beta_upper_bound_infinite():
    assert beta_upper_bound(inputs_for(64, 0.0, 20.0)) == np.inf

    params = VssParams(alpha=0.99, mu_min=0.5, mu_max=0.5)
    inputs = SteadyStateInputs.from_params(params, 64, 0.01)
    assert beta_upper_bound(inputs) == np.inf


def test_check_beta():
    check_beta(inputs_for(64, 0.01, 20.0))
    with pytest.raises(BetaBoundError, match='beta_max=664.29'):
        check_beta(inputs_for(64, 0.01, 1000.0))


def test_steady_msd_nlms():
    assert steady_msd_nlms(1.0, 10, 0.01, 1.0, 0.0) == pytest.approx(0.01)
    assert steady_msd_nlms(1.2, 10, 0.01, 1.0, 0.0) == pytest.approx(0.015)


def test_steady_msd_nlms_regularization_lowers_floor():
    assert steady_msd_nlms(1.0, 10, 0.01, 1.0, 5.0) < steady_msd_nlms(
        1.0, 10, 0.01, 1.0, 0.0)


def test_steady_msd_without_beta():
    inputs = inputs_for(32, 0.02, 0.0, delta=0.3)
    assert steady_msd(inputs) == pytest.approx(
        steady_msd_nlms(0.001, 32, 0.02, 1.0, 0.3), rel=1e-12)


def test_steady_msd_grows_with_beta():
    values = [steady_msd(inputs_for(64, 0.01, b)) for b in (5, 20, 40)]
    assert values == sorted(values)


def test_steady_msd_rejects_bound():
    with pytest.raises(BetaBoundError):
        steady_msd(inputs_for(64, 0.01, 2000.0))


def test_inputs_validation():
    with pytest.raises(ParameterError):
        SteadyStateInputs(M=0, alpha=0.9, beta=1, mu_min=0.1, mu_max=1,
                          sigma_v2=0.01)
    with pytest.raises(ParameterError):
        SteadyStateInputs(M=4, alpha=0.9, beta=1, mu_min=0.1, mu_max=1,
                          sigma_v2=-0.01)
    with pytest.raises(ParameterError):
        SteadyStateInputs(M=4, alpha=0.9, beta=1, mu_min=0.1, mu_max=1,
                          sigma_v2=0.01, sigma_x2=0.0)
