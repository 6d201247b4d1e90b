class AdaptFiltError(Exception):
    """Base class for every error raised by adaptfilt and simpipes."""


class ParameterError(AdaptFiltError, ValueError):
    pass


class StructuralError(AdaptFiltError, ValueError):
    # shapes or lengths that cannot be combined
    pass


class NumericError(AdaptFiltError, ArithmeticError):
    pass


class IngestionError(AdaptFiltError, ValueError):
    pass


class BetaBoundError(ParameterError):
    """beta is at or above the bound that keeps the steady-state EMSE finite."""
    def __init__(self, beta: float, beta_max: float):
        self.beta = beta
        self.beta_max = beta_max
        ParameterError.__init__(
            self, 'beta={:g} violates the steady-state stability bound '
            'beta < beta_max={:.5g}'.format(beta, beta_max))


class ParameterWarning(UserWarning):
    pass


class SampleRateWarning(UserWarning):
    pass


class TransientWarning(UserWarning):
    pass


def require(condition, message: str, error=ParameterError):
    if not condition:
        raise error(message)
