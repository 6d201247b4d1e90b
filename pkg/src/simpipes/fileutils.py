import os

import numpy as np

import simpipes
from adaptfilt.errors import IngestionError, StructuralError, require


class VerifiedFile:
    def __init__(self,
                 path: str,
                 exists: bool = False,
                 mkparents: bool = True):
        require(not os.path.isdir(path),
                'file [{}] must not be a directory'.format(path),
                IngestionError)
        require((not exists) or os.path.exists(path),
                'missing file [{}]'.format(path), IngestionError)
        self.path = os.path.abspath(path)

        if mkparents:
            parent = os.path.dirname(self.path)
            os.makedirs(parent, exist_ok=True)


def sibling_path(path: str, suffix: str):
    """out.csv + '.beta20' -> out.beta20.csv"""
    root, ext = os.path.splitext(path)
    return '{}{}{}'.format(root, suffix, ext)


def read_coefficients(path: str, M: int) -> np.ndarray:
    """Load an explicit echo path, one coefficient per line or whitespace separated."""
    coefficients_file = VerifiedFile(path, exists=True, mkparents=False)

    if simpipes.__verbose__:
        print('reading echo path from', coefficients_file.path)

    try:
        taps = np.loadtxt(coefficients_file.path, dtype=np.float64, ndmin=1)
    except ValueError as e:
        raise IngestionError('unreadable coefficients in [{}]: {}'.format(
            path, e))

    taps = taps.reshape(-1)
    if len(taps) != M:
        raise StructuralError('echo path has {} taps, expected M={}'.format(
            len(taps), M))
    require(np.all(np.isfinite(taps)),
            'non-finite coefficient in [{}]'.format(path), IngestionError)

    return taps
