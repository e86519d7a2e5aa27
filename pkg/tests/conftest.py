import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

from fourier_core import TrigPoly  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_poly(rng, d, band, terms=12):
    """Случайный полином с частотами в кубе |k_i| <= band"""
    freqs = rng.integers(-band, band + 1, size=(terms, d))
    coeffs = rng.standard_normal(terms) + 1j * rng.standard_normal(terms)
    return TrigPoly(d, freqs, coeffs)


@pytest.fixture
def make_poly(rng):
    def factory(d, band, terms=12):
        return random_poly(rng, d, band, terms)
    return factory
