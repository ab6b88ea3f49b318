"""Tests for truncated Taylor arithmetic."""

import numpy as np
from dirac_spectra import taylor


def test_mul_matches_polynomial_product():
    """Truncated Cauchy product of two coefficient vectors."""
    a = np.array([1.0, 2.0, 3.0])
    b = np.array([4.0, 5.0, 6.0])
    np.testing.assert_allclose(taylor.mul(a, b), [4.0, 13.0, 28.0])


def test_mul_broadcasts_trailing_axes():
    """Scalar series broadcast against sampled arrays."""
    a = np.array([1.0, 1.0])
    b = np.ones((2, 3, 5))
    out = taylor.mul(a, b)
    assert out.shape == (2, 3, 5)
    np.testing.assert_allclose(out[1], 2.0)


def test_derivative_scaling():
    """Derivatives of e^λ at 0 become 1/k!."""
    series = taylor.from_derivatives(np.array([1.0, 1.0, 1.0, 1.0]))
    np.testing.assert_allclose(series, [1.0, 1.0, 0.5, 1.0 / 6.0])


def test_det2_of_exponential_series():
    """e^λ e^{-λ} - 0 = 1 to every order."""
    e = taylor.from_derivatives(np.ones(5))
    em = taylor.from_derivatives(np.array([1.0, -1.0, 1.0, -1.0, 1.0]))
    zero = taylor.constant(0.0, 4)
    np.testing.assert_allclose(taylor.det2(e, zero, zero, em), [1.0, 0, 0, 0, 0], atol=1e-15)
