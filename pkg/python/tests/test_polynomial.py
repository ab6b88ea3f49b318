"""Tests for complex polynomials, resultants and common roots."""

import math

import numpy as np
import pytest
from dirac_spectra import ComplexPolynomial, SpecValidationError
from dirac_spectra.polynomial import NEG_INF, coprime, common_roots, gcd, resultant, sylvester_matrix


def test_zero_polynomial_degree_sentinel():
    """The zero polynomial has degree below every integer."""
    z = ComplexPolynomial.zero()
    assert z.degree is NEG_INF
    assert z.degree < 0
    assert not z.degree > -1000
    assert z.is_zero()
    assert z.leading == 0


def test_trailing_zeros_trimmed():
    """Trailing zero coefficients do not count toward the degree."""
    p = ComplexPolynomial((1.0, 2.0, 0.0, 0.0))
    assert p.degree == 1
    assert p.leading == 2.0


def test_non_finite_coefficient_rejected():
    """NaN coefficients are rejected."""
    with pytest.raises(SpecValidationError):
        ComplexPolynomial((1.0, float("nan")))


def test_evaluation_matches_term_sum():
    """Horner evaluation agrees with the naive sum."""
    rng = np.random.default_rng(0)
    p = ComplexPolynomial(tuple(rng.normal(size=5) + 1j * rng.normal(size=5)))
    lam = rng.normal(size=20) + 1j * rng.normal(size=20)
    np.testing.assert_allclose(p(lam), p.evaluate_terms(lam), rtol=1e-12)


def test_arithmetic():
    """Products, differences and scaling of polynomials in λ."""
    lam = ComplexPolynomial.lam()
    p = (lam - 1) * (lam + 1)
    assert p.coeffs == (-1, 0, 1)
    assert (p - p).is_zero()
    assert (2 * lam).coeffs == (0, 2)


def test_taylor_coefficients():
    """λ³ at λ0 = 2: 8 + 12h + 6h² + h³."""
    p = ComplexPolynomial((0, 0, 0, 1))
    np.testing.assert_allclose(p.taylor(2.0, 4), [8, 12, 6, 1, 0])


def test_vanishing_order():
    """Root multiplicities from repeated factors."""
    p = ComplexPolynomial.from_roots([1.0, 1.0, 1.0, -2.0])
    assert p.vanishing_order(1.0) == 3
    assert p.vanishing_order(-2.0) == 1
    assert p.vanishing_order(5.0) == 0


def test_resultant_zero_iff_common_root():
    """The resultant vanishes exactly when roots are shared."""
    p = ComplexPolynomial.from_roots([1.0, 2.0])
    q = ComplexPolynomial.from_roots([2.0, 3.0])
    r = ComplexPolynomial.from_roots([4.0, 5.0])
    assert abs(resultant(p, q)) < 1e-10
    assert abs(resultant(p, r)) > 1.0
    assert not coprime(p, q)
    assert coprime(p, r)


def test_resultant_of_linear_factors():
    """Res(λ - α, λ - β) = α - β up to sign convention of the layout."""
    p = ComplexPolynomial((-2.0, 1.0))
    q = ComplexPolynomial((-5.0, 1.0))
    assert abs(abs(resultant(p, q)) - 3.0) < 1e-12
    assert sylvester_matrix(p, q).shape == (2, 2)


def test_common_roots_with_multiplicity():
    """Shared roots report the smallest multiplicity."""
    p = ComplexPolynomial.from_roots([1j, 1j, 3.0])
    q = ComplexPolynomial.from_roots([1j, 1j, 1j, -1.0])
    shared = common_roots([p, q])
    assert len(shared) == 1
    z, m = shared[0]
    assert abs(z - 1j) < 1e-6
    assert m == 2


def test_common_roots_all_zero():
    """Identically zero polynomials share every root."""
    shared = common_roots([ComplexPolynomial.zero(), ComplexPolynomial.zero()])
    assert shared[0][1] == math.inf


def test_gcd():
    """The GCD keeps only the shared factor."""
    p = ComplexPolynomial.from_roots([2.0, -1.0])
    q = ComplexPolynomial.from_roots([2.0, 7.0])
    g = gcd([p, q])
    assert g.degree == 1
    assert abs(g.roots()[0] - 2.0) < 1e-8
