"""Tests for characteristic functions and condition checks."""

import numpy as np
import pytest
from dirac_spectra import (
    CharContext,
    ComplexPolynomial,
    LinearBC,
    QuadraticBC,
    SeparatedBC,
    char_asymptote,
    check_conditions,
    check_theorem1_conditions,
    check_theorem2_conditions,
    eval_char,
    eval_char_linear,
    eval_char_quadratic,
    eval_char_separated,
    minors,
)
from dirac_spectra.charfn import (
    cauchy_riemann_residual,
    char_linear_expansion,
    char_quadratic_sylvester,
    gamma_functions,
    quadratic_q_matrix,
    quadratics_share_root,
)
from dirac_spectra.errors import AsymptoteRegionError, SpecValidationError

LAMS = np.array([0.3 + 0.1j, 1.7 - 0.4j, -2.2 + 0.8j, 4.0])


def test_free_separated_char_is_sine(free_ctx):
    """y1 + y2 = 0 at both ends gives χ = 2i sin λ."""
    np.testing.assert_allclose(eval_char(free_ctx, LAMS), 2j * np.sin(LAMS), rtol=1e-12)
    assert eval_char(free_ctx, 0.5) == pytest.approx(2j * np.sin(0.5), rel=1e-12)


def test_polynomial_separated_char(free_spec, grid):
    """Free χ for (λ+2)y1(0) + λy2(0) = 0, y1(1) + y2(1) = 0 in closed form."""
    lam = ComplexPolynomial.lam()
    sbc = SeparatedBC(lam + 2, lam, 1, 1)
    ctx = CharContext(free_spec, sbc, grid)
    expected = (LAMS + 2) * np.exp(1j * LAMS) - LAMS * np.exp(-1j * LAMS)
    np.testing.assert_allclose(eval_char_separated(ctx, LAMS), expected, rtol=1e-12)
    assert eval_char(ctx, 0.0) == pytest.approx(2.0)


def test_linear_embedding_agrees_with_separated(trig_spec, ones_bc, grid):
    """Separated conditions and their linear embedding give the same χ."""
    sep = CharContext(trig_spec, ones_bc, grid)
    lin = CharContext(trig_spec, ones_bc.to_linear(), grid)
    np.testing.assert_allclose(eval_char_linear(lin, LAMS), eval_char_separated(sep, LAMS), rtol=1e-10)


def test_minor_expansion_matches_determinant(trig_spec, random_linear_bc, grid):
    """The J_ij expansion reproduces det Q."""
    ctx = CharContext(trig_spec, random_linear_bc, grid)
    np.testing.assert_allclose(char_linear_expansion(ctx, LAMS), eval_char_linear(ctx, LAMS), rtol=1e-9)


def test_minor_table_antisymmetry(random_linear_bc):
    """J_ji = -J_ij and J_ii = 0."""
    J = minors(random_linear_bc)
    assert J[(3, 2)] == -J[(2, 3)]
    assert J[(1, 1)].is_zero()
    with pytest.raises(KeyError):
        J[(0, 1)]


def test_quadratic_worked_example(quadratic_ctx):
    """(y1(0)+y2(0))² = (y1(½)+y2(½))² = 0 gives χ = 16 sin⁴(λ/2)."""
    np.testing.assert_allclose(eval_char_quadratic(quadratic_ctx, LAMS), 16 * np.sin(LAMS / 2) ** 4, rtol=1e-10, atol=1e-13)
    np.testing.assert_allclose(char_quadratic_sylvester(quadratic_ctx, LAMS), eval_char_quadratic(quadratic_ctx, LAMS), rtol=1e-9, atol=1e-12)


def test_quadratic_q_entries(quadratic_ctx):
    """Quadratic coefficients of the free system at λ = 1."""
    Q = quadratic_q_matrix(quadratic_ctx, 1.0)[0]
    np.testing.assert_allclose(Q[0], [1, 2, 1], atol=1e-14)
    np.testing.assert_allclose(Q[1], [np.exp(-1j), 2, np.exp(1j)], rtol=1e-12)


def test_gamma_identity(trig_spec, quadratic_bc, grid):
    """Γ_r = Q_r1·χ for both rows."""
    ctx = CharContext(trig_spec, quadratic_bc, grid)
    lam = 0.7 + 0.3j
    chi = eval_char_quadratic(ctx, lam)
    Q = quadratic_q_matrix(ctx, lam)[0]
    g1, g2 = gamma_functions(ctx, lam)
    assert g1 == pytest.approx(Q[0, 0] * chi, rel=1e-9)
    assert g2 == pytest.approx(Q[1, 0] * chi, rel=1e-9)


def test_quadratics_share_root(quadratic_ctx):
    """The two quadratics share a root exactly at zeros of χ."""
    assert quadratics_share_root(quadratic_ctx, 2 * np.pi)
    assert not quadratics_share_root(quadratic_ctx, 1.0)


def test_quadratic_needs_quadratic_bc(free_ctx):
    """Each evaluator rejects the wrong boundary family."""
    with pytest.raises(SpecValidationError):
        eval_char_quadratic(free_ctx, 1.0)
    with pytest.raises(SpecValidationError):
        CharContext(free_ctx.spec, QuadraticBC(((1,) + (0,) * 9, (0, 1) + (0,) * 8))).linear_bc


def test_separated_asymptote(trig_spec, ones_bc, grid):
    """Separated χ approaches its leading term far from the real axis."""
    ctx = CharContext(trig_spec, ones_bc, grid)
    for lam in (30j, -30j, 2 + 30j):
        ratio = eval_char(ctx, lam) / char_asymptote(ctx, lam)
        assert abs(ratio - 1) < 0.2


def test_quadratic_asymptote(trig_spec, quadratic_bc, grid):
    """Quadratic χ approaches its leading term far from the real axis."""
    ctx = CharContext(trig_spec, quadratic_bc, grid)
    for lam in (20j, -20j):
        ratio = eval_char(ctx, lam) / char_asymptote(ctx, lam)
        assert abs(ratio - 1) < 0.2


def test_linear_asymptote(free_spec, random_linear_bc, grid):
    """Linear χ approaches its leading term far from the real axis."""
    ctx = CharContext(free_spec, random_linear_bc, grid)
    for lam in (30j, -30j):
        ratio = eval_char(ctx, lam) / char_asymptote(ctx, lam)
        assert abs(ratio - 1) < 0.2


def test_asymptote_region(free_ctx):
    """The leading term is refused near the real axis."""
    with pytest.raises(AsymptoteRegionError):
        char_asymptote(free_ctx, 1 + 0.5j)


def test_char_is_analytic(trig_spec, random_linear_bc, grid):
    """χ satisfies the Cauchy-Riemann equations."""
    ctx = CharContext(trig_spec, random_linear_bc, grid)
    residual, scale = cauchy_riemann_residual(ctx.chi, 1.3 + 0.4j)
    assert residual <= 1e-5 * scale


def test_cache_hits_are_identical(trig_spec, ones_bc, grid):
    """Cached and batched evaluations are bit-identical."""
    ctx = CharContext(trig_spec, ones_bc, grid)
    first = eval_char(ctx, LAMS[1])
    eval_char(ctx, LAMS)
    assert eval_char(ctx, LAMS[1]) == first


def test_separated_conditions(ones_bc):
    """Separated conditions pass and exclude N0 + N1 functions."""
    report = check_conditions(ones_bc)
    assert report.satisfied
    assert report.removals == 0
    lam = ComplexPolynomial.lam()
    report = check_conditions(SeparatedBC(lam + 2, lam, 1, 1))
    assert report.satisfied
    assert report.removals == 1
    assert report.degrees["J14"] == 1


def test_linear_conditions_fail_on_degree_mismatch():
    """Linear conditions with deg J14 != deg J32 fail."""
    lam = ComplexPolynomial.lam()
    # only P14 depends on λ, so J32 stays constant while J14 is linear
    report = check_theorem1_conditions(LinearBC(([1, 0, 1, lam], [1, 1, 0, 0])))
    assert report.rank2
    assert not report.satisfied
    assert report.removals is None
    assert report.degrees["J14"] == 1
    assert report.degrees["J32"] == 0
    assert any("J32" in m for m in report.messages)
    assert report.to_dict()["M"] == 1


def test_quadratic_conditions(quadratic_bc):
    """Quadratic conditions need deg J03 = deg J12 = M."""
    report = check_theorem2_conditions(quadratic_bc)
    assert report.satisfied
    assert report.removals == 0
    assert "J03^2" in report.to_dict()["notes"][0]
    row1 = [0.0] * 10
    row1[0] = row1[1] = 1.0
    row2 = [0.0] * 10
    row2[2] = 1.0
    row2[9] = 2.0
    failing = check_conditions(QuadraticBC((row1, row2)))
    assert not failing.satisfied
    assert failing.degrees["J03"] is not None
    assert failing.to_dict()["degrees"]["J03"] is None
