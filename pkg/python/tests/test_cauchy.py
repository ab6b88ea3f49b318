"""Tests for the Cauchy-problem sweep."""

import numpy as np
import pytest
from dirac_spectra import (
    GridConfig,
    KernelFunction,
    ScalarFunction,
    SeparableTerm,
    SpecValidationError,
    SystemSpec,
    solve_fundamental,
    solve_fundamental_batch,
    validate_growth,
    wronskian,
)
from dirac_spectra.cauchy import carried_wronskian, wronskian_growth
from dirac_spectra.errors import DerivativeOrderError, DynamicRangeError


@pytest.fixture
def kernel_spec(trig_spec):
    """Trigonometric potential plus a two-term separable memory kernel."""
    kernel = KernelFunction.from_entries(
        {
            (0, 1): [SeparableTerm(ScalarFunction.constant(0.5), ScalarFunction.cos(1.0))],
            (1, 0): [SeparableTerm(ScalarFunction.monomial(1.0, 1.0), ScalarFunction.constant(0.3))],
        }
    )
    return SystemSpec(-1.0, 1.0, q1=trig_spec.q1, q2=trig_spec.q2, kernel=kernel)


def test_zero_potential_is_exact(free_spec, coarse_grid):
    """φ = (e^{-iλx}, 0) and ψ = (0, e^{iλx}) for a = -1, b = 1."""
    lam = 2.3 + 0.7j
    fs = solve_fundamental(free_spec, 0.0, lam, coarse_grid)
    x = coarse_grid.nodes
    np.testing.assert_allclose(fs.phi[0], np.exp(-1j * lam * x), rtol=1e-12)
    np.testing.assert_allclose(fs.phi[1], 0.0, atol=1e-14)
    np.testing.assert_allclose(fs.psi[1], np.exp(1j * lam * x), rtol=1e-12)
    np.testing.assert_allclose(fs.psi[0], 0.0, atol=1e-14)


def test_lambda_derivative_chain(free_spec, grid):
    """Derivative chains of the free system match the differentiated exponentials."""
    lam = 1.1 - 0.4j
    fs = solve_fundamental(free_spec, 0.0, lam, grid, kmax=2)
    x = grid.nodes
    e = np.exp(-1j * lam * x)
    np.testing.assert_allclose(fs.dphi[0, 0], -1j * x * e, atol=1e-9)
    np.testing.assert_allclose(fs.dphi[1, 0], -(x**2) * e, atol=1e-9)
    np.testing.assert_allclose(fs.dpsi[0, 1], 1j * x * np.exp(1j * lam * x), atol=1e-9)


def test_lambda_derivative_matches_finite_difference(trig_spec, grid):
    """With a smooth potential the first derivative chain agrees with a central difference."""
    lam, h = 1.3 + 0.4j, 1e-5
    fs = solve_fundamental(trig_spec, 0.0, lam, grid, kmax=1)
    plus = solve_fundamental(trig_spec, 0.0, lam + h, grid).chains[0]
    minus = solve_fundamental(trig_spec, 0.0, lam - h, grid).chains[0]
    fd = (plus - minus) / (2 * h)
    scale = float(np.max(np.abs(fd)))
    np.testing.assert_allclose(fs.chains[1], fd, rtol=1e-6, atol=1e-6 * scale)


def test_solution_from_interior_node(free_spec, coarse_grid):
    """Base point ½ integrates in both directions."""
    lam = 3.0
    fs = solve_fundamental(free_spec, 0.5, lam, coarse_grid)
    np.testing.assert_allclose(fs.at(0.5), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(fs.at(0.0)[0, 0], np.exp(0.5j * lam), rtol=1e-12)


def test_solution_is_linear_in_initial_data(kernel_spec, coarse_grid):
    """Restarting from (c, 0) gives c·φ, and a general matrix mixes the columns."""
    lam, c = 2.0 - 0.5j, 1.7 - 0.4j
    fs = solve_fundamental(kernel_spec, 0.5, lam, coarse_grid)
    scaled = solve_fundamental(kernel_spec, 0.5, lam, coarse_grid, initial=[[c, 0], [0, 1]])
    np.testing.assert_allclose(scaled.phi, c * fs.phi, rtol=1e-12, atol=1e-13)
    np.testing.assert_allclose(scaled.psi, fs.psi, rtol=1e-12, atol=1e-13)
    mix = np.array([[1.0, 2.0j], [-0.5, 3.0]])
    mixed = solve_fundamental(kernel_spec, 0.5, lam, coarse_grid, initial=mix)
    expected = np.einsum("cjn,jk->ckn", fs.chains[0], mix)
    scale = float(np.max(np.abs(expected)))
    np.testing.assert_allclose(mixed.chains[0], expected, atol=1e-12 * scale)
    assert wronskian(mixed, 0.5) == pytest.approx(np.linalg.det(mix), rel=1e-14)


def test_initial_data_validation(free_spec, coarse_grid):
    """Initial data must be a finite 2x2 matrix."""
    with pytest.raises(SpecValidationError):
        solve_fundamental(free_spec, 0.0, 1.0, coarse_grid, initial=[1.0, 0.0])
    with pytest.raises(SpecValidationError):
        solve_fundamental(free_spec, 0.0, 1.0, coarse_grid, initial=[[np.inf, 0], [0, 1]])


def test_wronskian_closed_forms(free_spec, coarse_grid):
    """W = 1 for a + b = 0, W(1) = e^{iλ} for a = -1, b = 2."""
    fs = solve_fundamental(free_spec, 0.0, 2.0 + 0.3j, coarse_grid)
    for x in (0.0, 0.5, 1.0):
        assert wronskian(fs, x) == pytest.approx(1.0, rel=1e-12)
    lam = 3.0 + 1.0j
    fs = solve_fundamental(SystemSpec(-1.0, 2.0), 0.0, lam, coarse_grid)
    assert wronskian(fs, 1.0) == pytest.approx(np.exp(1j * lam), rel=1e-12)


def test_wronskian_matches_carried(trig_spec, grid):
    """det[φ, ψ] of the samples agrees with the Wronskian carried through the sweep."""
    spec = SystemSpec(-1.0, 2.0, q1=trig_spec.q1, q2=trig_spec.q2)
    lam = 3.0 + 1.0j
    fs = solve_fundamental(spec, 0.0, lam, grid)
    for x in (0.0, 0.5, 1.0):
        assert wronskian(fs, x) == pytest.approx(carried_wronskian(fs, x), rel=1e-7)
    assert carried_wronskian(fs, 1.0) == pytest.approx(np.exp(1j * lam), rel=1e-12)


def test_wronskian_with_memory_kernel(kernel_spec):
    """The carried W tracks det[φ, ψ] through the memory terms and moves off the exponential."""
    fs = solve_fundamental(kernel_spec, 0.0, 2.0 + 1.0j, GridConfig(n_points=1025))
    for x in (0.5, 1.0):
        assert wronskian(fs, x) == pytest.approx(carried_wronskian(fs, x), rel=1e-4)
    assert abs(wronskian(fs, 1.0) - 1.0) > 1e-6


def test_wronskian_growth_without_kernel(trig_spec, grid):
    """Without memory the ratio is exactly the exponential, so only discretization error remains."""
    growth = wronskian_growth(trig_spec, grid, [1j, 2 + 3j, -4j])
    assert np.all(np.isfinite(growth))
    np.testing.assert_allclose(growth, 0.0, atol=1e-8)


def test_wronskian_growth_with_kernel(kernel_spec):
    """With memory the sampled ratio deviates and agrees with the carried one."""
    grid = GridConfig(n_points=1025)
    lams = np.array([1j, 2j])
    growth = wronskian_growth(kernel_spec, grid, lams)
    batch = solve_fundamental_batch(kernel_spec, 0.0, lams, grid)
    carried = np.abs(lams.imag) * np.abs(batch.W[:, -1] / batch.W[:, 0] - 1.0)
    assert np.all(growth > 1e-6)
    np.testing.assert_allclose(growth, carried, rtol=0.05, atol=1e-4)


def test_derivative_order_limit(free_spec, coarse_grid):
    """Chains stop at order four."""
    with pytest.raises(DerivativeOrderError):
        solve_fundamental(free_spec, 0.0, 1.0, coarse_grid, kmax=5)


def test_base_point_must_be_node(free_spec, grid):
    """α off the grid is rejected."""
    with pytest.raises(SpecValidationError):
        solve_fundamental(free_spec, 0.3, 1.0, grid)


def test_non_finite_lambda_rejected(free_spec, coarse_grid):
    """NaN spectral parameters are rejected before integrating."""
    with pytest.raises(SpecValidationError):
        solve_fundamental_batch(free_spec, 0.0, [np.nan], coarse_grid)


def test_dynamic_range(free_spec, coarse_grid):
    """Samples past the overflow limit abort the sweep."""
    with pytest.raises(DynamicRangeError):
        solve_fundamental(free_spec, 0.0, 1000j, coarse_grid)


def test_batch_matches_single(trig_spec, coarse_grid):
    """One batched sweep reproduces the single-λ solve."""
    lams = [0.5, 2.0 + 1.0j, -3.0j]
    batch = solve_fundamental_batch(trig_spec, 0.0, lams, coarse_grid)
    single = solve_fundamental(trig_spec, 0.0, lams[1], coarse_grid)
    np.testing.assert_allclose(batch.solution(1).chains, single.chains, rtol=1e-13)
    assert len(batch) == 3


def test_fundamental_to_csv(free_spec, coarse_grid, tmp_path):
    """CSV dump has a header and one row per node."""
    fs = solve_fundamental(free_spec, 0.0, 1.0, coarse_grid)
    path = fs.to_csv(tmp_path / "phi.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "x,re_y1,im_y1,re_y2,im_y2"
    assert len(lines) == coarse_grid.n_points + 1


def test_growth_estimate_bounded(trig_spec, grid):
    """|Im λ|·deviation stays bounded along a vertical ray."""
    report = validate_growth(trig_spec, grid, [5j, 10j, 20j, 40j])
    assert report.bounded_im
    assert report.bounded_abs is not None
    assert np.all(report.deviations < 1.0)
    assert report.deviations[-1] < report.deviations[0]


def test_growth_input_validation(trig_spec, coarse_grid):
    """Growth checks need a vertical ray with increasing |Im λ|."""
    with pytest.raises(SpecValidationError):
        validate_growth(trig_spec, coarse_grid, [1.0, 2j])
    with pytest.raises(SpecValidationError):
        validate_growth(trig_spec, coarse_grid, [1 + 5j, 2 + 10j])
    with pytest.raises(SpecValidationError):
        validate_growth(trig_spec, coarse_grid, [10j, 5j])
