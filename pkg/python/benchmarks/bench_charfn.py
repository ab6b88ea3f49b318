"""Benchmarks for the fundamental solver and spectrum location."""

import numpy as np
import pytest
from dirac_spectra import (
    CharContext,
    GridConfig,
    KernelFunction,
    ScalarFunction,
    SeparableTerm,
    SeparatedBC,
    SystemSpec,
    eval_char,
    locate_spectrum,
    solve_fundamental,
    solve_fundamental_batch,
)


def smooth_spec(with_kernel: bool = False) -> SystemSpec:
    q1 = ScalarFunction.cos(2.0, 0.5) + ScalarFunction.constant(0.2)
    q2 = ScalarFunction.sin(3.0, 0.4)
    if not with_kernel:
        return SystemSpec(-1.0, 1.0, q1=q1, q2=q2)
    term = SeparableTerm(ScalarFunction.constant(0.3), ScalarFunction.monomial(1.0, 1.0))
    kernel = KernelFunction.from_entries({(0, 1): [term], (1, 0): [term]})
    return SystemSpec(-1.0, 1.0, q1=q1, q2=q2, kernel=kernel)


@pytest.mark.benchmark(group="solver_single")
def test_bench_solve_single(benchmark):
    """One λ on the default 513-node grid."""
    spec = smooth_spec()
    benchmark(solve_fundamental, spec, 0.0, 3.0 + 1.0j, GridConfig())


@pytest.mark.benchmark(group="solver_batch")
def test_bench_solve_batch(benchmark):
    """64 λ values integrated together."""
    spec = smooth_spec()
    lams = np.linspace(-20, 20, 64) + 0.5j
    benchmark(solve_fundamental_batch, spec, 0.0, lams, GridConfig())


@pytest.mark.benchmark(group="solver_kernel")
def test_bench_solve_with_kernel(benchmark):
    """Separable memory kernel on a 257-node grid."""
    spec = smooth_spec(with_kernel=True)
    benchmark(solve_fundamental, spec, 0.0, 3.0 + 1.0j, GridConfig(n_points=257))


@pytest.mark.benchmark(group="char_contour")
def test_bench_char_on_contour(benchmark):
    """χ on a 256-point contour without cache reuse."""
    spec = smooth_spec()
    bc = SeparatedBC.constants(1.0, 1.0)
    z = 5.0 + 2.0 * np.exp(2j * np.pi * np.arange(256) / 256)

    def run():
        ctx = CharContext(spec, bc, GridConfig())
        return eval_char(ctx, z)

    benchmark(run)


@pytest.mark.benchmark(group="spectrum_strips")
def test_bench_locate_strips(benchmark):
    """Eigenvalues for |n| <= 10 on a coarse grid."""
    spec = smooth_spec()
    bc = SeparatedBC.constants(1.0, 1.0)

    def run():
        ctx = CharContext(spec, bc, GridConfig(n_points=129))
        return locate_spectrum(ctx, (-10, 10), threads=1)

    benchmark(run)
