"""Example: constant potential with separated boundary conditions.

This example demonstrates:
1. Checking the degree conditions on the boundary data
2. Locating eigenvalues strip by strip
3. Comparing them with the closed form ±sqrt(π²n² + q²)
4. Building normalized eigenfunctions
5. Running the Riesz-basis diagnostics
"""

import math
import time

from dirac_spectra import (
    CharContext,
    GridConfig,
    ScalarFunction,
    SeparatedBC,
    SystemSpec,
    build_riesz_report,
    build_root_functions,
    check_conditions,
    locate_spectrum,
    normalize,
    verify_asymptotics,
)

Q = 0.6


def main():
    spec = SystemSpec(-1.0, 1.0, q1=ScalarFunction.constant(Q), q2=ScalarFunction.constant(Q))
    bc = SeparatedBC.constants(1.0, 1.0)
    grid = GridConfig(n_points=513)

    report = check_conditions(bc)
    print(f"Conditions satisfied: {report.satisfied}, removals: {report.removals}")

    ctx = CharContext(spec, bc, grid)
    start = time.perf_counter()
    spectrum = locate_spectrum(ctx, (-15, 15))
    print(f"Located {len(spectrum)} eigenvalues in {time.perf_counter() - start:.2f} s")

    print("\n  n        lambda_n             closed form        error")
    for pt in sorted(spectrum, key=lambda p: p.strip_index):
        n = pt.strip_index
        exact = math.copysign(math.sqrt((math.pi * n) ** 2 + Q**2), n) if n else None
        err = abs(pt.lam - exact) if exact is not None else float("nan")
        print(f"{n:4d}  {pt.lam.real:+.12f}{pt.lam.imag:+.2e}j  {exact if exact is not None else float('nan'):+.12f}  {err:.2e}")

    asym = verify_asymptotics(spectrum, bc, spec, n_min=5)
    print(f"\nmax |n|·|λ_n - πn| = {asym.max_error:.4f} (limit q²/2π = {Q**2 / (2 * math.pi):.4f})")

    first = next(p for p in spectrum if p.strip_index == 1)
    rf = normalize(build_root_functions(ctx, first)[0], grid)
    print(f"Eigenfunction at λ = {first.lam.real:.6f}: order {rf.order}, norm {rf.l2_norm:.3f}")

    riesz = build_riesz_report(ctx, spectrum, gram_K=[5, 10])
    for K, g in zip(riesz.gram_K, riesz.gram):
        print(f"Gram condition at K = {K}: {g.condition:.4f}")
    print(f"Tail sum S_K (last): {riesz.tail.partial_sums[-1]:.3e}")


if __name__ == "__main__":
    main()
