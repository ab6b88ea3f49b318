"""Eigenfunctions and associate functions built from the ω-formulas."""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from . import taylor
from .cauchy import MAX_DERIVATIVE_ORDER
from .charfn import CharContext, linear_columns, quadratic_columns
from .errors import DerivativeOrderError, SpecValidationError
from .model import QUADRATIC_MONOMIALS, BoundarySpec, GridConfig, QuadraticBC, SeparatedBC, SystemSpec
from .report import SAMPLE_HEADER, sample_rows, write_csv
from .spectrum import SpectralPoint

logger = logging.getLogger(__name__)

ZERO_TOL = 1e-10
RANK_TOL = 1e-8


@dataclass
class RootFunction:
    """One member of a root chain sampled on the grid."""

    eigenvalue: SpectralPoint
    branch: int
    """1 or 2: which ω the chain was differentiated from."""
    order: int
    """k in (1/k!) ∂^k ω / ∂λ^k at the eigenvalue."""
    samples: np.ndarray
    """Shape (2, n)."""
    l2_norm: float
    x: np.ndarray

    @property
    def lam(self) -> complex:
        return self.eigenvalue.lam

    def to_csv(self, path: Union[str, Path]) -> Path:
        return write_csv(path, SAMPLE_HEADER, sample_rows(self.x, self.samples))


def _series(entry, order: int) -> np.ndarray:
    if np.ndim(entry) == 0:
        return taylor.constant(entry, order)
    return np.asarray(entry)


def _row_combination(P: np.ndarray, columns, order: int) -> List[List[np.ndarray]]:
    """Series of Q[r][c] = Σ_i P_ri · columns[c][i]."""
    out = []
    for r in range(2):
        row = []
        for col in columns:
            acc = np.zeros(order + 1, dtype=complex)
            for i, entry in enumerate(col):
                if np.ndim(entry) == 0 and entry == 0:
                    continue
                acc = acc + taylor.mul(P[:, r, i], _series(entry, order))
            row.append(acc)
        out.append(row)
    return out


def omega_series(ctx: CharContext, lam: complex, order: int = 0) -> np.ndarray:
    """Taylor coefficients in λ of ω1, ω2 on the whole grid.

    Linear: ω1 = Q12 φ - Q11 ψ, ω2 = Q22 φ - Q21 ψ. Quadratic:
    ω1 = D13 φ - D12 ψ, ω2 = D23 φ - D13 ψ.

    Returns:
        Array of shape (order+1, 2 branches, 2 components, n)
    """
    if order > MAX_DERIVATIVE_ORDER:
        raise DerivativeOrderError(
            f"root chains of length {order + 1} need λ-derivatives beyond order {MAX_DERIVATIVE_ORDER}"
        )
    fs = ctx.fundamental(lam, order)
    T = taylor.from_derivatives(fs.chains)
    phi, psi = T[:, :, 0, :], T[:, :, 1, :]

    if isinstance(ctx.bc, QuadraticBC):
        mid = ctx.grid.node_index(0.5)
        cols = quadratic_columns(
            (phi[:, 0, mid], phi[:, 1, mid]), (psi[:, 0, mid], psi[:, 1, mid]), mul=taylor.mul
        )
        Q = _row_combination(ctx.bc.taylor_matrix(lam, order), cols, order)

        def D(i, j):
            return taylor.det2(Q[0][i], Q[0][j], Q[1][i], Q[1][j])

        d12, d13, d23 = D(0, 1), D(0, 2), D(1, 2)
        w1 = taylor.det2(d13, d12, psi, phi)
        w2 = taylor.det2(d23, d13, psi, phi)
    else:
        cols = linear_columns((phi[:, 0, -1], phi[:, 1, -1]), (psi[:, 0, -1], psi[:, 1, -1]))
        Q = _row_combination(ctx.linear_bc.taylor_matrix(lam, order), cols, order)
        w1 = taylor.det2(Q[0][1], Q[0][0], psi, phi)
        w2 = taylor.det2(Q[1][1], Q[1][0], psi, phi)
    return np.stack([w1, w2], axis=1)


def inner_product(u: np.ndarray, v: np.ndarray, grid: GridConfig) -> complex:
    """⟨u, v⟩ in L²[0,1] ⊕ L²[0,1] with the grid quadrature."""
    return complex(np.sum(grid.integrate(u * np.conj(v), axis=-1)))


def l2_norm(u: np.ndarray, grid: GridConfig) -> float:
    return float(np.sqrt(max(inner_product(u, u, grid).real, 0.0)))


def gram_matrix(functions: Sequence[np.ndarray], grid: GridConfig) -> np.ndarray:
    """G[i, j] = ⟨f_j, f_i⟩ over sampled 2-component functions."""
    F = np.stack([np.asarray(f) for f in functions])
    w = grid.weights()
    return np.einsum("icn,jcn,n->ij", np.conj(F), F, w)


def branch_alignment(u: np.ndarray, v: np.ndarray, grid: GridConfig) -> float:
    """|⟨u, v⟩|² / (‖u‖² ‖v‖²); 1 for parallel functions."""
    nu, nv = inner_product(u, u, grid).real, inner_product(v, v, grid).real
    if nu == 0 or nv == 0:
        return 0.0
    return abs(inner_product(u, v, grid)) ** 2 / (nu * nv)


def _rank_filter(candidates, grid: GridConfig, limit: int) -> List[Tuple[int, int, np.ndarray]]:
    kept: List[Tuple[int, int, np.ndarray]] = []
    basis: List[np.ndarray] = []
    for k, j, u in candidates:
        r = u.copy()
        for e in basis:
            r = r - inner_product(r, e, grid) * e
        norm_u = l2_norm(u, grid)
        norm_r = l2_norm(r, grid)
        if norm_r <= RANK_TOL * norm_u:
            logger.debug("order %d branch %d is dependent on earlier chain members", k, j)
            continue
        basis.append(r / norm_r)
        kept.append((k, j, u))
        if len(kept) == limit:
            break
    return kept


def build_root_functions(ctx: CharContext, pt: SpectralPoint) -> List[RootFunction]:
    """Non-redundant eigen- and associate functions at a located eigenvalue.

    Candidates (1/k!) ∂^k ω_j for k < multiplicity are dropped when their sup
    norm is below 1e-10 of the largest candidate, then filtered by
    Gram-Schmidt rank in (k, j) order. At most ``multiplicity`` functions
    are kept.

    Raises:
        DerivativeOrderError: if the multiplicity exceeds the λ-derivative capability
    """
    order = pt.multiplicity - 1
    series = omega_series(ctx, pt.lam, order)
    sups = np.max(np.abs(series), axis=(-2, -1))
    scale = float(np.max(sups))
    if scale == 0:
        logger.warning("every candidate root function vanishes at λ=%s", pt.lam)
        return []
    candidates = [
        (k, j + 1, series[k, j])
        for k in range(order + 1)
        for j in range(2)
        if sups[k, j] >= ZERO_TOL * scale
    ]
    grid = ctx.grid
    kept = _rank_filter(candidates, grid, pt.multiplicity)
    x = grid.nodes
    return [RootFunction(pt, j, k, u, l2_norm(u, grid), x) for k, j, u in kept]


def build_root_functions_linear(ctx: CharContext, pt: SpectralPoint) -> List[RootFunction]:
    if isinstance(ctx.bc, QuadraticBC):
        raise SpecValidationError("build_root_functions_linear needs linear or separated conditions")
    return build_root_functions(ctx, pt)


def build_root_functions_quadratic(ctx: CharContext, pt: SpectralPoint) -> List[RootFunction]:
    if not isinstance(ctx.bc, QuadraticBC):
        raise SpecValidationError("build_root_functions_quadratic needs QuadraticBC")
    return build_root_functions(ctx, pt)


def bc_residual(bc: BoundarySpec, samples: np.ndarray, lam: complex) -> Tuple[complex, complex]:
    """Both boundary forms applied to a sampled function.

    Linear and separated conditions read y at x = 0 and 1; quadratic ones at
    x = 0 and ½ (the grid midpoint).
    """
    y = np.asarray(samples)
    if isinstance(bc, SeparatedBC):
        bc = bc.to_linear()
    P = bc.matrix(complex(lam))
    if isinstance(bc, QuadraticBC):
        mid = (y.shape[-1] - 1) // 2
        v = (y[0, 0], y[1, 0], y[0, mid], y[1, mid])
        values = np.array([v[i] * v[j] for i, j in QUADRATIC_MONOMIALS])
    else:
        values = np.array([y[0, 0], y[1, 0], y[0, -1], y[1, -1]])
    out = P @ values
    return complex(out[0]), complex(out[1])


def normalize(rf: RootFunction, grid: Optional[GridConfig] = None) -> RootFunction:
    """Scale to unit norm in L²[0,1] ⊕ L²[0,1]."""
    grid = grid or GridConfig(n_points=rf.samples.shape[-1])
    norm = l2_norm(rf.samples, grid)
    if norm == 0 or not np.isfinite(norm):
        raise SpecValidationError("cannot normalize a function with zero norm")
    return replace(rf, samples=rf.samples / norm, l2_norm=1.0)


def _derivative(u: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite difference along the last axis."""
    d = np.empty_like(u)
    d[..., 2:-2] = (u[..., :-4] - 8 * u[..., 1:-3] + 8 * u[..., 3:-1] - u[..., 4:]) / (12 * h)
    f = u[..., :5]
    d[..., 0] = (-25 * f[..., 0] + 48 * f[..., 1] - 36 * f[..., 2] + 16 * f[..., 3] - 3 * f[..., 4]) / (12 * h)
    d[..., 1] = (-3 * f[..., 0] - 10 * f[..., 1] + 18 * f[..., 2] - 6 * f[..., 3] + f[..., 4]) / (12 * h)
    g = u[..., -5:]
    d[..., -1] = (25 * g[..., 4] - 48 * g[..., 3] + 36 * g[..., 2] - 16 * g[..., 1] + 3 * g[..., 0]) / (12 * h)
    d[..., -2] = (3 * g[..., 4] + 10 * g[..., 3] - 18 * g[..., 2] + 6 * g[..., 1] - g[..., 0]) / (12 * h)
    return d


def apply_operator(spec: SystemSpec, u: np.ndarray, grid: GridConfig) -> np.ndarray:
    """(1/i) B u' + Q u + ∫_0^x M(x,t) u(t) dt on the grid (B = diag(1/a, 1/b))."""
    x = grid.nodes
    du = _derivative(u, grid.h)
    out = np.empty_like(u, dtype=complex)
    out[0] = du[0] / (1j * spec.a) + spec.q1(x) * u[1]
    out[1] = du[1] / (1j * spec.b) + spec.q2(x) * u[0]
    for i, j, term in spec.kernel.terms():
        history = integrate.cumulative_trapezoid(term.g(x) * u[j], x, initial=0)
        out[i] = out[i] + term.f(x) * history
    return out


def chain_residual(spec: SystemSpec, chain: Sequence[np.ndarray], lam0: complex, grid: GridConfig) -> List[float]:
    """Relative residuals of ℓu_k - λ0 u_k - u_{k-1} along a root chain (u_{-1} = 0).

    Each entry is the grid max-norm of the residual divided by max |u_k|.
    """
    out = []
    prev = None
    for u in chain:
        u = np.asarray(u)
        r = apply_operator(spec, u, grid) - lam0 * u
        if prev is not None:
            r = r - prev
        scale = float(np.max(np.abs(u)))
        out.append(float(np.max(np.abs(r))) / scale if scale > 0 else 0.0)
        prev = u
    return out


def dump_root_functions(functions: Sequence[RootFunction], directory: Union[str, Path], prefix: str = "rf") -> List[Path]:
    """Write one CSV per root function, named by position, strip, branch and order."""
    directory = Path(directory)
    paths = []
    for idx, rf in enumerate(functions):
        tag = rf.eigenvalue.strip_index
        label = f"{idx:04d}" if tag is None else f"{idx:04d}_n{tag}"
        paths.append(rf.to_csv(directory / f"{prefix}_{label}_b{rf.branch}_k{rf.order}.csv"))
    return paths
