"""Characteristic functions for linear, quadratic and separated boundary conditions."""

import itertools
import logging
import threading
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cauchy import FundamentalSolution, solve_fundamental_batch
from .errors import AsymptoteRegionError, SpecValidationError
from .model import (
    NEG_INF,
    BoundarySpec,
    GridConfig,
    LinearBC,
    QuadraticBC,
    SeparatedBC,
    SystemSpec,
    check_rank2,
)
from .polynomial import ComplexPolynomial, Degree

logger = logging.getLogger(__name__)

QUADRATIC_LOWER_COEFFICIENT_NOTE = (
    "lower half-plane leading coefficient taken as J03^2 (coefficient of the fourth power of psi02 at 1/2); "
    "the competing reading J01^2 is not evaluated"
)


@dataclass(frozen=True)
class MinorTable:
    """2x2 column minors J_ij of a boundary matrix.

    Indices follow the customary labelling: 1..4 for linear conditions,
    0..9 for quadratic ones.
    """

    base: int
    width: int
    entries: Dict[Tuple[int, int], ComplexPolynomial] = field(default_factory=dict)

    def __getitem__(self, key: Tuple[int, int]) -> ComplexPolynomial:
        i, j = key
        lo, hi = self.base, self.base + self.width - 1
        if not (lo <= i <= hi and lo <= j <= hi):
            raise KeyError(f"minor index ({i}, {j}) outside {lo}..{hi}")
        if i == j:
            return ComplexPolynomial.zero()
        if i > j:
            return -self.entries[(j - self.base, i - self.base)]
        return self.entries[(i - self.base, j - self.base)]

    def degree(self, i: int, j: int) -> Degree:
        return self[(i, j)].degree

    def items(self):
        for (i, j), p in sorted(self.entries.items()):
            yield (i + self.base, j + self.base), p


def minors(bc: BoundarySpec) -> MinorTable:
    """All 2x2 column minors of the boundary matrix as polynomials."""
    if isinstance(bc, SeparatedBC):
        bc = bc.to_linear()
    base = 0 if isinstance(bc, QuadraticBC) else 1
    return MinorTable(base=base, width=bc.width, entries=bc.column_minors())


@dataclass(frozen=True)
class ConditionReport:
    """Degree bookkeeping for the completeness conditions."""

    satisfied: bool
    removals: Optional[int]
    """Number of root functions that may be excluded (None when the condition fails)."""
    M: Degree
    degrees: Dict[str, Degree]
    rank2: bool
    messages: Tuple[str, ...] = ()
    notes: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "removals": self.removals,
            "M": _degree_json(self.M),
            "degrees": {k: _degree_json(v) for k, v in self.degrees.items()},
            "rank2": self.rank2,
            "messages": list(self.messages),
            "notes": list(self.notes),
        }


def _degree_json(d: Degree):
    return None if d is NEG_INF else int(d)


def check_theorem1_conditions(bc: Union[LinearBC, SeparatedBC]) -> ConditionReport:
    """deg J14 = deg J32 >= max(deg J13, deg J42, M); excess N = deg J14 - M."""
    linear = bc.to_linear() if isinstance(bc, SeparatedBC) else bc
    J = minors(linear)
    M = linear.max_degree
    degrees = {name: J.degree(int(name[1]), int(name[2])) for name in ("J14", "J32", "J13", "J42")}
    rank = check_rank2(linear)
    messages = []
    d14, d32 = degrees["J14"], degrees["J32"]
    satisfied = True
    if not rank.full_rank:
        satisfied = False
        messages.append(f"boundary matrix loses rank at λ={rank.witness}")
    if d14 is NEG_INF or d32 is NEG_INF:
        satisfied = False
        messages.append("J14 or J32 vanishes identically")
    elif d14 != d32:
        satisfied = False
        messages.append(f"deg J14 = {d14} != deg J32 = {d32}")
    elif d14 < max(degrees["J13"], degrees["J42"], M):
        satisfied = False
        messages.append(f"deg J14 = {d14} below max(deg J13, deg J42, M)")
    removals = int(d14 - M) if satisfied else None
    return ConditionReport(satisfied, removals, M, degrees, rank.full_rank, tuple(messages))


def check_theorem2_conditions(bc: QuadraticBC) -> ConditionReport:
    """deg J03 = deg J12 = M; M root functions may then be excluded."""
    J = minors(bc)
    M = bc.max_degree
    degrees = {"J03": J.degree(0, 3), "J12": J.degree(1, 2)}
    rank = check_rank2(bc)
    messages = []
    satisfied = rank.full_rank
    if not rank.full_rank:
        messages.append(f"boundary matrix loses rank at λ={rank.witness}")
    for name, d in degrees.items():
        if d is NEG_INF:
            satisfied = False
            messages.append(f"{name} vanishes identically")
        elif d != M:
            satisfied = False
            messages.append(f"deg {name} = {d} != M = {M}")
    removals = int(M) if satisfied else None
    return ConditionReport(
        satisfied, removals, M, degrees, rank.full_rank, tuple(messages), notes=(QUADRATIC_LOWER_COEFFICIENT_NOTE,)
    )


def check_conditions(bc: BoundarySpec) -> ConditionReport:
    if isinstance(bc, QuadraticBC):
        return check_theorem2_conditions(bc)
    report = check_theorem1_conditions(bc)
    if isinstance(bc, SeparatedBC) and report.satisfied:
        # the separated theory excludes N0 + N1 functions instead
        report = ConditionReport(
            True, bc.N0 + bc.N1, report.M, report.degrees, report.rank2, report.messages
        )
    return report


class CharContext:
    """Evaluation context for χ with a per-λ cache of fundamental solutions.

    Cached values are the solver output for that λ alone, so cache hits are
    bit-identical to fresh evaluations. The cache is guarded by a lock;
    concurrent misses on the same λ simply compute it twice.
    """

    def __init__(self, spec: SystemSpec, bc: BoundarySpec, grid: Optional[GridConfig] = None):
        self.spec = spec
        self.bc = bc
        self.grid = grid or GridConfig()
        self.eval_point = 0.5 if isinstance(bc, QuadraticBC) else 1.0
        self._lock = threading.Lock()
        self._endpoints: Dict[Tuple[complex, int], Tuple[np.ndarray, complex]] = {}
        self._solutions: Dict[Tuple[complex, int], FundamentalSolution] = {}

    @property
    def linear_bc(self) -> LinearBC:
        if isinstance(self.bc, SeparatedBC):
            return self.bc.to_linear()
        if isinstance(self.bc, LinearBC):
            return self.bc
        raise SpecValidationError("boundary conditions are quadratic")

    def with_grid(self, grid: GridConfig) -> "CharContext":
        return CharContext(self.spec, self.bc, grid)

    def endpoint_values(self, lams, kmax: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        """Chains at the evaluation point and W there.

        Returns:
            (values of shape (L, kmax+1, 2, 2), wronskians of shape (L,))
        """
        lams = np.atleast_1d(np.asarray(lams, dtype=complex)).ravel()
        keys = [(complex(l), kmax) for l in lams]
        with self._lock:
            missing = sorted({k[0] for k in keys if k not in self._endpoints}, key=lambda z: (z.real, z.imag))
        if missing:
            batch = solve_fundamental_batch(self.spec, 0.0, missing, self.grid, kmax)
            idx = self.grid.node_index(self.eval_point)
            with self._lock:
                for i, lam in enumerate(missing):
                    self._endpoints[(lam, kmax)] = (batch.chains[i, ..., idx].copy(), complex(batch.W[i, idx]))
        with self._lock:
            entries = [self._endpoints[k] for k in keys]
        values = np.stack([e[0] for e in entries])
        W = np.array([e[1] for e in entries], dtype=complex)
        return values, W

    def fundamental(self, lam: complex, kmax: int = 0) -> FundamentalSolution:
        """Full fundamental solution on the grid (base point 0)."""
        key = (complex(lam), kmax)
        with self._lock:
            hit = self._solutions.get(key)
        if hit is not None:
            return hit
        fs = solve_fundamental_batch(self.spec, 0.0, [lam], self.grid, kmax).solution(0)
        with self._lock:
            self._solutions[key] = fs
        return fs

    def clear(self) -> None:
        with self._lock:
            self._endpoints.clear()
            self._solutions.clear()

    def chi(self, lam):
        """χ for whatever boundary family the context holds."""
        return eval_char(self, lam)


def linear_columns(phi: Sequence, psi: Sequence) -> Tuple[Tuple, Tuple]:
    """Columns u, w with Q = P u, P w for y = Aφ + Bψ evaluated at 0 and 1."""
    one, zero = 1.0, 0.0
    return (one, zero, phi[0], phi[1]), (zero, one, psi[0], psi[1])


def quadratic_columns(phi: Sequence, psi: Sequence, mul: Callable = np.multiply) -> Tuple[Tuple, Tuple, Tuple]:
    """Coefficients of A², AB and B² in each quadratic monomial of y = Aφ + Bψ.

    ``phi``/``psi`` are the components at ½; ``mul`` multiplies two entries
    (plain product for values, truncated convolution for Taylor series).
    """
    p1, p2 = phi
    s1, s2 = psi
    zero, one = 0.0, 1.0
    v1 = (one, zero, mul(p1, p1), mul(p2, p2), zero, p1, p2, zero, zero, mul(p1, p2))
    v2 = (
        zero, zero, 2.0 * mul(p1, s1), 2.0 * mul(p2, s2), one,
        s1, s2, p1, p2, mul(p1, s2) + mul(s1, p2),
    )
    v3 = (zero, one, mul(s1, s1), mul(s2, s2), zero, zero, zero, s1, s2, mul(s1, s2))
    return v1, v2, v3


def _apply_rows(P: np.ndarray, columns) -> np.ndarray:
    """Q[..., r, c] = sum_i P[..., r, i] * columns[c][i]."""
    shape = P.shape[:-2]
    Q = np.zeros(shape + (2, len(columns)), dtype=complex)
    for c, col in enumerate(columns):
        for i, entry in enumerate(col):
            if np.isscalar(entry) and entry == 0:
                continue
            Q[..., :, c] += P[..., :, i] * np.asarray(entry)[..., None]
    return Q


def _scalar_or_array(lam, values):
    if np.ndim(lam) == 0:
        return complex(values.reshape(-1)[0])
    return values.reshape(np.shape(lam))


def linear_q_matrix(ctx: CharContext, lam) -> np.ndarray:
    """Q(λ) = [[Q11, Q12], [Q21, Q22]] for linear (or embedded separated) conditions."""
    lams = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    Y, _ = ctx.endpoint_values(lams)
    Y = Y[:, 0]
    phi = (Y[:, 0, 0], Y[:, 1, 0])
    psi = (Y[:, 0, 1], Y[:, 1, 1])
    return _apply_rows(ctx.linear_bc.matrix(lams), linear_columns(phi, psi))


def eval_char_linear(ctx: CharContext, lam):
    """χ(λ) = Q11 Q22 - Q12 Q21 with Q built from φ0(1;λ), ψ0(1;λ)."""
    Q = linear_q_matrix(ctx, lam)
    chi = Q[:, 0, 0] * Q[:, 1, 1] - Q[:, 0, 1] * Q[:, 1, 0]
    return _scalar_or_array(lam, chi)


def char_linear_expansion(ctx: CharContext, lam):
    """χ = J12 + J13ψ01 + J14ψ02 + J32φ01 + J42φ02 + J34 W(1;λ), term by term."""
    lams = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    Y, W = ctx.endpoint_values(lams)
    Y = Y[:, 0]
    J = minors(ctx.linear_bc)
    chi = (
        J[(1, 2)](lams)
        + J[(1, 3)](lams) * Y[:, 0, 1]
        + J[(1, 4)](lams) * Y[:, 1, 1]
        + J[(3, 2)](lams) * Y[:, 0, 0]
        + J[(4, 2)](lams) * Y[:, 1, 0]
        + J[(3, 4)](lams) * W
    )
    return _scalar_or_array(lam, chi)


def eval_char_separated(ctx: CharContext, lam):
    """χ = P11[P21ψ01(1) + P22ψ02(1)] - P12[P21φ01(1) + P22φ02(1)]."""
    bc = ctx.bc
    if not isinstance(bc, SeparatedBC):
        raise SpecValidationError("eval_char_separated needs SeparatedBC")
    lams = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    Y, _ = ctx.endpoint_values(lams)
    Y = Y[:, 0]
    p21, p22 = bc.p21(lams), bc.p22(lams)
    chi = bc.p11(lams) * (p21 * Y[:, 0, 1] + p22 * Y[:, 1, 1]) - bc.p12(lams) * (
        p21 * Y[:, 0, 0] + p22 * Y[:, 1, 0]
    )
    return _scalar_or_array(lam, chi)


def quadratic_q_matrix(ctx: CharContext, lam) -> np.ndarray:
    """Q entries (Q_r1, Q_r2, Q_r3): coefficients of A², AB, B² in row r."""
    if not isinstance(ctx.bc, QuadraticBC):
        raise SpecValidationError("quadratic evaluation needs QuadraticBC")
    lams = np.atleast_1d(np.asarray(lam, dtype=complex)).ravel()
    Y, _ = ctx.endpoint_values(lams)
    Y = Y[:, 0]
    phi = (Y[:, 0, 0], Y[:, 1, 0])
    psi = (Y[:, 0, 1], Y[:, 1, 1])
    return _apply_rows(ctx.bc.matrix(lams), quadratic_columns(phi, psi))


def d_minors(Q: np.ndarray) -> Dict[Tuple[int, int], np.ndarray]:
    """D_ij = Q1i Q2j - Q1j Q2i for the 2x3 quadratic Q matrix (1-based labels)."""
    out = {}
    for i, j in itertools.combinations(range(3), 2):
        out[(i + 1, j + 1)] = Q[..., 0, i] * Q[..., 1, j] - Q[..., 0, j] * Q[..., 1, i]
    return out


def eval_char_quadratic(ctx: CharContext, lam):
    """χ = D13² - D12 D23, the resultant of the two quadratics in (A, B)."""
    D = d_minors(quadratic_q_matrix(ctx, lam))
    chi = D[(1, 3)] ** 2 - D[(1, 2)] * D[(2, 3)]
    return _scalar_or_array(lam, chi)


def char_quadratic_sylvester(ctx: CharContext, lam):
    """Same χ from the 4x4 Sylvester determinant of the two quadratics."""
    Q = quadratic_q_matrix(ctx, lam)
    S = np.zeros(Q.shape[:-2] + (4, 4), dtype=complex)
    for r in range(2):
        S[..., 2 * r, 0:3] = Q[..., r, :]
        S[..., 2 * r + 1, 1:4] = Q[..., r, :]
    chi = np.linalg.det(S)
    return _scalar_or_array(lam, chi)


def gamma_functions(ctx: CharContext, lam) -> Tuple:
    """Γ_r = Q_r1 D13² - Q_r2 D13 D12 + Q_r3 D12², which equal Q_r1 χ."""
    Q = quadratic_q_matrix(ctx, lam)
    D = d_minors(Q)
    d13, d12 = D[(1, 3)], D[(1, 2)]
    out = []
    for r in range(2):
        g = Q[:, r, 0] * d13**2 - Q[:, r, 1] * d13 * d12 + Q[:, r, 2] * d12**2
        out.append(_scalar_or_array(lam, g))
    return tuple(out)


def quadratic_ratio_roots(ctx: CharContext, lam: complex) -> Tuple[np.ndarray, np.ndarray]:
    """Roots t = A/B of Q_r1 t² + Q_r2 t + Q_r3 = 0 for both rows (inf for a lost leading term)."""
    Q = quadratic_q_matrix(ctx, lam)[0]
    roots = []
    for r in range(2):
        c2, c1, c0 = Q[r]
        scale = max(abs(c2), abs(c1), abs(c0))
        if scale == 0:
            roots.append(np.array([], dtype=complex))
        elif abs(c2) <= 1e-14 * scale:
            finite = np.roots([c1, c0]) if abs(c1) > 1e-14 * scale else np.array([], dtype=complex)
            roots.append(np.concatenate([finite, [complex(np.inf)]]))
        else:
            roots.append(np.roots([c2, c1, c0]).astype(complex))
    return roots[0], roots[1]


def quadratics_share_root(ctx: CharContext, lam: complex, tol: float = 1e-6) -> bool:
    """Whether the two quadratics in A:B have a common root at λ."""
    r1, r2 = quadratic_ratio_roots(ctx, lam)
    for a in r1:
        for b in r2:
            if np.isinf(a) and np.isinf(b):
                return True
            if np.isinf(a) or np.isinf(b):
                continue
            if abs(a - b) <= tol * max(1.0, abs(a), abs(b)):
                return True
    return False


def eval_char(ctx: CharContext, lam):
    if isinstance(ctx.bc, QuadraticBC):
        return eval_char_quadratic(ctx, lam)
    if isinstance(ctx.bc, SeparatedBC):
        return eval_char_separated(ctx, lam)
    return eval_char_linear(ctx, lam)


def asymptote_threshold(spec: SystemSpec, factor: float = 5.0) -> float:
    return factor / spec.width


def char_asymptote(ctx: CharContext, lam: complex, threshold: Optional[float] = None) -> complex:
    """Leading-term prediction of χ(λ) away from the real axis.

    Linear: J32 e^{iaλ} above, J14 e^{ibλ} below. Quadratic: J12² e^{2iaλ}
    above, J03² e^{2ibλ} below. Separated: P11P22 e^{ibλ} - P12P21 e^{iaλ}.

    Raises:
        AsymptoteRegionError: if |Im λ| is below ``threshold`` (default 5/(b-a))
    """
    lam = complex(lam)
    spec = ctx.spec
    limit = asymptote_threshold(spec) if threshold is None else threshold
    if abs(lam.imag) < limit or lam.imag == 0:
        raise AsymptoteRegionError(f"|Im λ| = {abs(lam.imag):.3g} below the asymptote threshold {limit:.3g}")
    a, b = spec.a, spec.b
    bc = ctx.bc
    if isinstance(bc, SeparatedBC):
        return complex(bc.p11(lam) * bc.p22(lam) * np.exp(1j * b * lam) - bc.p12(lam) * bc.p21(lam) * np.exp(1j * a * lam))
    J = minors(bc)
    if isinstance(bc, QuadraticBC):
        if lam.imag > 0:
            return complex(J[(1, 2)](lam) ** 2 * np.exp(2j * a * lam))
        return complex(J[(0, 3)](lam) ** 2 * np.exp(2j * b * lam))
    if lam.imag > 0:
        return complex(J[(3, 2)](lam) * np.exp(1j * a * lam))
    return complex(J[(1, 4)](lam) * np.exp(1j * b * lam))


def numeric_derivative(chi: Callable, lam: complex, h: Optional[float] = None, direction: complex = 1.0) -> complex:
    """Central difference of χ along ``direction`` (unit complex)."""
    lam = complex(lam)
    if h is None:
        h = 1e-6 * max(1.0, abs(lam))
    step = h * direction
    vals = np.asarray(chi(np.array([lam + step, lam - step])))
    return complex((vals[0] - vals[1]) / (2 * step))


def cauchy_riemann_residual(chi: Callable, lam: complex, h: Optional[float] = None) -> Tuple[float, float]:
    """(|∂χ/∂x - ∂χ/∂(iy)|, |χ'|) from a four-point stencil."""
    dx = numeric_derivative(chi, lam, h, 1.0)
    dy = numeric_derivative(chi, lam, h, 1j)
    return abs(dx - dy), abs(dx)
