"""Riesz-basis diagnostics for separated boundary conditions.

The rescaling operator A maps L²[0,1] ⊕ L²[0,1] onto L²[a,b]:
(Ay)(t) = y1(t/a)/C12 for t in (a, 0) and -y2(t/b)/C11 for t in (0, b).
Eigenfunctions pushed through A are compared with the exponentials
exp(iλ_{n,0} t) at the model roots.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.interpolate import CubicSpline

from .charfn import CharContext, check_conditions
from .eigensystem import gram_matrix, omega_series
from .errors import EnumerationMismatchError, ExclusionError, SpecValidationError
from .model import GridConfig, SeparatedBC, SystemSpec
from .spectrum import SpectralPoint, Spectrum, model_roots

logger = logging.getLogger(__name__)

GRAM_FAILURE_CONDITION = 1e12
TIKHONOV_FLOOR = 1e-12

LOWEST_MODULUS = "lowest_modulus"


@dataclass(frozen=True)
class ExclusionSet:
    """Root functions (λ, order) removed from the system."""

    removed: Tuple[Tuple[complex, int], ...]
    target_size: int

    def __len__(self) -> int:
        return len(self.removed)

    def __contains__(self, item) -> bool:
        lam, k = item
        return any(k == rk and abs(lam - rl) <= 1e-7 * max(1.0, abs(rl)) for rl, rk in self.removed)

    def to_dict(self) -> dict:
        return {
            "target_size": self.target_size,
            "removed": [{"lambda": lam, "order": k} for lam, k in self.removed],
        }


def _modulus_key(p: SpectralPoint):
    return (abs(p.lam), p.lam.real, p.lam.imag)


def select_exclusion(
    points: Sequence[SpectralPoint],
    N: int,
    strategy: Union[str, Sequence[Tuple[complex, int]]] = LOWEST_MODULUS,
) -> ExclusionSet:
    """Pick N root functions to exclude, closed under higher chain orders.

    Args:
        points: Located eigenvalues; each contributes ``multiplicity`` chain members
        N: Exclusion size
        strategy: ``"lowest_modulus"`` (whole chains at smallest |λ| first,
            trimming from the highest order down) or an explicit list of (λ, order)

    Raises:
        ExclusionError: if no closed set of size N exists among the points
    """
    total = sum(p.multiplicity for p in points)
    achievable = list(range(total + 1))
    if N < 0 or N > total:
        raise ExclusionError(f"cannot exclude {N} of {total} root functions", achievable)
    if isinstance(strategy, str):
        if strategy != LOWEST_MODULUS:
            raise SpecValidationError(f"unknown exclusion strategy {strategy!r}")
        removed = []
        remaining = N
        for p in sorted(points, key=_modulus_key):
            if remaining == 0:
                break
            take = min(remaining, p.multiplicity)
            removed.extend((p.lam, k) for k in range(p.multiplicity - 1, p.multiplicity - 1 - take, -1))
            remaining -= take
        return ExclusionSet(tuple(removed), N)

    chosen: Dict[int, List[int]] = {}
    for lam, k in strategy:
        lam = complex(lam)
        match = [i for i, p in enumerate(points) if abs(p.lam - lam) <= 1e-7 * max(1.0, abs(p.lam))]
        if not match:
            raise ExclusionError(f"λ={lam} is not among the located eigenvalues", achievable)
        i = match[0]
        if not 0 <= k < points[i].multiplicity:
            raise ExclusionError(f"order {k} outside the chain at λ={points[i].lam}", achievable)
        chosen.setdefault(i, []).append(int(k))
    removed = []
    for i, orders in sorted(chosen.items()):
        m = points[i].multiplicity
        if sorted(set(orders)) != list(range(m - len(set(orders)), m)):
            raise ExclusionError(
                f"exclusion at λ={points[i].lam} must hold every order above its lowest member", achievable
            )
        removed.extend((points[i].lam, k) for k in sorted(set(orders), reverse=True))
    if len(removed) != N:
        raise ExclusionError(f"explicit exclusion has {len(removed)} members, expected {N}", achievable)
    return ExclusionSet(tuple(removed), N)


def _spline(s: np.ndarray, values: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    re = CubicSpline(s, values.real)
    im = CubicSpline(s, values.imag)
    return lambda q: re(q) + 1j * im(q)


@dataclass
class TransformedFunction:
    """A function on [a, b] stored as its two halves.

    ``left[i]`` is the value at t = a·s_i and ``right[i]`` the value at
    t = b·s_i, where s_i are the [0, 1] grid nodes.
    """

    a: float
    b: float
    left: np.ndarray
    right: np.ndarray
    source: Optional[SpectralPoint] = None

    def inner(self, other: "TransformedFunction", grid: GridConfig) -> complex:
        """⟨self, other⟩ in L²[a, b]."""
        left = grid.integrate(self.left * np.conj(other.left), length=-self.a)
        right = grid.integrate(self.right * np.conj(other.right), length=self.b)
        return complex(left + right)

    def norm(self, grid: GridConfig) -> float:
        return math.sqrt(max(self.inner(self, grid).real, 0.0))

    def __sub__(self, other: "TransformedFunction") -> "TransformedFunction":
        return TransformedFunction(self.a, self.b, self.left - other.left, self.right - other.right)

    def scaled(self, factor: complex) -> "TransformedFunction":
        return TransformedFunction(self.a, self.b, self.left * factor, self.right * factor, self.source)

    def uniform(self, n_points: int) -> Tuple[np.ndarray, np.ndarray]:
        """Cubic-spline resample onto ``n_points`` equispaced points of [a, b]."""
        s = np.linspace(0.0, 1.0, self.left.shape[-1])
        t = np.linspace(self.a, self.b, n_points)
        out = np.empty(n_points, dtype=complex)
        neg = t < 0
        out[neg] = _spline(s, self.left)(t[neg] / self.a)
        out[~neg] = _spline(s, self.right)(t[~neg] / self.b)
        return t, out

    @classmethod
    def from_uniform(cls, t: np.ndarray, values: np.ndarray, grid: GridConfig) -> "TransformedFunction":
        """Interpolate samples on an equispaced [a, b] grid back onto both halves."""
        t = np.asarray(t, dtype=float)
        a, b = float(t[0]), float(t[-1])
        if not a < 0 < b:
            raise SpecValidationError(f"uniform samples must straddle 0, got [{a}, {b}]")
        f = _spline(t, np.asarray(values, dtype=complex))
        s = grid.nodes
        return cls(a, b, f(a * s), f(b * s))


def _leading(sbc: SeparatedBC) -> Tuple[complex, complex]:
    c11, c12 = sbc.C11, sbc.C12
    if c11 == 0 or c12 == 0:
        raise SpecValidationError("C11 and C12 must be nonzero")
    return c11, c12


def operator_A(spec: SystemSpec, sbc: SeparatedBC, samples: np.ndarray, source: Optional[SpectralPoint] = None) -> TransformedFunction:
    """Apply A to a 2-component function sampled on the [0, 1] grid."""
    c11, c12 = _leading(sbc)
    y = np.asarray(samples)
    return TransformedFunction(spec.a, spec.b, y[0] / c12, -y[1] / c11, source)


def operator_A_inverse(sbc: SeparatedBC, tf: TransformedFunction) -> np.ndarray:
    """A⁻¹: back to samples of shape (2, n) on [0, 1]."""
    c11, c12 = _leading(sbc)
    return np.stack([c12 * tf.left, -c11 * tf.right])


def a_weighted_norm(spec: SystemSpec, sbc: SeparatedBC, samples: np.ndarray, grid: GridConfig) -> float:
    """‖Ay‖ from the component integrals: |a|/|C12|² ∫|y1|² + b/|C11|² ∫|y2|²."""
    c11, c12 = _leading(sbc)
    y = np.asarray(samples)
    sq = grid.integrate(np.abs(y) ** 2, axis=-1).real
    return math.sqrt(-spec.a * sq[0] / abs(c12) ** 2 + spec.b * sq[1] / abs(c11) ** 2)


def reference_basis(sbc: SeparatedBC, spec: SystemSpec, n: int, grid: GridConfig) -> Tuple[TransformedFunction, float]:
    """exp(iλ_{n,0} t) on [a, b] and its closed-form squared norm ∫ exp(-2κt) dt, κ = Re ln R/(b-a)."""
    lam0 = model_roots(sbc, spec, [n])[0]
    s = grid.nodes
    tf = TransformedFunction(spec.a, spec.b, np.exp(1j * lam0 * spec.a * s), np.exp(1j * lam0 * spec.b * s))
    kappa = lam0.imag
    if abs(kappa) * spec.width < 1e-12:
        norm_sq = spec.width
    else:
        norm_sq = (math.exp(-2 * kappa * spec.a) - math.exp(-2 * kappa * spec.b)) / (2 * kappa)
    return tf, norm_sq


def pullback(sbc: SeparatedBC, spec: SystemSpec, n: int, grid: GridConfig) -> np.ndarray:
    """A⁻¹ applied to the n-th reference exponential."""
    return operator_A_inverse(sbc, reference_basis(sbc, spec, n, grid)[0])


def separated_eigenfunction(ctx: CharContext, lam: complex) -> np.ndarray:
    """P12(λ)φ - P11(λ)ψ divided by λ^{N0} (undivided at λ = 0)."""
    sbc = ctx.bc
    if not isinstance(sbc, SeparatedBC):
        raise SpecValidationError("separated_eigenfunction needs SeparatedBC")
    y = omega_series(ctx, lam, 0)[0, 0]
    if sbc.N0 > 0 and lam != 0:
        y = y / lam ** sbc.N0
    return y


@dataclass
class TailReport:
    """Quadratic-closeness sums Σ_{|n|≤K} ‖Aω_n - ω̃_n‖²."""

    indices: List[int]
    terms: List[float]
    scaled_terms: List[float]
    """|n|·‖Aω_n - ω̃_n‖."""
    K: List[int]
    partial_sums: List[float]

    def to_dict(self) -> dict:
        return {
            "indices": self.indices,
            "terms": self.terms,
            "scaled_terms": self.scaled_terms,
            "K": self.K,
            "partial_sums": self.partial_sums,
        }


def _enumeration_order(indices) -> List[int]:
    return sorted(indices, key=lambda n: (abs(n), n))


def tail_sum(
    transformed: Mapping[int, TransformedFunction],
    refs: Mapping[int, TransformedFunction],
    grid: GridConfig,
) -> TailReport:
    """Partial sums of ‖Aω_n - ω̃_n‖² over |n| ≤ K.

    Raises:
        EnumerationMismatchError: if the two index sets differ
    """
    if set(transformed) != set(refs):
        missing = sorted(set(transformed) ^ set(refs))
        raise EnumerationMismatchError(f"strip indices without a counterpart: {missing}")
    order = _enumeration_order(transformed)
    terms = [(transformed[n] - refs[n]).norm(grid) ** 2 for n in order]
    scaled = [abs(n) * math.sqrt(t) for n, t in zip(order, terms)]
    Ks = sorted({abs(n) for n in order})
    partial = [float(sum(t for n, t in zip(order, terms) if abs(n) <= K)) for K in Ks]
    return TailReport(order, terms, scaled, Ks, partial)


@dataclass
class GramDiagnostics:
    condition: float
    eigenvalues: np.ndarray
    failed: bool
    """Condition above 1e12 (numerically rank deficient)."""


def _gram(functions, grid: GridConfig) -> np.ndarray:
    if all(isinstance(f, TransformedFunction) for f in functions):
        m = len(functions)
        G = np.empty((m, m), dtype=complex)
        for i in range(m):
            for j in range(i, m):
                G[i, j] = functions[j].inner(functions[i], grid)
                G[j, i] = np.conj(G[i, j])
        return G
    return gram_matrix(functions, grid)


def gram_condition(functions: Sequence, grid: GridConfig, K: Optional[int] = None) -> GramDiagnostics:
    """Condition number of the Gram matrix of the normalized system.

    Args:
        functions: TransformedFunction objects or (2, n) sample arrays, in enumeration order
        grid: Quadrature grid
        K: Use the first 2K+1 functions (all when None)
    """
    funcs = list(functions)
    if K is not None:
        if len(funcs) < 2 * K + 1:
            raise SpecValidationError(f"K={K} needs {2 * K + 1} functions, got {len(funcs)}")
        funcs = funcs[: 2 * K + 1]
    if not funcs:
        raise SpecValidationError("gram_condition needs at least one function")
    G = _gram(funcs, grid)
    d = np.sqrt(np.abs(np.diag(G)))
    if np.any(d == 0):
        return GramDiagnostics(math.inf, np.zeros(len(funcs)), True)
    G = G / np.outer(d, d)
    eig = linalg.eigh(0.5 * (G + G.conj().T), eigvals_only=True)
    lo, hi = float(eig[0]), float(eig[-1])
    cond = hi / lo if lo > 0 else math.inf
    return GramDiagnostics(cond, eig, not cond <= GRAM_FAILURE_CONDITION)


def default_test_set(grid: GridConfig) -> Dict[str, np.ndarray]:
    """Constants and linear polynomials in each component, plus a step."""
    x = grid.nodes
    one, zero = np.ones_like(x, dtype=complex), np.zeros_like(x, dtype=complex)
    step = np.where(x < 0.5, 1.0, 0.0).astype(complex)
    return {
        "const_1": np.stack([one, zero]),
        "const_2": np.stack([zero, one]),
        "linear_1": np.stack([x.astype(complex), zero]),
        "linear_2": np.stack([zero, x.astype(complex)]),
        "step_1": np.stack([step, zero]),
    }


@dataclass
class CompletenessTable:
    K: List[int]
    residual: Dict[str, List[float]]
    """‖f - Pf‖ per test function and K."""
    relative_energy: Dict[str, List[float]]
    """‖f - Pf‖² / ‖f‖²."""

    def decreasing(self, name: str) -> bool:
        r = self.residual[name]
        return all(b < a for a, b in zip(r, r[1:]))

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "tests": {
                name: {"residual": self.residual[name], "relative_energy": self.relative_energy[name]}
                for name in sorted(self.residual)
            },
        }


def _project_residual(F: np.ndarray, f: np.ndarray, w: np.ndarray) -> float:
    G = np.einsum("icn,jcn,n->ij", np.conj(F), F, w)
    rhs = np.einsum("icn,cn,n->i", np.conj(F), f, w)
    tau = TIKHONOV_FLOOR * float(np.max(np.abs(np.diag(G))))
    coef = linalg.solve(G + tau * np.eye(G.shape[0]), rhs, assume_a="her")
    r = f - np.einsum("i,icn->cn", coef, F)
    return math.sqrt(max(float(np.sum(np.abs(r) ** 2 * w)), 0.0))


def completeness_residual(
    functions: Sequence[np.ndarray],
    grid: GridConfig,
    Ks: Sequence[int],
    test_set: Optional[Mapping[str, np.ndarray]] = None,
) -> CompletenessTable:
    """Least-squares projection residuals onto the span of the first 2K+1 functions.

    Normal equations carry a Tikhonov term of 1e-12 times the largest Gram
    diagonal entry.
    """
    tests = dict(test_set) if test_set is not None else default_test_set(grid)
    F_all = np.stack([np.asarray(f) for f in functions]) if functions else np.zeros((0, 2, grid.n_points))
    w = grid.weights()
    residual = {name: [] for name in tests}
    energy = {name: [] for name in tests}
    for K in Ks:
        F = F_all[: 2 * K + 1]
        for name, f in tests.items():
            norm = math.sqrt(float(np.sum(np.abs(f) ** 2 * w)))
            r = norm if F.shape[0] == 0 else _project_residual(F, f, w)
            residual[name].append(r)
            energy[name].append(r * r / (norm * norm) if norm > 0 else 0.0)
    return CompletenessTable(list(Ks), residual, energy)


def parseval_gap(f: TransformedFunction, refs: Mapping[int, TransformedFunction], grid: GridConfig, K: int) -> float:
    """1 - Σ_{|n|≤K} |⟨f, ω̃_n⟩|²/‖ω̃_n‖² / ‖f‖²."""
    total = f.inner(f, grid).real
    if total == 0:
        return 0.0
    acc = 0.0
    for n, ref in refs.items():
        if abs(n) <= K:
            acc += abs(f.inner(ref, grid)) ** 2 / ref.inner(ref, grid).real
    return 1.0 - acc / total


def exclusion_robustness(functions: Sequence, keep: Sequence[bool], grid: GridConfig) -> Dict[str, float]:
    """Gram condition with and without the excluded members."""
    base = gram_condition(functions, grid).condition
    reduced = gram_condition([f for f, k in zip(functions, keep) if k], grid).condition
    return {"baseline": base, "reduced": reduced, "ratio": reduced / base if base else math.inf}


@dataclass
class RieszReport:
    tail: TailReport
    gram_K: List[int]
    gram: List[GramDiagnostics]
    completeness: CompletenessTable
    parseval: Dict[str, float]
    exclusion: ExclusionSet
    robustness: Optional[Dict[str, float]] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "tail": self.tail.to_dict(),
            "gram": {
                "K": self.gram_K,
                "condition": [g.condition for g in self.gram],
                "failed": [g.failed for g in self.gram],
            },
            "completeness": self.completeness.to_dict(),
            "parseval": self.parseval,
            "exclusion": self.exclusion.to_dict(),
            "robustness": self.robustness,
            "notes": self.notes,
        }


def _smooth_bump(grid: GridConfig) -> np.ndarray:
    s = grid.nodes
    bump = (s * (1.0 - s)).astype(complex)
    return np.stack([bump, bump])


def build_riesz_report(
    ctx: CharContext,
    spectrum: Union[Spectrum, Sequence[SpectralPoint]],
    gram_K: Optional[Sequence[int]] = None,
    completeness_K: Optional[Sequence[int]] = None,
    exclusion: Union[str, Sequence[Tuple[complex, int]]] = LOWEST_MODULUS,
    test_set: Optional[Mapping[str, np.ndarray]] = None,
) -> RieszReport:
    """Tail sums, Gram conditions, completeness residuals and the Parseval proxy.

    One eigenfunction is taken per strip (strips with several zeros are
    skipped and noted); the exclusion size is N0 + N1.
    """
    sbc = ctx.bc
    if not isinstance(sbc, SeparatedBC):
        raise SpecValidationError("Riesz diagnostics need separated boundary conditions")
    spec, grid = ctx.spec, ctx.grid
    notes = []
    per_strip: Dict[int, List[SpectralPoint]] = {}
    for p in spectrum:
        if p.strip_index is not None:
            per_strip.setdefault(p.strip_index, []).append(p)
    points = {}
    for n, pts in per_strip.items():
        if len(pts) == 1:
            points[n] = pts[0]
        else:
            notes.append(f"strip {n} holds {len(pts)} eigenvalues; skipped")
    if not points:
        raise SpecValidationError("no strip-indexed eigenvalues to analyse")

    order = _enumeration_order(points)
    samples = {n: separated_eigenfunction(ctx, points[n].lam) for n in order}
    transformed = {n: operator_A(spec, sbc, samples[n], points[n]) for n in order}
    refs = {n: reference_basis(sbc, spec, n, grid)[0] for n in order}
    tail = tail_sum(transformed, refs, grid)

    k_max = max(abs(n) for n in order)
    symmetric = [K for K in range(k_max + 1) if all(n in points for n in range(-K, K + 1))]
    top = symmetric[-1] if symmetric else 0
    if gram_K is None:
        gram_K = sorted({K for K in (5, 10, 20, 30) if K <= top} | {top})
    if completeness_K is None:
        completeness_K = list(gram_K)
    ordered = [transformed[n] for n in order]
    gram = [gram_condition(ordered, grid, K) for K in gram_K]
    for K, g in zip(gram_K, gram):
        if g.failed:
            logger.warning("Gram matrix at K=%d is numerically singular (cond %.3g)", K, g.condition)

    N = check_conditions(sbc).removals or 0
    excluded = select_exclusion([points[n] for n in order], N, exclusion)
    keep = [(points[n].lam, 0) not in excluded for n in order]
    normalized = []
    for n in order:
        y = samples[n]
        norm = math.sqrt(float(np.sum(grid.integrate(np.abs(y) ** 2, axis=-1))))
        normalized.append(y / norm)
    kept = [y for y, k in zip(normalized, keep) if k]
    completeness = completeness_residual(kept, grid, completeness_K, test_set)

    bump = operator_A(spec, sbc, _smooth_bump(grid))
    parseval = {"K": top, "gap": parseval_gap(bump, refs, grid, top)}
    robustness = exclusion_robustness(ordered, keep, grid) if N > 0 else None
    logger.info("riesz report over %d strips (exclusion size %d)", len(order), N)
    return RieszReport(tail, list(gram_K), gram, completeness, parseval, excluded, robustness, notes)
