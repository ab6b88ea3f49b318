"""Domain types: potentials, kernels, boundary conditions and grid settings."""

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import integrate

from .errors import SpecValidationError
from .polynomial import NEG_INF, ComplexPolynomial, Degree, common_roots

logger = logging.getLogger(__name__)

ComplexScalar = complex


def finite_complex(value, name: str = "value") -> complex:
    """Coerce to complex, rejecting NaN and infinities."""
    try:
        z = complex(value)
    except (TypeError, ValueError) as exc:
        raise SpecValidationError(f"{name} is not a complex number: {value!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise SpecValidationError(f"{name} must be finite, got {z}")
    return z


class TermKind(str, enum.Enum):
    """Closed-form building blocks of a scalar function on [0, 1]."""

    MONOMIAL = "monomial"  # coef * x**param
    TRIG = "trig"  # coef * exp(i * param * x)
    STEP = "step"  # coef * H(x - param)


@dataclass(frozen=True)
class Term:
    kind: TermKind
    coef: complex
    param: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", TermKind(self.kind))
        object.__setattr__(self, "coef", finite_complex(self.coef, "term coefficient"))
        param = float(self.param)
        if not math.isfinite(param):
            raise SpecValidationError(f"term parameter must be finite, got {self.param}")
        if self.kind is TermKind.MONOMIAL and param < 0:
            raise SpecValidationError(f"monomial power must be >= 0, got {param}")
        if self.kind is TermKind.STEP and not 0.0 <= param <= 1.0:
            raise SpecValidationError(f"step location must lie in [0, 1], got {param}")
        object.__setattr__(self, "param", param)

    @property
    def smooth(self) -> bool:
        return self.kind is not TermKind.STEP

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind is TermKind.MONOMIAL:
            return self.coef * np.power(x, self.param)
        if self.kind is TermKind.TRIG:
            return self.coef * np.exp(1j * self.param * x)
        return self.coef * (x >= self.param).astype(float)


@dataclass(frozen=True)
class ScalarFunction:
    """Finite sum of closed-form terms, evaluable exactly at any x in [0, 1]."""

    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def zero(cls) -> "ScalarFunction":
        return cls(())

    @classmethod
    def constant(cls, value: complex) -> "ScalarFunction":
        return cls((Term(TermKind.MONOMIAL, value, 0.0),))

    @classmethod
    def monomial(cls, coef: complex, power: float) -> "ScalarFunction":
        return cls((Term(TermKind.MONOMIAL, coef, power),))

    @classmethod
    def exp_mode(cls, coef: complex, freq: float) -> "ScalarFunction":
        return cls((Term(TermKind.TRIG, coef, freq),))

    @classmethod
    def sin(cls, freq: float, coef: complex = 1.0) -> "ScalarFunction":
        """coef * sin(freq * x) as two exponential modes."""
        c = complex(coef) / 2j
        return cls((Term(TermKind.TRIG, c, freq), Term(TermKind.TRIG, -c, -freq)))

    @classmethod
    def cos(cls, freq: float, coef: complex = 1.0) -> "ScalarFunction":
        """coef * cos(freq * x) as two exponential modes."""
        c = complex(coef) / 2
        return cls((Term(TermKind.TRIG, c, freq), Term(TermKind.TRIG, c, -freq)))

    @classmethod
    def step(cls, coef: complex, at: float) -> "ScalarFunction":
        return cls((Term(TermKind.STEP, coef, at),))

    def __add__(self, other: "ScalarFunction") -> "ScalarFunction":
        return ScalarFunction(self.terms + other.terms)

    def is_zero(self) -> bool:
        return all(t.coef == 0 for t in self.terms)

    @property
    def smooth(self) -> bool:
        return all(t.smooth for t in self.terms)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for t in self.terms:
            out = out + t(x)
        return out


@dataclass(frozen=True)
class SeparableTerm:
    """Product f(x) * g(t) contributing to one kernel entry."""

    f: ScalarFunction
    g: ScalarFunction


@dataclass(frozen=True)
class KernelFunction:
    """Volterra kernel M(x, t) with separable entries on 0 <= t <= x <= 1.

    ``entries[(i, j)]`` holds the separable products of M_{i+1, j+1}.
    """

    entries: Tuple[Tuple[Tuple[int, int], Tuple[SeparableTerm, ...]], ...] = ()

    def __post_init__(self):
        normalized = []
        for (i, j), terms in dict(self.entries).items():
            if i not in (0, 1) or j not in (0, 1):
                raise SpecValidationError(f"kernel entry index ({i}, {j}) out of range")
            normalized.append(((i, j), tuple(terms)))
        object.__setattr__(self, "entries", tuple(sorted(normalized)))

    @classmethod
    def zero(cls) -> "KernelFunction":
        return cls(())

    @classmethod
    def from_entries(cls, entries: Dict[Tuple[int, int], Sequence[SeparableTerm]]) -> "KernelFunction":
        return cls(tuple((k, tuple(v)) for k, v in entries.items()))

    def terms(self) -> List[Tuple[int, int, SeparableTerm]]:
        """Flat list of (row, column, term) over all nonzero products."""
        out = []
        for (i, j), terms in self.entries:
            for term in terms:
                if not (term.f.is_zero() or term.g.is_zero()):
                    out.append((i, j, term))
        return out

    def is_zero(self) -> bool:
        return not self.terms()

    @property
    def smooth(self) -> bool:
        return all(t.f.smooth and t.g.smooth for _, _, t in self.terms())

    def __call__(self, x, t) -> np.ndarray:
        """Evaluate M(x, t); the result has shape ``broadcast(x, t) + (2, 2)``."""
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        out = np.zeros(x.shape + (2, 2), dtype=complex)
        for i, j, term in self.terms():
            out[..., i, j] += term.f(x) * term.g(t)
        return out

    def bound_on_triangle(self, lattice: int = 65) -> float:
        """Largest |M_ij| sampled on the lattice of the triangle t <= x."""
        if self.is_zero():
            return 0.0
        s = np.linspace(0.0, 1.0, lattice)
        X, T = np.meshgrid(s, s, indexing="ij")
        mask = T <= X
        values = self(X[mask], T[mask])
        return float(np.max(np.abs(values)))


@dataclass(frozen=True)
class SystemSpec:
    """Coefficients of (1/i) B y' + Q(x) y + ∫_0^x M(x,t) y(t) dt = λ y.

    B = diag(1/a, 1/b) with a < 0 < b; Q has zero diagonal with
    off-diagonal entries q1 (row 1) and q2 (row 2).
    """

    a: float
    b: float
    q1: ScalarFunction = field(default_factory=ScalarFunction.zero)
    q2: ScalarFunction = field(default_factory=ScalarFunction.zero)
    kernel: KernelFunction = field(default_factory=KernelFunction.zero)

    def __post_init__(self):
        _check_velocities(self.a, self.b)
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))

    @property
    def velocities(self) -> np.ndarray:
        """Diagonal of B^{-1}, i.e. (a, b)."""
        return np.array([self.a, self.b], dtype=float)

    @property
    def width(self) -> float:
        """b - a, the total exponential type of the characteristic function."""
        return self.b - self.a

    @property
    def smooth(self) -> bool:
        return self.q1.smooth and self.q2.smooth and self.kernel.smooth

    def is_free(self) -> bool:
        """True when Q and M both vanish."""
        return self.q1.is_zero() and self.q2.is_zero() and self.kernel.is_zero()


def _check_velocities(a, b) -> None:
    for name, v in (("a", a), ("b", b)):
        try:
            fv = float(v)
        except (TypeError, ValueError) as exc:
            raise SpecValidationError(f"{name} must be a real number, got {v!r}") from exc
        if not math.isfinite(fv):
            raise SpecValidationError(f"{name} must be finite, got {v}")
    if a >= 0:
        raise SpecValidationError(f"a must be negative, got a={a}")
    if b <= 0:
        raise SpecValidationError(f"b must be positive, got b={b}")


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate_spec`."""

    valid: bool
    smooth: bool
    """All potential and kernel terms are smooth (gates the 1/λ-grade checks)."""
    kernel_bound: float
    """Largest sampled |M_ij| on the triangle 0 <= t <= x <= 1."""
    messages: Tuple[str, ...] = ()


def validate_spec(spec: SystemSpec, lattice: int = 65) -> ValidationReport:
    """Check the structural hypotheses of a system.

    Args:
        spec: System to check
        lattice: Points per axis used to sample the kernel on the triangle

    Returns:
        ValidationReport; raises SpecValidationError for sign or finiteness violations
    """
    _check_velocities(spec.a, spec.b)
    messages = []
    points = np.linspace(0.0, 1.0, lattice)
    for name, q in (("q1", spec.q1), ("q2", spec.q2)):
        values = q(points)
        if not np.all(np.isfinite(values)):
            raise SpecValidationError(f"{name} is not finite on [0, 1]")
        if not q.smooth:
            messages.append(f"{name} has step terms; 1/λ-grade estimates are not expected")
    bound = spec.kernel.bound_on_triangle(lattice)
    if not math.isfinite(bound):
        raise SpecValidationError("kernel is unbounded on the triangle")
    if not spec.kernel.smooth:
        messages.append("kernel has step terms")
    report = ValidationReport(valid=True, smooth=spec.smooth, kernel_bound=bound, messages=tuple(messages))
    logger.debug("validated spec a=%s b=%s smooth=%s kernel_bound=%.6g", spec.a, spec.b, report.smooth, bound)
    return report


PolyRow = Tuple[ComplexPolynomial, ...]


def _as_poly(value) -> ComplexPolynomial:
    if isinstance(value, ComplexPolynomial):
        return value
    if isinstance(value, (int, float, complex)):
        return ComplexPolynomial.constant(value)
    return ComplexPolynomial(tuple(value))


def _as_rows(rows, width: int, label: str) -> Tuple[PolyRow, PolyRow]:
    rows = tuple(tuple(_as_poly(p) for p in row) for row in rows)
    if len(rows) != 2 or any(len(r) != width for r in rows):
        shape = [len(r) for r in rows]
        raise SpecValidationError(f"{label} needs a 2x{width} polynomial matrix, got rows of sizes {shape}")
    return rows


class _PolynomialMatrix:
    """Shared behaviour of the 2xK polynomial boundary matrices."""

    rows: Tuple[PolyRow, PolyRow]

    @property
    def width(self) -> int:
        return len(self.rows[0])

    @property
    def max_degree(self) -> Degree:
        """M = max deg P_ij over all entries."""
        return max((p.degree for row in self.rows for p in row), default=NEG_INF)

    def matrix(self, lam) -> np.ndarray:
        """Entries evaluated at λ; shape ``lam.shape + (2, width)``."""
        lam = np.asarray(lam, dtype=complex)
        out = np.empty(lam.shape + (2, self.width), dtype=complex)
        for r, row in enumerate(self.rows):
            for c, p in enumerate(row):
                out[..., r, c] = p(lam)
        return out

    def taylor_matrix(self, lam0: complex, order: int) -> np.ndarray:
        """Taylor coefficients of every entry at λ0; shape ``(order+1, 2, width)``."""
        out = np.empty((order + 1, 2, self.width), dtype=complex)
        for r, row in enumerate(self.rows):
            for c, p in enumerate(row):
                out[:, r, c] = p.taylor(lam0, order)
        return out

    def column_minors(self) -> Dict[Tuple[int, int], ComplexPolynomial]:
        """All 2x2 minors det[[P_1i, P_1j], [P_2i, P_2j]] for i < j (0-based)."""
        (r1, r2) = self.rows
        out = {}
        for i, j in itertools.combinations(range(self.width), 2):
            out[(i, j)] = (r1[i] * r2[j] - r1[j] * r2[i]).trim()
        return out


@dataclass(frozen=True)
class LinearBC(_PolynomialMatrix):
    """P_r1 y1(0) + P_r2 y2(0) + P_r3 y1(1) + P_r4 y2(1) = 0 for r = 1, 2."""

    rows: Tuple[PolyRow, PolyRow]

    def __post_init__(self):
        object.__setattr__(self, "rows", _as_rows(self.rows, 4, "LinearBC"))


# Column order of the quadratic forms: y1²(0), y2²(0), y1²(½), y2²(½), y1(0)y2(0),
# y1(0)y1(½), y1(0)y2(½), y2(0)y1(½), y2(0)y2(½), y1(½)y2(½).
QUADRATIC_MONOMIALS: Tuple[Tuple[int, int], ...] = (
    (0, 0), (1, 1), (2, 2), (3, 3), (0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3),
)


@dataclass(frozen=True)
class QuadraticBC(_PolynomialMatrix):
    """Two quadratic forms in (y1(0), y2(0), y1(½), y2(½)) with polynomial coefficients."""

    rows: Tuple[PolyRow, PolyRow]

    def __post_init__(self):
        object.__setattr__(self, "rows", _as_rows(self.rows, 10, "QuadraticBC"))


@dataclass(frozen=True)
class SeparatedBC:
    """p11 y1(0) + p12 y2(0) = 0 and p21 y1(1) + p22 y2(1) = 0."""

    p11: ComplexPolynomial
    p12: ComplexPolynomial
    p21: ComplexPolynomial
    p22: ComplexPolynomial

    def __post_init__(self):
        from .polynomial import coprime

        for name in ("p11", "p12", "p21", "p22"):
            p = _as_poly(getattr(self, name))
            if p.is_zero():
                raise SpecValidationError(f"{name} must have a nonzero leading coefficient")
            object.__setattr__(self, name, p)
        if self.p11.degree != self.p12.degree:
            raise SpecValidationError(
                f"deg p11 = {self.p11.degree} != deg p12 = {self.p12.degree}"
            )
        if self.p21.degree != self.p22.degree:
            raise SpecValidationError(
                f"deg p21 = {self.p21.degree} != deg p22 = {self.p22.degree}"
            )
        if not coprime(self.p11, self.p12):
            raise SpecValidationError("p11 and p12 share a root")
        if not coprime(self.p21, self.p22):
            raise SpecValidationError("p21 and p22 share a root")

    @classmethod
    def constants(cls, h1: complex, h2: complex) -> "SeparatedBC":
        """y1(0) + h1 y2(0) = 0, y1(1) + h2 y2(1) = 0."""
        one = ComplexPolynomial.constant(1.0)
        return cls(one, ComplexPolynomial.constant(h1), one, ComplexPolynomial.constant(h2))

    @property
    def N0(self) -> int:
        return self.p11.degree

    @property
    def N1(self) -> int:
        return self.p21.degree

    @property
    def C11(self) -> complex:
        return self.p11.leading

    @property
    def C12(self) -> complex:
        return self.p12.leading

    @property
    def C21(self) -> complex:
        return self.p21.leading

    @property
    def C22(self) -> complex:
        return self.p22.leading

    @property
    def leading_ratio(self) -> complex:
        """R = C11 C22 / (C12 C21), the ratio read off the free characteristic function."""
        return self.C11 * self.C22 / (self.C12 * self.C21)

    @property
    def leading_ratio_alt(self) -> complex:
        """C1 / C2 with C1 = C11 C21, C2 = C12 C22 (reported for comparison)."""
        return self.C11 * self.C21 / (self.C12 * self.C22)

    def to_linear(self) -> LinearBC:
        zero = ComplexPolynomial.zero()
        return LinearBC(((self.p11, self.p12, zero, zero), (zero, zero, self.p21, self.p22)))

    @classmethod
    def from_linear(cls, bc: LinearBC) -> "SeparatedBC":
        """Inverse of :meth:`to_linear`; rejects matrices without the separated pattern."""
        (r1, r2) = bc.rows
        if not (r1[2].is_zero() and r1[3].is_zero() and r2[0].is_zero() and r2[1].is_zero()):
            raise SpecValidationError("LinearBC does not have the separated zero pattern")
        return cls(r1[0], r1[1], r2[2], r2[3])


BoundarySpec = Union[LinearBC, QuadraticBC, SeparatedBC]


class QuadRule(str, enum.Enum):
    TRAPEZOID = "trapezoid"
    SIMPSON = "simpson"


@dataclass(frozen=True)
class GridConfig:
    """Uniform grid on [0, 1] and numerical tolerances."""

    n_points: int = 513
    quad_rule: QuadRule = QuadRule.SIMPSON
    newton_tol: float = 1e-10
    contour_samples: int = 64

    def __post_init__(self):
        object.__setattr__(self, "quad_rule", QuadRule(self.quad_rule))
        if int(self.n_points) != self.n_points or self.n_points < 33 or self.n_points % 2 == 0:
            raise SpecValidationError(f"n_points must be an odd integer >= 33, got {self.n_points}")
        if not (self.newton_tol > 0 and math.isfinite(self.newton_tol)):
            raise SpecValidationError(f"newton_tol must be positive, got {self.newton_tol}")
        if int(self.contour_samples) != self.contour_samples or self.contour_samples < 8:
            raise SpecValidationError(f"contour_samples must be an integer >= 8, got {self.contour_samples}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "contour_samples", int(self.contour_samples))

    @property
    def h(self) -> float:
        return 1.0 / (self.n_points - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_points)

    def node_index(self, x: float) -> int:
        """Index of the grid node at ``x``; x must coincide with a node."""
        pos = float(x) * (self.n_points - 1)
        idx = int(round(pos))
        if not 0 <= idx < self.n_points or abs(pos - idx) > 1e-9:
            raise SpecValidationError(f"x={x} is not a node of the {self.n_points}-point grid")
        return idx

    def with_points(self, n_points: int) -> "GridConfig":
        return GridConfig(n_points, self.quad_rule, self.newton_tol, self.contour_samples)

    def integrate(self, values: np.ndarray, axis: int = -1, length: float = 1.0) -> np.ndarray:
        """Quadrature of samples taken on the (possibly rescaled) node set."""
        dx = length / (self.n_points - 1)
        if self.quad_rule is QuadRule.SIMPSON:
            return integrate.simpson(values, dx=dx, axis=axis)
        return integrate.trapezoid(values, dx=dx, axis=axis)

    def weights(self, length: float = 1.0) -> np.ndarray:
        """Quadrature weights matching :meth:`integrate` on the node set."""
        dx = length / (self.n_points - 1)
        w = np.full(self.n_points, dx)
        if self.quad_rule is QuadRule.SIMPSON:
            w[1:-1:2] = 4 * dx / 3
            w[2:-1:2] = 2 * dx / 3
            w[0] = w[-1] = dx / 3
        else:
            w[0] = w[-1] = dx / 2
        return w


@dataclass(frozen=True)
class Rank2Report:
    """Outcome of :func:`check_rank2`."""

    full_rank: bool
    witness: Optional[complex] = None
    """A λ where every 2x2 minor vanishes (None when the rank is 2 everywhere)."""
    gcd_degree: Union[int, float] = 0

    def __bool__(self) -> bool:
        return self.full_rank


def check_rank2(bc: BoundarySpec) -> Rank2Report:
    """Whether the 2xK boundary matrix has rank 2 for every λ.

    Rank drops exactly at common roots of all 2x2 minors, i.e. at roots of
    their GCD.
    """
    if isinstance(bc, SeparatedBC):
        bc = bc.to_linear()
    minors = list(bc.column_minors().values())
    shared = common_roots(minors)
    if not shared:
        return Rank2Report(full_rank=True)
    witness, _ = shared[0]
    degree = sum(m for _, m in shared)
    logger.debug("rank deficiency at λ=%s (gcd degree %s)", witness, degree)
    return Rank2Report(full_rank=False, witness=complex(witness), gcd_degree=degree)
