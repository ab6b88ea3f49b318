"""Complex polynomials in the spectral parameter with ascending coefficients."""

import enum
import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import SpecValidationError


class ZeroDegree(enum.Enum):
    """Degree of the zero polynomial.

    Orders below every integer and equals only itself, so degree
    comparisons never pass silently for a vanishing polynomial.
    """

    NEG_INF = "-inf"

    def __lt__(self, other):
        return other is not self

    def __le__(self, other):
        return True

    def __gt__(self, other):
        return False

    def __ge__(self, other):
        return other is self

    def __repr__(self) -> str:
        return "-inf"

    def __str__(self) -> str:
        return "-inf"


NEG_INF = ZeroDegree.NEG_INF

Degree = Union[int, ZeroDegree]

Scalar = Union[int, float, complex]


def _as_coeffs(values: Iterable[Scalar]) -> Tuple[complex, ...]:
    coeffs = [complex(v) for v in values]
    for c in coeffs:
        if not (math.isfinite(c.real) and math.isfinite(c.imag)):
            raise SpecValidationError(f"polynomial coefficient {c} is not finite")
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class ComplexPolynomial:
    """Polynomial sum_k coeffs[k] * λ**k.

    Trailing zero coefficients are trimmed on construction; the zero
    polynomial has an empty coefficient tuple and degree ``NEG_INF``.
    """

    coeffs: Tuple[complex, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))

    @classmethod
    def zero(cls) -> "ComplexPolynomial":
        return cls(())

    @classmethod
    def constant(cls, value: Scalar) -> "ComplexPolynomial":
        return cls((value,))

    @classmethod
    def lam(cls) -> "ComplexPolynomial":
        """The identity polynomial λ."""
        return cls((0, 1))

    @classmethod
    def from_roots(cls, roots: Sequence[complex], leading: Scalar = 1.0) -> "ComplexPolynomial":
        if len(roots) == 0:
            return cls.constant(leading)
        return cls(tuple(leading * P.polyfromroots(np.asarray(roots, dtype=complex))))

    @property
    def degree(self) -> Degree:
        if not self.coeffs:
            return NEG_INF
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        """Leading coefficient (0 for the zero polynomial)."""
        return self.coeffs[-1] if self.coeffs else 0j

    def is_zero(self) -> bool:
        return not self.coeffs

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    def norm(self) -> float:
        """Euclidean norm of the coefficient vector."""
        return float(np.linalg.norm(self.as_array())) if self.coeffs else 0.0

    def trim(self, rel_tol: float = 1e-13) -> "ComplexPolynomial":
        """Drop trailing coefficients below ``rel_tol`` times the largest one."""
        if not self.coeffs:
            return self
        c = self.as_array()
        scale = np.max(np.abs(c))
        keep = len(c)
        while keep > 0 and abs(c[keep - 1]) <= rel_tol * scale:
            keep -= 1
        return ComplexPolynomial(tuple(c[:keep]))

    def __call__(self, lam):
        """Evaluate by Horner's scheme; accepts scalars or arrays."""
        if not self.coeffs:
            return np.zeros_like(np.asarray(lam, dtype=complex))
        return P.polyval(np.asarray(lam, dtype=complex), self.as_array())

    def evaluate_terms(self, lam):
        """Evaluate by summing c_k * λ**k term by term."""
        lam = np.asarray(lam, dtype=complex)
        total = np.zeros_like(lam)
        for k, c in enumerate(self.coeffs):
            total = total + c * lam**k
        return total

    def deriv(self, m: int = 1) -> "ComplexPolynomial":
        if not self.coeffs or m >= len(self.coeffs):
            return ComplexPolynomial.zero()
        if m == 0:
            return self
        return ComplexPolynomial(tuple(P.polyder(self.as_array(), m)))

    def taylor(self, lam0: complex, order: int) -> np.ndarray:
        """Taylor coefficients P^(k)(λ0)/k! for k = 0..order."""
        out = np.zeros(order + 1, dtype=complex)
        for k in range(order + 1):
            out[k] = complex(self.deriv(k)(lam0)) / math.factorial(k)
        return out

    def roots(self) -> np.ndarray:
        if self.degree is NEG_INF or self.degree < 1:
            return np.zeros(0, dtype=complex)
        return P.polyroots(self.as_array())

    def vanishing_order(self, z: complex, rel_tol: float = 1e-8) -> int:
        """Number of leading derivatives of the polynomial that vanish at ``z``."""
        if self.is_zero():
            return math.inf
        order = 0
        p = self
        while not p.is_zero():
            scale = p.norm() * max(1.0, abs(z)) ** p.degree
            if abs(complex(p(z))) > rel_tol * scale:
                break
            order += 1
            p = p.deriv()
        return order

    def _coerce(self, other) -> "ComplexPolynomial":
        if isinstance(other, ComplexPolynomial):
            return other
        return ComplexPolynomial.constant(other)

    def __add__(self, other) -> "ComplexPolynomial":
        other = self._coerce(other)
        if not self.coeffs:
            return other
        if not other.coeffs:
            return self
        return ComplexPolynomial(tuple(P.polyadd(self.as_array(), other.as_array())))

    __radd__ = __add__

    def __neg__(self) -> "ComplexPolynomial":
        return ComplexPolynomial(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "ComplexPolynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ComplexPolynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ComplexPolynomial":
        other = self._coerce(other)
        if not self.coeffs or not other.coeffs:
            return ComplexPolynomial.zero()
        return ComplexPolynomial(tuple(P.polymul(self.as_array(), other.as_array())))

    __rmul__ = __mul__

    def __repr__(self) -> str:
        if not self.coeffs:
            return "ComplexPolynomial(0)"
        return f"ComplexPolynomial({list(self.coeffs)})"


def sylvester_matrix(p: ComplexPolynomial, q: ComplexPolynomial) -> np.ndarray:
    """Sylvester matrix of two nonzero polynomials (descending layout)."""
    m, n = p.degree, q.degree
    if m is NEG_INF or n is NEG_INF:
        raise SpecValidationError("Sylvester matrix needs nonzero polynomials")
    size = m + n
    if size == 0:
        return np.zeros((0, 0), dtype=complex)
    S = np.zeros((size, size), dtype=complex)
    pd = p.as_array()[::-1]
    qd = q.as_array()[::-1]
    for i in range(n):
        S[i, i:i + m + 1] = pd
    for i in range(m):
        S[n + i, i:i + n + 1] = qd
    return S


def resultant(p: ComplexPolynomial, q: ComplexPolynomial) -> complex:
    """Resultant of ``p`` and ``q``; zero iff they share a root."""
    if p.is_zero() or q.is_zero():
        return 0j
    S = sylvester_matrix(p, q)
    if S.size == 0:
        return 1 + 0j
    return complex(np.linalg.det(S))


def coprime(p: ComplexPolynomial, q: ComplexPolynomial, rel_tol: float = 1e-10) -> bool:
    """Whether ``p`` and ``q`` have no common root.

    Uses the conditioning of the Sylvester matrix rather than the raw
    resultant so the verdict does not depend on coefficient scaling.
    """
    if p.is_zero() or q.is_zero():
        return False
    S = sylvester_matrix(p, q)
    if S.size == 0:
        return True
    sv = np.linalg.svd(S, compute_uv=False)
    return bool(sv[-1] > rel_tol * sv[0])


def common_roots(
    polys: Sequence[ComplexPolynomial],
    cluster_tol: float = 1e-8,
    rel_tol: float = 1e-8,
) -> List[Tuple[complex, int]]:
    """Roots shared by every nonzero polynomial, with shared multiplicity.

    These are the roots of the polynomial GCD. An empty list means the
    GCD is constant; if all polynomials vanish identically the single
    witness ``(0, inf)`` is returned.

    Args:
        polys: Polynomials to intersect
        cluster_tol: Relative distance under which roots are merged
        rel_tol: Relative residual under which a polynomial counts as vanishing
    """
    nonzero = [p for p in polys if not p.is_zero()]
    if not nonzero:
        return [(0j, math.inf)]
    base = min(nonzero, key=lambda p: p.degree)
    if base.degree == 0:
        return []
    # multiple roots come back as a spray of width ~eps**(1/m); polishing on
    # the derivative with a simple root collapses each spray to one point
    candidates: List[complex] = []
    for r in base.roots():
        z = _polish_root(base, complex(r))
        if not any(abs(z - c) <= cluster_tol * max(1.0, abs(c)) for c in candidates):
            candidates.append(z)
    shared = []
    for z in candidates:
        mult = min(p.vanishing_order(z, rel_tol) for p in nonzero)
        if mult > 0:
            shared.append((z, mult))
    return shared


def _polish_root(p: ComplexPolynomial, z: complex, iters: int = 8) -> complex:
    order = max(1, p.vanishing_order(z, 1e-6))
    d = p.deriv(order - 1)
    dd = d.deriv()
    for _ in range(iters):
        den = complex(dd(z))
        if den == 0:
            break
        step = complex(d(z)) / den
        z = z - step
        if abs(step) <= 1e-15 * max(1.0, abs(z)):
            break
    return z


def gcd(polys: Sequence[ComplexPolynomial], cluster_tol: float = 1e-8) -> ComplexPolynomial:
    """Monic numerical GCD assembled from :func:`common_roots`."""
    shared = common_roots(polys, cluster_tol)
    if shared and shared[0][1] == math.inf:
        return ComplexPolynomial.zero()
    roots: List[complex] = []
    for z, m in shared:
        roots.extend([z] * int(m))
    return ComplexPolynomial.from_roots(roots)
