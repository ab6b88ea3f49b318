"""Cauchy problems for the integro-differential Dirac system.

The system y' = iB⁻¹(λy − Q(x)y − ∫_α^x M(x,t)y(t)dt) is integrated from a
grid node α to both ends of [0, 1]. Many λ are advanced in one sweep.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import DerivativeOrderError, DynamicRangeError, SpecValidationError
from .model import GridConfig, SystemSpec
from .report import SAMPLE_HEADER, sample_rows, write_csv

logger = logging.getLogger(__name__)

MAX_DERIVATIVE_ORDER = 4
OVERFLOW_LIMIT = 1e280


@dataclass
class FundamentalSolution:
    """φ_α and ψ_α at one λ with their λ-derivatives.

    ``chains[k, c, j, n]`` is the k-th λ-derivative of component c of
    column j (0 = φ, 1 = ψ) at node n.
    """

    alpha: float
    lam: complex
    x: np.ndarray
    chains: np.ndarray
    W: np.ndarray
    """Wronskian at every node, carried by its own equation (see :func:`wronskian` for det[φ, ψ])."""

    @property
    def kmax(self) -> int:
        return self.chains.shape[0] - 1

    @property
    def phi(self) -> np.ndarray:
        return self.chains[0, :, 0, :]

    @property
    def psi(self) -> np.ndarray:
        return self.chains[0, :, 1, :]

    @property
    def dphi(self) -> np.ndarray:
        """Derivatives of orders 1..kmax, shape (kmax, 2, n)."""
        return self.chains[1:, :, 0, :]

    @property
    def dpsi(self) -> np.ndarray:
        return self.chains[1:, :, 1, :]

    def node(self, x: float) -> int:
        return _node_index(self.x, x)

    def at(self, x: float) -> np.ndarray:
        """Solution matrix [[φ1, ψ1], [φ2, ψ2]] at node x."""
        return self.chains[0, :, :, self.node(x)]

    def to_csv(self, path: Union[str, Path], column: int = 0) -> Path:
        """Dump one column (0 = φ, 1 = ψ) as x and the real/imaginary parts of both components."""
        return write_csv(path, SAMPLE_HEADER, sample_rows(self.x, self.chains[0, :, column, :]))


@dataclass
class FundamentalBatch:
    """Fundamental solutions for a vector of λ sharing one grid and α."""

    alpha: float
    lams: np.ndarray
    x: np.ndarray
    chains: np.ndarray
    """Shape (L, kmax+1, 2, 2, n)."""
    W: np.ndarray
    """Shape (L, n)."""

    def __len__(self) -> int:
        return self.lams.shape[0]

    def solution(self, i: int) -> FundamentalSolution:
        return FundamentalSolution(self.alpha, complex(self.lams[i]), self.x, self.chains[i], self.W[i])

    def at(self, x: float) -> np.ndarray:
        """All chains at node x, shape (L, kmax+1, 2, 2)."""
        return self.chains[..., _node_index(self.x, x)]


def _node_index(nodes: np.ndarray, x: float) -> int:
    n = nodes.shape[0]
    pos = float(x) * (n - 1)
    idx = int(round(pos))
    if not 0 <= idx < n or abs(pos - idx) > 1e-9:
        raise SpecValidationError(f"x={x} is not a node of the {n}-point grid")
    return idx


class _Coefficients:
    """Potential and kernel factors sampled at nodes and midpoints."""

    def __init__(self, spec: SystemSpec, grid: GridConfig):
        x = grid.nodes
        mid = 0.5 * (x[:-1] + x[1:])
        self.q_nodes = (spec.q1(x), spec.q2(x))
        self.q_mid = (spec.q1(mid), spec.q2(mid))
        self.memory = [
            (i, j, term.f(x), term.f(mid), term.g(x)) for i, j, term in spec.kernel.terms()
        ]


def _rhs(y, q1, q2, m, iD, orders):
    forcing = np.empty_like(y)
    forcing[..., 0, :] = -q1 * y[..., 1, :]
    forcing[..., 1, :] = -q2 * y[..., 0, :]
    if m is not None:
        forcing -= m
    if orders is not None:
        forcing[:, 1:] += orders * y[:, :-1]
    return iD * forcing


def _lawson_step(y, h, E1, E2, qa, qm, qb, ms, iD, orders):
    """Classical RK4 on the integrating-factor form of the system.

    The diagonal part iλB⁻¹ is carried exactly by E1 = exp(iλB⁻¹h) and
    E2 = exp(iλB⁻¹h/2).
    """
    m0, mm, m1 = ms
    k1 = _rhs(y, *qa, m0, iD, orders)
    k2 = _rhs(E2 * (y + 0.5 * h * k1), *qm, mm, iD, orders)
    k3 = _rhs(E2 * y + 0.5 * h * k2, *qm, mm, iD, orders)
    k4 = _rhs(E1 * y + h * (E2 * k3), *qb, m1, iD, orders)
    return E1 * y + (h / 6.0) * (E1 * k1 + 2.0 * E2 * (k2 + k3) + k4)


def solve_fundamental_batch(
    spec: SystemSpec,
    alpha: float,
    lams: Sequence[complex],
    grid: GridConfig,
    kmax: int = 0,
    initial: Optional[np.ndarray] = None,
) -> FundamentalBatch:
    """Integrate the Cauchy problems φ_α(α) = (1, 0), ψ_α(α) = (0, 1) for many λ.

    Args:
        spec: System coefficients
        alpha: Base point; must coincide with a grid node
        lams: Spectral parameters
        grid: Grid settings
        kmax: Highest λ-derivative order carried along (≤ 4)
        initial: 2x2 matrix whose columns replace the unit initial data at α

    Returns:
        FundamentalBatch with samples on every grid node

    Raises:
        DynamicRangeError: if any sample exceeds 1e280 in magnitude
    """
    if kmax < 0 or kmax > MAX_DERIVATIVE_ORDER:
        raise DerivativeOrderError(f"kmax must lie in [0, {MAX_DERIVATIVE_ORDER}], got {kmax}")
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    if not np.all(np.isfinite(lams)):
        raise SpecValidationError("spectral parameters must be finite")
    start = np.eye(2, dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
    if start.shape != (2, 2) or not np.all(np.isfinite(start)):
        raise SpecValidationError(f"initial data must be a finite 2x2 matrix, got shape {start.shape}")
    i0 = grid.node_index(alpha)
    n = grid.n_points
    x = grid.nodes
    L, K1 = lams.shape[0], kmax + 1
    coef = _Coefficients(spec, grid)

    velocities = spec.velocities
    rates = (1j * lams[:, None] * velocities[None, :]).reshape(L, 1, 2, 1)
    iD = (1j * velocities).reshape(2, 1)
    orders = np.arange(1, K1, dtype=float).reshape(-1, 1, 1) if K1 > 1 else None

    chains = np.zeros((L, K1, 2, 2, n), dtype=complex)
    y0 = np.zeros((L, K1, 2, 2), dtype=complex)
    y0[:, 0] = start
    chains[..., i0] = y0
    memory_nodes = np.zeros((L, 2, 2, n), dtype=complex) if coef.memory else None

    with np.errstate(over="ignore", invalid="ignore"):
        for direction in (1, -1):
            stop = n - 1 if direction > 0 else 0
            if i0 == stop:
                continue
            h = direction * grid.h
            E1 = np.exp(rates * h)
            E2 = np.exp(rates * (0.5 * h))
            y = y0.copy()
            I = [np.zeros((L, K1, 2), dtype=complex) for _ in coef.memory]

            def memory(at_mid, idx, Is):
                m = np.zeros((L, K1, 2, 2), dtype=complex)
                for (ci, _, f_nodes, f_mid, _), I_t in zip(coef.memory, Is):
                    f = f_mid[idx] if at_mid else f_nodes[idx]
                    m[..., ci, :] += f * I_t
                return m

            for i in range(i0, stop, direction):
                k = i + direction
                mid = min(i, k)
                qa = (coef.q_nodes[0][i], coef.q_nodes[1][i])
                qm = (coef.q_mid[0][mid], coef.q_mid[1][mid])
                qb = (coef.q_nodes[0][k], coef.q_nodes[1][k])
                if not coef.memory:
                    y = _lawson_step(y, h, E1, E2, qa, qm, qb, (None, None, None), iD, orders)
                else:
                    src_a = [g[i] * y[..., cj, :] for (_, cj, _, _, g) in coef.memory]
                    m0 = memory(False, i, I)
                    # predictor: explicit Euler for the history integral at the new node
                    I_new = [I_t + h * s for I_t, s in zip(I, src_a)]
                    for _ in range(2):
                        ms = (m0, memory(True, mid, [0.5 * (p + q) for p, q in zip(I, I_new)]), memory(False, k, I_new))
                        y_new = _lawson_step(y, h, E1, E2, qa, qm, qb, ms, iD, orders)
                        I_new = [
                            I_t + 0.5 * h * (s + g[k] * y_new[..., cj, :])
                            for I_t, s, (_, cj, _, _, g) in zip(I, src_a, coef.memory)
                        ]
                    y = y_new
                    I = I_new
                    memory_nodes[..., k] = memory(False, k, I)[:, 0]
                chains[..., k] = y

    W = _wronskian_samples(spec, x, i0, lams, chains[:, 0], memory_nodes, np.linalg.det(start))
    _check_range(chains, W)
    logger.debug("solved %d Cauchy problems from alpha=%s with kmax=%d", L, alpha, kmax)
    return FundamentalBatch(float(alpha), lams, x, chains, W)


def _wronskian_samples(spec, x, i0, lams, Y0, memory_nodes, W0=1.0) -> np.ndarray:
    """W(x) from W' = iλ(a+b)W − c(x) with W(α) = W0.

    c collects the memory contributions det[iB⁻¹m_φ, ψ] + det[φ, iB⁻¹m_ψ];
    it vanishes for a zero kernel and W is then a pure exponential.
    """
    trace = (1j * lams * (spec.a + spec.b))[:, None]
    shift = x[None, :] - x[i0]
    with np.errstate(over="ignore", invalid="ignore"):
        growth = np.exp(trace * shift)
        if memory_nodes is None:
            return W0 * growth
        iD = (1j * spec.velocities).reshape(1, 2, 1)
        phi, psi = Y0[:, :, 0, :], Y0[:, :, 1, :]
        m_phi = iD * memory_nodes[:, :, 0, :]
        m_psi = iD * memory_nodes[:, :, 1, :]
        c = _det_columns(m_phi, psi) + _det_columns(phi, m_psi)
        integrand = np.exp(-trace * shift) * c
        acc = np.zeros_like(integrand)
        acc[:, i0:] = integrate.cumulative_trapezoid(integrand[:, i0:], x[i0:], axis=-1, initial=0)
        left = integrate.cumulative_trapezoid(integrand[:, i0::-1], x[i0::-1], axis=-1, initial=0)
        acc[:, : i0 + 1] = left[:, ::-1]
        return growth * (W0 - acc)


def _det_columns(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]


def _check_range(*arrays: np.ndarray) -> None:
    for arr in arrays:
        if not np.all(np.isfinite(arr)) or np.max(np.abs(arr), initial=0.0) > OVERFLOW_LIMIT:
            raise DynamicRangeError()


def solve_fundamental(
    spec: SystemSpec,
    alpha: float,
    lam: complex,
    grid: GridConfig,
    kmax: int = 0,
    initial: Optional[np.ndarray] = None,
) -> FundamentalSolution:
    """Fundamental solutions φ_α, ψ_α at a single λ (see :func:`solve_fundamental_batch`)."""
    return solve_fundamental_batch(spec, alpha, [lam], grid, kmax, initial).solution(0)


def wronskian(fs: FundamentalSolution, x: float) -> complex:
    """det[[φ1, ψ1], [φ2, ψ2]] formed from the samples at node x."""
    m = fs.at(x)
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def carried_wronskian(fs: FundamentalSolution, x: float) -> complex:
    """The Wronskian carried through the sweep by its own equation."""
    return complex(fs.W[fs.node(x)])


def _dominant_pair(spec: SystemSpec, grid: GridConfig, lams: np.ndarray) -> np.ndarray:
    """Columns [u, v] of shape (L, 2, 2, n) that grow in their direction of integration.

    u starts at 0 and v at 1, so neither picks up the other's exponential and
    det[u, v] keeps its digits at large |Im λ|. Valid only without memory,
    where the ratio W(1)/W(0) does not depend on the pair.
    """
    left = solve_fundamental_batch(spec, 0.0, lams, grid).chains[:, 0]
    right = solve_fundamental_batch(spec, 1.0, lams, grid).chains[:, 0]
    upper = (lams.imag >= 0)[:, None, None]
    u = np.where(upper, left[:, :, 0, :], left[:, :, 1, :])
    v = np.where(upper, right[:, :, 1, :], right[:, :, 0, :])
    return np.stack([u, v], axis=2)


def wronskian_growth(spec: SystemSpec, grid: GridConfig, lams: Sequence[complex]) -> np.ndarray:
    """|Im λ|·|W(1;λ)e^{−i(a+b)λ}/W(0;λ) − 1| for each λ, from sample determinants.

    With a memory kernel the fundamental solutions at base point 0 are used
    directly; their determinant cancels like exp((b − a)|Im λ|), which is
    logged when it eats more than half of the available digits.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    if spec.kernel.is_zero():
        Y = _dominant_pair(spec, grid, lams)
    else:
        Y = solve_fundamental_batch(spec, 0.0, lams, grid).chains[:, 0]
        products = np.abs(Y[:, 0, 0, :] * Y[:, 1, 1, :]) + np.abs(Y[:, 0, 1, :] * Y[:, 1, 0, :])
        det = np.abs(_det_columns(Y[:, :, 0, :], Y[:, :, 1, :]))
        lost = float(np.max(products / np.maximum(det, np.finfo(float).tiny)))
        if lost > 1e8:
            logger.warning("Wronskian samples lose %.1f digits to cancellation", np.log10(lost))
    W = _det_columns(Y[:, :, 0, :], Y[:, :, 1, :])
    ratio = W[:, -1] * np.exp(-1j * (spec.a + spec.b) * lams) / W[:, 0]
    return np.abs(lams.imag) * np.abs(ratio - 1.0)


@dataclass
class GrowthReport:
    """Normalized deviations of the fundamental solutions from their exponential leading terms."""

    alpha: float
    lams: np.ndarray
    deviations: np.ndarray
    """d(λ): sup deviation of the leading component, maximized over the sides of α."""
    components: List[Dict[str, float]]
    """Per-λ deviations keyed ``<side>.<phi|psi><1|2>``."""
    scaled_im: np.ndarray
    scaled_abs: np.ndarray
    bounded_im: bool
    bounded_abs: Optional[bool]
    """None when the potential is not smooth (no 1/|λ| claim)."""
    ratio_limit: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambdas": [complex(l) for l in self.lams],
            "deviations": self.deviations,
            "components": self.components,
            "scaled_im": self.scaled_im,
            "scaled_abs": self.scaled_abs,
            "bounded_im": self.bounded_im,
            "bounded_abs": self.bounded_abs,
            "ratio_limit": self.ratio_limit,
        }


def _bounded(seq: np.ndarray, ratio_limit: float, floor: float = 1e-12) -> bool:
    for prev, cur in zip(seq[:-1], seq[1:]):
        if cur <= floor:
            continue
        if prev <= floor or cur / prev > ratio_limit:
            return False
    return True


def _side_deviations(lam, alpha, velocities, x, Y0) -> Dict[str, float]:
    """Deviation of each component from the dominant exponential on each side of α."""
    out = {}
    names = (("phi1", "psi1"), ("phi2", "psi2"))
    for side, mask in (("right", x >= alpha), ("left", x <= alpha)):
        if np.count_nonzero(mask) < 2:
            continue
        xs = x[mask]
        # the dominant exponential is the one growing away from α
        sign = 1.0 if side == "right" else -1.0
        dom = 0 if sign * lam.imag > 0 else 1
        norm = np.exp(-1j * velocities[dom] * lam * (xs - alpha))
        for c in range(2):
            for j in range(2):
                z = Y0[c, j, mask] * norm
                if c == dom and j == dom:
                    value = float(np.max(np.abs(z - 1.0)))
                    out[f"{side}.leading"] = value
                elif c != dom and j != dom:
                    value = float(integrate.trapezoid(np.abs(z), xs) / abs(xs[-1] - xs[0]))
                else:
                    value = float(np.max(np.abs(z)))
                out[f"{side}.{names[c][j]}"] = value
    return out


def validate_growth(
    spec: SystemSpec,
    grid: GridConfig,
    lambda_list: Sequence[complex],
    alpha: float = 0.0,
    ratio_limit: float = 1.5,
) -> GrowthReport:
    """Check the O(1/|Im λ|) and O(1/|λ|) deviation estimates along a vertical ray.

    The leading component (the diagonal entry of the column whose exponential
    dominates away from α) is compared with the exponential itself, the
    off-diagonal entries with zero in sup norm and the subdominant diagonal
    entry in mean, where its estimate holds.

    Args:
        spec: System coefficients
        grid: Grid settings
        lambda_list: λ = σ + it with common σ and |t| increasing
        alpha: Base point (0, ½ and 1 are the customary choices)
        ratio_limit: Largest admissible ratio of consecutive scaled deviations

    Returns:
        GrowthReport
    """
    lams = np.asarray(lambda_list, dtype=complex)
    if lams.ndim != 1 or lams.size == 0:
        raise SpecValidationError("lambda_list must be a non-empty sequence")
    if np.any(lams.imag == 0):
        raise SpecValidationError("growth estimates need Im λ != 0")
    if np.ptp(lams.real) > 1e-12 * max(1.0, float(np.max(np.abs(lams.real)))):
        raise SpecValidationError("lambda_list must lie on a vertical ray")
    if np.any(np.diff(np.abs(lams.imag)) <= 0):
        raise SpecValidationError("|Im λ| must increase along lambda_list")

    batch = solve_fundamental_batch(spec, alpha, lams, grid)
    components = []
    deviations = np.zeros(lams.size)
    for i, lam in enumerate(lams):
        comp = _side_deviations(lam, batch.alpha, spec.velocities, batch.x, batch.chains[i, 0])
        components.append(comp)
        deviations[i] = max(v for k, v in comp.items() if k.endswith(".leading"))

    scaled_im = np.abs(lams.imag) * deviations
    scaled_abs = np.abs(lams) * deviations
    smooth = spec.smooth
    report = GrowthReport(
        alpha=batch.alpha,
        lams=lams,
        deviations=deviations,
        components=components,
        scaled_im=scaled_im,
        scaled_abs=scaled_abs,
        bounded_im=_bounded(scaled_im, ratio_limit),
        bounded_abs=_bounded(scaled_abs, ratio_limit) if smooth else None,
        ratio_limit=ratio_limit,
    )
    logger.info(
        "growth check alpha=%s: max |Im λ|·d = %.3g, bounded=%s",
        alpha, float(np.max(scaled_im)), report.bounded_im,
    )
    return report
