"""Eigenvalue location by argument-principle counting and Newton refinement."""

import cmath
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .charfn import CharContext, eval_char
from .errors import SpecValidationError, ZeroOnContourError
from .model import GridConfig, SeparatedBC, SystemSpec
from .report import write_csv

logger = logging.getLogger(__name__)

THREADS_ENV = "DIRAC_SPECTRA_THREADS"

ChiFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Rect:
    """Closed rectangle [re_min, re_max] x [im_min, im_max] in the λ-plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise SpecValidationError(f"degenerate rectangle {self}")

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )

    def dilate(self, factor: float) -> "Rect":
        c = self.center
        hw, hh = 0.5 * self.width * factor, 0.5 * self.height * factor
        return Rect(c.real - hw, c.real + hw, c.imag - hh, c.imag + hh)

    def split(self, fraction: float = 0.5) -> Tuple["Rect", "Rect"]:
        """Halve across the longer side at ``fraction`` of its length."""
        if self.width >= self.height:
            cut = self.re_min + fraction * self.width
            return (
                Rect(self.re_min, cut, self.im_min, self.im_max),
                Rect(cut, self.re_max, self.im_min, self.im_max),
            )
        cut = self.im_min + fraction * self.height
        return (
            Rect(self.re_min, self.re_max, self.im_min, cut),
            Rect(self.re_min, self.re_max, cut, self.im_max),
        )

    def boundary(self, samples: int) -> np.ndarray:
        """Counter-clockwise closed polygon with ``samples`` points (first point repeated)."""
        per_side = max(2, samples // 4)
        t = np.linspace(0.0, 1.0, per_side, endpoint=False)
        corners = [
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        ]
        pts = [c0 + (c1 - c0) * t for c0, c1 in zip(corners, corners[1:] + corners[:1])]
        pts.append(np.array([corners[0]]))
        return np.concatenate(pts)

    @classmethod
    def around(cls, z: complex, radius: float) -> "Rect":
        return cls(z.real - radius, z.real + radius, z.imag - radius, z.imag + radius)


@dataclass(frozen=True)
class StripSpec:
    """Vertical strip (2n-1)π < (b-a)Re λ + Im ln R < (2n+1)π, cut to |Im λ| ≤ H."""

    n: int
    re_min: float
    re_max: float
    im_band: Tuple[float, float]

    def rect(self) -> Rect:
        return Rect(self.re_min, self.re_max, self.im_band[0], self.im_band[1])

    def contains(self, z: complex) -> bool:
        return self.re_min < z.real < self.re_max


@dataclass
class SpectralPoint:
    """A located zero of χ."""

    lam: complex
    multiplicity: int
    strip_index: Optional[int] = None
    residual: float = 0.0
    """|χ(λ)| after refinement."""
    model_root: Optional[complex] = None
    derivative: float = 0.0
    """|χ'(λ)| from the final central difference."""

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "multiplicity": self.multiplicity,
            "strip_index": self.strip_index,
            "residual": self.residual,
            "model_root": self.model_root,
        }


@dataclass
class Spectrum:
    """Located eigenvalues sorted by (Re λ, Im λ) plus bookkeeping.

    Iterates and indexes like the list of points.
    """

    points: List[SpectralPoint]
    strip_counts: Dict[int, int] = field(default_factory=dict)
    anomalous_strips: List[int] = field(default_factory=list)
    failures: List[str] = field(default_factory=list)

    def __iter__(self):
        return iter(self.points)

    def __len__(self) -> int:
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def by_strip(self) -> Dict[int, SpectralPoint]:
        return {p.strip_index: p for p in self.points if p.strip_index is not None}

    def to_dict(self) -> dict:
        return {
            "points": [p.to_dict() for p in self.points],
            "strip_counts": {str(k): v for k, v in sorted(self.strip_counts.items())},
            "anomalous_strips": self.anomalous_strips,
            "failures": self.failures,
        }

    def to_csv(self, path: Union[str, Path]) -> Path:
        rows = []
        for p in self.points:
            m0 = p.model_root
            rows.append((
                p.strip_index, p.lam.real, p.lam.imag, p.multiplicity, p.residual,
                None if m0 is None else m0.real, None if m0 is None else m0.imag,
            ))
        header = ("n", "re_lambda", "im_lambda", "multiplicity", "residual", "re_lambda0", "im_lambda0")
        return write_csv(path, header, rows)


def log_ratio(sbc: SeparatedBC) -> complex:
    """Principal ln R of the leading ratio R = C11 C22 / (C12 C21)."""
    return cmath.log(sbc.leading_ratio)


def _as_indices(n_range) -> List[int]:
    if isinstance(n_range, tuple) and len(n_range) == 2 and all(isinstance(v, int) for v in n_range):
        lo, hi = n_range
        return list(range(lo, hi + 1))
    return [int(n) for n in n_range]


def model_roots(sbc: SeparatedBC, spec: SystemSpec, n_range, alternative: bool = False) -> List[complex]:
    """λ_{n,0} = (i ln R + 2πn)/(b-a).

    Args:
        sbc: Separated conditions
        spec: System (only a, b are used)
        n_range: Iterable of indices, or an inclusive (lo, hi) pair
        alternative: Use the pairing C1/C2 = C11 C21/(C12 C22) instead of R

    Returns:
        One model root per index
    """
    ratio = sbc.leading_ratio_alt if alternative else sbc.leading_ratio
    if ratio == 0:
        raise SpecValidationError("leading coefficients must be nonzero")
    ln_r = cmath.log(ratio)
    return [(1j * ln_r + 2 * math.pi * n) / spec.width for n in _as_indices(n_range)]


def strip_spec(sbc: SeparatedBC, spec: SystemSpec, n: int, im_half_height: Optional[float] = None) -> StripSpec:
    ln_r = log_ratio(sbc)
    width = spec.width
    H = default_band(sbc, spec) if im_half_height is None else im_half_height
    re_min = ((2 * n - 1) * math.pi - ln_r.imag) / width
    re_max = ((2 * n + 1) * math.pi - ln_r.imag) / width
    return StripSpec(n, re_min, re_max, (-H, H))


def default_band(sbc: SeparatedBC, spec: SystemSpec) -> float:
    """H = 5 + |ln R|/(b-a)."""
    return 5.0 + abs(log_ratio(sbc)) / spec.width


class _OnContour(Exception):
    pass


def _winding(chi: ChiFunction, rect: Rect, samples: int, floor: float, max_rounds: int = 16) -> int:
    pts = rect.boundary(samples)
    vals = np.asarray(chi(pts), dtype=complex)
    for _ in range(max_rounds):
        scale = float(np.max(np.abs(vals)))
        if scale == 0 or np.min(np.abs(vals)) <= floor * scale:
            raise _OnContour()
        steps = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(steps) > 0.5 * math.pi
        if not np.any(bad):
            total = float(np.sum(steps)) / (2 * math.pi)
            count = int(round(total))
            if abs(total - count) > 0.1:
                raise _OnContour()
            return count
        where = np.nonzero(bad)[0]
        mids = 0.5 * (pts[where] + pts[where + 1])
        mid_vals = np.asarray(chi(mids), dtype=complex)
        pts = np.insert(pts, where + 1, mids)
        vals = np.insert(vals, where + 1, mid_vals)
    raise _OnContour()


def count_zeros_rect(
    chi: ChiFunction,
    rect: Rect,
    samples: int = 64,
    boundary_floor: float = 1e-12,
    max_retries: int = 5,
) -> int:
    """Winding number of χ along the boundary of ``rect``.

    The argument is accumulated over ``samples`` boundary points, bisecting
    any segment whose argument step exceeds π/2. If |χ| drops below
    ``boundary_floor`` times its contour maximum the rectangle is dilated
    by 1% and the count retried.

    Raises:
        ZeroOnContourError: if every dilation still meets a zero
    """
    current = rect
    for attempt in range(max_retries + 1):
        try:
            return _winding(chi, current, samples, boundary_floor)
        except _OnContour:
            logger.debug("zero near contour of %s; dilating (attempt %d)", current, attempt + 1)
            current = current.dilate(1.01)
    raise ZeroOnContourError(f"χ vanishes on the boundary of {rect} after {max_retries} dilations")


@dataclass
class NewtonResult:
    lam: complex
    residual: float
    derivative: float
    iterations: int
    converged: bool


def refine_root(
    chi: ChiFunction,
    z0: complex,
    tol: float = 1e-10,
    multiplicity: int = 1,
    max_iter: int = 50,
) -> NewtonResult:
    """Newton iteration with step m·χ/χ' and a central-difference derivative.

    Falls back to a secant step when the derivative underflows.
    """
    z = complex(z0)
    prev: Optional[Tuple[complex, complex]] = None
    f0 = d = 0j
    for it in range(1, max_iter + 1):
        h = 1e-6 * max(1.0, abs(z))
        f0, fp, fm = np.asarray(chi(np.array([z, z + h, z - h])), dtype=complex)
        d = (fp - fm) / (2 * h)
        if f0 == 0:
            return NewtonResult(z, 0.0, abs(d), it, True)
        if abs(d) > 1e-300 and math.isfinite(abs(f0 / d)):
            step = multiplicity * f0 / d
        elif prev is not None and prev[1] != f0:
            step = f0 * (z - prev[0]) / (f0 - prev[1])
        else:
            break
        prev = (z, f0)
        z = z - step
        if abs(step) <= tol * max(1.0, abs(z)):
            f_end = complex(np.asarray(chi(np.array([z])))[0])
            return NewtonResult(z, abs(f_end), abs(d), it, True)
    return NewtonResult(z, abs(f0), abs(d), max_iter, abs(f0) <= tol * (1 + abs(d)))


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, int(threads))
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        return 1


def _isolate(chi, rect, samples, tol, depth=0, count=None, max_depth=40) -> List[Tuple[Rect, int, Optional[NewtonResult]]]:
    """Split ``rect`` until each piece holds one zero or one clustered multiple zero."""
    if count is None:
        count = count_zeros_rect(chi, rect, samples)
    if count <= 0:
        return []
    if count == 1 or rect.diameter < 1e-6 or depth >= max_depth:
        return [(rect, count, None)]
    # a multiple zero: Newton from the centre with the full count, then confirm
    trial = refine_root(chi, rect.center, tol, multiplicity=count)
    if trial.converged and rect.contains(trial.lam):
        radius = min(1e-3, 0.25 * min(rect.width, rect.height))
        try:
            if count_zeros_rect(chi, Rect.around(trial.lam, radius), samples) == count:
                return [(rect, count, trial)]
        except ZeroOnContourError:
            pass
    # slightly off-centre cuts avoid symmetric zero placements on the cut
    for fraction in (0.5 + 1 / 97, 0.5 - 1 / 89, 0.5 + 1 / 7):
        left, right = rect.split(fraction)
        try:
            c_left = count_zeros_rect(chi, left, samples, max_retries=0)
            c_right = count_zeros_rect(chi, right, samples, max_retries=0)
        except ZeroOnContourError:
            continue
        if c_left + c_right != count:
            logger.debug("partition count mismatch %d + %d != %d in %s", c_left, c_right, count, rect)
            continue
        return _isolate(chi, left, samples, tol, depth + 1, c_left) + _isolate(
            chi, right, samples, tol, depth + 1, c_right
        )
    return [(rect, count, None)]


def _refine_piece(chi, rect, count, tol, start=None, trial=None) -> Optional[SpectralPoint]:
    result = trial
    if result is None:
        result = refine_root(chi, rect.center if start is None else start, tol, multiplicity=count)
        if not rect.contains(result.lam, pad=0.05 * rect.diameter) and start is not None:
            result = refine_root(chi, rect.center, tol, multiplicity=count)
    if not rect.contains(result.lam, pad=0.05 * rect.diameter):
        return None
    return SpectralPoint(result.lam, count, residual=result.residual, derivative=result.derivative)


def _merge(points: List[SpectralPoint], tol: float = 1e-7) -> List[SpectralPoint]:
    merged: List[SpectralPoint] = []
    for p in sorted(points, key=lambda q: (q.lam.real, q.lam.imag)):
        for q in merged:
            if abs(p.lam - q.lam) <= tol * max(1.0, abs(q.lam)):
                q.multiplicity = max(q.multiplicity, p.multiplicity)
                break
        else:
            merged.append(p)
    return merged


def _locate_in_rect(chi, rect, grid: GridConfig) -> Tuple[List[SpectralPoint], List[str]]:
    failures = []
    points = []
    try:
        pieces = _isolate(chi, rect, grid.contour_samples, grid.newton_tol)
    except ZeroOnContourError as exc:
        return [], [str(exc)]
    for piece, count, trial in pieces:
        pt = _refine_piece(chi, piece, count, grid.newton_tol, trial=trial)
        if pt is None:
            failures.append(f"Newton left {piece} (count {count})")
            logger.warning("refinement failed in %s", piece)
        else:
            points.append(pt)
    return points, failures


def _locate_strip(ctx: CharContext, sbc: SeparatedBC, n: int, H: Optional[float]):
    chi = ctx.chi
    grid = ctx.grid
    strip = strip_spec(sbc, ctx.spec, n, H)
    model = model_roots(sbc, ctx.spec, [n])[0]
    rect = strip.rect()
    try:
        count = count_zeros_rect(chi, rect, grid.contour_samples)
    except ZeroOnContourError as exc:
        return n, -1, [], [f"strip {n}: {exc}"]
    if count == 1:
        pt = _refine_piece(chi, rect, 1, grid.newton_tol, start=model)
        if pt is not None:
            pt.strip_index, pt.model_root = n, model
            return n, 1, [pt], []
    points, failures = _locate_in_rect(chi, rect, grid)
    for pt in points:
        pt.strip_index, pt.model_root = n, model
    return n, count, points, [f"strip {n}: {f}" for f in failures]


def locate_spectrum(
    ctx: CharContext,
    region: Union[Rect, Iterable[int], Tuple[int, int]],
    grid: Optional[GridConfig] = None,
    threads: Optional[int] = None,
    im_half_height: Optional[float] = None,
) -> Spectrum:
    """Locate the zeros of χ in a rectangle or over a range of strips.

    Args:
        ctx: Characteristic-function context
        region: A :class:`Rect`, or strip indices (iterable or inclusive pair); strips need separated conditions
        grid: Overrides the context grid
        threads: Worker threads (default from DIRAC_SPECTRA_THREADS, else 1)
        im_half_height: Strip band half-height H (default 5 + |ln R|/(b-a))

    Returns:
        Spectrum sorted by (Re λ, Im λ); failures are recorded, not raised
    """
    if grid is not None and grid != ctx.grid:
        ctx = ctx.with_grid(grid)
    workers = _thread_count(threads)

    if isinstance(region, Rect):
        points, failures = _locate_in_rect(ctx.chi, region, ctx.grid)
        spectrum = Spectrum(_merge(points), failures=failures)
        logger.info("located %d eigenvalues in %s", len(spectrum), region)
        return spectrum

    sbc = ctx.bc
    if not isinstance(sbc, SeparatedBC):
        raise SpecValidationError("strip enumeration needs separated boundary conditions")
    indices = _as_indices(region)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda n: _locate_strip(ctx, sbc, n, im_half_height), indices))
    else:
        results = [_locate_strip(ctx, sbc, n, im_half_height) for n in indices]

    points: List[SpectralPoint] = []
    counts: Dict[int, int] = {}
    failures: List[str] = []
    for n, count, pts, fails in results:
        counts[n] = count
        points.extend(pts)
        failures.extend(fails)
    anomalous = sorted(n for n, c in counts.items() if c != 1)
    for n in anomalous:
        logger.warning("strip %d holds %d zeros", n, counts[n])
    spectrum = Spectrum(_merge(points), counts, anomalous, failures)
    logger.info("located %d eigenvalues over %d strips", len(spectrum), len(indices))
    return spectrum


def multiplicity_profile(chi: ChiFunction, lam: complex, order: int, radius: float = 1e-2, samples: int = 64) -> np.ndarray:
    """|c_k| r^k for the Taylor coefficients c_k of χ at λ, k = 0..order.

    Coefficients come from the discrete Cauchy integral on a circle of
    radius ``r``; a zero of multiplicity m shows |c_k| r^k ≈ 0 for k < m.
    """
    theta = 2 * math.pi * np.arange(samples) / samples
    pts = lam + radius * np.exp(1j * theta)
    vals = np.asarray(chi(pts), dtype=complex)
    coeffs = np.fft.fft(vals) / samples
    return np.abs(coeffs[: order + 1])


@dataclass
class AsymptoticsReport:
    """Deviation of located eigenvalues from their model roots."""

    indices: List[int]
    scaled_errors: List[float]
    """e_n = |n|·|λ_n - λ_{n,0}|."""
    max_error: float
    min_error: float
    nonincreasing: bool
    strip_counts: Dict[int, int]
    single_root_strips: bool
    """Every strip with |n| in the checked range holds exactly one zero."""

    @property
    def spread(self) -> float:
        """max e_n / min e_n (1 when all vanish)."""
        if self.max_error == 0:
            return 1.0
        if self.min_error == 0:
            return math.inf
        return self.max_error / self.min_error

    def to_dict(self) -> dict:
        return {
            "indices": self.indices,
            "scaled_errors": self.scaled_errors,
            "max_error": self.max_error,
            "min_error": self.min_error,
            "spread": self.spread,
            "nonincreasing": self.nonincreasing,
            "strip_counts": {str(k): v for k, v in sorted(self.strip_counts.items())},
            "single_root_strips": self.single_root_strips,
        }


def verify_asymptotics(
    points: Union[Spectrum, Sequence[SpectralPoint]],
    sbc: SeparatedBC,
    spec: SystemSpec,
    n_min: int = 1,
    n_max: Optional[int] = None,
    trend_from: int = 10,
    slope_tol: float = 0.1,
) -> AsymptoticsReport:
    """Check λ_n = λ_{n,0} + O(1/|n|) and one zero per strip.

    The trend flag fits log e_n against log |n| for |n| ≥ ``trend_from``
    and accepts slopes up to ``slope_tol``.
    """
    strip_pts: Dict[int, List[SpectralPoint]] = {}
    for p in points:
        if p.strip_index is not None:
            strip_pts.setdefault(p.strip_index, []).append(p)
    counts = dict(points.strip_counts) if isinstance(points, Spectrum) and points.strip_counts else {
        n: sum(p.multiplicity for p in pts) for n, pts in strip_pts.items()
    }
    upper = n_max if n_max is not None else max((abs(n) for n in strip_pts), default=0)

    indices, errors = [], []
    for n in sorted(strip_pts, key=lambda k: (abs(k), k)):
        if not n_min <= abs(n) <= upper or len(strip_pts[n]) != 1:
            continue
        model = model_roots(sbc, spec, [n])[0]
        indices.append(n)
        errors.append(abs(n) * abs(strip_pts[n][0].lam - model))

    errs = np.asarray(errors, dtype=float)
    nonincreasing = True
    tail = [(abs(n), e) for n, e in zip(indices, errors) if abs(n) >= trend_from and e > 0]
    if len(tail) >= 3:
        slope = np.polyfit(np.log([t[0] for t in tail]), np.log([t[1] for t in tail]), 1)[0]
        nonincreasing = bool(slope <= slope_tol)
    checked = {n: c for n, c in counts.items() if n_min <= abs(n) <= upper}
    return AsymptoticsReport(
        indices=indices,
        scaled_errors=[float(e) for e in errs],
        max_error=float(errs.max()) if errs.size else 0.0,
        min_error=float(errs.min()) if errs.size else 0.0,
        nonincreasing=nonincreasing,
        strip_counts=counts,
        single_root_strips=all(c == 1 for c in checked.values()),
    )
