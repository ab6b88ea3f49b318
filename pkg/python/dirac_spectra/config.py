"""Run configuration: JSON ingestion with field-level diagnostics.

The accepted layout is documented by ``schema/run_config.v1.json``; the
checks below mirror it and report the JSON path of the first offending
field.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .errors import ConfigError, SpecValidationError
from .model import (
    BoundarySpec,
    GridConfig,
    KernelFunction,
    LinearBC,
    QuadraticBC,
    ScalarFunction,
    SeparableTerm,
    SeparatedBC,
    SystemSpec,
    Term,
    TermKind,
)
from .polynomial import ComplexPolynomial

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SCHEMA_PATH = Path(__file__).with_name("schema") / "run_config.v1.json"

TASK_ORDER = ("check-conditions", "spectrum", "eigenfunctions", "validate-asymptotics", "riesz-report")
TASK_REQUIRES = {
    "check-conditions": (),
    "spectrum": (),
    "eigenfunctions": ("spectrum",),
    "validate-asymptotics": ("spectrum",),
    "riesz-report": ("spectrum",),
}

_TOP_KEYS = {
    "schema_version", "system", "boundary", "grid", "tasks", "output_dir",
    "spectrum", "asymptotics", "riesz", "eigenfunctions",
}


@dataclass(frozen=True)
class SpectrumOptions:
    n_range: Optional[Tuple[int, int]] = (-20, 20)
    rect: Optional[Tuple[float, float, float, float]] = None
    im_half_height: Optional[float] = None


@dataclass(frozen=True)
class AsymptoticsOptions:
    n_min: int = 5
    n_max: Optional[int] = None


@dataclass(frozen=True)
class RieszOptions:
    gram_K: Optional[Tuple[int, ...]] = None
    completeness_K: Optional[Tuple[int, ...]] = None
    exclusion: Union[str, Tuple[Tuple[complex, int], ...]] = "lowest_modulus"


@dataclass(frozen=True)
class EigenfunctionOptions:
    normalize: bool = True


@dataclass(frozen=True)
class RunConfig:
    """Everything a ``solve`` run needs."""

    system: SystemSpec
    boundary: BoundarySpec
    grid: GridConfig = field(default_factory=GridConfig)
    tasks: Tuple[str, ...] = ("check-conditions", "spectrum")
    output_dir: Path = Path("results")
    spectrum: SpectrumOptions = field(default_factory=SpectrumOptions)
    asymptotics: AsymptoticsOptions = field(default_factory=AsymptoticsOptions)
    riesz: RieszOptions = field(default_factory=RieszOptions)
    eigenfunctions: EigenfunctionOptions = field(default_factory=EigenfunctionOptions)


def resolve_tasks(tasks: Sequence[str]) -> List[str]:
    """Add prerequisites and sort into execution order."""
    wanted = set()
    stack = list(tasks)
    while stack:
        t = stack.pop()
        if t not in TASK_REQUIRES:
            raise ConfigError(f"unknown task {t!r}; expected one of {list(TASK_ORDER)}", "tasks")
        if t not in wanted:
            wanted.add(t)
            stack.extend(TASK_REQUIRES[t])
    return [t for t in TASK_ORDER if t in wanted]


def _expect(value, kind, path: str, what: str):
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"expected {what}, got {type(value).__name__}", path)
    return value


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise ConfigError("number must be finite", path)
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", path)
    return value


def parse_complex(value, path: str) -> complex:
    """A real number or a [re, im] pair."""
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(f"complex values are [re, im] pairs, got {len(value)} entries", path)
        return complex(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))
    return complex(_number(value, path), 0.0)


def parse_polynomial(value, path: str) -> ComplexPolynomial:
    """Ascending coefficient list; a bare number is a constant."""
    if not isinstance(value, list):
        return ComplexPolynomial.constant(parse_complex(value, path))
    if not value:
        return ComplexPolynomial.zero()
    return ComplexPolynomial([parse_complex(c, f"{path}[{i}]") for i, c in enumerate(value)])


def _parse_term(raw, path: str) -> ScalarFunction:
    _expect(raw, dict, path, "an object")
    unknown = set(raw) - {"kind", "coef", "param"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    kind = raw.get("kind")
    coef = parse_complex(raw.get("coef", 1.0), f"{path}.coef")
    param = _number(raw.get("param", 0.0), f"{path}.param")
    try:
        if kind == "sin":
            return ScalarFunction.sin(param, coef)
        if kind == "cos":
            return ScalarFunction.cos(param, coef)
        if kind in ("exp", "trig"):
            return ScalarFunction((Term(TermKind.TRIG, coef, param),))
        if kind in ("monomial", "step"):
            return ScalarFunction((Term(TermKind(kind), coef, param),))
    except SpecValidationError as exc:
        raise ConfigError(str(exc), path) from exc
    raise ConfigError(f"unknown term kind {kind!r}", f"{path}.kind")


def parse_scalar_function(raw, path: str) -> ScalarFunction:
    """A complex constant or a list of term objects."""
    if raw is None:
        return ScalarFunction.zero()
    if not isinstance(raw, list) or raw and not any(isinstance(t, dict) for t in raw):
        return ScalarFunction.constant(parse_complex(raw, path))
    out = ScalarFunction.zero()
    for i, term in enumerate(raw):
        out = out + _parse_term(term, f"{path}[{i}]")
    return out


def _parse_kernel(raw, path: str) -> KernelFunction:
    if raw is None:
        return KernelFunction.zero()
    _expect(raw, list, path, "a list of separable kernel terms")
    entries: Dict[Tuple[int, int], List[SeparableTerm]] = {}
    for i, item in enumerate(raw):
        p = f"{path}[{i}]"
        _expect(item, dict, p, "an object")
        unknown = set(item) - {"row", "col", "f", "g"}
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", p)
        row = _integer(item.get("row"), f"{p}.row")
        col = _integer(item.get("col"), f"{p}.col")
        if row not in (1, 2) or col not in (1, 2):
            raise ConfigError(f"kernel entry ({row}, {col}) outside the 2x2 matrix", p)
        term = SeparableTerm(parse_scalar_function(item.get("f", 1.0), f"{p}.f"), parse_scalar_function(item.get("g", 1.0), f"{p}.g"))
        entries.setdefault((row - 1, col - 1), []).append(term)
    return KernelFunction.from_entries(entries)


def parse_system(raw, path: str = "system") -> SystemSpec:
    _expect(raw, dict, path, "an object")
    unknown = set(raw) - {"a", "b", "q1", "q2", "kernel"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    for key in ("a", "b"):
        if key not in raw:
            raise ConfigError("missing required field", f"{path}.{key}")
    a = _number(raw["a"], f"{path}.a")
    b = _number(raw["b"], f"{path}.b")
    q1 = parse_scalar_function(raw.get("q1"), f"{path}.q1")
    q2 = parse_scalar_function(raw.get("q2"), f"{path}.q2")
    kernel = _parse_kernel(raw.get("kernel"), f"{path}.kernel")
    try:
        return SystemSpec(a, b, q1, q2, kernel)
    except SpecValidationError as exc:
        raise ConfigError(str(exc), path) from exc


def _parse_rows(raw, width: int, path: str):
    _expect(raw, list, path, "a list of two rows")
    if len(raw) != 2:
        raise ConfigError(f"expected 2 rows, got {len(raw)}", path)
    rows = []
    for r, row in enumerate(raw):
        p = f"{path}[{r}]"
        _expect(row, list, p, f"a row of {width} polynomials")
        if len(row) != width:
            raise ConfigError(f"expected {width} entries, got {len(row)}", p)
        rows.append(tuple(parse_polynomial(c, f"{p}[{i}]") for i, c in enumerate(row)))
    return tuple(rows)


def parse_boundary(raw, path: str = "boundary") -> BoundarySpec:
    _expect(raw, dict, path, "an object")
    kind = raw.get("kind")
    try:
        if kind == "linear":
            return LinearBC(_parse_rows(raw.get("rows"), 4, f"{path}.rows"))
        if kind == "quadratic":
            return QuadraticBC(_parse_rows(raw.get("rows"), 10, f"{path}.rows"))
        if kind == "separated":
            polys = []
            for key in ("p11", "p12", "p21", "p22"):
                if key not in raw:
                    raise ConfigError("missing required field", f"{path}.{key}")
                polys.append(parse_polynomial(raw[key], f"{path}.{key}"))
            return SeparatedBC(*polys)
    except ConfigError:
        raise
    except SpecValidationError as exc:
        raise ConfigError(str(exc), path) from exc
    raise ConfigError(f"unknown boundary kind {kind!r}; expected linear, quadratic or separated", f"{path}.kind")


def parse_grid(raw, path: str = "grid") -> GridConfig:
    if raw is None:
        return GridConfig()
    _expect(raw, dict, path, "an object")
    unknown = set(raw) - {"n_points", "quad_rule", "newton_tol", "contour_samples"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    kwargs: Dict[str, Any] = {}
    if "n_points" in raw:
        kwargs["n_points"] = _integer(raw["n_points"], f"{path}.n_points")
    if "contour_samples" in raw:
        kwargs["contour_samples"] = _integer(raw["contour_samples"], f"{path}.contour_samples")
    if "newton_tol" in raw:
        kwargs["newton_tol"] = _number(raw["newton_tol"], f"{path}.newton_tol")
    if "quad_rule" in raw:
        kwargs["quad_rule"] = raw["quad_rule"]
    try:
        return GridConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc), path) from exc


def _parse_spectrum(raw, path: str = "spectrum") -> SpectrumOptions:
    if raw is None:
        return SpectrumOptions()
    _expect(raw, dict, path, "an object")
    unknown = set(raw) - {"n_range", "rect", "im_half_height"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    if "n_range" in raw and "rect" in raw:
        raise ConfigError("give either n_range or rect, not both", path)
    H = raw.get("im_half_height")
    H = None if H is None else _number(H, f"{path}.im_half_height")
    if "rect" in raw:
        rect = _expect(raw["rect"], list, f"{path}.rect", "[re_min, re_max, im_min, im_max]")
        if len(rect) != 4:
            raise ConfigError("rect needs four numbers", f"{path}.rect")
        values = tuple(_number(v, f"{path}.rect[{i}]") for i, v in enumerate(rect))
        if not (values[0] < values[1] and values[2] < values[3]):
            raise ConfigError("rect bounds must be increasing", f"{path}.rect")
        return SpectrumOptions(n_range=None, rect=values, im_half_height=H)
    if "n_range" in raw:
        nr = _expect(raw["n_range"], list, f"{path}.n_range", "[n_min, n_max]")
        if len(nr) != 2:
            raise ConfigError("n_range needs two integers", f"{path}.n_range")
        lo, hi = (_integer(v, f"{path}.n_range[{i}]") for i, v in enumerate(nr))
        if lo > hi:
            raise ConfigError(f"empty n_range [{lo}, {hi}]", f"{path}.n_range")
        return SpectrumOptions(n_range=(lo, hi), im_half_height=H)
    return SpectrumOptions(im_half_height=H)


def _int_list(raw, path: str) -> Optional[Tuple[int, ...]]:
    if raw is None:
        return None
    _expect(raw, list, path, "a list of integers")
    values = tuple(_integer(v, f"{path}[{i}]") for i, v in enumerate(raw))
    if any(v < 0 for v in values):
        raise ConfigError("K values must be non-negative", path)
    return values


def _parse_riesz(raw, path: str = "riesz") -> RieszOptions:
    if raw is None:
        return RieszOptions()
    _expect(raw, dict, path, "an object")
    unknown = set(raw) - {"gram_K", "completeness_K", "exclusion"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    exclusion = raw.get("exclusion", "lowest_modulus")
    if isinstance(exclusion, list):
        items = []
        for i, item in enumerate(exclusion):
            p = f"{path}.exclusion[{i}]"
            _expect(item, dict, p, "an object with lambda and order")
            items.append((parse_complex(item.get("lambda"), f"{p}.lambda"), _integer(item.get("order"), f"{p}.order")))
        exclusion = tuple(items)
    elif exclusion != "lowest_modulus":
        raise ConfigError(f"unknown exclusion strategy {exclusion!r}", f"{path}.exclusion")
    return RieszOptions(_int_list(raw.get("gram_K"), f"{path}.gram_K"), _int_list(raw.get("completeness_K"), f"{path}.completeness_K"), exclusion)


def _parse_asymptotics(raw, path: str = "asymptotics") -> AsymptoticsOptions:
    if raw is None:
        return AsymptoticsOptions()
    _expect(raw, dict, path, "an object")
    unknown = set(raw) - {"n_min", "n_max"}
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    n_min = _integer(raw.get("n_min", 5), f"{path}.n_min")
    n_max = raw.get("n_max")
    return AsymptoticsOptions(n_min, None if n_max is None else _integer(n_max, f"{path}.n_max"))


def config_from_dict(raw: Mapping[str, Any]) -> RunConfig:
    """Build a RunConfig from parsed JSON.

    Raises:
        ConfigError: naming the JSON path of the first invalid field
    """
    _expect(raw, dict, "", "a JSON object")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version!r}", "schema_version")
    for key in ("system", "boundary"):
        if key not in raw:
            raise ConfigError("missing required field", key)

    tasks = raw.get("tasks", ["check-conditions", "spectrum"])
    _expect(tasks, list, "tasks", "a list of task names")
    for i, t in enumerate(tasks):
        _expect(t, str, f"tasks[{i}]", "a task name")
    eig = raw.get("eigenfunctions") or {}
    _expect(eig, dict, "eigenfunctions", "an object")
    normalize = eig.get("normalize", True)
    _expect(normalize, bool, "eigenfunctions.normalize", "a boolean")
    out = raw.get("output_dir", "results")
    _expect(out, str, "output_dir", "a path string")

    return RunConfig(
        system=parse_system(raw["system"]),
        boundary=parse_boundary(raw["boundary"]),
        grid=parse_grid(raw.get("grid")),
        tasks=tuple(resolve_tasks(tasks)),
        output_dir=Path(out),
        spectrum=_parse_spectrum(raw.get("spectrum")),
        asymptotics=_parse_asymptotics(raw.get("asymptotics")),
        riesz=_parse_riesz(raw.get("riesz")),
        eigenfunctions=EigenfunctionOptions(normalize),
    )


def load_config(path: Union[str, Path]) -> RunConfig:
    """Read and validate a JSON run configuration.

    Raises:
        ConfigError: on unreadable files, JSON syntax errors (with line) and schema violations
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from exc
    config = config_from_dict(raw)
    logger.info("loaded %s: %s boundary, tasks %s", path, type(config.boundary).__name__, ",".join(config.tasks))
    return config


def load_schema() -> dict:
    """The shipped JSON Schema document."""
    return json.loads(SCHEMA_PATH.read_text(encoding="utf-8"))
