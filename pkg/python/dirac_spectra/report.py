"""Deterministic JSON/CSV emission and plot-ready series."""

import csv
import io
import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import DiracSpectraError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_float(value: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    value = float(value)
    if not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return f"{value:.17g}"


def to_jsonable(obj: Any) -> Any:
    """Convert numpy and complex values to plain JSON types.

    Complex numbers become ``[re, im]`` pairs; non-finite floats become
    ``null`` so the output stays strict JSON.
    """
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if not math.isfinite(f):
            return None
        # shortest repr and the 17-digit form parse to the same double
        return float(format_float(f))
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    os.replace(str(tmp), str(path))


def write_json(path: PathLike, obj: Any) -> Path:
    path = Path(path)
    _atomic_write_text(path, dumps_json(obj))
    logger.info("wrote %s", path)
    return path


def _cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    _atomic_write_text(path, csv_text(header, rows))
    logger.info("wrote %s", path)
    return path


def sample_rows(x: np.ndarray, samples: np.ndarray) -> List[Tuple[float, ...]]:
    """Rows (x, Re y1, Im y1, Re y2, Im y2) for a 2-component grid function."""
    return [
        (float(xi), float(y1.real), float(y1.imag), float(y2.real), float(y2.imag))
        for xi, y1, y2 in zip(x, samples[0], samples[1])
    ]


SAMPLE_HEADER = ("x", "re_y1", "im_y1", "re_y2", "im_y2")

PLOT_KINDS = ("spectrum", "asymptotics", "riesz-tail", "gram")


def plot_series(report: Mapping[str, Any], kind: str) -> Tuple[Tuple[str, ...], List[Tuple[Any, ...]]]:
    """Extract a plot-ready table from a report dictionary.

    Args:
        report: Dictionary produced by one of the ``to_dict`` report methods
        kind: One of ``PLOT_KINDS``

    Returns:
        (header, rows)
    """
    if kind == "spectrum":
        rows = []
        for p in report["points"]:
            lam = complex(*p["lambda"]) if isinstance(p["lambda"], (list, tuple)) else complex(p["lambda"])
            rows.append((p.get("strip_index"), lam.real, lam.imag))
        return ("n", "re_lambda", "im_lambda"), rows
    if kind == "asymptotics":
        return ("n", "e_n"), [(n, e) for n, e in zip(report["indices"], report["scaled_errors"])]
    if kind == "riesz-tail":
        tail = report["tail"]
        return ("K", "S_K"), list(zip(tail["K"], tail["partial_sums"]))
    if kind == "gram":
        gram = report["gram"]
        return ("K", "condition"), list(zip(gram["K"], gram["condition"]))
    raise DiracSpectraError(f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}")


def emit_plotdata(report: Mapping[str, Any], kind: str, path: PathLike = None) -> str:
    """Render ``plot_series`` as CSV text, writing it to ``path`` when given."""
    header, rows = plot_series(report, kind)
    text = csv_text(header, rows)
    if path is not None:
        _atomic_write_text(Path(path), text)
        logger.info("wrote %s", path)
    return text
