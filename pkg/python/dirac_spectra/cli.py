"""Command-line entry point: ``dirac-spectra solve <config.json>``."""

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .charfn import CharContext, check_conditions
from .config import RunConfig, load_config, resolve_tasks
from .eigensystem import bc_residual, build_root_functions, dump_root_functions, normalize
from .errors import (
    ConfigError,
    DerivativeOrderError,
    DiracSpectraError,
    DynamicRangeError,
    SpecValidationError,
    ZeroOnContourError,
)
from .model import SeparatedBC, validate_spec
from .report import emit_plotdata, write_json
from .riesz import build_riesz_report
from .spectrum import Rect, Spectrum, locate_spectrum, verify_asymptotics

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_CONDITIONS = 2
EXIT_NUMERICAL = 3

_SEPARATED_ONLY = ("validate-asymptotics", "riesz-report")


class _Run:
    """State shared between the tasks of one run."""

    def __init__(self, config: RunConfig, out: Path):
        self.config = config
        self.out = out
        self.ctx = CharContext(config.system, config.boundary, config.grid)
        self.spectrum: Optional[Spectrum] = None
        self.conditions_ok = True

    def check_conditions(self) -> None:
        report = check_conditions(self.config.boundary)
        self.conditions_ok = report.satisfied
        payload = report.to_dict()
        payload["boundary_kind"] = type(self.config.boundary).__name__
        write_json(self.out / "conditions.json", payload)
        if not report.satisfied:
            for msg in report.messages:
                logger.warning("condition check: %s", msg)

    def spectrum_task(self) -> None:
        opts = self.config.spectrum
        region = Rect(*opts.rect) if opts.rect is not None else opts.n_range
        self.spectrum = locate_spectrum(self.ctx, region, im_half_height=opts.im_half_height)
        self.spectrum.to_csv(self.out / "spectrum.csv")
        emit_plotdata(self.spectrum.to_dict(), "spectrum", self.out / "plots" / "spectrum.csv")
        for failure in self.spectrum.failures:
            logger.warning("spectrum: %s", failure)

    def eigenfunctions(self) -> None:
        directory = self.out / "eigenfunctions"
        index = []
        functions = []
        for pt in self.spectrum:
            try:
                built = build_root_functions(self.ctx, pt)
            except DerivativeOrderError as exc:
                logger.warning("skipping λ=%s: %s", pt.lam, exc)
                index.append({"lambda": pt.lam, "multiplicity": pt.multiplicity, "skipped": str(exc)})
                continue
            for rf in built:
                if self.config.eigenfunctions.normalize:
                    rf = normalize(rf, self.ctx.grid)
                r1, r2 = bc_residual(self.config.boundary, rf.samples, pt.lam)
                index.append({
                    "lambda": pt.lam,
                    "strip_index": pt.strip_index,
                    "branch": rf.branch,
                    "order": rf.order,
                    "l2_norm": rf.l2_norm,
                    "bc_residual": [abs(r1), abs(r2)],
                })
                functions.append(rf)
        paths = dump_root_functions(functions, directory)
        for entry, path in zip((e for e in index if "skipped" not in e), paths):
            entry["file"] = path.name
        write_json(directory / "index.json", {"functions": index})

    def asymptotics(self) -> None:
        opts = self.config.asymptotics
        report = verify_asymptotics(self.spectrum, self.config.boundary, self.config.system, opts.n_min, opts.n_max)
        payload = report.to_dict()
        write_json(self.out / "asymptotics.json", payload)
        emit_plotdata(payload, "asymptotics", self.out / "plots" / "asymptotics.csv")
        if not report.single_root_strips:
            logger.warning("some strips with |n| >= %d do not hold exactly one root", opts.n_min)

    def riesz(self) -> None:
        opts = self.config.riesz
        report = build_riesz_report(
            self.ctx, self.spectrum, opts.gram_K, opts.completeness_K, opts.exclusion
        )
        payload = report.to_dict()
        write_json(self.out / "riesz.json", payload)
        emit_plotdata(payload, "riesz-tail", self.out / "plots" / "riesz-tail.csv")
        emit_plotdata(payload, "gram", self.out / "plots" / "gram.csv")

    def execute(self, task: str) -> None:
        logger.info("task %s", task)
        {
            "check-conditions": self.check_conditions,
            "spectrum": self.spectrum_task,
            "eigenfunctions": self.eigenfunctions,
            "validate-asymptotics": self.asymptotics,
            "riesz-report": self.riesz,
        }[task]()


def _prepare(config: RunConfig, out_dir, tasks, grid_points) -> RunConfig:
    changes = {}
    if out_dir is not None:
        changes["output_dir"] = Path(out_dir)
    if tasks is not None:
        changes["tasks"] = tuple(resolve_tasks(tasks))
    if grid_points is not None:
        try:
            changes["grid"] = config.grid.with_points(grid_points)
        except ValueError as exc:
            raise ConfigError(str(exc), "grid.n_points") from exc
    config = dataclasses.replace(config, **changes)
    separated = isinstance(config.boundary, SeparatedBC)
    for task in config.tasks:
        if task in _SEPARATED_ONLY and not separated:
            raise ConfigError(f"task {task!r} needs separated boundary conditions", "tasks")
    if "spectrum" in config.tasks and config.spectrum.rect is None and not separated:
        raise ConfigError("strip enumeration needs separated boundary conditions; give spectrum.rect", "spectrum")
    return config


def run(
    config_path,
    out_dir=None,
    tasks: Optional[Sequence[str]] = None,
    grid_points: Optional[int] = None,
) -> int:
    """Execute a configuration file and write its artifacts.

    Returns:
        0 on success, 1 for configuration errors, 2 when the completeness
        conditions fail, 3 on a numerical abort
    """
    try:
        config = _prepare(load_config(config_path), out_dir, tasks, grid_points)
        checked = validate_spec(config.system)
    except SpecValidationError as exc:
        logger.error("%s: %s", config_path, exc)
        return EXIT_CONFIG
    for msg in checked.messages:
        logger.warning("%s", msg)

    state = _Run(config, config.output_dir)
    try:
        for task in config.tasks:
            state.execute(task)
    except (DynamicRangeError, ZeroOnContourError) as exc:
        logger.error("numerical abort: %s", exc)
        return EXIT_NUMERICAL
    except DiracSpectraError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    if not state.conditions_ok:
        return EXIT_CONDITIONS
    logger.info("finished %s -> %s", config_path, config.output_dir)
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirac-spectra", description="Spectra of Dirac-type integro-differential systems")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)
    solve = sub.add_parser("solve", help="Run the tasks of a JSON configuration")
    solve.add_argument("config", help="Path to the run configuration")
    solve.add_argument("--out", help="Output directory (overrides output_dir)")
    solve.add_argument("--tasks", help="Comma-separated task list (overrides tasks)")
    solve.add_argument("--grid-points", type=int, help="Grid size (overrides grid.n_points)")
    solve.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    solve.add_argument("-v", "--verbose", action="store_true", help="Shortcut for --log-level INFO")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ns = _parser().parse_args(argv)
    level = "INFO" if ns.verbose and ns.log_level == "WARNING" else ns.log_level
    logging.basicConfig(level=getattr(logging, level), format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    tasks = [t.strip() for t in ns.tasks.split(",") if t.strip()] if ns.tasks else None
    return run(ns.config, ns.out, tasks, ns.grid_points)


if __name__ == "__main__":
    raise SystemExit(main())
