"""Tests for run-configuration parsing."""

import json
from pathlib import Path

import pytest
from dirac_spectra import ConfigError, QuadraticBC, SeparatedBC, load_config
from dirac_spectra.config import config_from_dict, load_schema, parse_scalar_function, resolve_tasks

CONFIGS = Path(__file__).resolve().parents[1] / "examples" / "configs"


def _minimal(**extra):
    raw = {
        "system": {"a": -1.0, "b": 1.0},
        "boundary": {"kind": "separated", "p11": 1, "p12": 1, "p21": 1, "p22": 1},
    }
    raw.update(extra)
    return raw


def test_bundled_configs_load():
    """Every bundled configuration loads and starts with the condition check."""
    names = sorted(p.name for p in CONFIGS.glob("*.json"))
    assert len(names) == 6
    for path in CONFIGS.glob("*.json"):
        config = load_config(path)
        assert config.tasks[0] == "check-conditions"


def test_defaults():
    """Omitted sections fall back to their defaults."""
    config = config_from_dict(_minimal())
    assert config.tasks == ("check-conditions", "spectrum")
    assert config.grid.n_points == 513
    assert config.spectrum.n_range == (-20, 20)
    assert isinstance(config.boundary, SeparatedBC)


def test_task_prerequisites_added():
    """Tasks pull in the tasks they depend on."""
    assert resolve_tasks(["riesz-report"]) == ["spectrum", "riesz-report"]
    with pytest.raises(ConfigError) as info:
        resolve_tasks(["plot"])
    assert info.value.path == "tasks"


def test_scalar_function_forms():
    """Numbers, coefficient pairs and term lists all parse."""
    assert parse_scalar_function(0.5, "q")(0.3) == 0.5
    assert parse_scalar_function([0.5, 1.0], "q")(0.3) == 0.5 + 1.0j
    f = parse_scalar_function([{"kind": "monomial", "coef": 2.0, "param": 1}], "q")
    assert f(0.25) == pytest.approx(0.5)


def test_quadratic_rows():
    """The quadratic example parses into ten-coefficient rows."""
    config = load_config(CONFIGS / "quadratic_worked.json")
    assert isinstance(config.boundary, QuadraticBC)
    assert config.spectrum.rect == (5.0, 7.5, -1.0, 1.0)
    assert config.spectrum.n_range is None


@pytest.mark.parametrize(
    "patch, path",
    [
        ({"system": {"a": 1.0, "b": 1.0}}, "system"),
        ({"system": {"b": 1.0}}, "system.a"),
        ({"boundary": {"kind": "linear", "rows": [[1, 0, 0, 0], [0, 1, 0]]}}, "boundary.rows[1]"),
        ({"boundary": {"kind": "separated", "p11": 1, "p12": "x", "p21": 1, "p22": 1}}, "boundary.p12"),
        ({"boundary": {"kind": "cubic"}}, "boundary.kind"),
        ({"grid": {"n_points": 100}}, "grid"),
        ({"spectrum": {"n_range": [3, 1]}}, "spectrum.n_range"),
        ({"spectrum": {"rect": [0, 1, 0]}}, "spectrum.rect"),
        ({"riesz": {"exclusion": "random"}}, "riesz.exclusion"),
        ({"schema_version": 2}, "schema_version"),
    ],
)
def test_field_level_errors(patch, path):
    """Errors carry the JSON path of the offending field."""
    with pytest.raises(ConfigError) as info:
        config_from_dict(_minimal(**patch))
    assert info.value.path == path


def test_unknown_top_level_key():
    """Unknown top-level keys are rejected."""
    with pytest.raises(ConfigError, match="unknown top-level keys"):
        config_from_dict(_minimal(plots=True))


def test_json_syntax_error_reports_line(tmp_path):
    """Syntax errors report the line."""
    path = tmp_path / "bad.json"
    path.write_text('{\n  "system": {"a": -1,\n}\n')
    with pytest.raises(ConfigError) as info:
        load_config(path)
    assert info.value.line == 3


def test_missing_file(tmp_path):
    """Unreadable files raise ConfigError."""
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.json")


def test_explicit_exclusion():
    """Explicit exclusion entries become (λ, order) pairs."""
    config = config_from_dict(_minimal(riesz={"exclusion": [{"lambda": [0, 1], "order": 0}]}))
    assert config.riesz.exclusion == ((1j, 0),)


def test_schema_is_shipped():
    """The JSON schema ships with the package."""
    schema = load_schema()
    assert schema["required"] == ["system", "boundary"]
    assert "riesz-report" in json.dumps(schema)
