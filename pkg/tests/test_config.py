from __future__ import annotations

from pathlib import Path

import pytest

from atlas.config import RunConfig, load_config
from atlas.corpus import CORPUS_ROOT
from atlas.errors import ConfigError


def _write(tmp_path, text):
    p = tmp_path / "atlas.ini"
    p.write_text(text, encoding="utf-8")
    return p


def test_defaults_need_designs():
    with pytest.raises(ConfigError):
        RunConfig().validate()


def test_file_settings_and_relative_paths(tmp_path):
    (tmp_path / "rtl").mkdir()
    p = _write(tmp_path, "[rtl_frontend]\ndesigns = rtl/a.sv, rtl/b.sv\n[threat_mapper]\ntop_k = 5\n"
                         "[propgen]\nmax_iterations = 2\n[team]\nowner = x\n")
    cfg = load_config(p)
    assert cfg.designs == (tmp_path / "rtl/a.sv", tmp_path / "rtl/b.sv")
    assert cfg.top_k == 5 and cfg.max_iterations == 2
    assert cfg.extra == {"team.owner": "x"}


def test_any_section_is_accepted(tmp_path):
    cfg = load_config(_write(tmp_path, "[misc]\ntop_k = 4\n"))
    assert cfg.top_k == 4


@pytest.mark.parametrize("text", ["[propgen]\nmax_iterations = many\n", "not an ini file\n"])
def test_bad_files(tmp_path, text):
    with pytest.raises(ConfigError):
        load_config(_write(tmp_path, text))


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")


def test_overrides_win(tmp_path):
    cfg = load_config(_write(tmp_path, "[threat_mapper]\ntop_k = 5\n"))
    cfg = cfg.with_overrides(top_k=2, backend=None, unknown_key=1)
    assert cfg.top_k == 2 and cfg.backend == "deterministic_template"


@pytest.mark.parametrize("field, value", [
    ("max_iterations", 0), ("max_iterations", 4), ("top_k", 0), ("path_depth", 0), ("workers", 0),
    ("backend", "oracle"),
])
def test_validation_bounds(field, value):
    with pytest.raises(ConfigError):
        RunConfig(corpus=CORPUS_ROOT).with_overrides(**{field: value}).validate()


def test_missing_paths_are_reported():
    cfg = RunConfig(designs=(Path("a.sv"),), design_doc=Path("/nonexistent/doc.md"))
    with pytest.raises(ConfigError) as err:
        cfg.validate()
    assert "design_doc" in str(err.value)
    assert cfg.validate(check_paths=False) is cfg
