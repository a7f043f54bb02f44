"""Run configuration: an INI-style file with one section per stage, overridable from flags."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from atlas.backend import BACKEND_MODES, DETERMINISTIC
from atlas.errors import ConfigError
from atlas.knowledge.assetdefs import DEFAULT_ASSET_DEFINITIONS, DEFAULT_TMDB
from atlas.propgen.model import MAX_ITERATIONS

# config key -> section it is documented under; any section is accepted on read
KEY_SECTIONS = {
    "tmdb": "knowledge",
    "asset_definitions": "knowledge",
    "designs": "rtl_frontend",
    "design_doc": "context_builder",
    "traces_dir": "minicheck",
    "corpus": "cli",
    "backend": "propgen",
    "max_iterations": "propgen",
    "path_depth": "propgen",
    "top_k": "threat_mapper",
    "output_dir": "cli",
    "workers": "cli",
}


@dataclass(frozen=True)
class RunConfig:
    tmdb: Path = DEFAULT_TMDB
    asset_definitions: Path = DEFAULT_ASSET_DEFINITIONS
    designs: tuple[Path, ...] = ()
    design_doc: Path | None = None
    traces_dir: Path | None = None
    corpus: Path | None = None  # a fixture corpus instead of loose design files
    backend: str = DETERMINISTIC
    top_k: int = 3
    max_iterations: int = MAX_ITERATIONS
    path_depth: int = 1
    output_dir: Path | None = None
    workers: int = 4
    extra: dict = field(default_factory=dict, compare=False, hash=False)

    def validate(self, check_paths: bool = True) -> "RunConfig":
        if not self.designs and self.corpus is None:
            raise ConfigError("no design files configured")
        if not 1 <= self.max_iterations <= MAX_ITERATIONS:
            raise ConfigError(f"max_iterations must be within 1..{MAX_ITERATIONS}")
        if self.top_k < 1:
            raise ConfigError("top_k must be at least 1")
        if self.path_depth < 1:
            raise ConfigError("path_depth must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.backend not in BACKEND_MODES:
            raise ConfigError(f"unknown backend mode '{self.backend}'")
        if check_paths:
            for label, p in (("tmdb", self.tmdb), ("asset_definitions", self.asset_definitions),
                             ("design_doc", self.design_doc), ("traces_dir", self.traces_dir),
                             ("corpus", self.corpus)):
                if p is not None and not Path(p).exists():
                    raise ConfigError(f"{label} path does not exist: {p}")
        return self

    def with_overrides(self, **overrides) -> "RunConfig":
        known = {f.name for f in fields(self)}
        clean = {k: v for k, v in overrides.items() if v is not None and k in known}
        return replace(self, **_coerce(clean, Path.cwd()))


def _coerce(raw: dict, base: Path) -> dict:
    out = {}
    for key, value in raw.items():
        if key in ("tmdb", "asset_definitions", "design_doc", "traces_dir", "corpus", "output_dir"):
            out[key] = _path(value, base)
        elif key == "designs":
            items = value if isinstance(value, (list, tuple)) else [v for v in str(value).replace("\n", ",").split(",")]
            out[key] = tuple(_path(v, base) for v in items if str(v).strip())
        elif key in ("top_k", "max_iterations", "path_depth", "workers"):
            try:
                out[key] = int(value)
            except (TypeError, ValueError):
                raise ConfigError(f"{key} must be an integer, got {value!r}") from None
        else:
            out[key] = str(value).strip()
    return out


def _path(value, base: Path) -> Path:
    p = Path(str(value).strip()).expanduser()
    return p if p.is_absolute() else base / p


def load_config(path: Path | str) -> RunConfig:
    """Read ``key = value`` settings; relative paths resolve against the file's directory."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    raw: dict = {}
    extra: dict = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            if key in KEY_SECTIONS:
                raw[key] = value.strip().strip('"')
            else:
                extra[f"{section}.{key}"] = value
    return replace(RunConfig(), **_coerce(raw, path.parent), extra=extra)
