"""Generic asset definitions and the per-type canonical query keywords."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from atlas.errors import ParseError, SchemaError, UnknownAssetType
from atlas.knowledge.model import AssetDefinition, AssetType


def _data_path(name: str) -> Path:
    return Path(str(resources.files("atlas") / "data" / name))


DEFAULT_ASSET_DEFINITIONS = _data_path("asset_definitions.json")
DEFAULT_TMDB = _data_path("tmdb.json")
CANONICAL_KEYWORDS = _data_path("canonical_keywords.json")


def load_asset_definitions(path: str | Path = DEFAULT_ASSET_DEFINITIONS) -> list[AssetDefinition]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, list):
        raise SchemaError(f"{path}: expected a JSON array of asset definitions")

    out: list[AssetDefinition] = []
    seen: set[AssetType] = set()
    for i, item in enumerate(doc):
        where = f"{path}[{i}]"
        if not isinstance(item, dict) or set(item) != {"asset_type", "definition", "patterns"}:
            raise SchemaError(f"{where}: expected keys asset_type, definition, patterns", record=i)
        try:
            asset_type = AssetType(item["asset_type"])
        except ValueError:
            raise UnknownAssetType(f"{where}: unknown asset type {item['asset_type']!r}",
                                   field="asset_type", record=i) from None
        if asset_type in seen:
            raise SchemaError(f"{where}: asset type {asset_type.value} defined twice",
                              field="asset_type", record=i)
        seen.add(asset_type)
        lines, patterns = item["definition"], item["patterns"]
        if not isinstance(lines, list) or not all(isinstance(x, str) for x in lines):
            raise SchemaError(f"{where}: definition must be a list of text lines",
                              field="definition", record=i)
        if (not isinstance(patterns, list) or not patterns
                or not all(isinstance(x, str) and x.strip("*_") for x in patterns)):
            raise SchemaError(f"{where}: patterns must be a non-empty list of keyword patterns",
                              field="patterns", record=i)
        out.append(AssetDefinition(asset_type, tuple(lines), tuple(patterns)))
    return out


def load_canonical_keywords(path: str | Path = CANONICAL_KEYWORDS) -> dict[AssetType, frozenset[str]]:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    out = {}
    for name, words in doc.items():
        try:
            out[AssetType(name)] = frozenset(w.lower() for w in words)
        except ValueError:
            raise UnknownAssetType(f"{path}: unknown asset type {name!r}") from None
    return out
