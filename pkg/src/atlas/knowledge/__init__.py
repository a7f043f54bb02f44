"""Threat-model template, the threat model database and its keyword index."""

from atlas.knowledge.assetdefs import (
    CANONICAL_KEYWORDS,
    DEFAULT_ASSET_DEFINITIONS,
    DEFAULT_TMDB,
    load_asset_definitions,
    load_canonical_keywords,
)
from atlas.knowledge.drafting import CweMeta, draft_threat_model
from atlas.knowledge.index import build_keyword_index, keyword_forms
from atlas.knowledge.model import (
    ADVERSARY_MODELS,
    AdversaryKind,
    AdversaryModel,
    AssetDefinition,
    AssetType,
    KeywordIndex,
    ThreatModelRecord,
    Tmdb,
    Violation,
)
from atlas.knowledge.tmdb import audit_tmdb, load_tmdb, save_tmdb, tmdb_from_dict, tmdb_to_dict, validate_record

__all__ = [
    "ADVERSARY_MODELS", "AdversaryKind", "AdversaryModel", "AssetDefinition", "AssetType",
    "CANONICAL_KEYWORDS", "CweMeta", "DEFAULT_ASSET_DEFINITIONS", "DEFAULT_TMDB", "KeywordIndex",
    "ThreatModelRecord", "Tmdb", "Violation", "build_keyword_index", "draft_threat_model",
    "audit_tmdb", "keyword_forms", "load_asset_definitions", "load_canonical_keywords", "load_tmdb",
    "save_tmdb", "tmdb_from_dict", "tmdb_to_dict", "validate_record",
]
