"""Security property generation: focus pruning, templates, covers and refinement."""

from atlas.propgen.focus import doc_mentions, prune_focus
from atlas.propgen.generate import (
    add_nonvacuity_covers, generate_properties, mark_validated, refine, validate_binding,
)
from atlas.propgen.model import (
    ACCEPT, AST_PATH, DD_ATTACK_SURFACE, DRAFT, FLAG_MANUAL, MAX_ITERATIONS, RETRY, SUMMARY_ASSET,
    VALIDATED, BindingError, FocusSet, PromptBundle, RefineDecision, SecurityProperty,
)
from atlas.propgen.templates import family_candidates, load_families, select_family, template_candidates

__all__ = [
    "ACCEPT", "AST_PATH", "DD_ATTACK_SURFACE", "DRAFT", "FLAG_MANUAL", "MAX_ITERATIONS", "RETRY",
    "SUMMARY_ASSET", "VALIDATED", "BindingError", "FocusSet", "PromptBundle", "RefineDecision",
    "SecurityProperty", "add_nonvacuity_covers", "doc_mentions", "family_candidates",
    "generate_properties", "load_families", "mark_validated", "prune_focus", "refine",
    "select_family", "template_candidates", "validate_binding",
]
