"""Data types shared by focus pruning, generation, validation and refinement."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from atlas.assets import DetectedAsset
from atlas.context import SocContext
from atlas.errors import SvaSyntaxError
from atlas.knowledge.model import ThreatModelRecord
from atlas.knowledge.tmdb import record_from_dict
from atlas.minicheck.sva import SvaProperty, expr_signals, parse_sva_seq, parse_sva_subset, render_property

MAX_ITERATIONS = 3

SUMMARY_ASSET = "summary_asset"
DD_ATTACK_SURFACE = "dd_attack_surface"
AST_PATH = "ast_path"
FOCUS_TAGS = (SUMMARY_ASSET, DD_ATTACK_SURFACE, AST_PATH)

DRAFT = "draft"
VALIDATED = "validated"


@dataclass(frozen=True)
class FocusSet:
    signals: frozenset[str]
    justification: dict = field(default_factory=dict, hash=False)  # signal -> tuple of tags
    fallback: bool = False  # True when the doc-derived set was dropped from the intersection

    def __post_init__(self):
        for s in self.signals:
            tags = self.justification.get(s, ())
            if not tags:
                raise ValueError(f"focus signal {s} has no source tag")
            bad = set(tags) - set(FOCUS_TAGS)
            if bad:
                raise ValueError(f"unknown focus tag(s) {sorted(bad)}")

    def to_dict(self) -> dict:
        return {"signals": sorted(self.signals),
                "justification": {s: list(self.justification[s]) for s in sorted(self.signals)},
                "fallback": self.fallback}

    @classmethod
    def from_dict(cls, d: dict) -> "FocusSet":
        return cls(frozenset(d["signals"]),
                   {s: tuple(t) for s, t in d["justification"].items()}, bool(d.get("fallback")))


@dataclass(frozen=True)
class PromptBundle:
    context: SocContext
    cwe: ThreatModelRecord
    asset: DetectedAsset
    focus: FocusSet
    iteration: int = 1
    prior_feedback: str | None = None

    def __post_init__(self):
        if not 1 <= self.iteration <= MAX_ITERATIONS:
            raise ValueError(f"iteration {self.iteration} outside 1..{MAX_ITERATIONS}")

    def next(self, feedback: str) -> "PromptBundle":
        return replace(self, iteration=self.iteration + 1, prior_feedback=feedback)

    def to_dict(self) -> dict:
        return {"context": self.context.to_dict(), "cwe": self.cwe.to_dict(),
                "asset": self.asset.to_dict(), "focus": self.focus.to_dict(),
                "iteration": self.iteration, "prior_feedback": self.prior_feedback}

    @classmethod
    def from_dict(cls, d: dict) -> "PromptBundle":
        return cls(SocContext.from_dict(d["context"]), record_from_dict(d["cwe"]),
                   DetectedAsset.from_dict(d["asset"]), FocusSet.from_dict(d["focus"]),
                   int(d["iteration"]), d.get("prior_feedback"))


def _signals_of(texts) -> frozenset[str]:
    out: set[str] = set()
    for t in texts:
        if not t:
            continue
        try:
            seq = parse_sva_seq(t)
        except SvaSyntaxError:
            continue
        for s in seq.steps:
            out |= expr_signals(s.expr)
    return frozenset(out)


@dataclass(frozen=True)
class SecurityProperty:
    name: str
    cwe_id: int
    clock: str
    disable_expr: str
    antecedent: str
    consequent: str
    covers: tuple[str, ...] = ()
    implication: str = "|->"
    status: str = DRAFT
    family: str = ""
    asset: str = ""
    rationale: str = ""
    clock_edge: str = "posedge"

    @property
    def bound_signals(self) -> frozenset[str]:
        names = _signals_of([self.antecedent, self.consequent, self.disable_expr, *self.covers])
        return names | ({self.clock} if self.clock else set())

    def property_text(self) -> str:
        """The property body as written from the parts, without normalization."""
        parts = []
        if self.clock:
            parts.append(f"@({self.clock_edge} {self.clock})")
        if self.disable_expr:
            parts.append(f"disable iff ({self.disable_expr})")
        if self.antecedent:
            parts.append(f"{self.antecedent} {self.implication} {self.consequent}")
        else:
            parts.append(self.consequent)
        return " ".join(parts)

    def parsed(self) -> SvaProperty:
        return parse_sva_subset(self.property_text())

    @property
    def sva_text(self) -> str:
        """Canonical rendering; falls back to the raw text when the parts do not parse."""
        try:
            return render_property(self.parsed())
        except SvaSyntaxError:
            return self.property_text()

    def to_dict(self) -> dict:
        return {"name": self.name, "cwe_id": self.cwe_id, "clock": self.clock,
                "clock_edge": self.clock_edge, "disable_expr": self.disable_expr,
                "antecedent": self.antecedent, "implication": self.implication,
                "consequent": self.consequent, "covers": list(self.covers),
                "bound_signals": sorted(self.bound_signals), "sva_text": self.sva_text,
                "status": self.status, "family": self.family, "asset": self.asset,
                "rationale": self.rationale}

    @classmethod
    def from_dict(cls, d: dict) -> "SecurityProperty":
        return cls(d["name"], int(d["cwe_id"]), d.get("clock") or "", d.get("disable_expr") or "",
                   d.get("antecedent") or "", d["consequent"], tuple(d.get("covers", ())),
                   d.get("implication", "|->"), d.get("status", DRAFT), d.get("family", ""),
                   d.get("asset", ""), d.get("rationale", ""), d.get("clock_edge", "posedge"))


@dataclass(frozen=True)
class BindingError:
    kind: str  # unbound, width, missing_clock, syntax
    name: str = ""
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "detail": self.detail}


ACCEPT = "accept"
RETRY = "retry"
FLAG_MANUAL = "flag_manual"


@dataclass(frozen=True)
class RefineDecision:
    action: str
    feedback: str = ""
    bundle: PromptBundle | None = None
    iteration: int = 1  # iteration the decision was taken at
