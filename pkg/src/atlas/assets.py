"""Classify RTL signals into the generic asset types by identifier patterns."""

from __future__ import annotations

from dataclasses import dataclass, field

from atlas.errors import NoDefinitions, UnknownAssetType
from atlas.knowledge.assetdefs import load_canonical_keywords
from atlas.knowledge.model import AssetDefinition, AssetType
from atlas.naming import tokenize_identifier
from atlas.rtl.fsm import FsmCandidate
from atlas.rtl.symbols import SignalDecl

# single-letter direction/polarity prefixes skipped by prefix patterns (i_, o_, n_, r_, w_)
BUS_PREFIXES = frozenset("ionrw")

# driver name tokens marking a software write path or an address decode
WRITE_TOKENS = frozenset({"we", "wr", "wdata", "write", "csr"})
ADDRESS_TOKENS = frozenset({"addr", "address"})

MATCHER = "matcher"
STRUCTURAL = "structural"
BACKEND = "backend"

_NOUN = {
    AssetType.SENSITIVE_DATA: "secret-bearing",
    AssetType.BOOT_INTEGRITY: "boot integrity",
    AssetType.ATTESTATION_MEASUREMENT: "measurement",
    AssetType.PARAMETRIC_DATA: "device parameter",
    AssetType.PRIVILEGED_SYSTEM_RESOURCES: "privileged control",
    AssetType.SHARED_RESOURCES: "shared interface",
    AssetType.RUNTIME_INTEGRITY_STATE: "registered control state",
}


@dataclass(frozen=True)
class KeywordPattern:
    raw: str
    anchor: str  # prefix, suffix or contains
    token: str

    @classmethod
    def parse(cls, raw: str) -> "KeywordPattern":
        lead, trail = raw.startswith("*"), raw.endswith("*")
        token = raw.strip("*").strip("_").lower()
        if not token:
            raise ValueError(f"pattern {raw!r} has no keyword")
        if lead and trail:
            anchor = "contains"
        elif lead:
            anchor = "suffix"
        elif trail:
            anchor = "prefix"
        else:
            anchor = "contains"
        return cls(raw, anchor, token)

    @property
    def tokens(self) -> list[str]:
        return tokenize_identifier(self.token)


def match_identifier(name: str, pattern: KeywordPattern | str) -> bool:
    """Token-equality match; a pattern token with underscores must match a run of name tokens."""
    if isinstance(pattern, str):
        pattern = KeywordPattern.parse(pattern)
    toks = tokenize_identifier(name)
    want = pattern.tokens
    k = len(want)
    if not toks or len(toks) < k:
        return False
    if pattern.anchor == "prefix":
        if toks[:k] == want:
            return True
        return toks[0] in BUS_PREFIXES and toks[1:1 + k] == want
    if pattern.anchor == "suffix":
        return toks[-k:] == want
    return any(toks[i:i + k] == want for i in range(len(toks) - k + 1))


@dataclass(frozen=True)
class DetectedAsset:
    signal: str
    asset_type: AssetType
    role: str
    rationale: str
    matched_patterns: tuple[str, ...]
    confidence: float
    provenance: str = MATCHER
    facts: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if not self.matched_patterns:
            raise ValueError(f"{self.signal}: an asset needs at least one matched pattern")
        if not 0.0 < self.confidence <= 1.0:
            raise ValueError(f"{self.signal}: confidence {self.confidence} outside (0, 1]")

    @property
    def key(self) -> tuple[str, str]:
        return (self.signal, self.asset_type.value)

    def to_dict(self) -> dict:
        return {
            "signal": self.signal,
            "asset_type": self.asset_type.value,
            "role": self.role,
            "rationale": self.rationale,
            "matched_patterns": list(self.matched_patterns),
            "confidence": self.confidence,
            "provenance": self.provenance,
            "facts": dict(self.facts),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DetectedAsset":
        return cls(d["signal"], AssetType(d["asset_type"]), d["role"], d["rationale"],
                   tuple(d["matched_patterns"]), float(d["confidence"]),
                   d.get("provenance", MATCHER), dict(d.get("facts", {})))


def _role(asset_type: AssetType, decl: SignalDecl | None) -> str:
    adj = _NOUN[asset_type]
    if asset_type is AssetType.RUNTIME_INTEGRITY_STATE:
        return adj if decl is None or decl.storage == "register" else "control state signal"
    if decl is None:
        return f"{adj} signal"
    if decl.storage == "register":
        return f"{adj} register"
    if decl.direction in ("input", "output"):
        return f"{adj} {decl.direction}"
    return f"{adj} signal"


def _facts(decl: SignalDecl | None, design_has_reset: bool, drivers=()) -> dict:
    if decl is None:
        return {"design_has_reset": design_has_reset, "drivers": sorted(drivers)}
    return {
        "direction": decl.direction,
        "storage": decl.storage,
        "width": decl.width,
        "has_reset": decl.has_reset,
        "reset_value": decl.reset_value,
        "design_has_reset": design_has_reset,
        "drivers": sorted(drivers),
    }


def _decl_text(decl: SignalDecl | None) -> str:
    if decl is None:
        return "no declaration facts"
    reset = (f"reset to {decl.reset_value}" if decl.has_reset and decl.reset_value is not None
             else "no reset value")
    return f"{decl.width}-bit {decl.direction} {decl.storage}, {reset}"


def detect_assets(symbols: list[SignalDecl], defs: list[AssetDefinition],
                  fsms: list[FsmCandidate] = (), drivers: dict | None = None) -> list[DetectedAsset]:
    """``drivers`` (signal -> driver names) is optional and only recorded as a fact."""
    drivers = drivers or {}
    if not defs:
        raise NoDefinitions("no asset definitions supplied")
    decls = {s.name: s for s in symbols if s.storage != "parameter"}
    design_has_reset = any(s.has_reset for s in decls.values())
    found: dict[tuple[str, AssetType], DetectedAsset] = {}
    for name, decl in decls.items():
        for d in defs:
            hits = tuple(p for p in d.patterns if match_identifier(name, p))
            if not hits:
                continue
            conf = min(1.0, len(hits) / len(d.patterns))
            found[(name, d.asset_type)] = DetectedAsset(
                signal=name,
                asset_type=d.asset_type,
                role=_role(d.asset_type, decl),
                rationale=f"name matches {', '.join(hits)}; {_decl_text(decl)}",
                matched_patterns=hits,
                confidence=conf,
                facts=_facts(decl, design_has_reset, drivers.get(name, ())),
            )
    ris = AssetType.RUNTIME_INTEGRITY_STATE
    for fsm in fsms:
        structural = [(fsm.state_signal, f"state register of an FSM over {', '.join(fsm.const_names)}")]
        structural += [(f, f"control flag updated alongside FSM {fsm.state_signal}")
                       for f in fsm.flag_signals]
        for name, why in structural:
            if (name, ris) in found or name not in decls:
                continue
            decl = decls[name]
            found[(name, ris)] = DetectedAsset(
                signal=name,
                asset_type=ris,
                role=_role(ris, decl),
                rationale=f"{why}; {_decl_text(decl)}",
                matched_patterns=("<fsm>",),
                confidence=1.0,
                provenance=STRUCTURAL,
                facts=_facts(decl, design_has_reset, drivers.get(name, ())),
            )
    return sorted(found.values(), key=lambda a: (a.signal, a.asset_type.value))


def add_backend_assets(assets: list[DetectedAsset], candidates: list[dict],
                       symbols: list[SignalDecl], drivers: dict | None = None
                       ) -> tuple[list[DetectedAsset], list[str]]:
    """Merge backend-proposed assets. Candidates may add assets, never remove or replace them."""
    drivers = drivers or {}
    decls = {s.name: s for s in symbols if s.storage != "parameter"}
    design_has_reset = any(s.has_reset for s in decls.values())
    have = {a.key for a in assets}
    out = list(assets)
    warnings = []
    for c in candidates:
        name = c.get("signal")
        try:
            atype = AssetType(c.get("asset_type"))
        except ValueError:
            raise UnknownAssetType(f"backend proposed unknown asset type {c.get('asset_type')!r}") from None
        if name not in decls:
            warnings.append(f"backend asset '{name}' is not declared; dropped")
            continue
        if (name, atype.value) in have:
            continue
        have.add((name, atype.value))
        out.append(DetectedAsset(
            signal=name, asset_type=atype, role=_role(atype, decls[name]),
            rationale=str(c.get("rationale") or "proposed by the generation backend"),
            matched_patterns=("<backend>",), confidence=float(c.get("confidence", 0.5)) or 0.5,
            provenance=BACKEND, facts=_facts(decls[name], design_has_reset, drivers.get(name, ())),
        ))
    return sorted(out, key=lambda a: (a.signal, a.asset_type.value)), warnings


_CANONICAL: dict | None = None


def canonical_keywords() -> dict[AssetType, frozenset[str]]:
    global _CANONICAL
    if _CANONICAL is None:
        _CANONICAL = load_canonical_keywords()
    return _CANONICAL


def asset_query_keywords(asset: DetectedAsset, fsms: list[FsmCandidate] = (),
                         canonical: dict | None = None) -> set[str]:
    """Query keywords: matched pattern tokens, the type's canonical set, reset and driver facts."""
    canonical = canonical if canonical is not None else canonical_keywords()
    out: set[str] = set()
    for raw in asset.matched_patterns:
        if raw.startswith("<"):
            continue
        out.update(KeywordPattern.parse(raw).tokens)
    out |= set(canonical.get(asset.asset_type, ()))
    facts = asset.facts
    if facts.get("reset_value") is not None:
        out.add("reset")
    if (facts.get("storage") == "register" and not facts.get("has_reset")
            and facts.get("design_has_reset")):
        # a register the reset never touches holds stale data across reset
        out |= {"reset", "reset value", "uninitialized"}
    if facts.get("reset_value") and (facts.get("width") or 1) > 1:
        # a wide non-zero constant loaded at reset is a baked-in value
        out.add("hard-coded")
        out.add("constant")
    if facts.get("storage") == "register" and facts.get("width") == 1 and facts.get("reset_value") == 1:
        # a permission bit that comes out of reset granted
        out |= {"default", "permissive default", "default permissions"}
    drv_tokens = {t for d in facts.get("drivers", ()) for t in tokenize_identifier(d)}
    if drv_tokens & WRITE_TOKENS:
        out |= {"register write", "software", "writable"}
    if drv_tokens & ADDRESS_TOKENS:
        out |= {"address decode", "address range", "memory range"}
    if any(f.state_signal == asset.signal for f in fsms) and not any(
            f.has_default_arm for f in fsms if f.state_signal == asset.signal):
        out.add("default case")
    return out
