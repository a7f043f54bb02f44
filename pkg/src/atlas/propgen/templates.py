"""Deterministic property templates, one family per class of CWE.

Templates read design facts only from the serialized prompt bundle (the design
document, AST digest and RTL summary plus the asset), never from the RTL
itself, so dropping a context part really removes what it contributed.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from atlas.errors import NoTemplate
from atlas.knowledge.index import keyword_forms
from atlas.naming import tokenize_identifier

FAMILIES_FILE = "property_families.json"

FSM_INTEGRITY = "fsm_integrity"
RESET_HYGIENE = "reset_hygiene"
LOCK_PROTECTION = "lock_protection"
PRIV_DEBUG_GATING = "priv_debug_gating"
UNCLEARED_DATA = "uncleared_data"
MEMORY_DECODE = "memory_decode"
ACCESS_DEFAULT = "access_default"
HARDCODED_SECRET = "hardcoded_secret"
GENERIC = "generic"

# identifier tokens that suggest a helper signal's role
LOAD_TOKENS = frozenset({"load", "ld", "valid", "update"})
DONE_TOKENS = frozenset({"done", "clear", "clr", "finish", "end", "release", "complete", "flush"})
GATE_TOKENS = frozenset({"unlock", "unlocked", "auth", "authorized", "machine", "secure",
                         "allow", "grant", "priv", "privileged"})
LOCK_TOKENS = frozenset({"lock", "locked", "lck"})
ADDRESS_TOKENS = frozenset({"addr", "address"})

_CLEAR_RULE = re.compile(r"clear\w*\s+when\s+`?([A-Za-z_]\w*)`?\s+(?:is\s+)?(low|high|deasserted|asserted)",
                         re.IGNORECASE)
_NO_CLEAR = re.compile(r"no clear when ([A-Za-z_]\w*) (low|high)")
_CONSTANT = re.compile(r"loads the constant (0x[0-9a-fA-F]+)")
_TICKED = re.compile(r"`([A-Za-z_]\w*)`")


@dataclass(frozen=True)
class TemplateFamily:
    name: str
    cwes: frozenset[int]
    keywords: frozenset[str]


@lru_cache(maxsize=None)
def load_families(path: str | None = None) -> tuple[TemplateFamily, ...]:
    if path is None:
        text = (resources.files("atlas") / "data" / FAMILIES_FILE).read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return tuple(TemplateFamily(d["family"], frozenset(d["cwes"]), frozenset(k.lower() for k in d["keywords"]))
                 for d in json.loads(text))


def _forms(keywords) -> set[str]:
    out: set[str] = set()
    for k in keywords:
        out.update(keyword_forms(k.lower()))
    return out


def select_family(cwe_id: int, keywords=(), families=None) -> tuple[TemplateFamily, str]:
    """The family listing ``cwe_id``, else the one sharing the most keywords with the CWE."""
    families = families if families is not None else load_families()
    for f in families:
        if cwe_id in f.cwes:
            return f, f"template family {f.name}"
    want = _forms(keywords)
    best, best_n = None, 0
    for f in families:
        n = len(want & _forms(f.keywords))
        if n > best_n:
            best, best_n = f, n
    if best is None:
        raise NoTemplate(cwe_id)
    return best, f"no family lists CWE-{cwe_id}; nearest family {best.name} by {best_n} shared keyword(s)"


# -- facts read from the bundle ------------------------------------------------


class _Facts:
    def __init__(self, payload: dict):
        ctx = payload["context"]
        self.digest = ctx["ast_digest"]
        self.summary = ctx["rtl_summary"]
        self.doc = ctx["design_doc"]
        self.asset = payload["asset"]
        self.signal = self.asset["signal"]
        self.af = self.asset.get("facts", {})
        self.width = int(self.af.get("width") or 1)
        self.focus = list(payload["focus"]["signals"])
        self.cwe_id = int(payload["cwe"]["cwe_id"])
        self.has_digest = bool(self.digest.get("module"))
        self.known = set(self.digest.get("signals", ())) if self.has_digest else None
        self.ports = {p[0]: (p[1], p[2]) for p in self.digest.get("ports", ())}

        clocking = self.digest.get("clocking", {}) if self.has_digest else {}
        self.clock = clocking.get("clock") or "clk"
        self.reset = clocking.get("reset") or "rst_n"
        active = clocking.get("reset_active")
        low = active == "low" if active else self.reset.endswith(("_n", "_ni", "n"))
        self.reset_on = f"!{self.reset}" if low else self.reset
        self.reset_off = self.reset if low else f"!{self.reset}"

    def ok(self, name: str) -> bool:
        return self.known is None or name in self.known

    def highlights(self) -> list[tuple[str, str]]:
        return [tuple(h) for h in self.summary.get("highlighted", ())]

    def doc_text(self) -> str:
        return "\n".join(s["body"] for s in self.doc.get("sections", ()))

    def pool(self) -> list[str]:
        """Helper candidates: focus, then doc mentions, summary highlights and structural neighbours."""
        tiers = [sorted(self.focus)]
        tiers.append(_TICKED.findall(self.doc_text()) + [r["name"] for r in self.doc.get("register_map", ())])
        tiers.append(sorted(s for s, _ in self.highlights()))
        tiers.append(sorted(set(self.digest.get("drivers", {}).get(self.signal, ()))
                            | set(self.digest.get("fanout", {}).get(self.signal, ()))))
        out: list[str] = []
        for tier in tiers:
            for s in tier:
                if s != self.signal and s not in out and self.ok(s) and s != self.clock and s != self.reset:
                    out.append(s)
        return out

    def with_tokens(self, tokens: frozenset[str]) -> list[str]:
        return [s for s in self.pool() if tokens & set(tokenize_identifier(s))]

    def is_register(self) -> bool:
        return self.af.get("storage") == "register"


def _hex(width: int, value: int) -> str:
    return f"{width}'h{value:X}"


def _zero_check(f: _Facts) -> str:
    return f"!{f.signal}" if f.width == 1 else f"({f.signal} == {_hex(f.width, 0)})"


def _cand(f: _Facts, variant: str, family: str, antecedent: str, consequent: str, why: str,
          disable: bool = True, covers=None) -> dict:
    return {"name": f"cwe{f.cwe_id}_{f.signal}_{variant}", "family": family, "clock": f.clock,
            "disable_expr": f.reset_on if disable else "", "antecedent": antecedent,
            "implication": "|->", "consequent": consequent,
            "covers": list(covers if covers is not None else [antecedent]), "rationale": why}


def _clear_guard(f: _Facts) -> str | None:
    for sig, why in f.highlights():
        if sig == f.signal:
            m = _NO_CLEAR.search(why)
            if m and f.ok(m.group(1)):
                return f"!{m.group(1)}" if m.group(2) == "low" else m.group(1)
    for m in _CLEAR_RULE.finditer(f.doc_text()):
        name, level = m.group(1), m.group(2).lower()
        if name != f.signal and f.ok(name):
            return f"!{name}" if level in ("low", "deasserted") else name
    return None


def _fsm_integrity(f: _Facts) -> list[dict]:
    out = []
    fsm = next((x for x in f.digest.get("fsms", ()) if x.get("state_signal") == f.signal), None)
    if fsm and fsm.get("encodings"):
        enc = dict((n, v) for n, v in fsm["encodings"])
        legal = " || ".join(f"{f.signal} == {f.width}'d{v}" for _, v in fsm["encodings"])
        home = enc.get(fsm.get("reset_state"), min(enc.values()))
        out.append(_cand(f, "legal_state", FSM_INTEGRITY, f"!({legal})", f"##1 ({f.signal} == {f.width}'d{home})",
                         "an undeclared state encoding must return to the reset state on the next cycle"))
    guard = _clear_guard(f)
    if guard and f.width == 1:
        ant = f"{guard} && {f.signal}"
        out.append(_cand(f, "flag_clear", FSM_INTEGRITY, ant, f"##1 !{f.signal}",
                         f"{f.signal} must clear when {guard} holds instead of persisting"))
    return out


def _reset_hygiene(f: _Facts) -> list[dict]:
    if not f.is_register():
        return []
    value = f.af.get("reset_value") if f.af.get("has_reset") else 0
    return [_cand(f, "reset_value", RESET_HYGIENE, f.reset_on, f"##1 ({f.signal} == {_hex(f.width, value or 0)})",
                  "the register must hold its defined reset value one cycle after reset asserts",
                  disable=False)]


def _access_default(f: _Facts) -> list[dict]:
    return [_cand(f, "reset_denied", ACCESS_DEFAULT, f.reset_on, f"##1 {_zero_check(f)}",
                  "the permission must come out of reset in its restrictive state", disable=False)]


def _hardcoded_secret(f: _Facts) -> list[dict]:
    key = f.af.get("reset_value") if f.width > 1 else None
    if not key:
        for sig, why in f.highlights():
            m = _CONSTANT.search(why) if sig == f.signal else None
            if m:
                key = int(m.group(1), 16)
    if not key:
        return []
    return [_cand(f, f"not_constant_{ev}", HARDCODED_SECRET, ev, f"##1 ({f.signal} != {_hex(f.width, key)})",
                  f"loading via {ev} must not leave the baked-in constant in {f.signal}")
            for ev in f.with_tokens(LOAD_TOKENS)]


def _uncleared_data(f: _Facts) -> list[dict]:
    return [_cand(f, f"cleared_on_{ev}", UNCLEARED_DATA, ev, f"##1 {_zero_check(f)}",
                  f"{f.signal} must be cleared after {ev} so the data is not left for the next user")
            for ev in f.with_tokens(DONE_TOKENS)]


def _priv_gating(f: _Facts) -> list[dict]:
    out = []
    active = f.signal if f.width == 1 else f"({f.signal} != {_hex(f.width, 0)})"
    downstream = set(f.digest.get("fanout", {}).get(f.signal, ()))
    # a gate must act before the asset, so signals the asset drives are not gates
    for gate in [g for g in f.with_tokens(GATE_TOKENS) if g not in downstream]:
        if f.is_register():
            out.append(_cand(f, f"gated_by_{gate}", PRIV_DEBUG_GATING, f"!$stable({f.signal})", f"$past({gate})",
                             f"{f.signal} may only change when {gate} was set"))
        else:
            out.append(_cand(f, f"gated_by_{gate}", PRIV_DEBUG_GATING, active, gate,
                             f"{f.signal} may only be active while {gate} is set"))
    return out


def _lock_protection(f: _Facts) -> list[dict]:
    found = f.with_tokens(LOCK_TOKENS)
    # internal lock registers before lock ports; pool order otherwise
    locks = sorted(found, key=lambda s: (s in f.ports, found.index(s)))
    return [_cand(f, f"locked_by_{lk}", LOCK_PROTECTION, lk, f"##1 $stable({f.signal})",
                  f"{f.signal} must not change while {lk} is set") for lk in locks]


def _memory_decode(f: _Facts) -> list[dict]:
    drivers = f.digest.get("drivers", {})
    addr = {d for d in drivers.get(f.signal, ()) if ADDRESS_TOKENS & set(tokenize_identifier(d))}
    if not addr:
        return []
    sibs = sorted(s for s, ds in drivers.items()
                  if s != f.signal and addr & set(ds) and f.ports.get(s, ("", 1))[1] == 1)
    active = f.signal if f.width == 1 else f"({f.signal} != {_hex(f.width, 0)})"
    return [_cand(f, f"exclusive_{s}", MEMORY_DECODE, active, f"!{s}",
                  f"{f.signal} and {s} decode the same address and must never be selected together")
            for s in sibs]


def _generic(f: _Facts) -> list[dict]:
    return [_cand(f, "known", GENERIC, f.reset_off, f"!$isunknown({f.signal})",
                  "degenerate fallback: the asset is never unknown out of reset", disable=False)]


_BUILDERS = {
    FSM_INTEGRITY: _fsm_integrity,
    RESET_HYGIENE: _reset_hygiene,
    LOCK_PROTECTION: _lock_protection,
    PRIV_DEBUG_GATING: _priv_gating,
    UNCLEARED_DATA: _uncleared_data,
    MEMORY_DECODE: _memory_decode,
    ACCESS_DEFAULT: _access_default,
    HARDCODED_SECRET: _hardcoded_secret,
}


def family_candidates(payload: dict) -> list[dict]:
    """Every candidate the selected family offers for this bundle, best first, generic last."""
    cwe = payload["cwe"]
    family, why = select_family(int(cwe["cwe_id"]), cwe.get("keywords", ()))
    facts = _Facts(payload)
    cands = _BUILDERS[family.name](facts)
    for c in cands:
        c["rationale"] = f"{why}: {c['rationale']}"
    fallback = _generic(facts)[0]
    fallback["rationale"] = f"{why}: no {family.name} instance found; {fallback['rationale']}"
    return cands + [fallback]


def template_candidates(payload: dict) -> dict:
    """Deterministic backend handler: the candidate for this bundle's iteration."""
    cands = family_candidates(payload)
    k = min(int(payload.get("iteration", 1)), len(cands)) - 1
    return {"candidates": [cands[k]]}
