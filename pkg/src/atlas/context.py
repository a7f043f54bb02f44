"""Design document ingestion, RTL summaries and the assembled generation context."""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from atlas.assets import DetectedAsset
from atlas.errors import BackendError, MissingContext
from atlas.rtl.analysis import AstDigest, driver_map, update_rules
from atlas.rtl.ast import Ast, Node
from atlas.rtl.fsm import extract_fsms
from atlas.rtl.printer import print_ast
from atlas.rtl.symbols import symbol_table

log = logging.getLogger(__name__)

DETERMINISTIC = "deterministic"
BACKEND = "backend"
EMPTY = "empty"

_HEADING = re.compile(r"^(#{1,6})\s*(.*?)\s*#*\s*$")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def normalize_heading(h: str) -> str:
    return " ".join(h.lower().split())


@dataclass(frozen=True)
class RegisterRow:
    name: str
    offset: str
    access: str = ""
    description: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "offset": self.offset, "access": self.access,
                "description": self.description}


@dataclass(frozen=True)
class DesignDoc:
    sections: tuple[tuple[str, str], ...]
    register_map: tuple[RegisterRow, ...] = ()
    source: str = ""

    def section(self, heading: str) -> str | None:
        want = normalize_heading(heading)
        for h, body in self.sections:
            if normalize_heading(h) == want:
                return body
        return None

    @property
    def is_empty(self) -> bool:
        return not self.register_map and all(not b.strip() for _, b in self.sections)

    def to_dict(self) -> dict:
        return {"provenance": f"design_doc:{self.source}" if self.source else "design_doc",
                "source": self.source,
                "sections": [{"heading": h, "body": b} for h, b in self.sections],
                "register_map": [r.to_dict() for r in self.register_map]}

    @classmethod
    def from_dict(cls, d: dict) -> "DesignDoc":
        return cls(tuple((s["heading"], s["body"]) for s in d["sections"]),
                   tuple(RegisterRow(**r) for r in d["register_map"]), d.get("source", ""))

    @classmethod
    def empty(cls) -> "DesignDoc":
        return cls((("body", ""),))


def _split_row(line: str) -> list[str]:
    cells = line.strip().strip("|").split("|")
    return [c.strip() for c in cells]


def _is_rule(cells: list[str]) -> bool:
    return all(re.fullmatch(r":?-{2,}:?", c) for c in cells if c) and any(cells)


def _offset_key(text: str):
    try:
        return int(text.replace("_", ""), 0)
    except ValueError:
        return text.lower()


def _parse_register_table(lines: list[str]) -> tuple[RegisterRow, ...]:
    i = 0
    while i < len(lines):
        if lines[i].lstrip().startswith("|"):
            block = []
            while i < len(lines) and lines[i].lstrip().startswith("|"):
                block.append(_split_row(lines[i]))
                i += 1
            header = [h.lower() for h in block[0]]
            if not any("offset" in h for h in header):
                continue
            col = {}
            for j, h in enumerate(header):
                if "offset" in h:
                    col.setdefault("offset", j)
                elif h in ("name", "register", "reg", "field", "signal"):
                    col.setdefault("name", j)
                elif "access" in h or h in ("sw", "type"):
                    col.setdefault("access", j)
                elif "desc" in h:
                    col.setdefault("description", j)
            col.setdefault("name", 0)
            rows, seen = [], set()
            for cells in block[1:]:
                if _is_rule(cells):
                    continue
                get = lambda k: cells[col[k]] if k in col and col[k] < len(cells) else ""  # noqa: E731
                row = RegisterRow(get("name").strip("`"), get("offset"), get("access"), get("description"))
                key = _offset_key(row.offset)
                if not row.name or key in seen:
                    continue
                seen.add(key)
                rows.append(row)
            return tuple(rows)
        i += 1
    return ()


def ingest_design_doc(text: str, source: str = "") -> DesignDoc:
    """Split on ``#`` headings; the first pipe table with an offset column is the register map."""
    lines = text.splitlines()
    sections: list[tuple[str, list[str]]] = []
    current = ("body", [])
    for line in lines:
        m = _HEADING.match(line)
        if m:
            if current[0] != "body" or any(x.strip() for x in current[1]) or sections:
                sections.append(current)
            current = (m.group(2) or "untitled", [])
        else:
            current[1].append(line)
    sections.append(current)
    seen: dict[str, int] = {}
    out = []
    for heading, body in sections:
        key = normalize_heading(heading)
        if key in seen:
            seen[key] += 1
            heading = f"{heading} ({seen[key]})"
        else:
            seen[key] = 1
        out.append((heading, "\n".join(body).strip()))
    return DesignDoc(tuple(out), _parse_register_table(lines), source)


@dataclass(frozen=True)
class RtlSummary:
    text: str
    highlighted: tuple[tuple[str, str], ...] = ()
    provenance: str = DETERMINISTIC
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def signals(self) -> set[str]:
        return {s for s, _ in self.highlighted}

    def to_dict(self) -> dict:
        return {"provenance": self.provenance, "text": self.text,
                "highlighted": [list(h) for h in self.highlighted], "warnings": list(self.warnings)}

    @classmethod
    def from_dict(cls, d: dict) -> "RtlSummary":
        return cls(d["text"], tuple((s, w) for s, w in d["highlighted"]), d["provenance"],
                   tuple(d.get("warnings", ())))

    @classmethod
    def empty(cls) -> "RtlSummary":
        return cls("", (), EMPTY)


def _guard_words(guard: str) -> str:
    g = guard.strip()
    if re.fullmatch(r"!\s*[A-Za-z_]\w*", g):
        return f"{g.lstrip('!').strip()} low"
    if re.fullmatch(r"[A-Za-z_]\w*", g):
        return f"{g} high"
    return f"{g} holds"


def _risk(asset: DetectedAsset, mod: Node, fsms) -> str | None:
    """The most specific security observation about an asset, if any."""
    rules = update_rules(mod, asset.signal) if asset.facts.get("storage") == "register" else []
    sticky = [r for r in rules if r.sticky]
    if sticky and not any(r.clears for r in rules):
        r = sticky[0]
        return (f"set-only update {r.rhs} under {r.guard}; "
                f"no clear when {_guard_words(r.guard)}")
    facts = asset.facts
    if facts.get("storage") == "register" and not facts.get("has_reset") and facts.get("design_has_reset"):
        return "register is not reset and may hold stale or uninitialized data"
    for f in fsms:
        if f.state_signal == asset.signal and not f.has_default_arm:
            return "FSM case has no default arm; undeclared encodings are not recovered"
    if facts.get("reset_value") and (facts.get("width") or 1) > 1:
        return f"loads the constant {facts['reset_value']:#x} at reset"
    return None


def _deterministic_summary(mod: Node, assets: list[DetectedAsset]) -> RtlSummary:
    symbols = symbol_table(mod)
    sigs = [s for s in symbols if s.storage != "parameter"]
    names = {s.name for s in sigs}
    fsms = extract_fsms(mod)
    drivers = driver_map(mod, symbols)
    regs = sum(s.storage == "register" for s in sigs)
    sentences = [f"Module {mod['name']} declares {len(sigs)} signals ({regs} registers) "
                 f"and {len(fsms)} FSM(s)."]
    highlighted: dict[str, str] = {}
    for a in assets:
        facts = a.facts
        drv = sorted(drivers.get(a.signal, ()))
        drv_text = ", ".join(drv) if drv else "no internal drivers"
        if facts.get("has_reset"):
            reset_text = f"reset to {facts.get('reset_value')}"
        elif facts.get("storage") == "register":
            reset_text = "not reset"
        else:
            reset_text = "combinational or external"
        sentences.append(f"{a.signal} is a {a.asset_type.value} asset ({a.role}), "
                         f"driven by {drv_text}, {reset_text}.")
        risk = _risk(a, mod, fsms)
        if risk:
            sentences.append(f"{a.signal}: {risk}.")
        highlighted.setdefault(a.signal, risk or a.role)
        if risk and risk.startswith("set-only"):
            # the missing clear condition is part of the risk
            for r in update_rules(mod, a.signal):
                for g in _IDENT.findall(r.guard):
                    if g in names and g != a.signal:
                        highlighted.setdefault(g, f"guards the set-only update of {a.signal}")
    for f in fsms:
        arm = "has a default arm" if f.has_default_arm else "has no default arm"
        sentences.append(f"FSM {f.state_signal} has states {', '.join(f.const_names)} with "
                         f"{len(f.transitions)} transitions and {arm}.")
    return RtlSummary(" ".join(sentences), tuple(sorted(highlighted.items())), DETERMINISTIC)


def template_summary(payload: dict) -> dict:
    """Deterministic backend handler: answers with the locally computed draft."""
    return dict(payload["draft"])


def summarize_rtl(ast: Ast | Node, assets: list[DetectedAsset], backend=None,
                  module: str | None = None) -> RtlSummary:
    mod = ast if isinstance(ast, Node) else ast.module(module)
    draft = _deterministic_summary(mod, assets)
    if backend is None or getattr(backend, "mode", None) == "deterministic_template":
        return draft
    names = {s.name for s in symbol_table(mod)}
    payload = {"module": mod["name"], "rtl": print_ast(mod),
               "assets": [a.to_dict() for a in assets], "draft": draft.to_dict()}
    try:
        doc = backend.request("summarize_rtl", payload)
        text = doc["text"]
        raw = doc.get("highlighted", [])
        if not isinstance(text, str) or not isinstance(raw, list):
            raise BackendError("summary response has the wrong shape")
    except (BackendError, KeyError, TypeError) as exc:
        msg = f"backend summary unavailable ({exc}); using the deterministic summary"
        log.warning(msg)
        return RtlSummary(draft.text, draft.highlighted, DETERMINISTIC, (msg,))
    kept, warnings = {}, []
    for item in raw:
        sig, why = (item[0], item[1]) if isinstance(item, (list, tuple)) and len(item) == 2 else (None, None)
        if sig not in names:
            warnings.append(f"dropped highlight for unknown signal {sig!r}")
            continue
        kept.setdefault(sig, str(why))
    for w in warnings:
        log.warning(w)
    return RtlSummary(text, tuple(sorted(kept.items())), BACKEND, tuple(warnings))


@dataclass(frozen=True)
class Discrepancy:
    kind: str
    name: str
    detail: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "name": self.name, "detail": self.detail}


def discrepancies(doc: DesignDoc, digest: AstDigest) -> tuple[Discrepancy, ...]:
    if not digest.signals:
        return ()
    names = set(digest.signals)
    out = []
    for row in doc.register_map:
        if row.name not in names:
            out.append(Discrepancy("doc_register_missing_in_rtl", row.name,
                                   f"register map row at {row.offset} names no RTL signal"))
    return tuple(out)


@dataclass(frozen=True)
class SocContext:
    doc: DesignDoc
    digest: AstDigest
    summary: RtlSummary
    discrepancies: tuple[Discrepancy, ...] = ()

    def to_dict(self) -> dict:
        return {"design_doc": self.doc.to_dict(),
                "ast_digest": {"provenance": "ast", **self.digest.to_dict()},
                "rtl_summary": self.summary.to_dict(),
                "discrepancies": [d.to_dict() for d in self.discrepancies]}

    @classmethod
    def from_dict(cls, d: dict) -> "SocContext":
        digest = {k: v for k, v in d["ast_digest"].items() if k != "provenance"}
        return cls(DesignDoc.from_dict(d["design_doc"]), AstDigest.from_dict(digest),
                   RtlSummary.from_dict(d["rtl_summary"]),
                   tuple(Discrepancy(**x) for x in d["discrepancies"]))


_PARTS = ((DesignDoc, "doc"), (AstDigest, "digest"), (RtlSummary, "summary"))


def assemble_context(*parts, doc=None, digest=None, summary=None) -> SocContext:
    """Combine the three named parts; positional parts are identified by type, so order is irrelevant."""
    named = {"doc": doc, "digest": digest, "summary": summary}
    for p in parts:
        for cls, key in _PARTS:
            if isinstance(p, cls):
                if named[key] is not None:
                    raise ValueError(f"context part '{key}' given twice")
                named[key] = p
                break
        else:
            raise TypeError(f"not a context part: {type(p).__name__}")
    for key in ("doc", "digest", "summary"):
        if named[key] is None:
            raise MissingContext(key)
    return SocContext(named["doc"], named["digest"], named["summary"],
                      discrepancies(named["doc"], named["digest"]))
