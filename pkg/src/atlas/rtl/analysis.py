"""Driver relations and the structural digest of a module."""

from __future__ import annotations

from dataclasses import dataclass, field

from atlas.errors import UnknownSignal
from atlas.rtl.ast import Ast, Node, Span, identifiers, strip_parens
from atlas.rtl.evaluate import parse_literal
from atlas.rtl.fsm import FsmCandidate, extract_fsms
from atlas.rtl.printer import print_expr
from atlas.rtl.structure import AssignSite, assignment_sites, conjunction, module_clocking
from atlas.rtl.symbols import SignalDecl, symbol_table


def _module(ast: Ast | Node, module: str | None = None) -> Node:
    return ast if isinstance(ast, Node) else ast.module(module)


def _lhs_select_names(lhs: Node) -> list[str]:
    out: list[str] = []
    node = lhs
    while node.kind == "Expr" and node.get("op") in ("index", "range", "paren"):
        for idx in node.children[1:]:
            out.extend(identifiers(idx))
        node = node.children[0]
    return out


def _site_drivers(site: AssignSite, signals: set[str]) -> set[tuple[str, Span]]:
    out: set[tuple[str, Span]] = set()
    for name in identifiers(site.rhs) + _lhs_select_names(site.lhs):
        if name in signals:
            out.add((name, site.node.span))
    for g in site.guards:
        if g.is_reset:
            continue
        for name in identifiers(g.expr):
            if name in signals:
                out.add((name, g.expr.span))
    return out


def drivers_of(ast: Ast | Node, signal: str, module: str | None = None) -> set[tuple[str, Span]]:
    """Single-hop drivers of ``signal``: right-hand-side signals plus non-reset guard signals."""
    mod = _module(ast, module)
    symbols = symbol_table(mod)
    names = {s.name for s in symbols}
    if signal not in names:
        raise UnknownSignal(signal)
    signals = {s.name for s in symbols if s.storage != "parameter"}
    out: set[tuple[str, Span]] = set()
    for site in assignment_sites(mod):
        if site.target == signal:
            out |= _site_drivers(site, signals)
    return out


def driver_map(mod: Node, symbols: list[SignalDecl] | None = None) -> dict[str, set[str]]:
    symbols = symbols if symbols is not None else symbol_table(mod)
    signals = {s.name for s in symbols if s.storage != "parameter"}
    out: dict[str, set[str]] = {s: set() for s in signals}
    for site in assignment_sites(mod):
        if site.target in out:
            out[site.target] |= {n for n, _ in _site_drivers(site, signals)}
    return out


def fanout_map(drivers: dict[str, set[str]]) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {s: set() for s in drivers}
    for target, srcs in drivers.items():
        for s in srcs:
            out.setdefault(s, set()).add(target)
    return out


def unresolved_identifiers(ast: Ast | Node, module: str | None = None) -> list[tuple[str, Span]]:
    """Identifier uses in the module body that name no declaration."""
    mod = _module(ast, module)
    declared = {s.name for s in symbol_table(mod)}
    out = []
    for item in mod.children:
        if item.kind in ("AlwaysBlock", "Assign", "InstanceDecl"):
            for n in item.walk():
                if n.kind == "Expr" and n.get("op") == "id" and n["name"] not in declared:
                    out.append((n["name"], n.span))
    return out


@dataclass(frozen=True)
class UpdateRule:
    """How a register is updated under one condition."""

    guard: str
    rhs: str
    sticky: bool  # the new value ORs in the old one, so it can only be set
    clears: bool  # assigns constant zero


def update_rules(ast: Ast | Node, signal: str, module: str | None = None) -> list[UpdateRule]:
    mod = _module(ast, module)
    out = []
    for site in assignment_sites(mod):
        if site.target != signal or site.in_reset:
            continue
        rhs = strip_parens(site.rhs)
        sticky = (rhs.get("op") == "binary" and rhs["sym"] in ("|", "||")
                  and any(strip_parens(c).get("op") == "id" and strip_parens(c)["name"] == signal
                          for c in rhs.children))
        clears = rhs.get("op") == "num" and parse_literal(rhs["text"]).to_int() == 0
        guards = tuple(g for g in site.guards if not g.is_reset and g.kind == "if")
        out.append(UpdateRule(conjunction(guards), print_expr(site.rhs), sticky, clears))
    return out


@dataclass(frozen=True)
class AstDigest:
    module: str
    ports: tuple[tuple[str, str, int], ...]
    counts: dict = field(default_factory=dict)
    clocking: dict = field(default_factory=dict)
    fsms: tuple[dict, ...] = ()
    drivers: dict = field(default_factory=dict)
    fanout: dict = field(default_factory=dict)
    signals: tuple[str, ...] = ()  # every declared non-parameter name

    def to_dict(self) -> dict:
        return {
            "module": self.module,
            "ports": [list(p) for p in self.ports],
            "counts": dict(self.counts),
            "clocking": dict(self.clocking),
            "fsms": [dict(f) for f in self.fsms],
            "drivers": {k: list(v) for k, v in self.drivers.items()},
            "fanout": {k: list(v) for k, v in self.fanout.items()},
            "signals": list(self.signals),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AstDigest":
        return cls(
            module=d["module"],
            ports=tuple(tuple(p) for p in d["ports"]),
            counts=dict(d["counts"]),
            clocking=dict(d["clocking"]),
            fsms=tuple(dict(f) for f in d["fsms"]),
            drivers={k: tuple(v) for k, v in d["drivers"].items()},
            fanout={k: tuple(v) for k, v in d["fanout"].items()},
            signals=tuple(d.get("signals", ())),
        )

    @classmethod
    def empty(cls, module: str = "") -> "AstDigest":
        return cls(module=module, ports=())


def _fsm_summary(f: FsmCandidate) -> dict:
    return {"state_signal": f.state_signal, "states": list(f.const_names),
            "encodings": [list(c) for c in f.state_consts], "reset_state": f.reset_state,
            "flags": list(f.flag_signals),
            "transitions": len(f.transitions), "has_default_arm": f.has_default_arm}


def ast_digest(ast: Ast | Node, watch=frozenset(), module: str | None = None) -> AstDigest:
    mod = _module(ast, module)
    symbols = symbol_table(mod)
    names = {s.name for s in symbols}
    bad = sorted(set(watch) - names)
    if bad:
        raise UnknownSignal(bad[0])
    drivers = driver_map(mod, symbols)
    fanout = fanout_map(drivers)
    sigs = [s for s in symbols if s.storage != "parameter"]
    clk = module_clocking(mod)
    counts = {
        "regs": sum(s.storage == "register" for s in sigs),
        "nets": sum(s.storage == "net" for s in sigs),
        "always_blocks": sum(1 for c in mod.children if c.kind == "AlwaysBlock"),
        "case_stmts": sum(1 for n in mod.walk() if n.kind == "CaseStmt"),
    }
    clocking = {
        "clock": clk.clock,
        "reset": clk.reset,
        "reset_active": None if clk.reset_active is None else ("low" if clk.reset_active == 0 else "high"),
        "reset_style": None if clk.reset is None else ("async" if clk.reset_async else "sync"),
    }
    w = sorted(watch)
    return AstDigest(
        module=mod["name"],
        ports=tuple((s.name, s.direction, s.width) for s in symbols if s.is_port),
        counts=counts,
        clocking=clocking,
        fsms=tuple(_fsm_summary(f) for f in extract_fsms(mod)),
        drivers={s: tuple(sorted(drivers.get(s, ()))) for s in w},
        fanout={s: tuple(sorted(fanout.get(s, ()))) for s in w},
        signals=tuple(sorted(s.name for s in sigs)),
    )
