"""Finite state machine recognition."""

from __future__ import annotations

from dataclasses import dataclass

from atlas.rtl.ast import Ast, Node, strip_parens
from atlas.rtl.evaluate import EvalError, parse_literal
from atlas.rtl.structure import AssignSite, assignment_sites, block_clocking, conjunction
from atlas.rtl.symbols import parameter_env, register_names, symbol_table


@dataclass(frozen=True)
class FsmCandidate:
    state_signal: str
    state_consts: tuple[tuple[str, int], ...]
    transitions: tuple[tuple[str, str, str], ...]
    has_default_arm: bool
    clock: str | None
    reset: tuple[str, int] | None = None
    next_signals: tuple[str, ...] = ()
    reset_state: str | None = None
    flag_signals: tuple[str, ...] = ()  # 1-bit registers updated in the state register's block

    @property
    def const_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.state_consts)

    def value_of(self, name: str) -> int:
        return dict(self.state_consts)[name]

    def to_dict(self) -> dict:
        return {
            "state_signal": self.state_signal,
            "state_consts": [list(c) for c in self.state_consts],
            "transitions": [list(t) for t in self.transitions],
            "has_default_arm": self.has_default_arm,
            "clock": self.clock,
            "reset": list(self.reset) if self.reset else None,
            "reset_state": self.reset_state,
            "flag_signals": list(self.flag_signals),
        }


def _const_name(expr: Node, consts: set[str]) -> str | None:
    """Name of a state constant: a parameter reference or a sized literal."""
    e = strip_parens(expr)
    if e.get("op") == "id" and e["name"] in consts:
        return e["name"]
    if e.get("op") == "num" and "'" in e["text"]:
        try:
            if parse_literal(e["text"]).known:
                return e["text"]
        except EvalError:
            return None
    return None


def _const_value(name: str, env) -> int | None:
    if name in env:
        return env[name].to_int()
    return parse_literal(name).to_int()


def _next_signals(reg: str, sites: list[AssignSite]) -> set[str]:
    """``reg`` plus a next-state signal it copies, for two-process FSMs."""
    out = {reg}
    loads = [s for s in sites if s.target == reg and s.sequential and not s.in_reset]
    srcs = {strip_parens(s.rhs).get("name") for s in loads if strip_parens(s.rhs).get("op") == "id"}
    if len(loads) == 1 and len(srcs) == 1:
        out |= srcs
    return out


def extract_fsms(ast: Ast | Node, module: str | None = None) -> list[FsmCandidate]:
    mod = ast if isinstance(ast, Node) else ast.module(module)
    env = parameter_env(mod)
    consts = set(env)
    regs = register_names(mod)
    sites = assignment_sites(mod)
    widths = {d.name: d.width for d in symbol_table(mod)}
    out: list[FsmCandidate] = []
    done: set[str] = set()

    for case in (n for n in mod.walk() if n.kind == "CaseStmt"):
        subject = strip_parens(case.children[0])
        if subject.get("op") != "id" or subject["name"] not in regs:
            continue
        reg = subject["name"]
        if reg in done:
            continue
        nexts = _next_signals(reg, sites)
        arm_sites = [s for s in sites
                     if s.target in nexts and s.case_arm is not None and s.case_arm[0] is case.children[0]]
        names_ok = True
        transitions: list[tuple[str, str, str]] = []
        used: dict[str, None] = {}
        for s in arm_sites:
            rhs = strip_parens(s.rhs)
            if rhs.get("op") == "id" and rhs["name"] in nexts:
                continue  # explicit hold
            to = _const_name(s.rhs, consts)
            if to is None:
                names_ok = False
                break
            used.setdefault(to, None)
            labels = s.case_arm[1]
            # guards from inside the arm only
            idx = max(i for i, g in enumerate(s.guards) if g.kind == "case" and g.expr is case.children[0])
            guard = conjunction(s.guards[idx + 1:])
            for lab in labels:
                frm = _const_name(lab, consts)
                if frm is None:
                    names_ok = False
                    break
                used.setdefault(frm, None)
                if (frm, to, guard) not in transitions:
                    transitions.append((frm, to, guard))
        if not names_ok or not transitions:
            continue
        for item in case.children[1:]:
            if not item["default"]:
                for lab in item.children[:-1]:
                    name = _const_name(lab, consts)
                    if name:
                        used.setdefault(name, None)

        flop = next((s for s in sites if s.target == reg and s.sequential), None)
        clk = block_clocking(flop.block) if flop else None
        reset_state = None
        for s in sites:
            if s.target == reg and s.in_reset:
                reset_state = _const_name(s.rhs, consts)
                if reset_state:
                    used.setdefault(reset_state, None)
                break
        values = {n: _const_value(n, env) for n in used}
        if any(v is None for v in values.values()):
            continue
        state_consts = tuple(sorted(values.items(), key=lambda kv: (kv[1], kv[0])))
        reset = (clk.reset, clk.reset_active) if clk and clk.reset else None
        flags = sorted({s.target for s in sites
                        if flop and s.block is flop.block and s.sequential and not s.in_reset
                        and s.target not in nexts and widths.get(s.target) == 1})
        out.append(FsmCandidate(
            state_signal=reg,
            state_consts=state_consts,
            transitions=tuple(transitions),
            has_default_arm=any(i["default"] for i in case.children[1:]),
            clock=clk.clock if clk else None,
            reset=reset,
            next_signals=tuple(sorted(nexts - {reg})),
            reset_state=reset_state,
            flag_signals=tuple(flags),
        ))
        done.add(reg)
    return out
