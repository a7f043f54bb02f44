"""Bounded breadth-first reachability over an extracted FSM.

From a state, each assignment of the free inputs selects the first listed
transition whose guard is true; when none is, the machine holds its state.
Exploration starts from the reset state, or the lowest-valued state constant
when no reset state was recovered.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from atlas.errors import DepthExceeded, GuardUnsupported, SvaSyntaxError
from atlas.minicheck.sva import And, Bit, Cmp, Const, Func, Ident, Not, Or, expr_signals, parse_sva_expr
from atlas.rtl.fsm import FsmCandidate

MAX_DEPTH = 16
MAX_INPUTS = 8


@dataclass(frozen=True)
class ReachResult:
    reachable: frozenset[str]
    witnesses: dict  # state -> tuple of input assignments (dicts) from the initial state
    budget_exhausted: bool
    initial: str

    def to_dict(self) -> dict:
        return {"initial": self.initial, "reachable": sorted(self.reachable),
                "witnesses": {s: [dict(a) for a in w] for s, w in sorted(self.witnesses.items())},
                "budget_exhausted": self.budget_exhausted}


def _scalar(e, env: dict):
    if isinstance(e, Ident):
        return env[e.name]
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Bit):
        v = env[e.name]
        return None if v is None else (v >> e.index) & 1
    if isinstance(e, Not):
        v = _scalar(e.arg, env)
        return None if v is None else int(v == 0)
    if isinstance(e, (And, Or)):
        a, b = _scalar(e.left, env), _scalar(e.right, env)
        ta = None if a is None else a != 0
        tb = None if b is None else b != 0
        if isinstance(e, And):
            return 0 if (ta is False or tb is False) else (None if None in (ta, tb) else 1)
        return 1 if (ta or tb) else (None if None in (ta, tb) else 0)
    if isinstance(e, Cmp):
        a, b = _scalar(e.left, env), _scalar(e.right, env)
        if a is None or b is None:
            return None
        return int({"==": a == b, "!=": a != b, "<": a < b}[e.op])
    raise TypeError(e)


def _has_temporal(e) -> bool:
    if isinstance(e, Func):
        return True
    if isinstance(e, Not):
        return _has_temporal(e.arg)
    if isinstance(e, (And, Or, Cmp)):
        return _has_temporal(e.left) or _has_temporal(e.right)
    return False


def _state_values(fsm: FsmCandidate) -> dict[str, int]:
    return dict(fsm.state_consts)


def _compile_guards(fsm: FsmCandidate, inputs: list[str]):
    consts = _state_values(fsm)
    allowed = set(inputs) | {fsm.state_signal} | set(fsm.next_signals) | set(consts)
    out = []
    for frm, to, guard in fsm.transitions:
        try:
            expr = parse_sva_expr(guard)
        except SvaSyntaxError:
            raise GuardUnsupported(guard) from None
        if _has_temporal(expr) or not expr_signals(expr) <= allowed:
            raise GuardUnsupported(guard)
        out.append((frm, to, expr))
    return out


def _initial(fsm: FsmCandidate) -> str:
    if fsm.reset_state is not None:
        return fsm.reset_state
    return fsm.state_consts[0][0]


def bounded_reach(fsm: FsmCandidate, free_inputs: list[str], depth: int = MAX_DEPTH) -> ReachResult:
    if depth > MAX_DEPTH or depth < 0:
        raise DepthExceeded(f"reach depth {depth} outside 0..{MAX_DEPTH}")
    if len(free_inputs) > MAX_INPUTS:
        raise ValueError(f"at most {MAX_INPUTS} free inputs are supported, got {len(free_inputs)}")
    inputs = sorted(set(free_inputs))
    guards = _compile_guards(fsm, inputs)
    consts = _state_values(fsm)

    def step(state: str, assignment: dict) -> str:
        env = dict(consts)
        env.update(assignment)
        env[fsm.state_signal] = consts[state]
        for s in fsm.next_signals:
            env[s] = consts[state]
        for frm, to, expr in guards:
            if frm == state and _scalar(expr, env):
                return to
        return state

    assignments = [dict(zip(inputs, bits)) for bits in itertools.product((0, 1), repeat=len(inputs))]
    init = _initial(fsm)
    witnesses: dict[str, tuple] = {init: ()}
    frontier = [init]
    for _ in range(depth):
        nxt = []
        for s in frontier:
            for a in assignments:
                t = step(s, a)
                if t not in witnesses:
                    witnesses[t] = witnesses[s] + (a,)
                    nxt.append(t)
        frontier = nxt
        if not frontier:
            break
    # the budget ran out if the unexplored frontier still leads somewhere new
    exhausted = any(step(s, a) not in witnesses for s in frontier for a in assignments)
    return ReachResult(frozenset(witnesses), witnesses, exhausted, init)

