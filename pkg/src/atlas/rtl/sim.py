"""Cycle-based four-state simulation of a single module.

Each cycle samples inputs, settles combinational logic and records every
signal, then applies the clocked updates. Registers without a reset start
unknown. Used to produce the fixture traces.
"""

from __future__ import annotations

from dataclasses import dataclass

from atlas.errors import TraceError
from atlas.rtl.ast import Ast, Node, base_name
from atlas.rtl.evaluate import EvalError, Logic, const_eval, evaluate
from atlas.rtl.structure import block_clocking
from atlas.rtl.symbols import parameter_env, symbol_table

_MAX_SETTLE = 64


@dataclass
class SimResult:
    columns: list[str]
    widths: dict[str, int]
    rows: list[dict[str, int | None]]

    def column(self, name: str) -> list[int | None]:
        return [r[name] for r in self.rows]


class _Env:
    def __init__(self, values: dict[str, Logic], params: dict[str, Logic]):
        self.values = values
        self.params = params

    def __call__(self, name: str) -> Logic:
        if name in self.values:
            return self.values[name]
        if name in self.params:
            return self.params[name]
        raise EvalError(f"unknown signal '{name}'")


def _write(values: dict[str, Logic], widths: dict[str, int], lhs: Node, rhs: Logic,
           params: dict[str, Logic]) -> tuple[str, Logic]:
    name = base_name(lhs)
    if name is None:
        raise EvalError("unsupported assignment target")
    width = widths[name]
    op = lhs.get("op")
    if op == "id":
        return name, rhs.resize(width)
    cur = values.get(name, Logic.unknown(width))
    if op == "index":
        idx = evaluate(lhs.children[1], _Env(values, params))
        if not idx.known:
            return name, Logic.unknown(width)
        lo, hi = idx.val, idx.val
    elif op == "range":
        hi = const_eval(lhs.children[1], params).to_int()
        lo = const_eval(lhs.children[2], params).to_int()
        hi, lo = max(hi, lo), min(hi, lo)
    else:
        raise EvalError("unsupported assignment target")
    n = hi - lo + 1
    field_mask = ((1 << n) - 1) << lo
    part = rhs.resize(n)
    val = (cur.val & ~field_mask) | (part.val << lo)
    xm = (cur.xmask & ~field_mask) | (part.xmask << lo)
    return name, Logic(width, val, xm)


def _case_match(subject: Logic, label: Logic, keyword: str) -> bool:
    w = max(subject.width, label.width)
    s, lab = subject.resize(w), label.resize(w)
    if keyword == "case":
        return s.val == lab.val and s.xmask == lab.xmask
    care = ~lab.xmask & ((1 << w) - 1)
    if keyword == "casex":
        care &= ~s.xmask
    return (s.val & care) == (lab.val & care) and not (s.xmask & care)


def _exec(stmt: Node, read: dict[str, Logic], local: dict[str, Logic], nba: dict[str, Logic],
          widths: dict[str, int], params: dict[str, Logic]) -> None:
    kind = stmt.kind
    env = _Env({**read, **local}, params)
    if kind == "Assign":
        val = evaluate(stmt.children[1], env)
        if stmt["style"] == "nonblocking":
            merged = {**read, **local, **nba}
            name, new = _write(merged, widths, stmt.children[0], val, params)
            nba[name] = new
        else:
            name, new = _write({**read, **local}, widths, stmt.children[0], val, params)
            local[name] = new
    elif kind == "Block":
        for c in stmt.children:
            _exec(c, read, local, nba, widths, params)
    elif kind == "IfStmt":
        cond = evaluate(stmt.children[0], env).truth()
        if cond:
            _exec(stmt.children[1], read, local, nba, widths, params)
        elif stmt["has_else"]:
            _exec(stmt.children[2], read, local, nba, widths, params)
    elif kind == "CaseStmt":
        subject = evaluate(stmt.children[0], env)
        default = None
        for item in stmt.children[1:]:
            if item["default"]:
                default = item
                continue
            if any(_case_match(subject, evaluate(lab, env), stmt["keyword"]) for lab in item.children[:-1]):
                _exec(item.children[-1], read, local, nba, widths, params)
                return
        if default is not None:
            _exec(default.children[-1], read, local, nba, widths, params)


def simulate(ast: Ast | Node, stimulus: list[dict[str, int | None]], module: str | None = None) -> SimResult:
    """Run ``len(stimulus)`` cycles; each stimulus row gives the input values for that cycle."""
    mod = ast if isinstance(ast, Node) else ast.module(module)
    params = parameter_env(mod)
    symbols = [s for s in symbol_table(mod) if s.storage != "parameter"]
    widths = {s.name: s.width for s in symbols}
    clocks = set()
    seq_blocks, comb_blocks, assigns = [], [], []
    for item in mod.children:
        if item.kind == "AlwaysBlock":
            clk = block_clocking(item)
            if clk.edge_triggered:
                clocks.add(clk.clock)
                seq_blocks.append(item)
            else:
                comb_blocks.append(item)
        elif item.kind == "Assign":
            assigns.append(item)
    inputs = [s.name for s in symbols if s.direction == "input" and s.name not in clocks]
    regs = {s.name for s in symbols if s.storage == "register"}
    columns = [s.name for s in symbols if s.name not in clocks]
    state = {r: Logic.unknown(widths[r]) for r in regs}
    rows: list[dict[str, int | None]] = []

    for t, stim in enumerate(stimulus):
        missing = [i for i in inputs if i not in stim]
        if missing:
            raise TraceError(f"cycle {t}: no stimulus for input '{missing[0]}'")
        values: dict[str, Logic] = dict(state)
        for name in inputs:
            v = stim[name]
            values[name] = Logic.unknown(widths[name]) if v is None else Logic(widths[name], v)
        for name in columns:
            values.setdefault(name, Logic.unknown(widths[name]))
        for _ in range(_MAX_SETTLE):
            before = dict(values)
            for a in assigns:
                val = evaluate(a.children[1], _Env(values, params))
                name, new = _write(values, widths, a.children[0], val, params)
                values[name] = new
            for blk in comb_blocks:
                local: dict[str, Logic] = {}
                _exec(blk.children[0], values, local, {}, widths, params)
                values.update(local)
            if values == before:
                break
        else:
            raise TraceError(f"cycle {t}: combinational logic did not settle")
        rows.append({c: values[c].to_int() for c in columns})
        nba: dict[str, Logic] = {}
        for blk in seq_blocks:
            local = {}
            _exec(blk.children[0], values, local, nba, widths, params)
            for name, v in local.items():
                if name in regs:
                    nba.setdefault(name, v)
        state = {r: nba.get(r, state[r]) for r in regs}
    return SimResult(columns, {c: widths[c] for c in columns}, rows)
