"""Symbol table construction."""

from __future__ import annotations

from dataclasses import dataclass

from atlas.errors import DuplicateDecl
from atlas.rtl.ast import DECL_KINDS, Ast, Node, Span
from atlas.rtl.evaluate import DEFAULT_WIDTH, EvalError, Logic, const_eval
from atlas.rtl.structure import assignment_sites, reset_assignments

DIRECTIONS = ("input", "output", "inout", "internal")
STORAGES = ("net", "register", "parameter")


@dataclass(frozen=True)
class SignalDecl:
    name: str
    direction: str
    width: int
    storage: str
    reset_value: int | None = None
    span: Span | None = None
    has_reset: bool = False
    value: int | None = None  # parameters only

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"{self.name}: width must be >= 1")
        if self.direction not in DIRECTIONS or self.storage not in STORAGES:
            raise ValueError(f"{self.name}: bad direction/storage")

    @property
    def is_port(self) -> bool:
        return self.direction != "internal"

    def to_dict(self) -> dict:
        return {"name": self.name, "direction": self.direction, "width": self.width,
                "storage": self.storage, "reset_value": self.reset_value,
                "has_reset": self.has_reset, "value": self.value}


def _module(ast: Ast | Node, module: str | None) -> Node:
    if isinstance(ast, Node):
        return ast
    return ast.module(module)


def parameter_env(mod: Node) -> dict[str, Logic]:
    """Values of every parameter and localparam, evaluated in declaration order."""
    env: dict[str, Logic] = {}
    for item in mod.children:
        if item.kind in ("Param", "LocalParam"):
            try:
                value = const_eval(item.children[-1], env)
            except EvalError:
                value = Logic.unknown(DEFAULT_WIDTH)
            if item.get("ranged"):
                value = value.resize(_range_width(item, env))
            env[item["name"]] = value
    return env


def _range_width(node: Node, env: dict[str, Logic]) -> int:
    if not node.get("ranged"):
        return DEFAULT_WIDTH if node.get("type") in ("int", "integer") else 1
    try:
        msb = const_eval(node.children[0], env).to_int()
        lsb = const_eval(node.children[1], env).to_int()
    except EvalError:
        return 1
    if msb is None or lsb is None:
        return 1
    return abs(msb - lsb) + 1


def register_names(mod: Node) -> set[str]:
    return {s.target for s in assignment_sites(mod) if s.sequential}


def symbol_table(ast: Ast | Node, module: str | None = None) -> list[SignalDecl]:
    """One entry per declared port, signal and parameter, in declaration order."""
    mod = _module(ast, module)
    env = parameter_env(mod)
    regs = register_names(mod)
    resets = reset_assignments(mod)
    seen: dict[str, Node] = {}
    out: list[SignalDecl] = []
    for item in mod.children:
        if item.kind not in DECL_KINDS:
            continue
        name = item["name"]
        if name in seen:
            raise DuplicateDecl(name, seen[name].span, item.span)
        seen[name] = item
        if item.kind in ("Param", "LocalParam"):
            val = env[name]
            width = val.width if not item.get("ranged") else _range_width(item, env)
            out.append(SignalDecl(name, "internal", width, "parameter", span=item.span,
                                  value=val.to_int()))
            continue
        width = _range_width(item, env)
        direction = item["direction"] if item.kind == "Port" else "internal"
        storage = "register" if name in regs else "net"
        reset_value = None
        has_reset = name in resets
        if has_reset:
            try:
                reset_value = const_eval(resets[name].rhs, env).resize(width).to_int()
            except EvalError:
                reset_value = None
        out.append(SignalDecl(name, direction, width, storage, reset_value, item.span, has_reset))
    return out


def symbol_map(symbols: list[SignalDecl]) -> dict[str, SignalDecl]:
    return {s.name: s for s in symbols}
