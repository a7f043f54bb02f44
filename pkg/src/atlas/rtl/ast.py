"""Syntax tree for the supported SystemVerilog subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

# kinds produced by the parser
NODE_KINDS = (
    "Source", "Module", "Port", "NetDecl", "RegDecl", "Param", "LocalParam", "AlwaysBlock",
    "Assign", "CaseStmt", "CaseItem", "IfStmt", "InstanceDecl", "Expr", "Block", "Null",
    "PropertyStmt", "Bind",
)
DECL_KINDS = ("Port", "NetDecl", "RegDecl", "Param", "LocalParam")


@dataclass(frozen=True, order=True)
class Span:
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self) -> str:
        return f"{self.start_line}:{self.start_col}-{self.end_line}:{self.end_col}"

    def contains(self, other: "Span") -> bool:
        return ((self.start_line, self.start_col) <= (other.start_line, other.start_col)
                and (other.end_line, other.end_col) <= (self.end_line, self.end_col))


NO_SPAN = Span(0, 0, 0, 0)


@dataclass(frozen=True)
class Node:
    """A tree node. Equality is structural and ignores source positions."""

    kind: str
    attrs: dict = field(default_factory=dict)
    children: tuple = ()
    span: Span = field(default=NO_SPAN, compare=False)

    def __getitem__(self, key):
        return self.attrs[key]

    def get(self, key, default=None):
        return self.attrs.get(key, default)

    def walk(self) -> Iterator["Node"]:
        yield self
        for child in self.children:
            yield from child.walk()

    def find(self, kind: str) -> list["Node"]:
        return [n for n in self.walk() if n.kind == kind]

    def to_dict(self) -> dict:
        attrs = {k: list(v) if isinstance(v, tuple) else v for k, v in self.attrs.items()}
        return {"kind": self.kind, "span": str(self.span), "attrs": attrs,
                "children": [c.to_dict() for c in self.children]}


@dataclass(frozen=True)
class Ast:
    root: Node
    diagnostics: tuple = ()

    @property
    def modules(self) -> list[Node]:
        return [c for c in self.root.children if c.kind == "Module"]

    def module(self, name: str | None = None) -> Node:
        mods = self.modules
        if not mods:
            raise LookupError("source contains no module")
        if name is None:
            return mods[0]
        for m in mods:
            if m["name"] == name:
                return m
        raise LookupError(f"no module named {name!r}")

    @property
    def partial(self) -> bool:
        return any(m.get("partial") for m in self.modules)

    def to_dict(self) -> dict:
        return self.root.to_dict()


# -- expression helpers --------------------------------------------------------


def ident(name: str, span: Span = NO_SPAN) -> Node:
    return Node("Expr", {"op": "id", "name": name}, (), span)


def identifiers(expr: Node) -> list[str]:
    """Signal names referenced by an expression, in first-appearance order."""
    seen: dict[str, None] = {}
    for n in expr.walk():
        if n.kind == "Expr" and n.get("op") == "id":
            seen.setdefault(n["name"], None)
    return list(seen)


def base_name(lhs: Node) -> str | None:
    """The signal written by an assignment target such as ``x``, ``x[3]`` or ``x[7:0]``."""
    while lhs.kind == "Expr" and lhs.get("op") in ("index", "range", "paren"):
        lhs = lhs.children[0]
    if lhs.kind == "Expr" and lhs.get("op") == "id":
        return lhs["name"]
    return None


def strip_parens(expr: Node) -> Node:
    while expr.kind == "Expr" and expr.get("op") == "paren":
        expr = expr.children[0]
    return expr
