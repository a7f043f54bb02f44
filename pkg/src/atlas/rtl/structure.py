"""Clock/reset recognition and enumeration of assignment sites with their guards."""

from __future__ import annotations

from dataclasses import dataclass

from atlas.naming import is_reset_name
from atlas.rtl.ast import Node, base_name, identifiers, strip_parens
from atlas.rtl.evaluate import EvalError, Logic, evaluate


@dataclass(frozen=True)
class Clocking:
    clock: str | None
    reset: str | None = None
    reset_active: int | None = None  # level at which reset is asserted
    reset_async: bool = False

    @property
    def edge_triggered(self) -> bool:
        return self.clock is not None


@dataclass(frozen=True)
class Guard:
    expr: Node
    polarity: bool  # True: branch taken when expr holds
    is_reset: bool = False
    kind: str = "if"  # "if" or "case"

    def text(self) -> str:
        from atlas.rtl.printer import print_expr

        body = print_expr(self.expr)
        if self.polarity:
            inner = strip_parens(self.expr)
            if inner.get("op") == "cond" or (inner.get("op") == "binary" and inner["sym"] == "||"):
                return f"({body})" if inner is self.expr else body
            return body
        inner = strip_parens(self.expr)
        if inner.get("op") == "unary" and inner["sym"] == "!":
            return print_expr(inner.children[0])
        simple = inner.get("op") in ("id", "num", "index", "call")
        return f"!{body}" if simple else f"!({body})"


@dataclass(frozen=True)
class AssignSite:
    target: str
    node: Node  # the Assign node
    guards: tuple[Guard, ...]
    block: Node | None  # enclosing AlwaysBlock, None for continuous assigns
    clocking: Clocking | None
    in_reset: bool
    case_arm: tuple | None = None  # (subject, labels) of the innermost case arm; labels=() for default

    @property
    def lhs(self) -> Node:
        return self.node.children[0]

    @property
    def rhs(self) -> Node:
        return self.node.children[1]

    @property
    def sequential(self) -> bool:
        return self.clocking is not None and self.clocking.edge_triggered


def _only_reset_cond(cond: Node, reset: str) -> bool:
    return identifiers(cond) == [reset]


def _active_level(cond: Node, reset: str) -> int | None:
    """Reset level that makes ``cond`` true, if exactly one does."""
    hits = []
    for level in (0, 1):
        try:
            t = evaluate(cond, lambda n: Logic(1, level) if n == reset else Logic.unknown(1)).truth()
        except EvalError:
            return None
        if t:
            hits.append(level)
    return hits[0] if len(hits) == 1 else None


def _first_if(stmt: Node) -> Node | None:
    while stmt.kind == "Block" and len(stmt.children) == 1:
        stmt = stmt.children[0]
    return stmt if stmt.kind == "IfStmt" else None


def block_clocking(block: Node) -> Clocking:
    sens = block["sensitivity"]
    edges = [(e, s) for e, s in sens if e in ("posedge", "negedge")] if sens != ("*",) else []
    if not edges:
        return Clocking(None)
    resets = [(e, s) for e, s in edges if is_reset_name(s)]
    clocks = [s for e, s in edges if not is_reset_name(s)]
    clock = "clk" if "clk" in clocks else (clocks[0] if clocks else None)
    top = _first_if(block.children[0])
    if resets:
        edge, reset = resets[0]
        level = 0 if edge == "negedge" else 1
        return Clocking(clock, reset, level, True)
    if top is not None:
        names = identifiers(top.children[0])
        if len(names) == 1 and is_reset_name(names[0]):
            level = _active_level(top.children[0], names[0])
            if level is not None:
                return Clocking(clock, names[0], level, False)
    return Clocking(clock)


def assignment_sites(module: Node) -> list[AssignSite]:
    """Every assignment in ``module`` with the conditions under which it executes."""
    out: list[AssignSite] = []

    def visit(stmt: Node, guards: tuple, block: Node, clk: Clocking, in_reset: bool, arm):
        if stmt.kind == "Assign":
            name = base_name(stmt.children[0])
            targets = [name] if name else identifiers(stmt.children[0])
            for t in targets:
                out.append(AssignSite(t, stmt, guards, block, clk, in_reset, arm))
        elif stmt.kind == "Block":
            for c in stmt.children:
                visit(c, guards, block, clk, in_reset, arm)
        elif stmt.kind == "IfStmt":
            cond = stmt.children[0]
            is_rst = bool(clk.reset) and _only_reset_cond(cond, clk.reset)
            branches = [(stmt.children[1], True)]
            if stmt["has_else"]:
                branches.append((stmt.children[2], False))
            for body, pol in branches:
                reset_branch = in_reset
                if is_rst:
                    level = _active_level(cond, clk.reset)
                    reset_branch = in_reset or (level is not None and (level == clk.reset_active) == pol)
                g = Guard(cond, pol, is_reset=is_rst)
                visit(body, guards + (g,), block, clk, reset_branch, arm)
        elif stmt.kind == "CaseStmt":
            subject = stmt.children[0]
            for item in stmt.children[1:]:
                labels = () if item["default"] else item.children[:-1]
                g = Guard(subject, True, kind="case")
                visit(item.children[-1], guards + (g,), block, clk, in_reset, (subject, labels))

    for item in module.children:
        if item.kind == "Assign":
            name = base_name(item.children[0])
            for t in [name] if name else identifiers(item.children[0]):
                out.append(AssignSite(t, item, (), None, None, False))
        elif item.kind == "AlwaysBlock":
            visit(item.children[0], (), item, block_clocking(item), False, None)
    return out


def reset_assignments(module: Node) -> dict[str, AssignSite]:
    """First reset-branch assignment per register."""
    out: dict[str, AssignSite] = {}
    for site in assignment_sites(module):
        if site.in_reset and site.sequential:
            out.setdefault(site.target, site)
    return out


def module_clocking(module: Node) -> Clocking:
    """The dominant clock/reset style across the module's edge-triggered blocks."""
    counts: dict[Clocking, int] = {}
    order: list[Clocking] = []
    for item in module.children:
        if item.kind == "AlwaysBlock":
            c = block_clocking(item)
            if c.edge_triggered:
                if c not in counts:
                    order.append(c)
                counts[c] = counts.get(c, 0) + 1
    if not order:
        return Clocking(None)
    return max(order, key=lambda c: (counts[c], c.reset is not None, -order.index(c)))


def conjunction(guards) -> str:
    """Render guards as one ``&&``-joined condition; ``1`` when there are none."""
    parts = [g.text() for g in guards]
    return " && ".join(parts) if parts else "1"
