"""Render validated properties as a bound SVA checker module and a proof harness script."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from atlas.errors import UnvalidatedProperty
from atlas.propgen.model import VALIDATED, SecurityProperty
from atlas.rtl.ast import Ast, Node
from atlas.rtl.structure import module_clocking
from atlas.rtl.symbols import symbol_table

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EmitPlan:
    design_files: tuple[str, ...]
    top: str
    checker: str
    clock: str
    reset: str | None
    reset_active_low: bool = True
    properties: tuple[SecurityProperty, ...] = ()
    widths: dict = field(default_factory=dict, hash=False)
    clock_edge: str = "posedge"

    @property
    def checker_file(self) -> str:
        return f"{self.top}_checker.sv"

    @property
    def harness_file(self) -> str:
        return f"{self.top}_fpv.tcl"

    def ordered(self) -> list[SecurityProperty]:
        return sorted(self.properties, key=lambda p: (p.cwe_id, p.name))


def plan_for(ast: Ast | Node, design_files, properties, module: str | None = None) -> EmitPlan:
    """Build a plan for the parsed top module, taking clock, reset and widths from the design."""
    mod = ast if isinstance(ast, Node) else ast.module(module)
    clk = module_clocking(mod)
    widths = {s.name: s.width for s in symbol_table(mod) if s.storage != "parameter"}
    return EmitPlan(tuple(str(f) for f in design_files), mod["name"], f"{mod['name']}_checker",
                    clk.clock or "clk", clk.reset, clk.reset_active != 1, tuple(properties), widths)


def _check(plan: EmitPlan) -> None:
    for p in plan.properties:
        if p.status != VALIDATED:
            raise UnvalidatedProperty(p.name)


def _one_line(text: str) -> str:
    return " ".join(text.replace("*/", "* /").split())


def _ports(plan: EmitPlan) -> list[str]:
    names: set[str] = set()
    for p in plan.properties:
        names |= p.bound_signals
    head = [plan.clock] + ([plan.reset] if plan.reset else [])
    return head + sorted(names - set(head))


def _decl(name: str, width: int) -> str:
    rng = f"[{width - 1}:0] " if width > 1 else ""
    return f"input logic {rng}{name}"


def emit_sva_checker(plan: EmitPlan) -> str:
    _check(plan)
    if not plan.properties:
        log.warning("checker for %s has no properties", plan.top)
    ports = _ports(plan)
    lines = [f"// Security checker for {plan.top}; attach with the bind below.",
             f"module {plan.checker} ("]
    decls = [f"  {_decl(n, int(plan.widths.get(n, 1)))}" for n in ports]
    lines.append(",\n".join(decls))
    lines.append(");")
    used: dict[str, int] = {}
    for p in plan.ordered():
        label = p.name
        if label in used:
            used[label] += 1
            label = f"{label}_{used[label]}"
        else:
            used[label] = 0
        lines.append("")
        lines.append(f"  // CWE-{p.cwe_id}: {_one_line(p.rationale) or p.family}")
        lines.append(f"  {label}_a: assert property ({p.sva_text});")
        prefix = f"@({p.clock_edge} {p.clock}) " if p.clock else ""
        if p.disable_expr:
            prefix += f"disable iff ({p.disable_expr}) "
        for i, c in enumerate(p.covers):
            lines.append(f"  {label}_c{i}: cover property ({prefix}{c});")
    lines.append("endmodule")
    lines.append("")
    conns = ",\n".join(f"  .{n}({n})" for n in ports)
    lines.append(f"bind {plan.top} {plan.checker} u_{plan.checker} (\n{conns}\n);")
    return "\n".join(lines) + "\n"


def emit_tcl_harness(plan: EmitPlan) -> str:
    _check(plan)
    lines = [f"# Formal proof harness for {plan.top}"]
    for f in plan.design_files:
        lines.append(f"analyze -sv {f}")
    lines.append(f"analyze -sv {plan.checker_file}")
    lines.append(f"elaborate -top {plan.top}")
    lines.append(f"clock {plan.clock}" + (" -negedge" if plan.clock_edge == "negedge" else ""))
    if plan.reset:
        expr = f"!{plan.reset}" if plan.reset_active_low else plan.reset
        lines.append(f"reset -expression {{{expr}}}")
    else:
        lines.append("reset -none")
    lines.append("prove -all")
    return "\n".join(lines) + "\n"


def write_outputs(plan: EmitPlan, out_dir: Path | str) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    checker = out / plan.checker_file
    harness = out / plan.harness_file
    # newline="\n" keeps LF endings on every platform
    with open(checker, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_sva_checker(plan))
    with open(harness, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(emit_tcl_harness(plan))
    return checker, harness
