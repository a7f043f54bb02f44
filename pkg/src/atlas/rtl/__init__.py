"""SystemVerilog subset frontend: parsing, symbols, FSMs, drivers and digests."""

from atlas.rtl.analysis import (
    AstDigest,
    ast_digest,
    driver_map,
    drivers_of,
    fanout_map,
    unresolved_identifiers,
    update_rules,
)
from atlas.rtl.ast import Ast, Node, Span
from atlas.rtl.fsm import FsmCandidate, extract_fsms
from atlas.rtl.parser import parse_rtl, parse_rtl_lenient
from atlas.rtl.printer import print_ast, print_expr
from atlas.rtl.sim import SimResult, simulate
from atlas.rtl.structure import Clocking, module_clocking
from atlas.rtl.symbols import SignalDecl, symbol_map, symbol_table

__all__ = [
    "Ast", "AstDigest", "Clocking", "FsmCandidate", "Node", "SignalDecl", "SimResult", "Span",
    "ast_digest", "driver_map", "drivers_of", "extract_fsms", "fanout_map", "module_clocking",
    "parse_rtl", "parse_rtl_lenient", "print_ast", "print_expr", "simulate", "symbol_map",
    "symbol_table", "unresolved_identifiers", "update_rules",
]
