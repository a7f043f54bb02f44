"""Focus pruning: summary assets, documented attack surface and the structural path."""

from __future__ import annotations

import re

from atlas.assets import DetectedAsset
from atlas.context import SocContext
from atlas.propgen.model import AST_PATH, DD_ATTACK_SURFACE, SUMMARY_ASSET, FocusSet
from atlas.rtl.analysis import driver_map, fanout_map
from atlas.rtl.ast import Ast, Node
from atlas.rtl.symbols import symbol_table

# words that mark a doc section as describing an interface or attack surface
SURFACE_WORDS = frozenset({
    "interface", "interfaces", "attack", "surface", "untrusted", "software", "external",
    "bus", "port", "ports", "debug", "jtag", "host", "peripheral",
})
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def doc_mentions(context: SocContext, names: set[str]) -> set[str]:
    """Signals named in interface/attack-surface sections or listed in the register map."""
    out = {r.name for r in context.doc.register_map if r.name in names}
    for heading, body in context.doc.sections:
        words = _WORD.findall(f"{heading}\n{body}")
        if SURFACE_WORDS & {w.lower() for w in words}:
            out |= {w for w in words if w in names}
    return out


def _path(context: SocContext, asset: str, ast: Ast | Node | None, depth: int) -> set[str]:
    digest = context.digest
    if depth == 1 and asset in digest.drivers:
        return {asset, *digest.drivers[asset], *digest.fanout.get(asset, ())}
    if ast is None or not digest.module:
        # no structural context to walk
        return {asset}
    mod = ast if isinstance(ast, Node) else ast.module(digest.module)
    drivers = driver_map(mod)
    fanout = fanout_map(drivers)
    seen, frontier = {asset}, {asset}
    for _ in range(depth):
        nxt = set()
        for s in frontier:
            nxt |= set(drivers.get(s, ())) | set(fanout.get(s, ()))
        frontier = nxt - seen
        seen |= nxt
    return seen


def prune_focus(context: SocContext, asset: DetectedAsset, ast: Ast | Node | None = None,
                depth: int = 1) -> FocusSet:
    """``A & B & C`` over summary assets, doc attack surface and the path; ``A & C`` when that is empty."""
    if depth < 1:
        raise ValueError("path depth must be at least 1")
    if context.digest.signals:
        names = set(context.digest.signals)
    elif ast is not None:
        mod = ast if isinstance(ast, Node) else ast.module()
        names = {s.name for s in symbol_table(mod) if s.storage != "parameter"}
    else:
        names = {asset.signal} | context.summary.signals
    a = ({s for s in context.summary.signals if s in names}) | {asset.signal}
    b = doc_mentions(context, names)
    c = _path(context, asset.signal, ast, depth) & (names | {asset.signal})
    strict = a & b & c
    fallback = not strict
    chosen = (a & c) if fallback else strict
    tags = {}
    for s in sorted(chosen):
        t = [SUMMARY_ASSET]
        if not fallback:
            t.append(DD_ATTACK_SURFACE)
        t.append(AST_PATH)
        tags[s] = tuple(t)
    return FocusSet(frozenset(chosen), tags, fallback)
