"""Reference evaluator for the property subset, written from the semantics alone.

Properties are plain tuples built by the test generators, so no parser is
involved. Every value is recomputed per cycle and every delay choice of a
sequence is enumerated explicitly as a path.

Expression forms::

    ("sig", name) ("const", value_or_None) ("bit", name, k)
    ("not", e) ("and", a, b) ("or", a, b) ("cmp", op, a, b)
    ("past", e, depth) ("stable", e) ("rose", e) ("fell", e) ("isunknown", e)

A sequence is a list of ``(lo, hi, expr)`` steps; the delay of the first
step counts from the start cycle.
"""

from __future__ import annotations

import itertools

X = None


def value(e, sig: dict, widths: dict, c: int):
    kind = e[0]
    n = len(next(iter(sig.values())))
    if c < 0 or c >= n:
        return X
    if kind == "sig":
        return sig[e[1]][c]
    if kind == "const":
        return e[1]
    if kind == "bit":
        v = sig[e[1]][c]
        if v is X or e[2] >= widths[e[1]]:
            return X
        return (v >> e[2]) & 1
    if kind == "not":
        v = value(e[1], sig, widths, c)
        return X if v is X else (1 if v == 0 else 0)
    if kind in ("and", "or"):
        a = value(e[1], sig, widths, c)
        b = value(e[2], sig, widths, c)
        ta = X if a is X else a != 0
        tb = X if b is X else b != 0
        if kind == "and":
            if ta is False or tb is False:
                return 0
            return X if X in (ta, tb) else 1
        if ta is True or tb is True:
            return 1
        return X if X in (ta, tb) else 0
    if kind == "cmp":
        a = value(e[2], sig, widths, c)
        b = value(e[3], sig, widths, c)
        if a is X or b is X:
            return X
        return 1 if {"==": a == b, "!=": a != b, "<": a < b}[e[1]] else 0
    if kind == "past":
        return value(e[1], sig, widths, c - e[2]) if c - e[2] >= 0 else X
    if kind == "isunknown":
        return 1 if value(e[1], sig, widths, c) is X else 0
    now = value(e[1], sig, widths, c)
    before = value(e[1], sig, widths, c - 1) if c >= 1 else X
    if now is X or before is X:
        return X
    if kind == "stable":
        return 1 if now == before else 0
    if kind == "rose":
        return 1 if (before & 1, now & 1) == (0, 1) else 0
    if kind == "fell":
        return 1 if (before & 1, now & 1) == (1, 0) else 0
    raise ValueError(kind)


def truth(v):
    return X if v is X else v != 0


def _paths(seq):
    return itertools.product(*[range(lo, hi + 1) for lo, hi, _ in seq])


def match_ends(seq, sig, widths, t: int) -> set[int]:
    n = len(next(iter(sig.values())))
    ends = set()
    for delays in _paths(seq):
        c = t
        ok = True
        for d, (_, _, e) in zip(delays, seq):
            c += d
            if c >= n or truth(value(e, sig, widths, c)) is not True:
                ok = False
                break
        if ok:
            ends.add(c)
    return ends


def path_outcome(seq, delays, sig, widths, anchor: int):
    """One consequent path: ('F', c) | ('P', None) | ('X', c) | ('T', c)."""
    n = len(next(iter(sig.values())))
    c = anchor
    saw_x = False
    for d, (_, _, e) in zip(delays, seq):
        c += d
        if c >= n:
            return "P", None
        v = truth(value(e, sig, widths, c))
        if v is False:
            return "F", c
        if v is X:
            saw_x = True
    return ("X", c) if saw_x else ("T", c)


def obligation(seq, sig, widths, anchor: int):
    outs = [path_outcome(seq, d, sig, widths, anchor) for d in _paths(seq)]
    kinds = {k for k, _ in outs}
    if "T" in kinds:
        return "T", None
    if "P" in kinds:
        return "P", None
    if "X" in kinds:
        return "X", max(c for k, c in outs if k in ("X", "F"))
    return "F", max(c for _, c in outs)


def evaluate(prop: dict, sig: dict, widths: dict):
    """Return (verdict, fail_cycle, start_cycle)."""
    n = len(next(iter(sig.values())))
    ante = prop.get("antecedent")
    shift = 1 if prop.get("implication") == "|=>" else 0
    disable = prop.get("disable")
    worst = None
    any_match = False
    for t in range(n):
        ends = match_ends(ante, sig, widths, t) if ante else {t}
        any_match = any_match or bool(ends)
        for e in sorted(ends):
            kind, c = obligation(prop["consequent"], sig, widths, e + shift)
            if kind in ("T", "P"):
                continue
            if disable is not None and any(
                    truth(value(disable, sig, widths, k)) is True for k in range(t, min(c, n - 1) + 1)):
                continue
            if worst is None or (c, t) < worst:
                worst = (c, t)
    if worst is not None:
        return "fails", worst[0], worst[1]
    if not any_match:
        return "vacuous", None, None
    return "holds", None, None


def cover_starts(seq, sig, widths) -> list[int]:
    n = len(next(iter(sig.values())))
    return [t for t in range(n) if match_ends(seq, sig, widths, t)]


# -- rendering to concrete syntax (used only to feed the evaluator under test) --


def render_expr(e) -> str:
    kind = e[0]
    if kind == "sig":
        return e[1]
    if kind == "const":
        return "1'bx" if e[1] is X else str(e[1])
    if kind == "bit":
        return f"{e[1]}[{e[2]}]"
    if kind == "not":
        return f"!({render_expr(e[1])})"
    if kind == "and":
        return f"({render_expr(e[1])}) && ({render_expr(e[2])})"
    if kind == "or":
        return f"({render_expr(e[1])}) || ({render_expr(e[2])})"
    if kind == "cmp":
        return f"({render_expr(e[2])}) {e[1]} ({render_expr(e[3])})"
    if kind == "past":
        return f"$past({render_expr(e[1])}, {e[2]})"
    return f"${kind}({render_expr(e[1])})"


def render_seq(seq) -> str:
    parts = []
    for i, (lo, hi, e) in enumerate(seq):
        delay = "" if (lo, hi) == (0, 0) and i == 0 else (f"##{lo} " if lo == hi else f"##[{lo}:{hi}] ")
        parts.append(f"{delay}({render_expr(e)})")
    return " ".join(parts)


def render_property(prop: dict) -> str:
    text = "@(posedge clk) "
    if prop.get("disable") is not None:
        text += f"disable iff ({render_expr(prop['disable'])}) "
    if prop.get("antecedent"):
        text += f"{render_seq(prop['antecedent'])} {prop.get('implication', '|->')} "
    return text + render_seq(prop["consequent"])
