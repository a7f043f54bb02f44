"""Four-state expression evaluation (Z is folded into X)."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from atlas.rtl.ast import Node

_BASES = {"b": 2, "o": 8, "d": 10, "h": 16}
_BITS_PER_DIGIT = {2: 1, 8: 3, 16: 4}
_LITERAL_RE = re.compile(r"^(\d[\d_]*)?'([sS]?)([bBoOdDhH])([0-9a-fA-FxXzZ_?]+)$")
DEFAULT_WIDTH = 32


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class Logic:
    width: int
    val: int = 0
    xmask: int = 0

    def __post_init__(self):
        mask = (1 << self.width) - 1
        object.__setattr__(self, "xmask", self.xmask & mask)
        object.__setattr__(self, "val", self.val & mask & ~self.xmask)

    @classmethod
    def unknown(cls, width: int) -> "Logic":
        return cls(width, 0, (1 << width) - 1)

    @property
    def known(self) -> bool:
        return self.xmask == 0

    def truth(self) -> bool | None:
        """Three-valued truthiness: any known 1 bit wins, otherwise X bits make it unknown."""
        if self.val:
            return True
        return None if self.xmask else False

    def resize(self, width: int) -> "Logic":
        return Logic(width, self.val, self.xmask)

    def to_int(self) -> int | None:
        return self.val if self.known else None

    def __str__(self) -> str:
        return "x" if self.xmask else str(self.val)


TRUE, FALSE, X1 = Logic(1, 1), Logic(1, 0), Logic.unknown(1)


def _bool(v: bool | None) -> Logic:
    return X1 if v is None else (TRUE if v else FALSE)


def parse_literal(text: str) -> Logic:
    """Decode a Verilog number literal such as ``8'hFF``, ``'0`` or ``4'b1x0z``."""
    text = text.replace("?", "z")
    if text[0] == "'" and len(text) == 2:
        fill = text[1].lower()
        if fill in "xz":
            return Logic.unknown(1).resize(1)
        # unsized fill literals are treated as one bit and widened by assignment
        return Logic(1, int(fill))
    if text[0].isdigit() and "'" not in text:
        return Logic(DEFAULT_WIDTH, int(text.replace("_", "")))
    m = _LITERAL_RE.match(text)
    if not m:
        raise EvalError(f"bad literal {text!r}")
    size, _signed, base_ch, digits = m.groups()
    base = _BASES[base_ch.lower()]
    digits = digits.replace("_", "").lower()
    width = int(size.replace("_", "")) if size else DEFAULT_WIDTH
    if base == 10:
        if any(c in "xz" for c in digits):
            return Logic.unknown(width)
        return Logic(width, int(digits))
    step = _BITS_PER_DIGIT[base]
    val = xm = 0
    for c in digits:
        val <<= step
        xm <<= step
        if c in "xz":
            xm |= (1 << step) - 1
        else:
            val |= int(c, base)
    return Logic(width, val, xm)


def literal_width(text: str) -> int:
    return parse_literal(text).width


def _merge(a: Logic, b: Logic) -> Logic:
    w = max(a.width, b.width)
    a, b = a.resize(w), b.resize(w)
    differ = (a.val ^ b.val) | a.xmask | b.xmask
    return Logic(w, a.val & ~differ, differ)


def _bitwise(sym: str, a: Logic, b: Logic) -> Logic:
    w = max(a.width, b.width)
    a, b = a.resize(w), b.resize(w)
    full = (1 << w) - 1
    if sym == "&":
        zero = (~a.val & ~a.xmask) | (~b.val & ~b.xmask)
        one = a.val & b.val
        return Logic(w, one, full & ~zero & ~one)
    if sym == "|":
        one = a.val | b.val
        zero = (~a.val & ~a.xmask) & (~b.val & ~b.xmask) & full
        return Logic(w, one, full & ~zero & ~one)
    xm = a.xmask | b.xmask
    val = a.val ^ b.val
    if sym in ("~^", "^~"):
        val = ~val & full
    return Logic(w, val, xm)


def _reduce(sym: str, a: Logic) -> Logic:
    if sym in ("&", "~&"):
        if (~a.val & ~a.xmask) & ((1 << a.width) - 1):
            r: bool | None = False
        else:
            r = None if a.xmask else True
    elif sym in ("|", "~|"):
        r = a.truth()
    else:
        r = None if a.xmask else bool(bin(a.val).count("1") % 2)
    if sym.startswith("~") and r is not None:
        r = not r
    return _bool(r)


def _arith(sym: str, a: Logic, b: Logic) -> Logic:
    w = max(a.width, b.width)
    if not (a.known and b.known):
        return Logic.unknown(w)
    x, y = a.val, b.val
    if sym == "+":
        return Logic(w, x + y)
    if sym == "-":
        return Logic(w, x - y)
    if sym == "*":
        return Logic(w, x * y)
    if y == 0:
        return Logic.unknown(w)
    return Logic(w, x // y if sym == "/" else x % y)


def _compare(sym: str, a: Logic, b: Logic) -> Logic:
    if sym in ("===", "!=="):
        w = max(a.width, b.width)
        a, b = a.resize(w), b.resize(w)
        same = a.val == b.val and a.xmask == b.xmask
        return _bool(same if sym == "===" else not same)
    if not (a.known and b.known):
        return X1
    x, y = a.val, b.val
    return _bool({"==": x == y, "!=": x != y, "<": x < y, "<=": x <= y,
                  ">": x > y, ">=": x >= y}[sym])


def _shift(sym: str, a: Logic, b: Logic) -> Logic:
    if not b.known:
        return Logic.unknown(a.width)
    n = b.val
    if sym in ("<<", "<<<"):
        return Logic(a.width, a.val << n, a.xmask << n)
    return Logic(a.width, a.val >> n, a.xmask >> n)


Lookup = Callable[[str], Logic]


def evaluate(expr: Node, lookup: Lookup) -> Logic:
    """Evaluate an expression tree; ``lookup`` resolves identifiers to values."""
    op = expr["op"]
    ch = expr.children
    if op == "num":
        return parse_literal(expr["text"])
    if op == "id":
        return lookup(expr["name"])
    if op == "paren":
        return evaluate(ch[0], lookup)
    if op == "unary":
        sym = expr["sym"]
        a = evaluate(ch[0], lookup)
        if sym == "!":
            t = a.truth()
            return _bool(None if t is None else not t)
        if sym == "~":
            return Logic(a.width, ~a.val, a.xmask)
        if sym == "-":
            return Logic.unknown(a.width) if a.xmask else Logic(a.width, -a.val)
        if sym == "+":
            return a
        return _reduce(sym, a)
    if op == "binary":
        sym = expr["sym"]
        a = evaluate(ch[0], lookup)
        if sym in ("&&", "||"):
            ta = a.truth()
            if sym == "&&" and ta is False:
                return FALSE
            if sym == "||" and ta is True:
                return TRUE
            tb = evaluate(ch[1], lookup).truth()
            if sym == "&&":
                return FALSE if tb is False else (TRUE if ta and tb else X1)
            return TRUE if tb is True else (FALSE if ta is False and tb is False else X1)
        b = evaluate(ch[1], lookup)
        if sym in ("&", "|", "^", "~^", "^~"):
            return _bitwise(sym, a, b)
        if sym in ("+", "-", "*", "/", "%"):
            return _arith(sym, a, b)
        if sym in ("<<", ">>", "<<<", ">>>"):
            return _shift(sym, a, b)
        return _compare(sym, a, b)
    if op == "cond":
        c = evaluate(ch[0], lookup).truth()
        if c is None:
            return _merge(evaluate(ch[1], lookup), evaluate(ch[2], lookup))
        return evaluate(ch[1] if c else ch[2], lookup)
    if op == "index":
        base = evaluate(ch[0], lookup)
        i = evaluate(ch[1], lookup)
        if not i.known or i.val >= base.width:
            return X1
        return Logic(1, base.val >> i.val, base.xmask >> i.val)
    if op == "range":
        base = evaluate(ch[0], lookup)
        hi = evaluate(ch[1], lookup).to_int()
        lo = evaluate(ch[2], lookup).to_int()
        if hi is None or lo is None:
            raise EvalError("non-constant part-select bounds")
        hi, lo = max(hi, lo), min(hi, lo)
        return Logic(hi - lo + 1, base.val >> lo, base.xmask >> lo)
    if op in ("concat", "repl"):
        if op == "repl":
            n = evaluate(ch[0], lookup).to_int()
            if n is None:
                raise EvalError("non-constant replication count")
            parts = [evaluate(c, lookup) for c in ch[1].children] * n
        else:
            parts = [evaluate(c, lookup) for c in ch]
        w = val = xm = 0
        for p in parts:
            val = (val << p.width) | p.val
            xm = (xm << p.width) | p.xmask
            w += p.width
        return Logic(max(w, 1), val, xm)
    if op == "call" and expr["name"] == "$clog2":
        v = evaluate(ch[0], lookup).to_int()
        if v is None:
            raise EvalError("$clog2 of unknown value")
        return Logic(DEFAULT_WIDTH, max(v - 1, 0).bit_length())
    raise EvalError(f"cannot evaluate {op} {expr.get('name', '')}".strip())


def const_eval(expr: Node, params: dict[str, Logic]) -> Logic:
    def lookup(name: str) -> Logic:
        try:
            return params[name]
        except KeyError:
            raise EvalError(f"'{name}' is not a constant") from None
    return evaluate(expr, lookup)
