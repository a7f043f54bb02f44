"""Parser and renderer for the supported SVA subset.

Grammar::

    property := [ '@' '(' edge ident ')' ] [ 'disable' 'iff' '(' expr ')' ] body
    body     := seq [ ('|->' | '|=>') seq ]
    seq      := [ delay ] expr { delay expr }
    delay    := '##' num | '##' '[' num ':' num ']'
    expr     := and { '||' and }
    and      := cmp { '&&' cmp }
    cmp      := unary [ ('==' | '!=' | '<') unary ]
    unary    := '!' unary | primary
    primary  := ident [ '[' num ']' ] | literal | '(' expr ')'
              | '$past' '(' expr [ ',' num ] ')' | ('$stable' | '$rose' | '$fell' | '$isunknown') '(' expr ')'
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from atlas.errors import SvaSyntaxError, UnsupportedSvaFeature
from atlas.rtl.evaluate import EvalError, parse_literal

FUNCTIONS = ("$past", "$stable", "$rose", "$fell", "$isunknown")

# Words of the full assertion language that fall outside the subset.
UNSUPPORTED_WORDS = frozenset({
    "throughout", "within", "intersect", "and", "or", "not", "implies", "iff", "until",
    "s_until", "until_with", "s_until_with", "eventually", "s_eventually", "always",
    "s_always", "nexttime", "s_nexttime", "first_match", "if", "else", "case", "property",
    "sequence", "accept_on", "reject_on", "sync_accept_on", "sync_reject_on", "strong", "weak",
})

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d*\s*'[sS]?[bBoOdDhH]\s*[0-9a-fA-FxXzZ_?]+|\d[\d_]*)
  | (?P<sysid>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<id>[A-Za-z_][A-Za-z0-9_$]*)
  | (?P<op>\|->|\|=>|\[\*|\[=|\[->|\[\+\]|===|!==|==\?|!=\?|\#\#|&&|\|\||==|!=|<=|>=|<<|>>|->|<->|
         [()\[\]:,@!<>~&|^+\-*/%?{}=])
""", re.VERBOSE)

_SUPPORTED_OPS = frozenset({"|->", "|=>", "##", "&&", "||", "==", "!=", "<", "!",
                            "(", ")", "[", "]", ":", ",", "@"})


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[Tok]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SvaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append(Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(Tok("eof", "", len(text)))
    return out


# Expression nodes


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Const:
    text: str
    value: int | None  # None when the literal carries x/z bits


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    left: object
    right: object


@dataclass(frozen=True)
class Or:
    left: object
    right: object


@dataclass(frozen=True)
class Cmp:
    op: str  # '==', '!=' or '<'
    left: object
    right: object


@dataclass(frozen=True)
class Bit:
    name: str
    index: int


@dataclass(frozen=True)
class Func:
    name: str  # one of FUNCTIONS
    arg: object
    depth: int = 1  # only meaningful for $past


# Sequences and properties


@dataclass(frozen=True)
class Step:
    lo: int
    hi: int
    expr: object


@dataclass(frozen=True)
class Seq:
    steps: tuple[Step, ...]

    @property
    def span(self) -> int:
        return sum(s.hi for s in self.steps)


@dataclass(frozen=True)
class SvaProperty:
    consequent: Seq
    antecedent: Seq | None = None
    implication: str | None = None  # '|->' or '|=>'
    clock: tuple[str, str] | None = None  # (edge, name)
    disable: object | None = None

    def signals(self) -> set[str]:
        out = set()
        for e in self.expressions():
            out |= expr_signals(e)
        if self.clock:
            out.add(self.clock[1])
        return out

    def expressions(self) -> list:
        out = [s.expr for s in self.consequent.steps]
        if self.antecedent:
            out += [s.expr for s in self.antecedent.steps]
        if self.disable is not None:
            out.append(self.disable)
        return out


def expr_signals(e) -> set[str]:
    if isinstance(e, Ident):
        return {e.name}
    if isinstance(e, Bit):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, (Not, Func)):
        return expr_signals(e.arg)
    return expr_signals(e.left) | expr_signals(e.right)


def max_past_depth(e) -> int:
    if isinstance(e, Func):
        own = e.depth if e.name == "$past" else 1
        return max(own, max_past_depth(e.arg))
    if isinstance(e, Not):
        return max_past_depth(e.arg)
    if isinstance(e, (And, Or, Cmp)):
        return max(max_past_depth(e.left), max_past_depth(e.right))
    return 0


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def advance(self) -> Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "id")

    def unexpected(self, what: str):
        t = self.tok
        if t.kind == "op" and t.text not in _SUPPORTED_OPS:
            raise UnsupportedSvaFeature(t.text, t.pos)
        if t.kind == "id" and t.text in UNSUPPORTED_WORDS:
            raise UnsupportedSvaFeature(t.text, t.pos)
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise SvaSyntaxError(f"expected {what}, found {found}", t.pos)

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            self.unexpected(repr(text))
        return self.advance()

    def number(self) -> int:
        if self.tok.kind != "num" or not self.tok.text.replace("_", "").isdigit():
            self.unexpected("a decimal number")
        return int(self.advance().text.replace("_", ""))

    def ident(self) -> str:
        if self.tok.kind != "id" or self.tok.text in UNSUPPORTED_WORDS:
            self.unexpected("an identifier")
        return self.advance().text

    # property level

    def prop(self) -> SvaProperty:
        clock = None
        disable = None
        if self.at("@"):
            self.advance()
            self.expect("(")
            if self.tok.text not in ("posedge", "negedge"):
                self.unexpected("'posedge' or 'negedge'")
            edge = self.advance().text
            clock = (edge, self.ident())
            self.expect(")")
        if self.at("disable"):
            self.advance()
            self.expect("iff")
            self.expect("(")
            disable = self.expr()
            self.expect(")")
        first = self.seq()
        if self.tok.text in ("|->", "|=>"):
            imp = self.advance().text
            cons = self.seq()
            result = SvaProperty(cons, first, imp, clock, disable)
        else:
            result = SvaProperty(first, None, None, clock, disable)
        if self.tok.kind != "eof":
            self.unexpected("end of property")
        return result

    def delay(self) -> tuple[int, int]:
        self.expect("##")
        if self.at("["):
            self.advance()
            lo = self.number()
            self.expect(":")
            if self.tok.text == "$":
                raise UnsupportedSvaFeature("$", self.tok.pos)
            hi = self.number()
            self.expect("]")
            if hi < lo:
                raise SvaSyntaxError(f"empty delay range [{lo}:{hi}]", self.tok.pos)
            return lo, hi
        n = self.number()
        return n, n

    def seq(self) -> Seq:
        steps = []
        lo = hi = 0
        if self.at("##"):
            lo, hi = self.delay()
        steps.append(Step(lo, hi, self.expr()))
        while self.at("##"):
            lo, hi = self.delay()
            steps.append(Step(lo, hi, self.expr()))
        return Seq(tuple(steps))

    # expression level

    def expr(self):
        left = self.conj()
        while self.at("||"):
            self.advance()
            left = Or(left, self.conj())
        return left

    def conj(self):
        left = self.cmp()
        while self.at("&&"):
            self.advance()
            left = And(left, self.cmp())
        return left

    def cmp(self):
        left = self.unary()
        if self.tok.kind == "op" and self.tok.text in ("==", "!=", "<"):
            op = self.advance().text
            right = self.unary()
            if self.tok.kind == "op" and self.tok.text in ("==", "!=", "<"):
                raise SvaSyntaxError("comparisons do not chain; add parentheses", self.tok.pos)
            return Cmp(op, left, right)
        return left

    def unary(self):
        if self.at("!"):
            self.advance()
            return Not(self.unary())
        return self.primary()

    def primary(self):
        t = self.tok
        if t.kind == "num":
            self.advance()
            return _const(t)
        if t.kind == "sysid":
            return self.call()
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "id" and t.text not in UNSUPPORTED_WORDS:
            name = self.advance().text
            if self.at("["):
                self.advance()
                k = self.number()
                self.expect("]")
                return Bit(name, k)
            return Ident(name)
        self.unexpected("an expression")

    def call(self):
        t = self.advance()
        if t.text not in FUNCTIONS:
            raise UnsupportedSvaFeature(t.text, t.pos)
        self.expect("(")
        arg = self.expr()
        depth = 1
        if t.text == "$past" and self.at(","):
            self.advance()
            depth = self.number()
            if depth < 1:
                raise SvaSyntaxError("$past depth must be at least 1", t.pos)
        self.expect(")")
        return Func(t.text, arg, depth)


def _const(t: Tok) -> Const:
    text = re.sub(r"\s+", "", t.text)
    try:
        lit = parse_literal(text)
    except EvalError as exc:
        raise SvaSyntaxError(str(exc), t.pos) from None
    return Const(text, lit.val if lit.known else None)


def parse_sva_subset(text: str) -> SvaProperty:
    """Parse a property; raises SvaSyntaxError or UnsupportedSvaFeature with a character position."""
    return _Parser(text).prop()


def parse_sva_expr(text: str):
    """Parse a single boolean expression of the subset."""
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        p.unexpected("end of expression")
    return e


def parse_sva_seq(text: str) -> Seq:
    p = _Parser(text)
    s = p.seq()
    if p.tok.kind != "eof":
        p.unexpected("end of sequence")
    return s


# Rendering. Parenthesization is minimal but always reparses to the same tree.

_PREC = {Or: 1, And: 2, Cmp: 3, Not: 4}


def _prec(e) -> int:
    return _PREC.get(type(e), 5)


def render_expr(e) -> str:
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Const):
        return e.text
    if isinstance(e, Bit):
        return f"{e.name}[{e.index}]"
    if isinstance(e, Func):
        extra = f", {e.depth}" if e.name == "$past" and e.depth != 1 else ""
        return f"{e.name}({render_expr(e.arg)}{extra})"
    if isinstance(e, Not):
        inner = render_expr(e.arg)
        return "!" + (inner if _prec(e.arg) >= 4 else f"({inner})")
    if isinstance(e, (And, Or)):
        p = _prec(e)
        sym = "&&" if isinstance(e, And) else "||"
        left = render_expr(e.left)
        right = render_expr(e.right)
        if _prec(e.left) < p:
            left = f"({left})"
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {sym} {right}"
    if isinstance(e, Cmp):
        left = render_expr(e.left)
        right = render_expr(e.right)
        if _prec(e.left) <= 3:
            left = f"({left})"
        if _prec(e.right) <= 3:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not an SVA expression: {e!r}")


def _render_delay(lo: int, hi: int) -> str:
    return f"##{lo}" if lo == hi else f"##[{lo}:{hi}]"


def render_seq(s: Seq) -> str:
    parts = []
    for i, step in enumerate(s.steps):
        if i > 0 or (step.lo, step.hi) != (0, 0):
            parts.append(_render_delay(step.lo, step.hi))
        parts.append(render_expr(step.expr))
    return " ".join(parts)


def render_property(p: SvaProperty) -> str:
    parts = []
    if p.clock:
        parts.append(f"@({p.clock[0]} {p.clock[1]})")
    if p.disable is not None:
        parts.append(f"disable iff ({render_expr(p.disable)})")
    if p.antecedent is not None:
        parts += [render_seq(p.antecedent), p.implication]
    parts.append(render_seq(p.consequent))
    return " ".join(parts)
