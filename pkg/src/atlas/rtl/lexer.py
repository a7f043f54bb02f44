"""Tokenizer for the SystemVerilog subset and the SVA subset."""

from __future__ import annotations

import re
from dataclasses import dataclass

from atlas.errors import RtlSyntaxError

KEYWORDS = frozenset("""
    module endmodule input output inout wire logic reg bit int integer signed unsigned
    parameter localparam assign always always_ff always_comb always_latch begin end if else
    case casez casex endcase default posedge negedge or unique priority assert cover assume
    property disable iff bind
    class endclass function endfunction task endtask generate endgenerate initial typedef
    interface endinterface package endpackage for while repeat forever fork join program
    struct enum union import genvar
""".split())

# longest operators first so the alternation is greedy
_OPERATORS = sorted("""
    |-> |=> === !== <<< >>> ## :: <= >= == != && || << >> ~& ~| ~^ ^~ +: -: ->
    ( ) [ ] { } ; , . : ? @ # = + - * / % & | ^ ~ ! < > '
""".split(), key=len, reverse=True)

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<lcomment>//[^\n]*)"
    r"|(?P<bcomment>/\*.*?\*/)"
    r"|(?P<num>(?:\d[\d_]*)?'[sS]?[bBoOdDhH][0-9a-fA-FxXzZ_?]+|'[01xXzZ](?![\w])|\d[\d_]*)"
    r"|(?P<sysid>\$[A-Za-z_][A-Za-z0-9_$]*)"
    r"|(?P<id>[A-Za-z_][A-Za-z0-9_$]*)"
    r"|(?P<op>" + "|".join(re.escape(o) for o in _OPERATORS) + ")",
    re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # id, sysid, kw, num, op, eof
    text: str
    line: int
    col: int
    end_line: int
    end_col: int
    offset: int = 0

    def __str__(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None or (m.lastgroup == "op" and source.startswith("/*", pos)):
            col = pos - line_start + 1
            what = "unterminated comment" if m else f"unexpected character {source[pos]!r}"
            raise RtlSyntaxError(what, line, col)
        kind = m.lastgroup
        text = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind == "bcomment":
            breaks = text.count("\n")
            if breaks:
                line += breaks
                line_start = pos + text.rfind("\n") + 1
        elif kind not in ("ws", "lcomment"):
            if kind == "id" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, col, line, col + len(text) - 1, pos))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1, line, pos - line_start + 1, pos))
    return tokens
