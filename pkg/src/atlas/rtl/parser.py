"""Recursive-descent parser for the supported SystemVerilog subset.

Errors inside a module are recorded, the parser resynchronizes at the next
``;`` or ``end`` and the module is marked partial. :func:`parse_rtl` raises the
first recorded problem (carrying the partial tree); :func:`parse_rtl_lenient`
returns the tree with its diagnostics instead.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from atlas.errors import RtlSyntaxError, UnsupportedConstruct
from atlas.rtl.ast import Ast, Node, Span, base_name
from atlas.rtl.lexer import Token, tokenize

_BINARY_PREC = {
    "||": 1, "&&": 2, "|": 3, "^": 4, "~^": 4, "^~": 4, "&": 5,
    "==": 6, "!=": 6, "===": 6, "!==": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, "<<<": 8, ">>>": 8,
    "+": 9, "-": 9, "*": 10, "/": 10, "%": 10,
}
_UNARY = ("!", "~", "-", "+", "&", "|", "^", "~&", "~|", "~^")
_DIRECTIONS = ("input", "output", "inout")
_DATA_TYPES = ("wire", "logic", "reg", "bit", "int", "integer")
# unsupported constructs that come with a matching terminator
_BLOCK_ENDS = {
    "class": "endclass", "function": "endfunction", "task": "endtask",
    "generate": "endgenerate", "interface": "endinterface", "package": "endpackage",
}
_UNSUPPORTED_STMTS = ("for", "while", "repeat", "forever", "fork")


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int
    col: int
    construct: str | None = None

    def to_error(self, partial=None, diagnostics=None) -> RtlSyntaxError:
        if self.construct:
            return UnsupportedConstruct(self.construct, self.line, self.col, partial, diagnostics)
        return RtlSyntaxError(self.message, self.line, self.col, partial, diagnostics)


class _Abort(Exception):
    def __init__(self, diag: Diagnostic):
        super().__init__(diag.message)
        self.diag = diag


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens = tokenize(source)
        self.pos = 0
        self.diagnostics: list[Diagnostic] = []

    # -- token helpers ---------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, *texts: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text in texts

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def accept(self, *texts: str) -> Token | None:
        return self.advance() if self.at(*texts) else None

    def fail(self, message: str, tok: Token | None = None, construct: str | None = None):
        tok = tok or self.tok
        raise _Abort(Diagnostic(message, tok.line, tok.col, construct))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected '{text}' but found {self.tok}")
        return self.advance()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "id":
            self.fail(f"expected {what} but found {self.tok}")
        return self.advance()

    def span_from(self, start: Token) -> Span:
        last = self.tokens[max(self.pos - 1, 0)]
        return Span(start.line, start.col, last.end_line, last.end_col)

    def unsupported(self, construct: str, tok: Token | None = None):
        self.fail(f"unsupported construct '{construct}'", tok, construct)

    def skip_block(self, end_kw: str) -> None:
        while self.tok.kind != "eof" and not self.at(end_kw):
            self.advance()
        self.accept(end_kw)

    def resync(self) -> None:
        while self.tok.kind != "eof":
            if self.at(";", "end"):
                self.advance()
                return
            if self.at("endmodule"):
                return
            self.advance()

    # -- top level -------------------------------------------------------------

    def parse_source(self) -> Ast:
        start = self.tok
        items: list[Node] = []
        if start.kind == "eof":
            raise RtlSyntaxError("expected 'module'", 1, 1, None, [])
        while self.tok.kind != "eof":
            t = self.tok
            try:
                if self.at("module"):
                    items.append(self.parse_module())
                elif self.at("bind"):
                    items.append(self.parse_bind())
                elif t.kind == "kw" and t.text in _BLOCK_ENDS:
                    self.diagnostics.append(
                        Diagnostic(f"unsupported construct '{t.text}'", t.line, t.col, t.text))
                    self.skip_block(_BLOCK_ENDS[t.text])
                elif t.kind == "kw" and t.text in ("typedef", "import", "program"):
                    self.unsupported(t.text)
                else:
                    self.fail(f"expected 'module' but found {t}")
            except _Abort as exc:
                self.diagnostics.append(exc.diag)
                while self.tok.kind != "eof" and not self.at("module", "bind"):
                    self.advance()
        root = Node("Source", {}, tuple(items), self.span_from(start))
        return Ast(root, tuple(self.diagnostics))

    def parse_bind(self) -> Node:
        start = self.expect("bind")
        target = self.expect_ident("bind target").text
        inst = self.parse_instance()
        return Node("Bind", {"target": target}, (inst,), self.span_from(start))

    # -- modules ---------------------------------------------------------------

    def parse_module(self) -> Node:
        start = self.expect("module")
        name = self.expect_ident("module name").text
        n_diag = len(self.diagnostics)
        header: list[Node] = []
        if self.accept("#"):
            header.extend(self.parse_header_params())
        ports: list[Node] = []
        if self.accept("("):
            if not self.at(")"):
                ports = self.parse_port_list()
            self.expect(")")
        self.expect(";")
        items: list[Node] = []
        while not self.at("endmodule"):
            if self.tok.kind == "eof":
                self.diagnostics.append(Diagnostic("expected 'endmodule' but found end of input",
                                                   self.tok.line, self.tok.col))
                break
            try:
                items.extend(self.parse_module_item())
            except _Abort as exc:
                self.diagnostics.append(exc.diag)
                self.resync()
        self.accept("endmodule")
        if self.accept(":"):
            self.expect_ident()
        partial = len(self.diagnostics) > n_diag
        children = _classify_storage(header + ports + items)
        return Node("Module", {"name": name, "partial": partial}, tuple(children),
                    self.span_from(start))

    def parse_header_params(self) -> list[Node]:
        self.expect("(")
        out: list[Node] = []
        while True:
            self.accept("parameter")
            out.extend(self.parse_param_body("Param", header=True, single=True))
            if not self.accept(","):
                break
        self.expect(")")
        return out

    def parse_port_list(self) -> list[Node]:
        if self.tok.kind == "id":
            self.unsupported("non-ANSI port list")
        out: list[Node] = []
        direction = dtype = None
        signed = False
        rng: tuple = ()
        while True:
            start = self.tok
            if self.at(*_DIRECTIONS):
                direction = self.advance().text
                dtype, signed, rng = self.parse_type(allow_empty=True)
            elif direction is None:
                self.fail(f"expected port direction but found {self.tok}")
            name = self.expect_ident("port name")
            if self.at("["):
                self.unsupported("unpacked array")
            attrs = {"name": name.text, "direction": direction, "type": dtype,
                     "signed": signed, "ranged": bool(rng)}
            out.append(Node("Port", attrs, rng, self.span_from(start)))
            if not self.accept(","):
                return out

    def parse_type(self, allow_empty: bool) -> tuple[str, bool, tuple]:
        dtype = ""
        if self.at(*_DATA_TYPES):
            dtype = self.advance().text
        elif not allow_empty:
            self.fail(f"expected a data type but found {self.tok}")
        signed = bool(self.accept("signed"))
        self.accept("unsigned")
        rng: tuple = ()
        if self.at("["):
            self.advance()
            msb = self.parse_expr()
            self.expect(":")
            lsb = self.parse_expr()
            self.expect("]")
            rng = (msb, lsb)
        return dtype, signed, rng

    def parse_module_item(self) -> list[Node]:
        t = self.tok
        if t.kind == "kw":
            if t.text in _DIRECTIONS:
                self.unsupported("non-ANSI port declaration")
            if t.text in _DATA_TYPES:
                return self.parse_decl()
            if t.text in ("parameter", "localparam"):
                self.advance()
                kind = "Param" if t.text == "parameter" else "LocalParam"
                nodes = self.parse_param_body(kind, header=False, single=False)
                self.expect(";")
                return nodes
            if t.text == "assign":
                return self.parse_continuous_assign()
            if t.text in ("always", "always_ff", "always_comb", "always_latch"):
                return [self.parse_always()]
            if t.text in ("assert", "cover", "assume"):
                return [self.parse_property_stmt(None)]
            if t.text in _BLOCK_ENDS:
                self.diagnostics.append(
                    Diagnostic(f"unsupported construct '{t.text}'", t.line, t.col, t.text))
                self.skip_block(_BLOCK_ENDS[t.text])
                return []
            if t.text == "initial":
                self.advance()
                self.diagnostics.append(
                    Diagnostic("unsupported construct 'initial'", t.line, t.col, "initial"))
                self.parse_statement()
                return []
            self.unsupported(t.text)
        if t.kind == "id":
            nxt = self.peek()
            if nxt.kind == "op" and nxt.text == ":" and self.peek(2).text in ("assert", "cover", "assume"):
                self.advance()
                self.advance()
                return [self.parse_property_stmt(t.text, start=t)]
            if nxt.kind == "id" and self.peek(2).text in (";", ","):
                self.unsupported("user-defined type", t)
            if nxt.kind == "id" or (nxt.kind == "op" and nxt.text == "#"):
                return [self.parse_instance()]
        self.fail(f"unexpected {t} in module body")

    def parse_decl(self) -> list[Node]:
        start = self.tok
        dtype, signed, rng = self.parse_type(allow_empty=False)
        out: list[Node] = []
        while True:
            name = self.expect_ident("signal name")
            if self.at("["):
                self.unsupported("unpacked array")
            if self.at("="):
                self.unsupported("declaration initializer")
            attrs = {"name": name.text, "type": dtype, "signed": signed, "ranged": bool(rng)}
            # the storage class is settled once the whole module body is known
            out.append(Node("NetDecl", attrs, rng, Span(start.line, start.col, name.end_line, name.end_col)))
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def parse_param_body(self, kind: str, header: bool, single: bool) -> list[Node]:
        start = self.tok
        dtype, signed, rng = "", False, ()
        if self.at(*_DATA_TYPES) or self.at("signed", "["):
            dtype, signed, rng = self.parse_type(allow_empty=True)
        out: list[Node] = []
        while True:
            name = self.expect_ident("parameter name")
            self.expect("=")
            value = self.parse_expr()
            attrs = {"name": name.text, "type": dtype, "signed": signed,
                     "ranged": bool(rng), "header": header}
            out.append(Node(kind, attrs, rng + (value,), self.span_from(start)))
            if single or not self.at(",") or self.peek().kind != "id":
                return out
            self.advance()

    def parse_continuous_assign(self) -> list[Node]:
        self.expect("assign")
        out = []
        while True:
            start = self.tok
            lhs = self.parse_lvalue()
            self.expect("=")
            rhs = self.parse_expr()
            out.append(Node("Assign", {"style": "continuous"}, (lhs, rhs), self.span_from(start)))
            if not self.accept(","):
                break
        self.expect(";")
        return out

    def parse_always(self) -> Node:
        start = self.advance()
        keyword = start.text
        sens: tuple = ()
        if self.accept("@"):
            if self.accept("*"):
                sens = ("*",)
            else:
                self.expect("(")
                if self.accept("*"):
                    sens = ("*",)
                else:
                    items = []
                    while True:
                        edge = ""
                        if self.at("posedge", "negedge"):
                            edge = self.advance().text
                        items.append((edge, self.expect_ident("sensitivity signal").text))
                        if not (self.accept("or") or self.accept(",")):
                            break
                    sens = tuple(items)
                self.expect(")")
        elif keyword in ("always", "always_ff"):
            self.fail(f"expected '@' after '{keyword}'")
        body = self.parse_statement()
        return Node("AlwaysBlock", {"keyword": keyword, "sensitivity": sens}, (body,),
                    self.span_from(start))

    def parse_instance(self) -> Node:
        start = self.tok
        module = self.expect_ident("module name").text
        param_names: list[str] = []
        exprs: list[Node] = []
        if self.accept("#"):
            self.expect("(")
            while not self.at(")"):
                self.expect(".")
                param_names.append(self.expect_ident("parameter name").text)
                self.expect("(")
                exprs.append(self.parse_expr())
                self.expect(")")
                if not self.accept(","):
                    break
            self.expect(")")
        name = self.expect_ident("instance name").text
        self.expect("(")
        ports: list[str] = []
        wildcard = False
        while not self.at(")"):
            self.expect(".")
            if self.accept("*"):
                wildcard = True
            else:
                ports.append(self.expect_ident("port name").text)
                lparen = self.expect("(")
                # `.port()` leaves the port unconnected
                exprs.append(Node("Null", {}, (), self.span_from(lparen)) if self.at(")") else self.parse_expr())
                self.expect(")")
            if not self.accept(","):
                break
        self.expect(")")
        self.expect(";")
        attrs = {"module": module, "name": name, "params": tuple(param_names),
                 "ports": tuple(ports), "wildcard": wildcard}
        return Node("InstanceDecl", attrs, tuple(exprs), self.span_from(start))

    def parse_property_stmt(self, label: str | None, start: Token | None = None) -> Node:
        kw = self.advance()
        start = start or kw
        self.expect("property")
        open_tok = self.expect("(")
        depth = 1
        while depth:
            t = self.advance()
            if t.kind == "eof":
                self.fail("unterminated property body", open_tok)
            if t.kind == "op" and t.text == "(":
                depth += 1
            elif t.kind == "op" and t.text == ")":
                depth -= 1
        close = self.tokens[self.pos - 1]
        text = " ".join(self.source[open_tok.offset + 1:close.offset].split())
        if not text:
            self.fail("empty property body", open_tok)
        self.expect(";")
        attrs = {"directive": kw.text, "label": label, "text": text}
        return Node("PropertyStmt", attrs, (), self.span_from(start))

    # -- statements ------------------------------------------------------------

    def parse_statement(self) -> Node:
        start = self.tok
        if self.accept(";"):
            return Node("Null", {}, (), self.span_from(start))
        if self.accept("begin"):
            label = self.expect_ident("block label").text if self.accept(":") else None
            body = []
            while not self.at("end"):
                if self.tok.kind == "eof":
                    self.fail("expected 'end' but found end of input")
                body.append(self.parse_statement())
            self.expect("end")
            if self.accept(":"):
                self.expect_ident("block label")
            return Node("Block", {"label": label}, tuple(body), self.span_from(start))
        if self.accept("if"):
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            then = self.parse_statement()
            if self.accept("else"):
                other = self.parse_statement()
                return Node("IfStmt", {"has_else": True}, (cond, then, other), self.span_from(start))
            return Node("IfStmt", {"has_else": False}, (cond, then), self.span_from(start))
        if self.at("unique", "priority", "case", "casez", "casex"):
            return self.parse_case()
        if self.tok.kind == "kw" and self.tok.text in _UNSUPPORTED_STMTS:
            self.unsupported(self.tok.text)
        lhs = self.parse_lvalue()
        if self.accept("<="):
            style = "nonblocking"
        elif self.accept("="):
            style = "blocking"
        else:
            self.fail(f"expected '=' or '<=' but found {self.tok}")
        rhs = self.parse_expr()
        self.expect(";")
        return Node("Assign", {"style": style}, (lhs, rhs), self.span_from(start))

    def parse_case(self) -> Node:
        start = self.tok
        qualifier = ""
        if self.at("unique", "priority"):
            qualifier = self.advance().text
        if not self.at("case", "casez", "casex"):
            self.fail(f"expected 'case' but found {self.tok}")
        keyword = self.advance().text
        self.expect("(")
        subject = self.parse_expr()
        self.expect(")")
        items: list[Node] = []
        while not self.at("endcase"):
            if self.tok.kind == "eof":
                self.fail("expected 'endcase' but found end of input")
            item_start = self.tok
            if self.accept("default"):
                self.accept(":")
                body = self.parse_statement()
                items.append(Node("CaseItem", {"default": True}, (body,), self.span_from(item_start)))
                continue
            labels = [self.parse_expr()]
            while self.accept(","):
                labels.append(self.parse_expr())
            self.expect(":")
            body = self.parse_statement()
            items.append(Node("CaseItem", {"default": False}, tuple(labels) + (body,),
                              self.span_from(item_start)))
        self.expect("endcase")
        attrs = {"keyword": keyword, "qualifier": qualifier}
        return Node("CaseStmt", attrs, (subject, *items), self.span_from(start))

    # -- expressions -----------------------------------------------------------

    def parse_lvalue(self) -> Node:
        start = self.tok
        if self.at("{"):
            return self.parse_primary()
        name = self.expect_ident("assignment target")
        node = Node("Expr", {"op": "id", "name": name.text}, (), self.span_from(start))
        return self.parse_selects(node, start)

    def parse_expr(self) -> Node:
        start = self.tok
        cond = self.parse_binary(1)
        if self.accept("?"):
            a = self.parse_expr()
            self.expect(":")
            b = self.parse_expr()
            return Node("Expr", {"op": "cond"}, (cond, a, b), self.span_from(start))
        return cond

    def parse_binary(self, min_prec: int) -> Node:
        start = self.tok
        left = self.parse_unary()
        while self.tok.kind == "op" and _BINARY_PREC.get(self.tok.text, 0) >= min_prec:
            op = self.advance().text
            right = self.parse_binary(_BINARY_PREC[op] + 1)
            left = Node("Expr", {"op": "binary", "sym": op}, (left, right), self.span_from(start))
        return left

    def parse_unary(self) -> Node:
        start = self.tok
        if self.tok.kind == "op" and self.tok.text in _UNARY:
            sym = self.advance().text
            operand = self.parse_unary()
            return Node("Expr", {"op": "unary", "sym": sym}, (operand,), self.span_from(start))
        return self.parse_primary()

    def parse_primary(self) -> Node:
        start = self.tok
        t = self.tok
        if t.kind == "num":
            self.advance()
            node = Node("Expr", {"op": "num", "text": t.text}, (), self.span_from(start))
        elif t.kind == "id":
            self.advance()
            if self.at("("):
                self.unsupported("function call", t)
            node = Node("Expr", {"op": "id", "name": t.text}, (), self.span_from(start))
        elif t.kind == "sysid":
            self.advance()
            args: list[Node] = []
            if self.accept("("):
                if not self.at(")"):
                    args.append(self.parse_expr())
                    while self.accept(","):
                        args.append(self.parse_expr())
                self.expect(")")
            node = Node("Expr", {"op": "call", "name": t.text}, tuple(args), self.span_from(start))
        elif self.accept("("):
            inner = self.parse_expr()
            self.expect(")")
            node = Node("Expr", {"op": "paren"}, (inner,), self.span_from(start))
        elif self.accept("{"):
            first = self.parse_expr()
            if self.at("{"):
                self.advance()
                items = [self.parse_expr()]
                while self.accept(","):
                    items.append(self.parse_expr())
                self.expect("}")
                self.expect("}")
                inner = Node("Expr", {"op": "concat"}, tuple(items), self.span_from(start))
                return Node("Expr", {"op": "repl"}, (first, inner), self.span_from(start))
            items = [first]
            while self.accept(","):
                items.append(self.parse_expr())
            self.expect("}")
            node = Node("Expr", {"op": "concat"}, tuple(items), self.span_from(start))
        else:
            self.fail(f"expected an expression but found {t}")
        return self.parse_selects(node, start)

    def parse_selects(self, node: Node, start: Token) -> Node:
        while self.at("["):
            self.advance()
            first = self.parse_expr()
            if self.at("+:", "-:"):
                self.unsupported("indexed part-select")
            if self.accept(":"):
                second = self.parse_expr()
                self.expect("]")
                node = Node("Expr", {"op": "range"}, (node, first, second), self.span_from(start))
            else:
                self.expect("]")
                node = Node("Expr", {"op": "index"}, (node, first), self.span_from(start))
        return node


def _edge_assigned(items: list[Node]) -> set[str]:
    out: set[str] = set()
    for item in items:
        if item.kind != "AlwaysBlock":
            continue
        if not any(edge for edge, *_ in item["sensitivity"] if edge in ("posedge", "negedge")):
            continue
        for node in item.walk():
            if node.kind == "Assign":
                name = base_name(node.children[0])
                if name:
                    out.add(name)
    return out


def _classify_storage(items: list[Node]) -> list[Node]:
    """Settle RegDecl vs NetDecl: ``reg`` or an edge-triggered target is a register."""
    flops = _edge_assigned(items)
    out = []
    for item in items:
        if item.kind == "NetDecl":
            is_reg = item["type"] == "reg" or (item["type"] != "wire" and item["name"] in flops)
            if is_reg:
                item = replace(item, kind="RegDecl")
        out.append(item)
    return out


def parse_rtl_lenient(source: str) -> Ast:
    """Parse, returning whatever was recovered together with the diagnostics."""
    parser = Parser(source)
    try:
        return parser.parse_source()
    except _Abort as exc:  # pragma: no cover - parse_source handles every abort
        raise exc.diag.to_error(None, parser.diagnostics) from None


def parse_rtl(source: str) -> Ast:
    """Parse source text; any recorded problem is raised with the partial tree attached."""
    ast = parse_rtl_lenient(source)
    if ast.diagnostics:
        first = ast.diagnostics[0]
        raise first.to_error(ast, list(ast.diagnostics))
    return ast
