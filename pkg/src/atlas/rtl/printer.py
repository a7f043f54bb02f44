"""Pretty-printer; its output reparses to a structurally equal tree."""

from __future__ import annotations

from atlas.rtl.ast import Ast, Node

_IND = "  "


def print_expr(e: Node) -> str:
    op = e["op"]
    ch = e.children
    if op == "id":
        return e["name"]
    if op == "num":
        return e["text"]
    if op == "paren":
        return f"({print_expr(ch[0])})"
    if op == "unary":
        inner = print_expr(ch[0])
        # keep `~ &x` from lexing as the `~&` operator
        sep = " " if inner[:1] in "!~-+&|^" else ""
        return f"{e['sym']}{sep}{inner}"
    if op == "binary":
        return f"{print_expr(ch[0])} {e['sym']} {print_expr(ch[1])}"
    if op == "cond":
        return f"{print_expr(ch[0])} ? {print_expr(ch[1])} : {print_expr(ch[2])}"
    if op == "index":
        return f"{print_expr(ch[0])}[{print_expr(ch[1])}]"
    if op == "range":
        return f"{print_expr(ch[0])}[{print_expr(ch[1])}:{print_expr(ch[2])}]"
    if op == "concat":
        return "{" + ", ".join(print_expr(c) for c in ch) + "}"
    if op == "repl":
        return "{" + print_expr(ch[0]) + print_expr(ch[1]) + "}"
    if op == "call":
        return f"{e['name']}(" + ", ".join(print_expr(c) for c in ch) + ")"
    raise ValueError(f"unknown expression op {op!r}")


def _type_prefix(node: Node, n_range: int = 2) -> str:
    parts = []
    if node.get("type"):
        parts.append(node["type"])
    if node.get("signed"):
        parts.append("signed")
    if node.get("ranged"):
        msb, lsb = node.children[:n_range]
        parts.append(f"[{print_expr(msb)}:{print_expr(lsb)}]")
    return " ".join(parts)


def _param(node: Node) -> str:
    prefix = _type_prefix(node)
    value = print_expr(node.children[-1])
    return f"{prefix + ' ' if prefix else ''}{node['name']} = {value}"


def _attach(head: str, s: Node, depth: int) -> list[str]:
    """Hang statement ``s`` off a header line such as ``if (...)`` or ``else``."""
    if s.kind == "Block":
        lines = _stmt(s, depth)
        return [head + " " + lines[0].lstrip(), *lines[1:]]
    return [head, *_stmt(s, depth + 1)]


def _stmt(s: Node, depth: int) -> list[str]:
    pad = _IND * depth
    if s.kind == "Null":
        return [pad + ";"]
    if s.kind == "Assign":
        sym = "<=" if s["style"] == "nonblocking" else "="
        return [f"{pad}{print_expr(s.children[0])} {sym} {print_expr(s.children[1])};"]
    if s.kind == "Block":
        head = pad + "begin" + (f" : {s['label']}" if s["label"] else "")
        body = [line for c in s.children for line in _stmt(c, depth + 1)]
        return [head, *body, pad + "end"]
    if s.kind == "IfStmt":
        out = _attach(f"{pad}if ({print_expr(s.children[0])})", s.children[1], depth)
        if s["has_else"]:
            other = s.children[2]
            if other.kind == "IfStmt":
                chained = _stmt(other, depth)
                out += [f"{pad}else {chained[0].lstrip()}", *chained[1:]]
            else:
                out += _attach(pad + "else", other, depth)
        return out
    if s.kind == "CaseStmt":
        head = (s["qualifier"] + " " if s["qualifier"] else "") + s["keyword"]
        out = [f"{pad}{head} ({print_expr(s.children[0])})"]
        for item in s.children[1:]:
            label = "default" if item["default"] else ", ".join(print_expr(x) for x in item.children[:-1])
            out += _attach(f"{pad}{_IND}{label}:", item.children[-1], depth + 1)
        out.append(pad + "endcase")
        return out
    raise ValueError(f"not a statement: {s.kind}")


def _instance(n: Node) -> str:
    params = n["params"]
    exprs = n.children
    text = n["module"]
    if params:
        pairs = ", ".join(f".{p}({print_expr(e)})" for p, e in zip(params, exprs))
        text += f" #({pairs})"
    conns = [f".{p}({'' if e.kind == 'Null' else print_expr(e)})" for p, e in zip(n["ports"], exprs[len(params):])]
    if n["wildcard"]:
        conns.append(".*")
    return f"{text} {n['name']} ({', '.join(conns)});"


def _item(n: Node, depth: int) -> list[str]:
    pad = _IND * depth
    if n.kind in ("NetDecl", "RegDecl"):
        return [f"{pad}{_type_prefix(n)} {n['name']};"]
    if n.kind == "Param":
        return [f"{pad}parameter {_param(n)};"]
    if n.kind == "LocalParam":
        return [f"{pad}localparam {_param(n)};"]
    if n.kind == "Assign":
        return [f"{pad}assign {print_expr(n.children[0])} = {print_expr(n.children[1])};"]
    if n.kind == "AlwaysBlock":
        sens = n["sensitivity"]
        head = pad + n["keyword"]
        if sens == ("*",):
            head += " @(*)"
        elif sens:
            head += " @(" + " or ".join(f"{e} {s}".strip() for e, s in sens) + ")"
        return _attach(head, n.children[0], depth)
    if n.kind == "InstanceDecl":
        return [pad + _instance(n)]
    if n.kind == "PropertyStmt":
        label = f"{n['label']}: " if n["label"] else ""
        return [f"{pad}{label}{n['directive']} property ({n['text']});"]
    raise ValueError(f"not a module item: {n.kind}")


def print_module(m: Node) -> str:
    header = [c for c in m.children if c.kind == "Param" and c.get("header")]
    ports = [c for c in m.children if c.kind == "Port"]
    items = [c for c in m.children if c not in header and c.kind != "Port"]
    lines = [f"module {m['name']}"]
    if header:
        lines[-1] += " #("
        lines += [f"{_IND}parameter {_param(p)}{',' if i < len(header) - 1 else ''}"
                  for i, p in enumerate(header)]
        lines.append(")")
    if ports:
        lines[-1] += " ("
        for i, p in enumerate(ports):
            prefix = _type_prefix(p)
            sep = "," if i < len(ports) - 1 else ""
            lines.append(f"{_IND}{p['direction']} {prefix + ' ' if prefix else ''}{p['name']}{sep}")
        lines.append(");")
    else:
        lines[-1] += ";"
    for it in items:
        lines += _item(it, 1)
    lines.append("endmodule")
    return "\n".join(lines)


def print_ast(ast: Ast | Node) -> str:
    root = ast.root if isinstance(ast, Ast) else ast
    chunks = []
    for n in root.children:
        if n.kind == "Module":
            chunks.append(print_module(n))
        elif n.kind == "Bind":
            chunks.append(f"bind {n['target']} {_instance(n.children[0])}")
    return "\n\n".join(chunks) + "\n"
