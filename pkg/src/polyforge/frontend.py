"""Lexer, parser, and AST for the mini-JS subset.

The grammar is a closed subset: anything recognizably ECMAScript but outside
the subset raises :class:`UnsupportedSyntax` instead of being best-effort
parsed.  Semicolons are mandatory (no ASI).  Every conditional construct
(if, while, for, ?:, ``&&``/``||``) gets a unique branch-site id assigned in
parse order, so identical source always yields identical ids.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .values import js_number_to_string


class ParseError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class UnsupportedSyntax(ParseError):
    def __init__(self, line: int, col: int, construct: str):
        super().__init__(line, col, f"unsupported construct: {construct}")
        self.construct = construct


# --- AST ------------------------------------------------------------------

_NODE_FIELDS = {
    "program": ("body",),
    "block": ("body",),
    "var": ("decl_kind", "decls"),          # decls: list[(name, init|None)]
    "func": ("name", "params", "body"),     # body: block node
    "funcdecl": ("name", "params", "body"),
    "exprstmt": ("expr",),
    "empty": (),
    "if": ("test", "then", "els"),
    "while": ("test", "body"),
    "for": ("init", "test", "update", "body"),
    "forin": ("decl_kind", "var", "obj", "body"),
    "forof": ("decl_kind", "var", "obj", "body"),
    "return": ("value",),
    "throw": ("value",),
    "trycatch": ("block", "param", "handler"),
    "num": ("value",),
    "str": ("value",),
    "bool": ("value",),
    "null": (),
    "this": (),
    "ident": ("name",),
    "array": ("elements",),
    "object": ("props",),                   # props: list[(key, expr)]
    "unary": ("op", "operand"),
    "typeof": ("operand",),
    "delete": ("target",),
    "binary": ("op", "left", "right"),
    "assign": ("target", "value"),
    "cond": ("test", "then", "els"),
    "member": ("obj", "name"),
    "index": ("obj", "expr"),
    "call": ("callee", "args"),
    "new": ("callee", "args"),
}


class Node:
    """Generic AST node; ``kind`` selects which attributes are meaningful."""

    __slots__ = ("kind", "span", "site", "attrs")

    def __init__(self, kind: str, span: tuple[int, int], site: Optional[int] = None, **attrs):
        assert kind in _NODE_FIELDS, kind
        self.kind = kind
        self.span = span
        self.site = site
        self.attrs = attrs

    def __getattr__(self, name):
        try:
            return self.attrs[name]
        except KeyError:
            raise AttributeError(name) from None

    def __eq__(self, other):
        if not isinstance(other, Node):
            return NotImplemented
        return (self.kind == other.kind and self.site == other.site
                and self.attrs == other.attrs)

    def __hash__(self):
        return hash((self.kind, self.site))

    def __repr__(self):
        return f"Node({self.kind}, {self.attrs!r})"

    def children(self):
        for v in self.attrs.values():
            if isinstance(v, Node):
                yield v
            elif isinstance(v, (list, tuple)):
                for item in v:
                    if isinstance(item, Node):
                        yield item
                    elif isinstance(item, tuple):
                        for sub in item:
                            if isinstance(sub, Node):
                                yield sub


Ast = Node


# --- Lexer ----------------------------------------------------------------

KEYWORDS = {
    "var", "let", "const", "function", "return", "if", "else", "while",
    "for", "in", "of", "new", "delete", "typeof", "throw", "try", "catch",
    "true", "false", "null", "this",
}

UNSUPPORTED_KEYWORDS = {
    "class", "with", "switch", "case", "do", "instanceof", "yield",
    "await", "import", "export", "extends", "super", "finally", "void",
    "break", "continue", "default",
}

PUNCT = [
    ">>>=", "===", "!==", ">>>", "<<=", ">>=", "&&", "||", "==", "!=",
    "<=", ">=", "<<", ">>", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "=>", "...", "{", "}", "(", ")", "[", "]", ";", ",",
    ".", "<", ">", "+", "-", "*", "/", "%", "&", "|", "^", "~", "!", "?",
    ":", "=",
]

_NUM_RE = re.compile(r"0[xX][0-9a-fA-F]+|(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


@dataclass
class Token:
    type: str  # "num" | "str" | "ident" | "keyword" | "punct" | "eof"
    value: Any
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    prev_significant: Optional[Token] = None

    def advance(text: str):
        nonlocal line, col
        for ch in text:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance(ch)
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            advance(source[i:j])
            i = j
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise ParseError(line, col, "unterminated comment")
            advance(source[i:j + 2])
            i = j + 2
            continue
        start_line, start_col = line, col
        if ch == "`":
            raise UnsupportedSyntax(line, col, "template string")
        if ch in "'\"":
            value, consumed = _read_string(source, i, line, col)
            tokens.append(Token("str", value, start_line, start_col))
            advance(source[i:i + consumed])
            i += consumed
            prev_significant = tokens[-1]
            continue
        m = _NUM_RE.match(source, i) if (ch.isdigit() or ch == ".") else None
        if m:
            text = m.group()
            value = float(int(text, 16)) if text[:2].lower() == "0x" else float(text)
            tokens.append(Token("num", value, start_line, start_col))
            advance(text)
            i = m.end()
            prev_significant = tokens[-1]
            continue
        m = _IDENT_RE.match(source, i)
        if m:
            name = m.group()
            if name in UNSUPPORTED_KEYWORDS:
                raise UnsupportedSyntax(line, col, name)
            kind = "keyword" if name in KEYWORDS else "ident"
            tokens.append(Token(kind, name, start_line, start_col))
            advance(name)
            i = m.end()
            prev_significant = tokens[-1]
            continue
        if ch == "/" and _regex_position(prev_significant):
            raise UnsupportedSyntax(line, col, "regex literal")
        for p in PUNCT:
            if source.startswith(p, i):
                if p in ("++", "--", "+=", "-=", "*=", "/=", "%=", "&=",
                         "|=", "^=", "<<=", ">>=", ">>>=", "=>", "..."):
                    raise UnsupportedSyntax(line, col, p)
                tokens.append(Token("punct", p, start_line, start_col))
                advance(p)
                i += len(p)
                prev_significant = tokens[-1]
                break
        else:
            raise ParseError(line, col, f"unexpected character {ch!r}")
    tokens.append(Token("eof", None, line, col))
    return tokens


def _regex_position(prev: Optional[Token]) -> bool:
    """True when a '/' here would start a regex literal in real ECMAScript."""
    if prev is None:
        return True
    if prev.type in ("num", "str"):
        return False
    if prev.type == "ident":
        return False
    if prev.type == "keyword":
        return prev.value not in ("this", "true", "false", "null")
    return prev.value not in (")", "]", "}")


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f",
            "v": "\v", "0": "\0", "\\": "\\", "'": "'", '"': '"', "/": "/"}


def _read_string(source: str, i: int, line: int, col: int) -> tuple[str, int]:
    quote = source[i]
    j = i + 1
    out = []
    while j < len(source):
        ch = source[j]
        if ch == quote:
            return "".join(out), j - i + 1
        if ch == "\n":
            raise ParseError(line, col, "unterminated string")
        if ch == "\\":
            if j + 1 >= len(source):
                raise ParseError(line, col, "unterminated string")
            esc = source[j + 1]
            if esc == "u":
                if source[j + 2:j + 3] == "{":
                    raise UnsupportedSyntax(line, col, "extended unicode escape")
                hexs = source[j + 2:j + 6]
                if len(hexs) < 4 or not re.fullmatch(r"[0-9a-fA-F]{4}", hexs):
                    raise ParseError(line, col, "bad unicode escape")
                out.append(chr(int(hexs, 16)))
                j += 6
                continue
            if esc == "x":
                hexs = source[j + 2:j + 4]
                if not re.fullmatch(r"[0-9a-fA-F]{2}", hexs):
                    raise ParseError(line, col, "bad hex escape")
                out.append(chr(int(hexs, 16)))
                j += 4
                continue
            out.append(_ESCAPES.get(esc, esc))
            j += 2
            continue
        out.append(ch)
        j += 1
    raise ParseError(line, col, "unterminated string")


# --- Parser ---------------------------------------------------------------

# binary operator precedence (higher binds tighter)
_BINOPS = {
    "||": 1, "&&": 2,
    "|": 3, "^": 4, "&": 5,
    "==": 6, "!=": 6, "===": 6, "!==": 6,
    "<": 7, "<=": 7, ">": 7, ">=": 7,
    "<<": 8, ">>": 8, ">>>": 8,
    "+": 9, "-": 9,
    "*": 10, "/": 10, "%": 10,
}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.next_site = 0

    # -- token helpers

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, type_: str, value=None) -> bool:
        t = self.peek()
        return t.type == type_ and (value is None or t.value == value)

    def take(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, type_: str, value=None) -> Token:
        t = self.peek()
        if not self.at(type_, value):
            want = value or type_
            raise ParseError(t.line, t.col, f"expected {want!r}, got {t.value!r}")
        return self.take()

    def span(self) -> tuple[int, int]:
        t = self.peek()
        return (t.line, t.col)

    def new_site(self) -> int:
        s = self.next_site
        self.next_site += 1
        return s

    # -- statements

    def parse_program(self) -> Node:
        body = []
        while not self.at("eof"):
            body.append(self.statement())
        return Node("program", (1, 1), body=body)

    def statement(self) -> Node:
        t = self.peek()
        sp = (t.line, t.col)
        if t.type == "punct" and t.value == "{":
            return self.block()
        if t.type == "punct" and t.value == ";":
            self.take()
            return Node("empty", sp)
        if t.type == "keyword":
            kw = t.value
            if kw in ("var", "let", "const"):
                node = self.var_decl()
                self.expect("punct", ";")
                return node
            if kw == "function":
                return self.function(declaration=True)
            if kw == "if":
                return self.if_stmt()
            if kw == "while":
                return self.while_stmt()
            if kw == "for":
                return self.for_stmt()
            if kw == "return":
                self.take()
                value = None
                if not self.at("punct", ";"):
                    value = self.expression()
                self.expect("punct", ";")
                return Node("return", sp, value=value)
            if kw == "throw":
                self.take()
                value = self.expression()
                self.expect("punct", ";")
                return Node("throw", sp, value=value)
            if kw == "try":
                return self.try_stmt()
        # labeled statements are excluded from the subset
        if t.type == "ident" and self.peek(1).type == "punct" and self.peek(1).value == ":":
            raise UnsupportedSyntax(t.line, t.col, "labeled statement")
        expr = self.expression()
        self.expect("punct", ";")
        return Node("exprstmt", sp, expr=expr)

    def block(self) -> Node:
        sp = self.span()
        self.expect("punct", "{")
        body = []
        while not self.at("punct", "}"):
            if self.at("eof"):
                raise ParseError(*sp, "unterminated block")
            body.append(self.statement())
        self.take()
        return Node("block", sp, body=body)

    def var_decl(self) -> Node:
        sp = self.span()
        kind = self.take().value
        decls = []
        while True:
            name = self.expect("ident").value
            init = None
            if self.at("punct", "="):
                self.take()
                init = self.assignment()
            decls.append((name, init))
            if self.at("punct", ","):
                self.take()
                continue
            break
        return Node("var", sp, decl_kind=kind, decls=decls)

    def function(self, declaration: bool) -> Node:
        sp = self.span()
        self.expect("keyword", "function")
        name = ""
        if self.at("ident"):
            name = self.take().value
        elif declaration:
            raise ParseError(*sp, "function declaration needs a name")
        self.expect("punct", "(")
        params = []
        while not self.at("punct", ")"):
            params.append(self.expect("ident").value)
            if self.at("punct", ","):
                self.take()
        self.take()
        body = self.block()
        return Node("funcdecl" if declaration else "func", sp,
                    name=name, params=params, body=body)

    def if_stmt(self) -> Node:
        sp = self.span()
        self.expect("keyword", "if")
        site = self.new_site()
        self.expect("punct", "(")
        test = self.expression()
        self.expect("punct", ")")
        then = self.statement()
        els = None
        if self.at("keyword", "else"):
            self.take()
            els = self.statement()
        return Node("if", sp, site=site, test=test, then=then, els=els)

    def while_stmt(self) -> Node:
        sp = self.span()
        self.expect("keyword", "while")
        site = self.new_site()
        self.expect("punct", "(")
        test = self.expression()
        self.expect("punct", ")")
        body = self.statement()
        return Node("while", sp, site=site, test=test, body=body)

    def for_stmt(self) -> Node:
        sp = self.span()
        self.expect("keyword", "for")
        site = self.new_site()
        self.expect("punct", "(")
        # disambiguate classic for from for-in/for-of
        init = None
        decl_kind = None
        if self.at("keyword", "var") or self.at("keyword", "let") or self.at("keyword", "const"):
            decl = self.var_decl()
            if self.at("keyword", "in") or self.at("keyword", "of"):
                op = self.take().value
                if len(decl.decls) != 1 or decl.decls[0][1] is not None:
                    raise ParseError(*sp, f"bad for-{op} head")
                obj = self.expression()
                self.expect("punct", ")")
                body = self.statement()
                return Node("forin" if op == "in" else "forof", sp, site=site,
                            decl_kind=decl.decl_kind, var=decl.decls[0][0],
                            obj=obj, body=body)
            init = decl
        elif not self.at("punct", ";"):
            expr = self.expression()
            if self.at("keyword", "in") or self.at("keyword", "of"):
                op = self.take().value
                if expr.kind != "ident":
                    raise ParseError(*sp, f"bad for-{op} target")
                obj = self.expression()
                self.expect("punct", ")")
                body = self.statement()
                return Node("forin" if op == "in" else "forof", sp, site=site,
                            decl_kind=None, var=expr.name, obj=obj, body=body)
            init = Node("exprstmt", sp, expr=expr)
        self.expect("punct", ";")
        test = None if self.at("punct", ";") else self.expression()
        self.expect("punct", ";")
        update = None if self.at("punct", ")") else self.expression()
        self.expect("punct", ")")
        body = self.statement()
        return Node("for", sp, site=site, init=init, test=test,
                    update=update, body=body)

    def try_stmt(self) -> Node:
        sp = self.span()
        self.expect("keyword", "try")
        block = self.block()
        self.expect("keyword", "catch")
        self.expect("punct", "(")
        param = self.expect("ident").value
        self.expect("punct", ")")
        handler = self.block()
        return Node("trycatch", sp, block=block, param=param, handler=handler)

    # -- expressions

    def expression(self) -> Node:
        return self.assignment()

    def assignment(self) -> Node:
        sp = self.span()
        left = self.conditional()
        if self.at("punct", "="):
            self.take()
            if left.kind not in ("ident", "member", "index"):
                raise ParseError(*sp, "invalid assignment target")
            value = self.assignment()
            return Node("assign", sp, target=left, value=value)
        return left

    def conditional(self) -> Node:
        sp = self.span()
        test = self.binary(1)
        if self.at("punct", "?"):
            self.take()
            site = self.new_site()
            then = self.assignment()
            self.expect("punct", ":")
            els = self.assignment()
            return Node("cond", sp, site=site, test=test, then=then, els=els)
        return test

    def binary(self, min_prec: int) -> Node:
        sp = self.span()
        left = self.unary()
        while True:
            t = self.peek()
            op = t.value if (t.type == "punct" or (t.type == "keyword" and t.value == "in")) else None
            prec = _BINOPS.get(op)
            if prec is None or prec < min_prec:
                return left
            self.take()
            site = self.new_site() if op in ("&&", "||") else None
            right = self.binary(prec + 1)
            left = Node("binary", sp, site=site, op=op, left=left, right=right)

    def unary(self) -> Node:
        t = self.peek()
        sp = (t.line, t.col)
        if t.type == "punct" and t.value in ("-", "+", "!", "~"):
            self.take()
            return Node("unary", sp, op=t.value, operand=self.unary())
        if t.type == "keyword" and t.value == "typeof":
            self.take()
            return Node("typeof", sp, operand=self.unary())
        if t.type == "keyword" and t.value == "delete":
            self.take()
            target = self.unary()
            if target.kind not in ("member", "index"):
                raise ParseError(*sp, "delete target must be a property")
            return Node("delete", sp, target=target)
        if t.type == "keyword" and t.value == "new":
            self.take()
            callee = self.member_chain(self.primary(), allow_call=False)
            args = []
            if self.at("punct", "("):
                args = self.arguments()
            node = Node("new", sp, callee=callee, args=args)
            return self.member_chain(node, allow_call=True)
        return self.postfix()

    def postfix(self) -> Node:
        return self.member_chain(self.primary(), allow_call=True)

    def member_chain(self, node: Node, allow_call: bool) -> Node:
        while True:
            t = self.peek()
            sp = (t.line, t.col)
            if self.at("punct", "."):
                self.take()
                name_tok = self.peek()
                if name_tok.type not in ("ident", "keyword"):
                    raise ParseError(name_tok.line, name_tok.col, "expected property name")
                self.take()
                node = Node("member", sp, obj=node, name=name_tok.value)
            elif self.at("punct", "["):
                self.take()
                expr = self.expression()
                self.expect("punct", "]")
                node = Node("index", sp, obj=node, expr=expr)
            elif allow_call and self.at("punct", "("):
                args = self.arguments()
                node = Node("call", sp, callee=node, args=args)
            else:
                return node

    def arguments(self) -> list[Node]:
        self.expect("punct", "(")
        args = []
        while not self.at("punct", ")"):
            args.append(self.assignment())
            if self.at("punct", ","):
                self.take()
        self.take()
        return args

    def primary(self) -> Node:
        t = self.peek()
        sp = (t.line, t.col)
        if t.type == "num":
            self.take()
            return Node("num", sp, value=t.value)
        if t.type == "str":
            self.take()
            return Node("str", sp, value=t.value)
        if t.type == "ident":
            self.take()
            return Node("ident", sp, name=t.value)
        if t.type == "keyword":
            if t.value in ("true", "false"):
                self.take()
                return Node("bool", sp, value=(t.value == "true"))
            if t.value == "null":
                self.take()
                return Node("null", sp)
            if t.value == "this":
                self.take()
                return Node("this", sp)
            if t.value == "function":
                return self.function(declaration=False)
            raise ParseError(t.line, t.col, f"unexpected keyword {t.value!r}")
        if self.at("punct", "("):
            self.take()
            expr = self.expression()
            self.expect("punct", ")")
            return expr
        if self.at("punct", "["):
            self.take()
            elements = []
            while not self.at("punct", "]"):
                if self.at("punct", ","):
                    raise UnsupportedSyntax(t.line, t.col, "array hole elision")
                elements.append(self.assignment())
                if self.at("punct", ","):
                    self.take()
            self.take()
            return Node("array", sp, elements=elements)
        if self.at("punct", "{"):
            self.take()
            props = []
            while not self.at("punct", "}"):
                key_tok = self.peek()
                if key_tok.type in ("ident", "keyword"):
                    key = key_tok.value
                    self.take()
                elif key_tok.type == "str":
                    key = key_tok.value
                    self.take()
                elif key_tok.type == "num":
                    key = js_number_to_string(key_tok.value)
                    self.take()
                else:
                    raise ParseError(key_tok.line, key_tok.col, "expected property key")
                self.expect("punct", ":")
                props.append((key, self.assignment()))
                if self.at("punct", ","):
                    self.take()
            self.take()
            return Node("object", sp, props=props)
        raise ParseError(t.line, t.col, f"unexpected token {t.value!r}")


def parse(source: str) -> Node:
    return _Parser(tokenize(source)).parse_program()


# --- Unparse --------------------------------------------------------------

_IDENT_ONLY = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*\Z")


def _quote(s: str) -> str:
    out = ["'"]
    for ch in s:
        if ch == "\\":
            out.append("\\\\")
        elif ch == "'":
            out.append("\\'")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20 or ord(ch) > 0x7E:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    out.append("'")
    return "".join(out)


def _unparse_expr(n: Node) -> str:
    k = n.kind
    if k == "num":
        return js_number_to_string(n.value)
    if k == "str":
        return _quote(n.value)
    if k == "bool":
        return "true" if n.value else "false"
    if k == "null":
        return "null"
    if k == "this":
        return "this"
    if k == "ident":
        return n.name
    if k == "array":
        return "[" + ", ".join(_unparse_expr(e) for e in n.elements) + "]"
    if k == "object":
        parts = []
        for key, val in n.props:
            if _IDENT_ONLY.match(key) and key not in KEYWORDS:
                ks = key
            else:
                ks = _quote(key)
            parts.append(f"{ks}: {_unparse_expr(val)}")
        return "{" + ", ".join(parts) + "}"
    if k == "unary":
        return f"({n.op}{_unparse_expr(n.operand)})"
    if k == "typeof":
        return f"(typeof {_unparse_expr(n.operand)})"
    if k == "delete":
        return f"(delete {_unparse_expr(n.target)})"
    if k == "binary":
        return f"({_unparse_expr(n.left)} {n.op} {_unparse_expr(n.right)})"
    if k == "assign":
        return f"({_unparse_expr(n.target)} = {_unparse_expr(n.value)})"
    if k == "cond":
        return f"({_unparse_expr(n.test)} ? {_unparse_expr(n.then)} : {_unparse_expr(n.els)})"
    if k == "member":
        return f"{_unparse_expr(n.obj)}.{n.name}"
    if k == "index":
        return f"{_unparse_expr(n.obj)}[{_unparse_expr(n.expr)}]"
    if k == "call":
        return f"{_unparse_expr(n.callee)}({', '.join(_unparse_expr(a) for a in n.args)})"
    if k == "new":
        return f"(new {_unparse_expr(n.callee)}({', '.join(_unparse_expr(a) for a in n.args)}))"
    if k == "func":
        return "(" + _unparse_func(n) + ")"
    raise ValueError(f"not an expression node: {k}")


def _unparse_func(n: Node) -> str:
    header = f"function {n.name}({', '.join(n.params)}) " if n.name else \
        f"function ({', '.join(n.params)}) "
    return header + _unparse_stmt(n.attrs["body"], 0)


def _indent(level: int) -> str:
    return "  " * level


def _unparse_stmt(n: Node, level: int) -> str:
    ind = _indent(level)
    k = n.kind
    if k == "program":
        return "\n".join(_unparse_stmt(s, level) for s in n.body)
    if k == "block":
        inner = "\n".join(_unparse_stmt(s, level + 1) for s in n.body)
        return "{\n" + inner + ("\n" if inner else "") + ind + "}"
    if k == "var":
        parts = []
        for name, init in n.decls:
            parts.append(name if init is None else f"{name} = {_unparse_expr(init)}")
        return f"{ind}{n.decl_kind} {', '.join(parts)};"
    if k == "funcdecl":
        return ind + _unparse_func(n)
    if k == "exprstmt":
        return f"{ind}{_unparse_expr(n.expr)};"
    if k == "empty":
        return f"{ind};"
    if k == "if":
        out = f"{ind}if ({_unparse_expr(n.test)}) " + _unparse_block_like(n.then, level)
        if n.els is not None:
            out += " else " + _unparse_block_like(n.els, level)
        return out
    if k == "while":
        return f"{ind}while ({_unparse_expr(n.test)}) " + _unparse_block_like(n.body, level)
    if k == "for":
        init = ""
        if n.init is not None:
            init = _unparse_stmt(n.init, 0).strip().rstrip(";")
        test = _unparse_expr(n.test) if n.test is not None else ""
        update = _unparse_expr(n.update) if n.update is not None else ""
        return f"{ind}for ({init}; {test}; {update}) " + _unparse_block_like(n.body, level)
    if k in ("forin", "forof"):
        op = "in" if k == "forin" else "of"
        head = f"{n.decl_kind} {n.var}" if n.decl_kind else n.var
        return f"{ind}for ({head} {op} {_unparse_expr(n.obj)}) " + _unparse_block_like(n.body, level)
    if k == "return":
        if n.value is None:
            return f"{ind}return;"
        return f"{ind}return {_unparse_expr(n.value)};"
    if k == "throw":
        return f"{ind}throw {_unparse_expr(n.value)};"
    if k == "trycatch":
        return (f"{ind}try " + _unparse_stmt(n.attrs["block"], level)
                + f" catch ({n.param}) " + _unparse_stmt(n.handler, level))
    raise ValueError(f"not a statement node: {k}")


def _unparse_block_like(n: Node, level: int) -> str:
    if n.kind == "block":
        return _unparse_stmt(n, level)
    # wrap single statements so dangling-else stays unambiguous
    return "{\n" + _unparse_stmt(n, level + 1) + "\n" + _indent(level) + "}"


def unparse(ast: Node) -> str:
    if ast.kind == "program":
        return _unparse_stmt(ast, 0) + "\n"
    if ast.kind in _NODE_FIELDS and ast.kind in (
            "block", "var", "funcdecl", "exprstmt", "empty", "if", "while",
            "for", "forin", "forof", "return", "throw", "trycatch"):
        return _unparse_stmt(ast, 0)
    return _unparse_expr(ast)
