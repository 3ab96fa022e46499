"""Symbolic expression language, concolic values, and path conditions.

Expressions are well-sorted trees over the sorts Num, Str, Bool, Tag, and
HArr.  There is no implicit coercion inside an expression: the interpreter
inserts explicit ``to.*`` nodes wherever the concrete execution performed a
coercion.  String nodes carry full built-in semantics (negative indices,
clamping), evaluated by :func:`eval_symbolic` with exactly the runtime
coercion rules, so the bounded solver and the path verifier share one
reference semantics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from . import values as V
from .values import UNDEFINED, Value

NUM, STR, BOOL, TAG, HARR = "Num", "Str", "Bool", "Tag", "HArr"

TYPE_TAGS = ("undefined", "null", "boolean", "number", "string", "object", "array")

# Exploration order for fresh untyped symbols: cheap sorts first.
TAG_ORDER = ("undefined", "number", "string", "boolean", "null", "array", "object")


class UnboundVariable(Exception):
    pass


class EvalLimit(Exception):
    """Symbolic evaluation exceeded the string-size budget."""


_STR_BUDGET = 1 << 20


@dataclass(frozen=True)
class SymExpr:
    op: str
    args: tuple = ()
    data: Any = None

    def __repr__(self):
        if self.op == "var":
            return f"${self.data[0]}"
        if self.op == "const":
            return f"#{self.data!r}"
        if self.op in ("tag", "tagof"):
            return f"{self.op}:{self.data}"
        return f"({self.op} {' '.join(map(repr, self.args))})"


def var(name: str, sort: str) -> SymExpr:
    return SymExpr("var", data=(name, sort))


def const(v: Value) -> SymExpr:
    assert not isinstance(v, V.JSObject), "object constants are not symbolic"
    return SymExpr("const", data=v)


def mk(op: str, *args: SymExpr, data: Any = None) -> SymExpr:
    return SymExpr(op, tuple(args), data)


_SORT_BY_OP = {
    "add": NUM, "sub": NUM, "mul": NUM, "div": NUM, "mod": NUM, "neg": NUM,
    "bit.and": NUM, "bit.or": NUM, "bit.xor": NUM, "bit.not": NUM,
    "shl": NUM, "shr": NUM, "ushr": NUM,
    "num.lt": BOOL, "num.le": BOOL, "num.gt": BOOL, "num.ge": BOOL,
    "num.eq": BOOL, "str.lt": BOOL, "str.le": BOOL, "str.gt": BOOL,
    "str.ge": BOOL, "str.eq": BOOL, "bool.eq": BOOL, "tag.eq": BOOL,
    "and": BOOL, "or": BOOL, "not": BOOL,
    "to.num": NUM, "to.i32": NUM, "to.u32": NUM, "to.str": STR,
    "to.bool": BOOL,
    "str.concat": STR, "str.charat": STR, "str.slice": STR,
    "str.substring": STR, "str.repeat": STR, "str.trim": STR,
    "str.padstart": STR, "str.padend": STR,
    "str.len": NUM, "str.indexof": NUM, "str.charcode": NUM,
    "str.contains": BOOL, "str.startswith": BOOL, "str.endswith": BOOL,
    "select": None, "store": HARR, "hlen": NUM,
    "tagof": TAG, "tag": TAG,
}


def sort_of(e: SymExpr) -> str:
    if e.op == "var":
        return e.data[1]
    if e.op == "const":
        t = V.type_tag(e.data)
        return {"number": NUM, "string": STR, "boolean": BOOL,
                "undefined": NUM, "null": NUM}.get(t, NUM)
    if e.op == "select":
        return e.data  # element sort stored on the node
    s = _SORT_BY_OP.get(e.op)
    if s is None:
        raise ValueError(f"unknown op {e.op!r}")
    return s


def free_vars(e: SymExpr, acc: Optional[set] = None) -> set[str]:
    if acc is None:
        acc = set()
    if e.op == "var":
        acc.add(e.data[0])
    elif e.op == "tagof":
        acc.add(e.data)
    for a in e.args:
        free_vars(a, acc)
    return acc


# --- Reference evaluator --------------------------------------------------

def _js_slice_bounds(length: int, start: float, end: float) -> tuple[int, int]:
    def norm(x):
        if math.isnan(x):
            return 0
        x = int(x) if not math.isinf(x) else (length if x > 0 else -length - 1)
        if x < 0:
            return max(length + x, 0)
        return min(x, length)
    return norm(start), norm(end)


def _op_mul(a, _):
    try:
        return a[0] * a[1]
    except OverflowError:
        return math.inf


def _op_charat(a, _):
    i = a[1]
    if math.isnan(i) or math.isinf(i):
        return ""
    i = int(i)
    return a[0][i] if 0 <= i < len(a[0]) else ""


def _op_charcode(a, _):
    i = a[1]
    if math.isnan(i) or math.isinf(i):
        return math.nan
    i = int(i)
    return float(ord(a[0][i])) if 0 <= i < len(a[0]) else math.nan


def _op_slice(a, _):
    s, e2 = _js_slice_bounds(len(a[0]), a[1], a[2])
    return a[0][s:e2] if s < e2 else ""


def _op_substring(a, _):
    def clamp(x):
        if math.isnan(x) or x < 0:
            return 0
        return min(int(x) if not math.isinf(x) else len(a[0]), len(a[0]))
    s, e2 = clamp(a[1]), clamp(a[2])
    if s > e2:
        s, e2 = e2, s
    return a[0][s:e2]


def _op_indexof(a, _):
    start = a[2]
    start = 0 if math.isnan(start) else int(max(0, min(start, len(a[0]))))
    return float(a[0].find(a[1], start))


def _op_startswith(a, _):
    pos = int(a[2]) if not math.isnan(a[2]) else 0
    pos = min(max(pos, 0), len(a[0]))
    return a[0][pos:].startswith(a[1])


def _op_endswith(a, _):
    end = len(a[0]) if math.isnan(a[2]) else int(min(a[2], len(a[0])))
    return a[0][:max(end, 0)].endswith(a[1])


def _op_concat(a, _):
    if len(a[0]) + len(a[1]) > _STR_BUDGET:
        raise EvalLimit("concat")
    return a[0] + a[1]


def _op_repeat(a, _):
    n = int(a[1])
    if n < 0:
        raise EvalLimit("negative repeat")
    if len(a[0]) * n > _STR_BUDGET:
        raise EvalLimit("repeat")
    return a[0] * n


def _op_pad(a, data, start):
    s, target, pad = a[0], a[1], a[2]
    tl = 0 if math.isnan(target) else int(target)
    if tl <= len(s) or pad == "":
        return s
    if tl > _STR_BUDGET:
        raise EvalLimit("pad")
    fill = (pad * ((tl - len(s)) // len(pad) + 1))[: tl - len(s)]
    return fill + s if start else s + fill


def _op_select(a, data):
    base, idx = a[0], a[1]
    if math.isnan(idx) or math.isinf(idx):
        return _sort_default(data)
    i = int(idx)
    if 0 <= i < len(base):
        return base[i]
    return _sort_default(data)


def _op_store(a, data):
    base, idx, val = a[0], a[1], a[2]
    if math.isnan(idx) or math.isinf(idx) or idx < 0:
        return base
    i = int(idx)
    out = list(base)
    while len(out) <= i:
        out.append(_sort_default(data))
    out[i] = val
    return out


_OP_IMPL = {
    "add": lambda a, _: a[0] + a[1],
    "sub": lambda a, _: a[0] - a[1],
    "mul": _op_mul,
    "div": lambda a, _: V.binary_op("/", a[0], a[1]),
    "mod": lambda a, _: V.binary_op("%", a[0], a[1]),
    "neg": lambda a, _: V.unary_op("-", a[0]),
    "bit.and": lambda a, _: V.binary_op("&", a[0], a[1]),
    "bit.or": lambda a, _: V.binary_op("|", a[0], a[1]),
    "bit.xor": lambda a, _: V.binary_op("^", a[0], a[1]),
    "bit.not": lambda a, _: V.unary_op("~", a[0]),
    "shl": lambda a, _: V.binary_op("<<", a[0], a[1]),
    "shr": lambda a, _: V.binary_op(">>", a[0], a[1]),
    "ushr": lambda a, _: V.binary_op(">>>", a[0], a[1]),
    "num.lt": lambda a, _: _num_cmp(a[0], a[1], "<"),
    "num.le": lambda a, _: _num_cmp(a[0], a[1], "<="),
    "num.gt": lambda a, _: _num_cmp(a[0], a[1], ">"),
    "num.ge": lambda a, _: _num_cmp(a[0], a[1], ">="),
    "num.eq": lambda a, _: a[0] == a[1],  # IEEE: NaN != NaN, -0 == 0
    "str.lt": lambda a, _: a[0] < a[1],
    "str.le": lambda a, _: a[0] <= a[1],
    "str.gt": lambda a, _: a[0] > a[1],
    "str.ge": lambda a, _: a[0] >= a[1],
    "str.eq": lambda a, _: a[0] == a[1],
    "bool.eq": lambda a, _: a[0] == a[1],
    "tag.eq": lambda a, _: a[0] == a[1],
    "and": lambda a, _: bool(a[0]) and bool(a[1]),
    "or": lambda a, _: bool(a[0]) or bool(a[1]),
    "not": lambda a, _: not a[0],
    "to.num": lambda a, _: V.to_number(a[0]),
    "to.str": lambda a, _: V.to_string(a[0]),
    "to.bool": lambda a, _: V.to_boolean(a[0]),
    "to.i32": lambda a, _: V.to_int32(a[0]),
    "to.u32": lambda a, _: V.to_uint32(a[0]),
    "str.concat": _op_concat,
    "str.len": lambda a, _: float(len(a[0])),
    "str.charat": _op_charat,
    "str.charcode": _op_charcode,
    "str.slice": _op_slice,
    "str.substring": _op_substring,
    "str.indexof": _op_indexof,
    "str.contains": lambda a, _: a[1] in a[0],
    "str.startswith": _op_startswith,
    "str.endswith": _op_endswith,
    "str.repeat": _op_repeat,
    "str.trim": lambda a, _: a[0].strip(V._JS_WS),
    "str.padstart": lambda a, data: _op_pad(a, data, True),
    "str.padend": lambda a, data: _op_pad(a, data, False),
    "hlen": lambda a, _: float(len(a[0])),
    "select": _op_select,
    "store": _op_store,
}


def eval_symbolic(e: SymExpr, assignment: dict[str, Any]) -> Any:
    """Evaluate under an assignment of var name -> Value (HArr vars map to
    plain Python lists of primitive values)."""
    op = e.op
    if op == "var":
        name = e.data[0]
        if name not in assignment:
            raise UnboundVariable(name)
        return assignment[name]
    if op == "const":
        return e.data
    if op == "tag":
        return e.data
    if op == "tagof":
        key = "#tag:" + e.data
        if key not in assignment:
            raise UnboundVariable(key)
        return assignment[key]
    impl = _OP_IMPL.get(op)
    if impl is None:
        raise ValueError(f"unknown op {op!r}")
    return impl([eval_symbolic(x, assignment) for x in e.args], e.data)


def compile_symbolic(e: SymExpr):
    """Compile an expression to a closure over the assignment dict.  Shares
    the op table with :func:`eval_symbolic`; repeated evaluation (the
    bounded solver's inner loop) skips per-node dispatch entirely."""
    op = e.op
    if op == "var":
        name = e.data[0]

        def load(b, name=name):
            try:
                return b[name]
            except KeyError:
                raise UnboundVariable(name) from None
        return load
    if op in ("const", "tag"):
        v = e.data
        return lambda b: v
    if op == "tagof":
        key = "#tag:" + e.data

        def load_tag(b, key=key):
            try:
                return b[key]
            except KeyError:
                raise UnboundVariable(key) from None
        return load_tag

    ca = [compile_symbolic(x) for x in e.args]
    impl, data = _OP_IMPL.get(op), e.data
    if impl is None:
        raise ValueError(f"unknown op {op!r}")

    # dedicated closures for the hottest shapes; the generic path below
    # still avoids tree-walking dispatch
    if op == "not":
        f0, = ca
        return lambda b: not f0(b)
    if op == "and":
        f0, f1 = ca
        return lambda b: bool(f0(b)) and bool(f1(b))
    if op == "or":
        f0, f1 = ca
        return lambda b: bool(f0(b)) or bool(f1(b))
    if op == "num.eq":
        f0, f1 = ca
        return lambda b: f0(b) == f1(b)
    if len(ca) == 1:
        f0, = ca
        return lambda b: impl((f0(b),), data)
    if len(ca) == 2:
        f0, f1 = ca
        return lambda b: impl((f0(b), f1(b)), data)
    if len(ca) == 3:
        f0, f1, f2 = ca
        return lambda b: impl((f0(b), f1(b), f2(b)), data)
    return lambda b: impl([f(b) for f in ca], data)


def _num_cmp(x: float, y: float, op: str) -> bool:
    if math.isnan(x) or math.isnan(y):
        return False
    return {"<": x < y, "<=": x <= y, ">": x > y, ">=": x >= y}[op]


def _sort_default(sort: str):
    return {NUM: 0.0, STR: "", BOOL: False}.get(sort, 0.0)


# --- Concolic values ------------------------------------------------------

@dataclass
class ConcolicValue:
    concrete: Value
    symbolic: Optional[SymExpr] = None

    @property
    def is_symbolic(self) -> bool:
        return self.symbolic is not None

    def expr_or_const(self) -> SymExpr:
        """Symbolic part, or a constant wrapping the concrete primitive."""
        if self.symbolic is not None:
            return self.symbolic
        return const(self.concrete)

    def __repr__(self):
        if self.symbolic is None:
            return f"cv({self.concrete!r})"
        return f"cv({self.concrete!r} ~ {self.symbolic!r})"


def conc(v: Value) -> ConcolicValue:
    return ConcolicValue(v, None)


# --- Path condition -------------------------------------------------------

@dataclass
class PCEntry:
    expr: SymExpr            # Bool-sorted constraint for the *taken* direction
    taken: bool
    negatable: bool
    site: str
    span: tuple[int, int] = (0, 0)

    def conjunct(self) -> SymExpr:
        return self.expr if self.taken else mk("not", self.expr)


@dataclass
class PathCondition:
    entries: list[PCEntry] = field(default_factory=list)

    def append(self, expr: SymExpr, taken: bool, negatable: bool, site: str,
               span: tuple[int, int] = (0, 0)) -> None:
        self.entries.append(PCEntry(expr, taken, negatable, site, span))

    def conjuncts(self) -> list[SymExpr]:
        return [e.conjunct() for e in self.entries]

    def holds_under(self, assignment: dict[str, Any]) -> bool:
        for c in self.conjuncts():
            if not eval_symbolic(c, assignment):
                return False
        return True

    def __len__(self):
        return len(self.entries)

    def dump(self) -> str:
        """One entry per line: site id, taken flag, s-expression."""
        lines = []
        for e in self.entries:
            flag = "T" if e.taken else "F"
            neg = "" if e.negatable else " pin"
            lines.append(f"{e.site}\t{flag}{neg}\t{to_sexpr(e.expr)}")
        return "\n".join(lines) + ("\n" if lines else "")


def to_sexpr(e: SymExpr) -> str:
    if e.op == "var":
        return e.data[0]
    if e.op == "const":
        v = e.data
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return V.encode_value(v)["v"]
        if isinstance(v, str):
            return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return str(v)
    if e.op == "tag":
        return f"!{e.data}"
    if e.op == "tagof":
        return f"(tagof {e.data})"
    return "(" + e.op + "".join(" " + to_sexpr(a) for a in e.args) + ")"


# Expected argument sorts per op, used to re-infer variable sorts when
# parsing a dumped s-expression (the dump prints bare variable names).
_ARG_SORTS = {
    "add": (NUM, NUM), "sub": (NUM, NUM), "mul": (NUM, NUM),
    "div": (NUM, NUM), "mod": (NUM, NUM), "neg": (NUM,),
    "bit.and": (NUM, NUM), "bit.or": (NUM, NUM), "bit.xor": (NUM, NUM),
    "bit.not": (NUM,), "shl": (NUM, NUM), "shr": (NUM, NUM),
    "ushr": (NUM, NUM),
    "num.lt": (NUM, NUM), "num.le": (NUM, NUM), "num.gt": (NUM, NUM),
    "num.ge": (NUM, NUM), "num.eq": (NUM, NUM),
    "str.lt": (STR, STR), "str.le": (STR, STR), "str.gt": (STR, STR),
    "str.ge": (STR, STR), "str.eq": (STR, STR),
    "bool.eq": (BOOL, BOOL), "tag.eq": (TAG, TAG),
    "and": (BOOL, BOOL), "or": (BOOL, BOOL), "not": (BOOL,),
    "to.num": (NUM,), "to.str": (NUM,), "to.bool": (NUM,),
    "to.i32": (NUM,), "to.u32": (NUM,),
    "str.concat": (STR, STR), "str.len": (STR,),
    "str.charat": (STR, NUM), "str.charcode": (STR, NUM),
    "str.slice": (STR, NUM, NUM), "str.substring": (STR, NUM, NUM),
    "str.indexof": (STR, STR, NUM), "str.contains": (STR, STR),
    "str.startswith": (STR, STR, NUM), "str.endswith": (STR, STR, NUM),
    "str.repeat": (STR, NUM), "str.trim": (STR,),
    "str.padstart": (STR, NUM, STR), "str.padend": (STR, NUM, STR),
    "hlen": (HARR,), "select": (HARR, NUM), "store": (HARR, NUM, NUM),
}

_NUM_ATOM = {"NaN", "Infinity", "-Infinity", "-0"}


def _sexpr_tokens(text: str) -> list[str]:
    """Tokens: parens, quoted strings, and atoms (which may embed quoted
    segments, as derived symbol names do)."""
    out, i, n = [], 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            out.append(ch)
            i += 1
        else:
            j = i
            in_string = False
            while j < n:
                c = text[j]
                if c == '"' and (j == i or in_string or text[j - 1] != "\\"):
                    in_string = not in_string
                elif c == "\\" and in_string:
                    j += 1
                elif not in_string and (c.isspace() or c in "()"):
                    break
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _atom_expr(tok: str, expected: str) -> SymExpr:
    if tok == "true":
        return const(True)
    if tok == "false":
        return const(False)
    if tok.startswith('"') and tok.endswith('"') and len(tok) >= 2:
        body = tok[1:-1].replace('\\"', '"').replace("\\\\", "\\")
        return const(body)
    if tok.startswith("!"):
        return SymExpr("tag", data=tok[1:])
    if tok in _NUM_ATOM:
        return const({"NaN": math.nan, "Infinity": math.inf,
                      "-Infinity": -math.inf, "-0": -0.0}[tok])
    try:
        return const(float(tok))
    except ValueError:
        pass
    return var(tok, expected)


def from_sexpr(text: str) -> SymExpr:
    """Parse the :func:`to_sexpr` rendering.  Variable sorts are inferred
    from their operator position; a bare variable defaults to Num."""
    tokens = _sexpr_tokens(text)
    pos = 0

    def parse(expected: str) -> SymExpr:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of s-expression")
        tok = tokens[pos]
        pos += 1
        if tok != "(":
            return _atom_expr(tok, expected)
        if pos >= len(tokens):
            raise ValueError("unexpected end of s-expression")
        op = tokens[pos]
        pos += 1
        if op == "tagof":
            name = tokens[pos]
            pos += 1
            if tokens[pos] != ")":
                raise ValueError("malformed tagof")
            pos += 1
            return SymExpr("tagof", data=name)
        arg_sorts = _ARG_SORTS.get(op)
        if arg_sorts is None:
            raise ValueError(f"unknown op {op!r}")
        args = []
        i = 0
        while pos < len(tokens) and tokens[pos] != ")":
            want = arg_sorts[i] if i < len(arg_sorts) else NUM
            args.append(parse(want))
            i += 1
        if pos >= len(tokens):
            raise ValueError("missing close paren")
        pos += 1
        data = None
        if op == "select":
            data = NUM
        elif op == "store":
            data = NUM
        return SymExpr(op, tuple(args), data)

    expr = parse(BOOL)
    if pos != len(tokens):
        raise ValueError("trailing tokens in s-expression")
    return expr


# --- Untyped symbols ------------------------------------------------------

_TAG_DEFAULTS = {
    "undefined": UNDEFINED,
    "null": V.NULL,
    "boolean": False,
    "number": 0.0,
    "string": "",
}


def tag_default(tag: str) -> Value:
    """Seed concrete value for a primitive tag (object/array are built by
    the interpreter since they need heap records)."""
    return _TAG_DEFAULTS[tag]


_TAG_SORT = {"boolean": BOOL, "number": NUM, "string": STR}


def tag_sort(tag: str) -> Optional[str]:
    return _TAG_SORT.get(tag)


@dataclass
class SymbolInfo:
    name: str
    tag: str
    order: int  # mint order within the execution


class SymbolRegistry:
    """Per-execution registry of untyped input symbols.

    Symbol names are derived from access paths (e.g. ``S_this.length``) so
    they are stable across executions and can be bound by solver models.
    """

    def __init__(self, assignment: dict[str, Any]):
        self.assignment = assignment  # name -> (tag, Value-encoding)
        self.minted: dict[str, SymbolInfo] = {}
        self._order = 0

    def tag_for(self, name: str) -> str:
        bound = self.assignment.get(name)
        if bound is not None:
            return bound[0]
        return TAG_ORDER[0]

    def mint(self, name: str) -> SymbolInfo:
        if name in self.minted:
            return self.minted[name]
        info = SymbolInfo(name, self.tag_for(name), self._order)
        self._order += 1
        self.minted[name] = info
        return info
