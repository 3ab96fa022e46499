"""Dynamic value model and ECMAScript-style abstract coercion operations.

Values are represented directly in Python:

* ``UNDEFINED`` / ``NULL`` -- singletons
* booleans -- Python ``bool``
* numbers -- Python ``float`` (full IEEE-754 doubles, NaN and signed zeros)
* strings -- Python ``str`` (treated as UTF-16 code units; corpus is BMP-only)
* objects / arrays / functions -- :class:`JSObject` instances; Python object
  identity plays the role of the heap id.

All coercion helpers here are pure and total; they never raise for any value
in the subset.
"""

from __future__ import annotations

import math
import re
from typing import Any, Optional

__all__ = [
    "UNDEFINED", "NULL", "JSObject", "Value",
    "type_tag", "typeof",
    "to_number", "to_string", "to_primitive", "to_boolean",
    "to_uint32", "to_int32", "js_number_to_string",
    "binary_op", "unary_op", "strict_equals", "loose_equals",
    "encode_value", "decode_value", "canonical_json",
]


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "undefined"


class _Null:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "null"


UNDEFINED = _Undefined()
NULL = _Null()

Value = Any  # UNDEFINED | NULL | bool | float | str | JSObject


class JSObject:
    """Heap record for objects, arrays, and functions.

    Properties live in ``props`` (insertion-ordered, string keys; numeric
    array indices use their canonical string form).  Arrays keep their
    length in ``length``; a missing index key is a hole, distinct from a
    stored ``undefined``.
    """

    __slots__ = (
        "kind", "props", "length", "fn_node", "fn_env", "fn_name",
        "native", "sym_state", "error_type",
    )

    def __init__(self, kind: str = "object"):
        self.kind = kind  # "object" | "array" | "function"
        self.props: dict[str, Value] = {}
        self.length: int = 0  # arrays only
        self.fn_node = None  # function AST node
        self.fn_env = None  # closure environment
        self.fn_name: str = ""
        self.native = None  # python callable for built-ins
        self.sym_state = None  # attached SymbolicObjectState / SymbolicArrayState
        self.error_type: Optional[str] = None  # "TypeError" | "RangeError"

    @property
    def is_array(self) -> bool:
        return self.kind == "array"

    @property
    def is_callable(self) -> bool:
        return self.kind == "function"

    def array_elements(self) -> list[Value]:
        """Dense view of an array with holes as UNDEFINED."""
        out = []
        for i in range(self.length):
            out.append(self.props.get(str(i), UNDEFINED))
        return out

    def __repr__(self):
        if self.kind == "array":
            return f"JSArray(len={self.length}, {self.props!r})"
        if self.kind == "function":
            return f"JSFunction({self.fn_name or self.native})"
        return f"JSObject({self.props!r})"


def type_tag(v: Value) -> str:
    """Engine-internal 7-way tag (arrays distinct from objects)."""
    if v is UNDEFINED:
        return "undefined"
    if v is NULL:
        return "null"
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, float):
        return "number"
    if isinstance(v, str):
        return "string"
    if isinstance(v, JSObject):
        if v.is_array:
            return "array"
        if v.is_callable:
            return "function"
        return "object"
    raise TypeError(f"not a mini-JS value: {v!r}")


def typeof(v: Value) -> str:
    """The language-level typeof string (null and arrays are 'object')."""
    tag = type_tag(v)
    if tag in ("null", "array"):
        return "object"
    return tag


# --- ToNumber -------------------------------------------------------------

_JS_WS = ("\x09\x0a\x0b\x0c\x0d\x20\xa0\u1680"
          "\u2000\u2001\u2002\u2003\u2004\u2005\u2006\u2007"
          "\u2008\u2009\u200a\u2028\u2029\u202f\u205f\u3000\ufeff")

_DEC_RE = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z")
_HEX_RE = re.compile(r"0[xX][0-9a-fA-F]+\Z")


def _string_to_number(s: str) -> float:
    s = s.strip(_JS_WS)
    if s == "":
        return 0.0
    if s in ("Infinity", "+Infinity"):
        return math.inf
    if s == "-Infinity":
        return -math.inf
    if _HEX_RE.match(s):
        return float(int(s, 16))
    if _DEC_RE.match(s):
        return float(s)
    return math.nan


def to_number(v: Value) -> float:
    if v is UNDEFINED:
        return math.nan
    if v is NULL:
        return 0.0
    if isinstance(v, bool):
        return 1.0 if v else 0.0
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        return _string_to_number(v)
    return to_number(to_primitive(v, "number"))


# --- ToString -------------------------------------------------------------

def js_number_to_string(m: float) -> str:
    """ECMAScript Number::toString(10) using shortest round-trip digits."""
    if math.isnan(m):
        return "NaN"
    if m == 0.0:
        return "0"
    if m < 0 or (m == 0 and math.copysign(1.0, m) < 0):
        return "-" + js_number_to_string(-m)
    if math.isinf(m):
        return "Infinity"
    # shortest digits d and exponent n with m == 0.d * 10**n
    r = repr(m)
    if "e" in r:
        mant, exp_s = r.split("e")
        e = int(exp_s)
    else:
        mant, e = r, 0
    if "." in mant:
        int_part, frac = mant.split(".")
    else:
        int_part, frac = mant, ""
    all_digits = int_part + frac
    stripped = all_digits.lstrip("0")
    lead_zeros = len(all_digits) - len(stripped)
    n = len(int_part) - lead_zeros + e
    digits = stripped.rstrip("0")
    k = len(digits)
    if k <= n <= 21:
        return digits + "0" * (n - k)
    if 0 < n <= 21:
        return digits[:n] + "." + digits[n:]
    if -6 < n <= 0:
        return "0." + "0" * (-n) + digits
    if k == 1:
        return f"{digits}e{'+' if n - 1 >= 0 else '-'}{abs(n - 1)}"
    return f"{digits[0]}.{digits[1:]}e{'+' if n - 1 >= 0 else '-'}{abs(n - 1)}"


def to_string(v: Value) -> str:
    if v is UNDEFINED:
        return "undefined"
    if v is NULL:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return js_number_to_string(v)
    if isinstance(v, str):
        return v
    return to_string(to_primitive(v, "string"))


class CoercionLimit(Exception):
    """Raised when stringifying a value would enumerate an unreasonably long
    array; the interpreter converts this into its resource-limit outcome."""


def _array_join(arr: JSObject) -> str:
    if arr.length > MAX_ENCODE_ELEMS:
        raise CoercionLimit("array too long to stringify")
    parts = []
    for i in range(arr.length):
        el = arr.props.get(str(i), UNDEFINED)
        parts.append("" if el is UNDEFINED or el is NULL else to_string(el))
    return ",".join(parts)


def to_primitive(v: Value, hint: str = "none") -> Value:
    if not isinstance(v, JSObject):
        return v
    # Subset objects have no user-defined valueOf; arrays stringify by join,
    # plain objects by the Object.prototype.toString tag.
    if v.is_array:
        return _array_join(v)
    if v.is_callable:
        return f"function {v.fn_name}() {{ [code] }}"
    return "[object Object]"


def to_boolean(v: Value) -> bool:
    if v is UNDEFINED or v is NULL:
        return False
    if isinstance(v, bool):
        return v
    if isinstance(v, float):
        return not (v == 0.0 or math.isnan(v))
    if isinstance(v, str):
        return len(v) > 0
    return True


# --- Integer coercions ----------------------------------------------------

def to_uint32(v: Value) -> float:
    n = to_number(v)
    if math.isnan(n) or math.isinf(n):
        return 0.0
    i = int(n)  # truncation toward zero
    return float(i % (2 ** 32))


def to_int32(v: Value) -> float:
    u = int(to_uint32(v))
    if u >= 2 ** 31:
        u -= 2 ** 32
    return float(u)


# --- Operators ------------------------------------------------------------

def strict_equals(l: Value, r: Value) -> bool:
    tl, tr = type_tag(l), type_tag(r)
    if tl != tr:
        # function/object/array distinctions are engine-internal; strict
        # equality only cares about identity for all reference types
        if isinstance(l, JSObject) and isinstance(r, JSObject):
            return l is r
        return False
    if isinstance(l, JSObject):
        return l is r
    if isinstance(l, float):
        return l == r  # NaN != NaN; -0 == 0
    return l == r


def loose_equals(l: Value, r: Value) -> bool:
    tl, tr = type_tag(l), type_tag(r)
    objs = ("object", "array", "function")
    cl = "object" if tl in objs else tl
    cr = "object" if tr in objs else tr
    if cl == cr:
        return strict_equals(l, r)
    if (l is NULL and r is UNDEFINED) or (l is UNDEFINED and r is NULL):
        return True
    if cl == "number" and cr == "string":
        return l == to_number(r)
    if cl == "string" and cr == "number":
        return to_number(l) == r
    if cl == "boolean":
        return loose_equals(to_number(l), r)
    if cr == "boolean":
        return loose_equals(l, to_number(r))
    if cl in ("number", "string") and cr == "object":
        return loose_equals(l, to_primitive(r))
    if cl == "object" and cr in ("number", "string"):
        return loose_equals(to_primitive(l), r)
    return False


def _js_mod(x: float, y: float) -> float:
    if math.isnan(x) or math.isnan(y) or math.isinf(x) or y == 0.0:
        return math.nan
    if math.isinf(y) or x == 0.0:
        return x
    return math.fmod(x, y)


def _js_div(x: float, y: float) -> float:
    if math.isnan(x) or math.isnan(y):
        return math.nan
    if y == 0.0:
        if x == 0.0:
            return math.nan
        sign = math.copysign(1.0, x) * math.copysign(1.0, y)
        return math.inf * sign
    try:
        return x / y
    except OverflowError:
        return math.inf * math.copysign(1.0, x) * math.copysign(1.0, y)


def _relational(l: Value, r: Value, op: str) -> bool:
    pl = to_primitive(l, "number")
    pr = to_primitive(r, "number")
    if isinstance(pl, str) and isinstance(pr, str):
        if op == "<":
            return pl < pr
        if op == "<=":
            return pl <= pr
        if op == ">":
            return pl > pr
        return pl >= pr
    nl, nr = to_number(pl), to_number(pr)
    if math.isnan(nl) or math.isnan(nr):
        return False
    if op == "<":
        return nl < nr
    if op == "<=":
        return nl <= nr
    if op == ">":
        return nl > nr
    return nl >= nr


def _num(x: float) -> float:
    # clamp Python overflow from arithmetic back into IEEE range
    return x


def binary_op(op: str, l: Value, r: Value) -> Value:
    if op == "+":
        pl = to_primitive(l)
        pr = to_primitive(r)
        if isinstance(pl, str) or isinstance(pr, str):
            return to_string(pl) + to_string(pr)
        return to_number(pl) + to_number(pr)
    if op == "-":
        return to_number(l) - to_number(r)
    if op == "*":
        try:
            return to_number(l) * to_number(r)
        except OverflowError:
            return math.inf
    if op == "/":
        return _js_div(to_number(l), to_number(r))
    if op == "%":
        return _js_mod(to_number(l), to_number(r))
    if op in ("<", "<=", ">", ">="):
        return _relational(l, r, op)
    if op == "==":
        return loose_equals(l, r)
    if op == "!=":
        return not loose_equals(l, r)
    if op == "===":
        return strict_equals(l, r)
    if op == "!==":
        return not strict_equals(l, r)
    if op in ("&", "|", "^"):
        a, b = int(to_int32(l)), int(to_int32(r))
        v = a & b if op == "&" else a | b if op == "|" else a ^ b
        return to_int32(float(v))
    if op == "<<":
        a = int(to_int32(l))
        s = int(to_uint32(r)) & 31
        return to_int32(float((a << s) & 0xFFFFFFFF))
    if op == ">>":
        a = int(to_int32(l))
        s = int(to_uint32(r)) & 31
        return float(a >> s)
    if op == ">>>":
        a = int(to_uint32(l))
        s = int(to_uint32(r)) & 31
        return float(a >> s)
    raise ValueError(f"unknown binary operator {op!r}")


def unary_op(op: str, v: Value) -> Value:
    if op == "-":
        n = to_number(v)
        if n == 0.0:
            return math.copysign(0.0, -math.copysign(1.0, n))
        return -n
    if op == "+":
        return to_number(v)
    if op == "!":
        return not to_boolean(v)
    if op == "~":
        return to_int32(float(~int(to_int32(v))))
    raise ValueError(f"unknown unary operator {op!r}")


# --- Wire encoding --------------------------------------------------------
#
# Canonical JSON encoding of values, used by the coercion fixture file, test
# case serialization, the result envelope, and vote comparison.  NaN is
# canonicalized; -0 is distinguished from 0; array holes are explicit.
# Arrays longer than MAX_ENCODE_ELEMS are not enumerated element by element
# (a `.length` of up to 2**32-1 is a legal value); such results are treated
# as opaque by every participant so comparisons stay well defined.

MAX_ENCODE_ELEMS = 4096


def encode_value(v: Value, _depth: int = 0) -> dict:
    if _depth > 6:
        raise ValueError("value nesting too deep to encode")
    if v is UNDEFINED:
        return {"t": "undefined"}
    if v is NULL:
        return {"t": "null"}
    if isinstance(v, bool):
        return {"t": "bool", "v": v}
    if isinstance(v, float):
        if v == 0.0 and math.copysign(1.0, v) < 0:
            return {"t": "num", "v": "-0"}
        return {"t": "num", "v": js_number_to_string(v)}
    if isinstance(v, str):
        return {"t": "str", "v": v}
    if isinstance(v, JSObject):
        if v.is_array:
            if v.length > MAX_ENCODE_ELEMS:
                raise ValueError("array too long to encode")
            elems = []
            for i in range(v.length):
                key = str(i)
                if key in v.props:
                    elems.append(encode_value(v.props[key], _depth + 1))
                else:
                    elems.append({"t": "hole"})
            extra = {
                k: encode_value(val, _depth + 1)
                for k, val in v.props.items() if not _is_index(k, v.length)
            }
            out = {"t": "arr", "v": elems}
            if extra:
                out["props"] = extra
            return out
        if v.is_callable:
            raise ValueError("function values are not serializable")
        return {"t": "obj", "v": {k: encode_value(val, _depth + 1) for k, val in v.props.items()}}
    raise TypeError(f"not a mini-JS value: {v!r}")


def _is_index(key: str, length: int) -> bool:
    if not key.isdigit():
        return False
    if key != "0" and key.startswith("0"):
        return False
    return int(key) < length


def _parse_num(s: str) -> float:
    if s == "-0":
        return -0.0
    if s == "NaN":
        return math.nan
    if s == "Infinity":
        return math.inf
    if s == "-Infinity":
        return -math.inf
    return float(s)


def decode_value(obj: dict) -> Value:
    t = obj["t"]
    if t == "undefined":
        return UNDEFINED
    if t == "null":
        return NULL
    if t == "bool":
        return bool(obj["v"])
    if t == "num":
        return _parse_num(obj["v"])
    if t == "str":
        return obj["v"]
    if t == "arr":
        arr = JSObject("array")
        elems = obj["v"]
        for i, el in enumerate(elems):
            if el.get("t") != "hole":
                arr.props[str(i)] = decode_value(el)
        arr.length = len(elems)
        for k, val in obj.get("props", {}).items():
            arr.props[k] = decode_value(val)
        return arr
    if t == "obj":
        o = JSObject("object")
        for k, val in obj["v"].items():
            o.props[k] = decode_value(val)
        return o
    raise ValueError(f"bad wire encoding tag {t!r}")


def canonical_json(v: Value) -> str:
    """Injective canonical serialization (sorted keys, compact)."""
    import json

    def sort_enc(e):
        if isinstance(e, dict):
            return {k: sort_enc(e[k]) for k in sorted(e)}
        if isinstance(e, list):
            return [sort_enc(x) for x in e]
        return e

    return json.dumps(sort_enc(encode_value(v)), sort_keys=True, separators=(",", ":"))
