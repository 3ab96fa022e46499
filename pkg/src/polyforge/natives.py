"""Built-in globals and method libraries for the interpreter.

Native functions have the signature ``fn(interp, this, args)`` over
:class:`ConcolicValue` operands.  String built-ins construct the matching
symbolic node and compute their concrete result by evaluating that node
over constants, so native behavior and solver-side replay cannot drift
apart.  Array built-ins are generic over any receiver and route element
access through ``get_property``/``set_property`` so symbolic state is
preserved.
"""

from __future__ import annotations

import json
import math
from typing import Callable, Optional

from . import symcore as S
from . import values as V
from .symcore import ConcolicValue, SymExpr, conc, const, mk
from .values import JSObject, NULL, UNDEFINED, Value


def make_native(interp, name: str, fn: Callable) -> JSObject:
    obj = interp.new_object("function")
    obj.native = fn
    obj.fn_name = name
    return obj


# --- helpers ----------------------------------------------------------------

def _arg(args: list[ConcolicValue], i: int) -> ConcolicValue:
    return args[i] if i < len(args) else conc(UNDEFINED)


def _num_expr(cv: ConcolicValue) -> SymExpr:
    if isinstance(cv.concrete, V.JSObject) and not cv.is_symbolic:
        return const(V.to_number(cv.concrete))
    e = cv.expr_or_const()
    if e.op == "const" and isinstance(e.data, float) and not isinstance(e.data, bool):
        return e
    if e.op != "const":
        try:
            if S.sort_of(e) == S.NUM:
                return e
        except ValueError:
            pass
    return mk("to.num", e)


def _str_expr(cv: ConcolicValue) -> SymExpr:
    if isinstance(cv.concrete, V.JSObject) and not cv.is_symbolic:
        return const(V.to_string(cv.concrete))
    e = cv.expr_or_const()
    if e.op == "const" and isinstance(e.data, str):
        return e
    if e.op != "const":
        try:
            if S.sort_of(e) == S.STR:
                return e
        except ValueError:
            pass
    return mk("to.str", e)


def _eval_node(interp, expr: SymExpr):
    """Evaluate a closed symbolic node as the single reference semantics."""
    from .interp import EngineLimit
    try:
        return S.eval_symbolic(expr, {})
    except S.EvalLimit as e:
        raise EngineLimit(str(e)) from None


def _closed(cv: ConcolicValue, coerce) -> SymExpr:
    """Constant node for the coerced concrete value of an operand."""
    return const(coerce(cv.concrete))


def _any_symbolic(*cvs: ConcolicValue) -> bool:
    return any(cv.is_symbolic for cv in cvs)


def _require_coercible(interp, this: ConcolicValue, what: str):
    if this.concrete is UNDEFINED or this.concrete is NULL:
        raise interp.type_error(f"{what} called on null or undefined")


# --- string built-ins -------------------------------------------------------

def _string_node_method(op: str, arity: int, *, coercions=None,
                        undef_inf: frozenset = frozenset(),
                        defaults: Optional[dict] = None):
    """Build a string method around one symcore node kind.

    ``arity`` counts the arguments after the receiver; ``coercions`` maps
    argument position (0 = receiver) to "num" or "str"; positions in
    ``undef_inf`` substitute +Infinity for a missing/undefined argument
    (the end-position arguments whose spec default is the string length).
    """
    coercions = coercions or {}
    defaults = defaults or {}

    def method(interp, this: ConcolicValue, args: list[ConcolicValue]):
        _require_coercible(interp, this, "String.prototype." + op)
        operands = [this] + [_arg(args, i) for i in range(arity)]
        sym_parts, conc_parts = [], []
        for pos, cv in enumerate(operands):
            kind = "str" if pos == 0 else coercions.get(pos, "num")
            if pos in undef_inf and cv.concrete is UNDEFINED and not cv.is_symbolic:
                sym_parts.append(const(math.inf))
                conc_parts.append(const(math.inf))
                continue
            if pos in defaults and cv.concrete is UNDEFINED and not cv.is_symbolic:
                sym_parts.append(const(defaults[pos]))
                conc_parts.append(const(defaults[pos]))
                continue
            if kind == "num":
                sym_parts.append(_num_expr(cv))
                conc_parts.append(_closed(cv, V.to_number))
            else:
                sym_parts.append(_str_expr(cv))
                conc_parts.append(_closed(cv, V.to_string))
        concrete = _eval_node(interp, mk(op, *conc_parts))
        if isinstance(concrete, str):
            interp.check_string(concrete)
        sym = mk(op, *sym_parts) if _any_symbolic(*operands) else None
        return ConcolicValue(concrete, sym)

    return method


def str_includes(interp, this, args):
    _require_coercible(interp, this, "String.prototype.includes")
    search, pos = _arg(args, 0), _arg(args, 1)
    operands = (this, search, pos)

    def build(receiver, needle, position):
        hay = receiver
        if not (position.op == "const"
                and isinstance(position.data, float)
                and (position.data == 0.0 or math.isnan(position.data))):
            # position clamps into [0, length]: substring, not slice
            hay = mk("str.substring", receiver, position, const(math.inf))
        return mk("str.contains", hay, needle)

    conc_node = build(_closed(this, V.to_string), _closed(search, V.to_string),
                      _closed(pos, V.to_number))
    concrete = _eval_node(interp, conc_node)
    sym = None
    if _any_symbolic(*operands):
        sym = build(_str_expr(this), _str_expr(search), _num_expr(pos))
    return ConcolicValue(concrete, sym)


MAX_STRING_LENGTH = 1 << 28


def str_repeat(interp, this, args):
    _require_coercible(interp, this, "String.prototype.repeat")
    count = _arg(args, 0)
    n = V.to_number(count.concrete)
    n = 0.0 if math.isnan(n) else (n if math.isinf(n) else float(int(n)))
    if n < 0 or math.isinf(n):
        raise interp.range_error("Invalid count value")
    receiver = V.to_string(this.concrete)
    if len(receiver) * n >= MAX_STRING_LENGTH:
        raise interp.range_error("Invalid string length")
    concrete = _eval_node(interp, mk("str.repeat", const(receiver), const(n)))
    interp.check_string(concrete)
    sym = None
    if _any_symbolic(this, count):
        sym = mk("str.repeat", _str_expr(this), _num_expr(count))
    return ConcolicValue(concrete, sym)


STRING_METHODS = {
    "charAt": _string_node_method("str.charat", 1),
    "charCodeAt": _string_node_method("str.charcode", 1),
    "indexOf": _string_node_method("str.indexof", 2, coercions={1: "str"}),
    "slice": _string_node_method("str.slice", 2, undef_inf=frozenset({2})),
    "substring": _string_node_method("str.substring", 2,
                                     undef_inf=frozenset({2})),
    "includes": str_includes,
    "startsWith": _string_node_method("str.startswith", 2,
                                      coercions={1: "str"}),
    "endsWith": _string_node_method("str.endswith", 2, coercions={1: "str"},
                                    undef_inf=frozenset({2})),
    "repeat": str_repeat,
    "trim": _string_node_method("str.trim", 0),
    "padStart": _string_node_method("str.padstart", 2,
                                    coercions={2: "str"},
                                    defaults={2: " "}),
    "padEnd": _string_node_method("str.padend", 2,
                                  coercions={2: "str"},
                                  defaults={2: " "}),
}


def generic_tostring(interp, this, args):
    v = this.concrete
    if isinstance(v, JSObject):
        if v.is_callable:
            return conc("function " + (v.fn_name or "") + "() { }")
        return conc(V.to_string(V.to_primitive(v)))
    sym = None
    if this.is_symbolic:
        sym = mk("to.str", this.symbolic)
    return ConcolicValue(V.to_string(v), sym)


# --- array built-ins --------------------------------------------------------

def _to_length(n: float) -> int:
    if math.isnan(n) or n <= 0:
        return 0
    if math.isinf(n):
        return 2 ** 53 - 1
    return min(int(n), 2 ** 53 - 1)


def _receiver_length(interp, this: ConcolicValue) -> int:
    lcv = interp.get_property(this, conc("length"))
    return _to_length(V.to_number(lcv.concrete))


def _same_value_zero(interp, x: ConcolicValue, y: ConcolicValue, site: str) -> bool:
    both_nan = (isinstance(x.concrete, float) and math.isnan(x.concrete)
                and isinstance(y.concrete, float) and math.isnan(y.concrete))
    if both_nan:
        return True
    eq = interp._binary("===", x, y)
    return interp.branch(eq, site)


def arr_push(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.push")
    n = _receiver_length(interp, this)
    for item in args:
        interp.set_property(this, conc(float(n)), item)
        n += 1
    interp.set_property(this, conc("length"), conc(float(n)))
    return conc(float(n))


def arr_pop(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.pop")
    n = _receiver_length(interp, this)
    if n == 0:
        interp.set_property(this, conc("length"), conc(0.0))
        return conc(UNDEFINED)
    value = interp.get_property(this, conc(float(n - 1)))
    interp.delete_property(this, conc(float(n - 1)))
    interp.set_property(this, conc("length"), conc(float(n - 1)))
    return value


def arr_index_of(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.indexOf")
    search = _arg(args, 0)
    n = _receiver_length(interp, this)
    start = V.to_number(_arg(args, 1).concrete)
    k = 0 if math.isnan(start) else int(start)
    if k < 0:
        k = max(n + k, 0)
    while k < n:
        elem = interp.get_property(this, conc(float(k)))
        eq = interp._binary("===", elem, search)
        if interp.branch(eq, f"native:indexOf:{k}"):
            return conc(float(k))
        k += 1
    return conc(-1.0)


def arr_includes(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.includes")
    search = _arg(args, 0)
    n = _receiver_length(interp, this)
    for k in range(n):
        elem = interp.get_property(this, conc(float(k)))
        if _same_value_zero(interp, elem, search, f"native:includes:{k}"):
            return conc(True)
    return conc(False)


def arr_join(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.join")
    sep_cv = _arg(args, 0)
    sep = "," if sep_cv.concrete is UNDEFINED else V.to_string(sep_cv.concrete)
    n = _receiver_length(interp, this)
    parts = []
    for k in range(n):
        elem = interp.get_property(this, conc(float(k)))
        v = elem.concrete
        parts.append("" if v is UNDEFINED or v is NULL else V.to_string(v))
    return conc(interp.check_string(sep.join(parts)))


def arr_slice(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.slice")
    n = _receiver_length(interp, this)
    start = V.to_number(_arg(args, 0).concrete)
    end_cv = _arg(args, 1)
    end = float(n) if end_cv.concrete is UNDEFINED else V.to_number(end_cv.concrete)
    lo, hi = S._js_slice_bounds(n, start, end)
    out = interp.new_object("array")
    j = 0
    for k in range(lo, hi):
        elem = interp.get_property(this, conc(float(k)))
        out.props[str(j)] = elem.concrete
        j += 1
    out.length = j
    return conc(out)


def _find_impl(interp, this, args, want_index: bool):
    name = "findIndex" if want_index else "find"
    _require_coercible(interp, this, "Array.prototype." + name)
    callback = _arg(args, 0)
    if not (isinstance(callback.concrete, JSObject) and callback.concrete.is_callable):
        raise interp.type_error(f"{V.to_string(callback.concrete) if not isinstance(callback.concrete, JSObject) else 'value'} is not a function")
    n = _receiver_length(interp, this)
    for k in range(n):
        elem = interp.get_property(this, conc(float(k)))
        result = interp.call_function(callback, conc(UNDEFINED),
                                      [elem, conc(float(k)), this])
        if interp.branch(result, f"native:{name}:{k}"):
            return conc(float(k)) if want_index else elem
    return conc(-1.0) if want_index else conc(UNDEFINED)


def arr_find(interp, this, args):
    return _find_impl(interp, this, args, want_index=False)


def arr_find_index(interp, this, args):
    return _find_impl(interp, this, args, want_index=True)


def arr_fill(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.fill")
    value = _arg(args, 0)
    if not isinstance(this.concrete, JSObject):
        this = conc(to_object(interp, this.concrete))
    n = _receiver_length(interp, this)
    start = V.to_number(_arg(args, 1).concrete)
    end_cv = _arg(args, 2)
    end = float(n) if end_cv.concrete is UNDEFINED else V.to_number(end_cv.concrete)
    lo, hi = S._js_slice_bounds(n, start, end)
    for k in range(lo, hi):
        interp.set_property(this, conc(float(k)), value)
    return this


def arr_some(interp, this, args):
    _require_coercible(interp, this, "Array.prototype.some")
    callback = _arg(args, 0)
    if not (isinstance(callback.concrete, JSObject) and callback.concrete.is_callable):
        raise interp.type_error("callback is not a function")
    n = _receiver_length(interp, this)
    for k in range(n):
        elem = interp.get_property(this, conc(float(k)))
        result = interp.call_function(callback, conc(UNDEFINED),
                                      [elem, conc(float(k)), this])
        if interp.branch(result, f"native:some:{k}"):
            return conc(True)
    return conc(False)


ARRAY_METHODS = {
    "push": arr_push,
    "pop": arr_pop,
    "indexOf": arr_index_of,
    "includes": arr_includes,
    "join": arr_join,
    "slice": arr_slice,
    "find": arr_find,
    "findIndex": arr_find_index,
    "fill": arr_fill,
    "some": arr_some,
}


# --- call / apply -----------------------------------------------------------

def bind_call(target: JSObject):
    def fn_call(interp, this, args):
        return interp.call_function(conc(target), _arg(args, 0), list(args[1:]))
    return fn_call


def bind_apply(target: JSObject):
    def fn_apply(interp, this, args):
        arg_list: list[ConcolicValue] = []
        arr = _arg(args, 1)
        if arr.concrete is not UNDEFINED and arr.concrete is not NULL:
            lcv = interp.get_property(arr, conc("length"))
            n = _to_length(V.to_number(lcv.concrete))
            for i in range(n):
                arg_list.append(interp.get_property(arr, conc(float(i))))
        return interp.call_function(conc(target), _arg(args, 0), arg_list)
    return fn_apply


# --- global installation ----------------------------------------------------

def _console_log(interp, this, args):
    line = " ".join(
        V.to_string(V.to_primitive(a.concrete)) if isinstance(a.concrete, JSObject)
        else V.to_string(a.concrete)
        for a in args)
    interp.transcript.append("log:" + line)
    return conc(UNDEFINED)


def _emit_result(interp, this, args):
    """Harness sink: record exactly one result envelope on the transcript."""
    from .interp import classify_throw
    status = V.to_string(_arg(args, 0).concrete)
    value = _arg(args, 1).concrete
    if status == "ok":
        try:
            encoded = V.encode_value(value)
        except ValueError:
            encoded = {"t": "opaque"}
        envelope = {"status": "ok", "value": encoded, "errorType": None}
    else:
        envelope = {"status": "throw", "value": None,
                    "errorType": classify_throw(value)}
    interp.transcript.append(
        "result:" + json.dumps(envelope, separators=(",", ":")))
    return conc(UNDEFINED)


def _math_unary(f):
    def fn(interp, this, args):
        n = V.to_number(_arg(args, 0).concrete)
        if _arg(args, 0).is_symbolic:
            interp.log_event("concretized: symbolic argument to Math builtin")
        return conc(f(n))
    return fn


def _math_floor(n):
    if math.isnan(n) or math.isinf(n):
        return n
    return float(math.floor(n))


def _math_abs(n):
    return abs(n) if not math.isnan(n) else math.nan


def _math_minmax(pick):
    """Symbolic-aware min/max: the selection between two operands is a
    branch on their comparison, so a symbolic winner keeps its expression
    and the choice lands in the path condition."""
    name = "Math.max" if pick is max else "Math.min"
    cmp_op = ">" if pick is max else "<"

    def fn(interp, this, args):
        best = ConcolicValue(-math.inf if pick is max else math.inf, None)
        for k, a in enumerate(args):
            cur = ConcolicValue(V.to_number(a.concrete),
                                _num_expr(a) if a.is_symbolic else None)
            if math.isnan(cur.concrete):
                return ConcolicValue(math.nan, cur.symbolic)
            if _any_symbolic(cur, best):
                wins = interp.branch(interp._binary(cmp_op, cur, best),
                                     f"native:{name}:{k}")
                if wins:
                    best = cur
            elif pick(best.concrete, cur.concrete) == cur.concrete:
                best = cur
        return best
    return fn


def to_object(interp, v: Value) -> JSObject:
    """ToObject without wrapper classes: objects pass through; strings
    become index/length-shaped plain objects; other primitives become
    empty objects."""
    if isinstance(v, JSObject):
        return v
    obj = interp.new_object("object")
    if isinstance(v, str):
        for i, ch in enumerate(v):
            obj.props[str(i)] = ch
        obj.props["length"] = float(len(v))
    return obj


def _object_ctor(interp, this, args):
    return conc(to_object(interp, _arg(args, 0).concrete))


def _object_create(interp, this, args):
    proto = _arg(args, 0).concrete
    obj = interp.new_object("object")
    if isinstance(proto, JSObject):
        for k, val in proto.props.items():
            obj.props[k] = val
    return conc(obj)


def _object_keys(interp, this, args):
    v = _arg(args, 0).concrete
    if not isinstance(v, JSObject):
        raise interp.type_error("Object.keys called on non-object")
    if v.sym_state is not None and interp.mode == "concolic":
        interp.log_event(f"concretized: Object.keys over symbolic {v.sym_state.name}")
    out = interp.new_object("array")
    keys = interp._enumeration_keys(v)
    for i, k in enumerate(keys):
        out.props[str(i)] = k
    out.length = len(keys)
    return conc(out)


def _string_ctor(interp, this, args):
    if not args:
        return conc("")
    cv = args[0]
    if isinstance(cv.concrete, JSObject):
        return conc(V.to_string(V.to_primitive(cv.concrete)))
    sym = mk("to.str", cv.symbolic) if cv.is_symbolic else None
    return ConcolicValue(V.to_string(cv.concrete), sym)


def _number_ctor(interp, this, args):
    if not args:
        return conc(0.0)
    cv = args[0]
    if isinstance(cv.concrete, JSObject):
        return conc(V.to_number(V.to_primitive(cv.concrete)))
    sym = mk("to.num", cv.symbolic) if cv.is_symbolic else None
    return ConcolicValue(V.to_number(cv.concrete), sym)


def _boolean_ctor(interp, this, args):
    if not args:
        return conc(False)
    cv = args[0]
    sym = mk("to.bool", cv.symbolic) if cv.is_symbolic else None
    return ConcolicValue(V.to_boolean(cv.concrete), sym)


def _is_nan(interp, this, args):
    cv = _arg(args, 0)
    if isinstance(cv.concrete, JSObject):
        return conc(math.isnan(V.to_number(V.to_primitive(cv.concrete))))
    n = V.to_number(cv.concrete)
    sym = None
    if cv.is_symbolic:
        e = mk("to.num", cv.symbolic)
        sym = mk("not", mk("num.eq", e, e))
    return ConcolicValue(math.isnan(n), sym)


def _error_ctor(name: str):
    def fn(interp, this, args):
        err = interp.new_object("object")
        err.props["name"] = name
        msg = _arg(args, 0).concrete
        err.props["message"] = "" if msg is UNDEFINED else V.to_string(msg)
        if name in ("TypeError", "RangeError"):
            err.error_type = name
        return conc(err)
    return fn


def _array_ctor(interp, this, args):
    arr = interp.new_object("array")
    if len(args) == 1 and isinstance(args[0].concrete, float) \
            and not isinstance(args[0].concrete, bool):
        n = args[0].concrete
        if math.isnan(n) or n != V.to_uint32(n):
            raise interp.range_error("Invalid array length")
        arr.length = int(n)
        return conc(arr)
    for i, a in enumerate(args):
        arr.props[str(i)] = a.concrete
    arr.length = len(args)
    return conc(arr)


def _array_is_array(interp, this, args):
    v = _arg(args, 0).concrete
    return conc(isinstance(v, JSObject) and v.is_array)


def install_globals(interp) -> None:
    g = interp.globals

    def declare_fn(name: str, fn: Callable) -> JSObject:
        obj = make_native(interp, name, fn)
        g.declare(name, conc(obj))
        return obj

    g.declare("undefined", conc(UNDEFINED))
    g.declare("NaN", conc(math.nan))
    g.declare("Infinity", conc(math.inf))

    console = interp.new_object("object")
    console.props["log"] = make_native(interp, "log", _console_log)
    g.declare("console", conc(console))

    math_obj = interp.new_object("object")
    math_obj.props["floor"] = make_native(interp, "floor", _math_unary(_math_floor))
    math_obj.props["abs"] = make_native(interp, "abs", _math_unary(_math_abs))
    math_obj.props["min"] = make_native(interp, "min", _math_minmax(min))
    math_obj.props["max"] = make_native(interp, "max", _math_minmax(max))
    g.declare("Math", conc(math_obj))

    object_ctor = declare_fn("Object", _object_ctor)
    object_ctor.props["create"] = make_native(interp, "create", _object_create)
    object_ctor.props["keys"] = make_native(interp, "keys", _object_keys)

    array_ctor = declare_fn("Array", _array_ctor)
    array_ctor.props["isArray"] = make_native(interp, "isArray", _array_is_array)
    array_proto = interp.new_object("object")
    for name, fn in ARRAY_METHODS.items():
        array_proto.props[name] = make_native(interp, name, fn)
    array_ctor.props["prototype"] = array_proto

    string_ctor = declare_fn("String", _string_ctor)
    string_proto = interp.new_object("object")
    for name, fn in STRING_METHODS.items():
        string_proto.props[name] = make_native(interp, name, fn)
    string_ctor.props["prototype"] = string_proto
    declare_fn("Number", _number_ctor)
    declare_fn("Boolean", _boolean_ctor)
    declare_fn("isNaN", _is_nan)
    declare_fn("TypeError", _error_ctor("TypeError"))
    declare_fn("RangeError", _error_ctor("RangeError"))
    declare_fn("Error", _error_ctor("Error"))
    declare_fn("__emitResult", _emit_result)
