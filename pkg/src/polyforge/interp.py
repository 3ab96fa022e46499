"""Concolic interpreter for the mini-JS subset.

One :class:`Interp` instance runs one execution: it owns the path
condition, the branch coverage map, the transcript, and the symbol
registry, and shares nothing with other executions.  In ``concrete``
mode every piece of symbolic machinery is disabled and input symbols are
materialized up front; the path verifier relies on that independent path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from . import inputs as I
from . import symarrays as SA
from . import symcore as S
from . import symobjects as SO
from . import values as V
from .frontend import Node
from .symcore import ConcolicValue, PathCondition, SymExpr, conc, const, mk, var
from .values import JSObject, NULL, UNDEFINED, Value


class EngineLimit(Exception):
    """Step/heap/string budget exhausted; a distinct outcome class, never a
    program-level throw."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class JSThrow(Exception):
    """A mini-JS ``throw`` propagating as a Python exception."""

    def __init__(self, value: Value):
        super().__init__(V.to_string(value) if not isinstance(value, JSObject) else "object")
        self.value = value


def classify_throw(value: Value) -> str:
    if isinstance(value, JSObject) and value.error_type:
        return value.error_type
    return "UserThrown"


@dataclass
class Config:
    step_budget: int = 200_000
    heap_budget: int = 100_000
    string_budget: int = 1 << 20
    symbol_budget: int = 512
    homogeneous: bool = True
    fault_hook: Optional[Callable[[str, ConcolicValue], ConcolicValue]] = None


@dataclass
class SymbolSpec:
    name: str
    kind: str = "untyped"  # "untyped" | "number" | "string" | "boolean"


@dataclass
class EntryCall:
    function: str
    symbols: list[SymbolSpec] = field(default_factory=list)


@dataclass
class ExecutionResult:
    status: str  # "normal" | "thrown"
    value: Value = UNDEFINED
    value_json: str = ""
    error_type: Optional[str] = None
    pc: PathCondition = field(default_factory=PathCondition)
    coverage: dict = field(default_factory=dict)  # site -> set of outcomes
    events: list = field(default_factory=list)
    steps: int = 0
    transcript: list = field(default_factory=list)
    minted: dict = field(default_factory=dict)  # symbol name -> tag
    untyped: frozenset = frozenset()  # subset of minted eligible for tag alternatives

    def outcome_key(self) -> tuple:
        """Comparison key used by the path verifier and the vote."""
        return (self.status, self.value_json, self.error_type, tuple(self.transcript))


class _Return(Exception):
    def __init__(self, value: ConcolicValue):
        self.value = value


class Env:
    __slots__ = ("vars", "parent")

    def __init__(self, parent: Optional["Env"] = None):
        self.vars: dict[str, ConcolicValue] = {}
        self.parent = parent

    def declare(self, name: str, value: ConcolicValue):
        self.vars[name] = value

    def lookup(self, name: str) -> Optional[ConcolicValue]:
        env = self
        while env is not None:
            if name in env.vars:
                return env.vars[name]
            env = env.parent
        return None

    def assign(self, name: str, value: ConcolicValue) -> None:
        env = self
        while env is not None:
            if name in env.vars:
                env.vars[name] = value
                return
            if env.parent is None:
                env.vars[name] = value  # sloppy-mode global creation
                return
            env = env.parent


def safe_encode(v: Value) -> dict:
    try:
        return V.encode_value(v)
    except ValueError:
        return {"t": "opaque"}


class Interp:
    def __init__(self, assignment: Optional[I.Assignment] = None,
                 mode: str = "concolic", config: Optional[Config] = None):
        assert mode in ("concolic", "concrete")
        self.mode = mode
        self.config = config or Config()
        self.assignment = assignment or {}
        self.pc = PathCondition()
        self.coverage: dict[int, set] = {}
        self.events: list[str] = []
        self.transcript: list[str] = []
        self.steps = 0
        self.objects = 0
        self.registry = S.SymbolRegistry(
            {k: (e["tag"], e.get("value")) for k, e in self.assignment.items()
             if isinstance(e, dict) and "tag" in e})
        self._gen_counters: dict[str, int] = {}
        self.untyped_names: set[str] = set()
        self.globals = Env()
        from . import natives
        natives.install_globals(self)

    # -- bookkeeping

    def step(self, n: int = 1):
        self.steps += n
        if self.steps > self.config.step_budget:
            raise EngineLimit("step budget")

    def new_object(self, kind: str = "object") -> JSObject:
        self.objects += 1
        if self.objects > self.config.heap_budget:
            raise EngineLimit("heap budget")
        return JSObject(kind)

    def log_event(self, msg: str):
        self.events.append(msg)

    def check_string(self, s: str) -> str:
        if len(s) > self.config.string_budget:
            raise EngineLimit("string budget")
        return s

    def type_error(self, msg: str) -> JSThrow:
        err = self.new_object("object")
        err.props["name"] = "TypeError"
        err.props["message"] = msg
        err.error_type = "TypeError"
        return JSThrow(err)

    def range_error(self, msg: str) -> JSThrow:
        err = self.new_object("object")
        err.props["name"] = "RangeError"
        err.props["message"] = msg
        err.error_type = "RangeError"
        return JSThrow(err)

    # -- symbols

    def fresh_generation_name(self, base: str) -> str:
        n = self._gen_counters.get(base, 0) + 1
        self._gen_counters[base] = n
        return f"{base}#g{n}"

    def fresh_untyped(self, name: str) -> ConcolicValue:
        """Mint (or replay) an untyped input symbol: concrete part comes
        from the assignment, the current type tag is pinned in the PC, and
        sibling tags are left for the campaign scheduler."""
        assert self.mode == "concolic"
        if name not in self.registry.minted and \
                len(self.registry.minted) >= self.config.symbol_budget:
            raise EngineLimit("symbol budget")
        self.untyped_names.add(name)
        info = self.registry.mint(name)
        tag = info.tag
        self.pc.append(mk("tag.eq", SymExpr("tagof", data=name), SymExpr("tag", data=tag)),
                       True, False, f"pin:{name}")
        if tag in ("undefined", "null"):
            cv = ConcolicValue(S.tag_default(tag), None)
        elif tag in ("number", "string", "boolean"):
            cv = ConcolicValue(I.entry_primitive(self.assignment, name, tag),
                               var(name, S.tag_sort(tag)))
        elif tag == "object":
            cv = conc(self._make_symbolic_object(name))
        elif tag == "array":
            cv = conc(self._make_symbolic_array(name))
        else:
            raise ValueError(tag)
        if self.config.fault_hook is not None:
            cv = self.config.fault_hook(name, cv)
        return cv

    def _make_symbolic_object(self, name: str) -> JSObject:
        obj = self.new_object("object")
        state = SO.SymbolicObjectState(name)
        state.backing = obj
        obj.sym_state = state
        for key, child in I.child_entries(self.assignment, name).items():
            cv = self.fresh_untyped(child)
            state.known[key] = cv
            self.mirror_concrete(state, key, cv)
        return obj

    def _make_symbolic_array(self, name: str) -> JSObject:
        arr = self.new_object("array")
        children = I.child_entries(self.assignment, name)
        length = 0
        if "length" in children:
            length = int(V.to_uint32(I.materialize_value(self.assignment, children["length"])))
        mode = "homogeneous" if self.config.homogeneous else "mixed"
        state = SA.SymbolicArrayState(name, mode=mode,
                                      elem_sort=I.elem_sort(self.assignment, name))
        state.backing = arr
        arr.sym_state = state
        state.length_conc = length
        if mode == "homogeneous":
            for key, child in children.items():
                if key == "length":
                    continue
                idx = SA.canonical_index(key)
                if idx is None:
                    continue
                val = I.entry_primitive(self.assignment, child)
                arr.props[key] = val
                length = max(length, idx + 1)
            state.length_conc = length
            arr.length = length
        else:
            for key, child in children.items():
                if key == "length":
                    continue
                cv = self.fresh_untyped(child)
                state.known[key] = cv
                self.mirror_concrete(state, key, cv)
            state.length_conc = max(state.length_conc, state.max_live_index() + 1)
        arr.length = state.length_conc
        return arr

    # -- mirrors keeping the concrete heap object in sync with sym state

    def mirror_concrete(self, state, key: str, cv: Optional[ConcolicValue]):
        obj = state.backing
        if cv is None:
            obj.props.pop(key, None)
        else:
            obj.props[key] = cv.concrete
        if isinstance(state, SA.SymbolicArrayState):
            obj.length = state.length_conc

    def mirror_length(self, state, n: int):
        state.backing.length = n

    def hom_concrete_element(self, state, idx: Optional[int]) -> Value:
        if idx is None:
            return S._sort_default(state.elem_sort)
        v = state.backing.props.get(str(idx))
        if v is None:
            return S._sort_default(state.elem_sort)
        return v

    def hom_store_concrete(self, state, idx: int, value: Value):
        state.backing.props[str(idx)] = value
        state.backing.length = state.length_conc

    # -- branching

    def branch(self, cv: ConcolicValue, site, span=(0, 0)) -> bool:
        outcome = V.to_boolean(cv.concrete)
        if isinstance(site, int):
            self.coverage.setdefault(site, set()).add(outcome)
        if self.mode == "concolic" and cv.symbolic is not None:
            expr = cv.symbolic
            if S.sort_of(expr) != S.BOOL:
                expr = mk("to.bool", expr)
            key = site if isinstance(site, str) else f"ast:{site}"
            self.pc.append(expr, outcome, True, key, span)
        return outcome

    # -- property access ----------------------------------------------------

    _STRING_CHAR_SITES = 0

    def get_property(self, obj: ConcolicValue, prop: ConcolicValue,
                     span=(0, 0)) -> ConcolicValue:
        base = obj.concrete
        if base is UNDEFINED or base is NULL:
            raise self.type_error(
                f"Cannot read properties of {V.to_string(base)} "
                f"(reading '{V.to_string(prop.concrete)}')")
        from . import natives
        if isinstance(base, str):
            return self._string_property(obj, prop)
        if isinstance(base, (bool, float)):
            key = V.to_string(prop.concrete)
            if key == "toString":
                return conc(natives.make_native(self, "toString", natives.generic_tostring))
            return conc(UNDEFINED)
        assert isinstance(base, JSObject)
        key = V.to_string(prop.concrete)
        state = base.sym_state
        if state is not None and self.mode == "concolic":
            if isinstance(state, SA.SymbolicArrayState):
                if key == "length" and not prop.is_symbolic:
                    sym = None if state.length_pinned else state.length_sym
                    return ConcolicValue(float(state.length_conc), sym)
                if key in natives.ARRAY_METHODS and state.live_value(key) is None:
                    return conc(natives.make_native(self, key, natives.ARRAY_METHODS[key]))
                if state.mode == "homogeneous":
                    return SA.arr_get_hom(state, prop, self)
                return SA.arr_get_mixed(state, prop, self)
            if key == "toString" and state.live_value(key) is None:
                return conc(natives.make_native(self, "toString", natives.generic_tostring))
            return SO.obj_get(state, prop, self)
        # concrete heap object
        if base.is_array:
            if key == "length":
                return conc(float(base.length))
            if key in base.props:
                return conc(base.props[key])
            idx = SA.canonical_index(prop.concrete)
            if idx is not None:
                return conc(UNDEFINED)
            if key in natives.ARRAY_METHODS:
                return conc(natives.make_native(self, key, natives.ARRAY_METHODS[key]))
            if key == "toString":
                return conc(natives.make_native(self, "toString", natives.generic_tostring))
            return conc(UNDEFINED)
        if base.is_callable:
            if key == "prototype":
                if "prototype" not in base.props:
                    base.props["prototype"] = self.new_object("object")
                return conc(base.props["prototype"])
            if key in ("call", "apply"):
                fn = natives.bind_call(base) if key == "call" else natives.bind_apply(base)
                return conc(natives.make_native(self, key, fn))
            if key == "length":
                n = len(base.fn_node.params) if base.fn_node else 0
                return conc(float(n))
            return conc(base.props.get(key, UNDEFINED))
        if key in base.props:
            return conc(base.props[key])
        if key == "toString":
            return conc(natives.make_native(self, "toString", natives.generic_tostring))
        return conc(UNDEFINED)

    def _string_property(self, obj: ConcolicValue, prop: ConcolicValue) -> ConcolicValue:
        from . import natives
        s = obj.concrete
        key = V.to_string(prop.concrete)
        if key == "length" and not prop.is_symbolic:
            sym = mk("str.len", obj.symbolic) if obj.is_symbolic else None
            return ConcolicValue(float(len(s)), sym)
        idx = SA.canonical_index(prop.concrete)
        if idx is not None:
            in_range = idx < len(s)
            if self.mode == "concolic" and (obj.is_symbolic or prop.is_symbolic):
                se = obj.expr_or_const()
                ie = prop.expr_or_const()
                if S.sort_of(ie) != S.NUM:
                    ie = mk("to.num", ie)
                cond = mk("num.lt", ie, mk("str.len", se))
                self.pc.append(cond, in_range, True, "sym:str:index")
                if in_range:
                    return ConcolicValue(s[idx], mk("str.charat", se, ie))
            return conc(s[idx]) if in_range else conc(UNDEFINED)
        if key in natives.STRING_METHODS:
            return conc(natives.make_native(self, key, natives.STRING_METHODS[key]))
        if key == "toString":
            return conc(natives.make_native(self, "toString", natives.generic_tostring))
        return conc(UNDEFINED)

    def set_property(self, obj: ConcolicValue, prop: ConcolicValue,
                     value: ConcolicValue, span=(0, 0)) -> ConcolicValue:
        base = obj.concrete
        if base is UNDEFINED or base is NULL:
            raise self.type_error(
                f"Cannot set properties of {V.to_string(base)}")
        if not isinstance(base, JSObject):
            return value  # silent no-op on primitives (sloppy mode)
        key = V.to_string(prop.concrete)
        state = base.sym_state
        if state is not None and self.mode == "concolic":
            if isinstance(state, SA.SymbolicArrayState):
                if key == "length" and not prop.is_symbolic:
                    try:
                        SA.arr_set_length(state, value, self)
                    except SA.JSRangeError as e:
                        raise self.range_error(str(e)) from None
                    return value
                if state.mode == "homogeneous":
                    return SA.arr_set_hom(state, prop, value, self)
                return SA.arr_set_mixed(state, prop, value, self)
            return SO.obj_set(state, prop, value, self)
        if base.is_array:
            if key == "length":
                n_num = V.to_number(value.concrete)
                n = V.to_uint32(value.concrete)
                if math.isnan(n_num) or n_num != n:
                    raise self.range_error("Invalid array length")
                n = int(n)
                for k in list(base.props):
                    i = SA.canonical_index(k)
                    if i is not None and i >= n:
                        del base.props[k]
                base.length = n
                return value
            idx = SA.canonical_index(prop.concrete)
            if idx is not None:
                base.props[str(idx)] = value.concrete
                base.length = max(base.length, idx + 1)
                if value.is_symbolic:
                    self.log_event("concretized: symbolic element into concrete array")
                return value
            base.props[key] = value.concrete
            return value
        if value.is_symbolic and self.mode == "concolic":
            self.log_event("concretized: symbolic value into concrete object")
        base.props[key] = value.concrete
        return value

    def delete_property(self, obj: ConcolicValue, prop: ConcolicValue) -> ConcolicValue:
        base = obj.concrete
        if not isinstance(base, JSObject):
            return conc(True)
        key = V.to_string(prop.concrete)
        state = base.sym_state
        if state is not None and self.mode == "concolic" and not isinstance(state, SA.SymbolicArrayState):
            return conc(SO.obj_delete(state, prop, self))
        if state is not None and isinstance(state, SA.SymbolicArrayState):
            if key in state.known and state.known[key] is not SO.TOMBSTONE:
                state.known[key] = SO.TOMBSTONE
                self.mirror_concrete(state, key, None)
                return conc(True)
            base.props.pop(key, None)
            return conc(True)
        base.props.pop(key, None)
        return conc(True)

    # -- calls ---------------------------------------------------------------

    def call_function(self, callee: ConcolicValue, this: ConcolicValue,
                      args: list[ConcolicValue], construct: bool = False) -> ConcolicValue:
        fn = callee.concrete
        if not isinstance(fn, JSObject) or not fn.is_callable:
            raise self.type_error(f"{V.to_string(fn) if not isinstance(fn, JSObject) else 'value'} is not a function")
        self.step()
        if fn.native is not None:
            return fn.native(self, this, args)
        env = Env(fn.fn_env)
        params = fn.fn_node.params
        for i, p in enumerate(params):
            env.declare(p, args[i] if i < len(args) else conc(UNDEFINED))
        env.declare("this", this)
        if fn.fn_name:
            if env.lookup(fn.fn_name) is None:
                env.declare(fn.fn_name, callee)
        try:
            self.exec_block(fn.fn_node.attrs["body"], env)
        except _Return as r:
            return r.value
        return conc(UNDEFINED)

    def construct(self, callee: ConcolicValue, args: list[ConcolicValue]) -> ConcolicValue:
        fn = callee.concrete
        if not isinstance(fn, JSObject) or not fn.is_callable:
            raise self.type_error("not a constructor")
        if fn.native is not None:
            return fn.native(self, conc(UNDEFINED), args)
        obj = self.new_object("object")
        proto = fn.props.get("prototype")
        if isinstance(proto, JSObject):
            # structural copy-on-new: prototype properties become own props
            for k, v in proto.props.items():
                obj.props[k] = v
        result = self.call_function(callee, conc(obj), args)
        if isinstance(result.concrete, JSObject):
            return result
        return conc(obj)

    # -- statements ----------------------------------------------------------

    def exec_program(self, program: Node, env: Optional[Env] = None):
        env = env or self.globals
        self._hoist(program.body, env)
        for stmt in program.body:
            self.exec_stmt(stmt, env)

    def _hoist(self, body: list[Node], env: Env):
        for stmt in body:
            if stmt.kind == "funcdecl":
                env.declare(stmt.name, conc(self._make_function(stmt, env)))

    def _make_function(self, node: Node, env: Env) -> JSObject:
        fn = self.new_object("function")
        fn.fn_node = node
        fn.fn_env = env
        fn.fn_name = node.name
        return fn

    def exec_block(self, block: Node, env: Env):
        self._hoist(block.body, env)
        for stmt in block.body:
            self.exec_stmt(stmt, env)

    def exec_stmt(self, node: Node, env: Env):
        self.step()
        k = node.kind
        if k == "exprstmt":
            self.eval_expr(node.expr, env)
            return
        if k == "var":
            for name, init in node.decls:
                value = self.eval_expr(init, env) if init is not None else conc(UNDEFINED)
                env.declare(name, value)
            return
        if k == "funcdecl":
            return  # hoisted
        if k == "block":
            self.exec_block(node, env)
            return
        if k == "empty":
            return
        if k == "if":
            cond = self.eval_expr(node.test, env)
            if self.branch(cond, node.site, node.span):
                self.exec_stmt(node.then, env)
            elif node.els is not None:
                self.exec_stmt(node.els, env)
            return
        if k == "while":
            while True:
                cond = self.eval_expr(node.test, env)
                if not self.branch(cond, node.site, node.span):
                    break
                self.exec_stmt(node.body, env)
            return
        if k == "for":
            if node.init is not None:
                self.exec_stmt(node.init, env)
            while True:
                if node.test is not None:
                    cond = self.eval_expr(node.test, env)
                    if not self.branch(cond, node.site, node.span):
                        break
                self.exec_stmt(node.body, env)
                if node.update is not None:
                    self.eval_expr(node.update, env)
            return
        if k in ("forin", "forof"):
            self._exec_for_each(node, env)
            return
        if k == "return":
            value = self.eval_expr(node.value, env) if node.value is not None else conc(UNDEFINED)
            raise _Return(value)
        if k == "throw":
            value = self.eval_expr(node.value, env)
            raise JSThrow(value.concrete)
        if k == "trycatch":
            try:
                self.exec_stmt(node.attrs["block"], env)
            except JSThrow as t:
                handler_env = Env(env)
                handler_env.declare(node.param, conc(t.value))
                self.exec_stmt(node.handler, handler_env)
            return
        raise ValueError(f"unknown statement kind {k}")

    def _enumeration_keys(self, obj: JSObject) -> list[str]:
        numeric = []
        other = []
        for key in obj.props:
            if SA.canonical_index(key) is not None:
                numeric.append(key)
            else:
                other.append(key)
        numeric.sort(key=int)
        return numeric + other

    def _exec_for_each(self, node: Node, env: Env):
        obj_cv = self.eval_expr(node.obj, env)
        base = obj_cv.concrete
        if not isinstance(base, JSObject):
            if isinstance(base, str) and node.kind == "forof":
                items = [conc(ch) for ch in base]
            else:
                items = []
        else:
            if base.sym_state is not None and self.mode == "concolic":
                self.log_event(f"concretized: {node.kind} over symbolic "
                               f"{base.sym_state.name}")
            keys = self._enumeration_keys(base)
            if node.kind == "forin":
                items = [conc(key) for key in keys]
            else:
                if not base.is_array:
                    raise self.type_error("value is not iterable")
                items = [conc(base.props[k]) for k in keys
                         if SA.canonical_index(k) is not None and int(k) < base.length]
        loop_env = Env(env) if node.decl_kind else env
        for item in items:
            self.step()
            if node.decl_kind:
                loop_env.declare(node.var, item)
            else:
                loop_env.assign(node.var, item)
            self.exec_stmt(node.body, loop_env)

    # -- expressions ---------------------------------------------------------

    def eval_expr(self, node: Node, env: Env) -> ConcolicValue:
        self.step()
        k = node.kind
        if k == "num":
            return conc(node.value)
        if k == "str":
            return conc(node.value)
        if k == "bool":
            return conc(node.value)
        if k == "null":
            return conc(NULL)
        if k == "this":
            found = env.lookup("this")
            return found if found is not None else conc(UNDEFINED)
        if k == "ident":
            found = env.lookup(node.name)
            if found is None:
                raise self.type_error(f"{node.name} is not defined")
            return found
        if k == "array":
            arr = self.new_object("array")
            for i, el in enumerate(node.elements):
                cv = self.eval_expr(el, env)
                arr.props[str(i)] = cv.concrete
                if cv.is_symbolic:
                    self.log_event("concretized: symbolic element in array literal")
            arr.length = len(node.elements)
            return conc(arr)
        if k == "object":
            obj = self.new_object("object")
            for key, val in node.props:
                cv = self.eval_expr(val, env)
                obj.props[key] = cv.concrete
                if cv.is_symbolic:
                    self.log_event("concretized: symbolic value in object literal")
            return conc(obj)
        if k == "func":
            return conc(self._make_function(node, env))
        if k == "unary":
            operand = self.eval_expr(node.operand, env)
            return self._unary(node.op, operand)
        if k == "typeof":
            if node.operand.kind == "ident" and env.lookup(node.operand.name) is None:
                return conc("undefined")
            operand = self.eval_expr(node.operand, env)
            return conc(V.typeof(operand.concrete))
        if k == "delete":
            t = node.target
            obj = self.eval_expr(t.obj, env)
            prop = conc(t.name) if t.kind == "member" else self.eval_expr(t.expr, env)
            return self.delete_property(obj, prop)
        if k == "binary":
            if node.op in ("&&", "||"):
                left = self.eval_expr(node.left, env)
                taken = self.branch(left, node.site, node.span)
                if node.op == "&&":
                    return self.eval_expr(node.right, env) if taken else left
                return left if taken else self.eval_expr(node.right, env)
            left = self.eval_expr(node.left, env)
            right = self.eval_expr(node.right, env)
            return self._binary(node.op, left, right)
        if k == "assign":
            t = node.target
            value = self.eval_expr(node.value, env)
            if t.kind == "ident":
                env.assign(t.name, value)
                return value
            obj = self.eval_expr(t.obj, env)
            prop = conc(t.name) if t.kind == "member" else self.eval_expr(t.expr, env)
            return self.set_property(obj, prop, value, node.span)
        if k == "cond":
            test = self.eval_expr(node.test, env)
            if self.branch(test, node.site, node.span):
                return self.eval_expr(node.then, env)
            return self.eval_expr(node.els, env)
        if k == "member":
            obj = self.eval_expr(node.obj, env)
            return self.get_property(obj, conc(node.name), node.span)
        if k == "index":
            obj = self.eval_expr(node.obj, env)
            prop = self.eval_expr(node.expr, env)
            return self.get_property(obj, prop, node.span)
        if k == "call":
            return self._eval_call(node, env)
        if k == "new":
            callee = self.eval_expr(node.callee, env)
            args = [self.eval_expr(a, env) for a in node.args]
            return self.construct(callee, args)
        raise ValueError(f"unknown expression kind {k}")

    def _eval_call(self, node: Node, env: Env) -> ConcolicValue:
        callee_node = node.callee
        if callee_node.kind == "member":
            obj = self.eval_expr(callee_node.obj, env)
            callee = self.get_property(obj, conc(callee_node.name), node.span)
            this = obj
        elif callee_node.kind == "index":
            obj = self.eval_expr(callee_node.obj, env)
            prop = self.eval_expr(callee_node.expr, env)
            callee = self.get_property(obj, prop, node.span)
            this = obj
        else:
            callee = self.eval_expr(callee_node, env)
            this = conc(UNDEFINED)
        args = [self.eval_expr(a, env) for a in node.args]
        return self.call_function(callee, this, args)

    # -- operator symbolics --------------------------------------------------

    def _unary(self, op: str, v: ConcolicValue) -> ConcolicValue:
        concrete = V.unary_op(op, v.concrete)
        sym = None
        if self.mode == "concolic" and v.is_symbolic:
            e = v.symbolic
            if op == "-":
                sym = mk("neg", _ensure(e, S.NUM))
            elif op == "+":
                sym = _ensure(e, S.NUM)
            elif op == "!":
                sym = mk("not", _ensure(e, S.BOOL))
            elif op == "~":
                sym = mk("bit.not", _ensure(e, S.NUM))
        return ConcolicValue(concrete, sym)

    def _binary(self, op: str, l: ConcolicValue, r: ConcolicValue) -> ConcolicValue:
        concrete = V.binary_op(op, l.concrete, r.concrete)
        if isinstance(concrete, str):
            self.check_string(concrete)
        sym = None
        if self.mode == "concolic" and (l.is_symbolic or r.is_symbolic):
            sym = _sym_binary(op, l, r)
        return ConcolicValue(concrete, sym)


_NUMERIC_NODE = {"-": "sub", "*": "mul", "/": "div", "%": "mod",
                 "&": "bit.and", "|": "bit.or", "^": "bit.xor",
                 "<<": "shl", ">>": "shr", ">>>": "ushr"}

_REL_NODE = {"<": "lt", "<=": "le", ">": "gt", ">=": "ge"}


def _prim_expr(cv: ConcolicValue) -> Optional[SymExpr]:
    """Expression for the to_primitive view of a value; objects concretize."""
    if isinstance(cv.concrete, JSObject):
        prim = V.to_primitive(cv.concrete)
        return const(prim)
    return cv.expr_or_const()


def _ensure(e: SymExpr, sort: str) -> SymExpr:
    if e.op == "const":
        t = V.type_tag(e.data)
        ok = (sort == S.NUM and t == "number") or \
             (sort == S.STR and t == "string") or \
             (sort == S.BOOL and t == "boolean")
        if ok:
            return e
    else:
        try:
            if S.sort_of(e) == sort:
                return e
        except ValueError:
            pass
    wrap = {S.NUM: "to.num", S.STR: "to.str", S.BOOL: "to.bool"}[sort]
    return mk(wrap, e)


def _sym_binary(op: str, l: ConcolicValue, r: ConcolicValue) -> Optional[SymExpr]:
    le, re_ = _prim_expr(l), _prim_expr(r)
    if le is None or re_ is None:
        return None
    lp = V.to_primitive(l.concrete)
    rp = V.to_primitive(r.concrete)
    if op == "+":
        if isinstance(lp, str) or isinstance(rp, str):
            return mk("str.concat", _ensure(le, S.STR), _ensure(re_, S.STR))
        return mk("add", _ensure(le, S.NUM), _ensure(re_, S.NUM))
    if op in _NUMERIC_NODE:
        return mk(_NUMERIC_NODE[op], _ensure(le, S.NUM), _ensure(re_, S.NUM))
    if op in _REL_NODE:
        if isinstance(lp, str) and isinstance(rp, str):
            return mk("str." + _REL_NODE[op], _ensure(le, S.STR), _ensure(re_, S.STR))
        return mk("num." + _REL_NODE[op], _ensure(le, S.NUM), _ensure(re_, S.NUM))
    if op in ("==", "!=", "===", "!=="):
        strict = op in ("===", "!==")
        eq = _sym_equality(l, r, le, re_, strict)
        if eq is None:
            return None
        if op in ("!=", "!=="):
            return mk("not", eq)
        return eq
    return None


def _sym_equality(l: ConcolicValue, r: ConcolicValue,
                  le: SymExpr, re_: SymExpr, strict: bool) -> Optional[SymExpr]:
    tl, tr = V.type_tag(l.concrete), V.type_tag(r.concrete)
    prim = {"number", "string", "boolean"}
    if tl == tr and tl in prim:
        node = {"number": "num.eq", "string": "str.eq", "boolean": "bool.eq"}[tl]
        sort = {"number": S.NUM, "string": S.STR, "boolean": S.BOOL}[tl]
        return mk(node, _ensure(le, sort), _ensure(re_, sort))
    if strict:
        return None  # differing tags: outcome fixed by the tag pins
    if tl in prim and tr in prim:
        # loose equality across primitive tags goes through ToNumber
        return mk("num.eq", _ensure(le, S.NUM), _ensure(re_, S.NUM))
    if tl in ("object", "array") and tr in prim:
        return _sym_equality(ConcolicValue(V.to_primitive(l.concrete), _prim_expr(l)),
                             r, _prim_expr(l), re_, False)
    if tr in ("object", "array") and tl in prim:
        return _sym_equality(l, ConcolicValue(V.to_primitive(r.concrete), _prim_expr(r)),
                             le, _prim_expr(r), False)
    return None


# --- Top-level entry --------------------------------------------------------


def execute(program: Node, entry: Optional[EntryCall],
            assignment: Optional[I.Assignment] = None, mode: str = "concolic",
            config: Optional[Config] = None) -> ExecutionResult:
    """Run a program (optionally calling an entry function with input
    symbols) and package the outcome."""
    interp = Interp(assignment, mode, config)
    status, value, error_type = "normal", UNDEFINED, None
    try:
        interp.exec_program(program)
        if entry is not None:
            fn = interp.globals.lookup(entry.function)
            if fn is None:
                raise ValueError(f"entry function {entry.function!r} not found")
            args = []
            for spec in entry.symbols:
                args.append(_entry_symbol(interp, spec))
            result = interp.call_function(fn, conc(UNDEFINED), args)
            value = result.concrete
    except JSThrow as t:
        status, value, error_type = "thrown", t.value, classify_throw(t.value)
    except EngineLimit as e:
        status, value, error_type = "thrown", UNDEFINED, "EngineLimit"
        interp.log_event(f"engine limit: {e.reason}")
    except V.CoercionLimit as e:
        status, value, error_type = "thrown", UNDEFINED, "EngineLimit"
        interp.log_event(f"engine limit: {e}")
    try:
        value_json = V.canonical_json(value) if status == "normal" else ""
    except ValueError:
        value_json = '"<opaque>"'
    return ExecutionResult(
        status=status, value=value, value_json=value_json, error_type=error_type,
        pc=interp.pc, coverage=interp.coverage, events=interp.events,
        steps=interp.steps, transcript=list(interp.transcript),
        minted={name: info.tag for name, info in interp.registry.minted.items()},
        untyped=frozenset(interp.untyped_names),
    )


def _entry_symbol(interp: Interp, spec: SymbolSpec) -> ConcolicValue:
    if interp.mode == "concrete":
        if spec.kind == "untyped":
            return conc(I.materialize_value(interp.assignment, spec.name))
        return conc(I.entry_primitive(interp.assignment, spec.name, spec.kind))
    if spec.kind == "untyped":
        return interp.fresh_untyped(spec.name)
    sort = {"number": S.NUM, "string": S.STR, "boolean": S.BOOL}[spec.kind]
    interp.registry.mint(spec.name).tag = spec.kind
    return ConcolicValue(I.entry_primitive(interp.assignment, spec.name, spec.kind),
                         var(spec.name, sort))
