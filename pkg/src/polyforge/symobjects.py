"""Symbolic object encoder: known-property maps with fresh untyped symbols.

Unknown property reads mint a new untyped symbol instead of returning
undefined; symbolic property names enumerate equality/disequality
constraints against every known key (never inventing unseen names, so the
encoding stays under-approximate by design).  Deleted properties are
tombstoned, not removed: they remain enumeration targets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import symcore as S
from .symcore import ConcolicValue, SymExpr, mk, const
from .values import UNDEFINED, Value, to_string


class Tombstone:
    """Marker for a deleted/truncated slot (distinct from stored undefined)."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "<tombstone>"


TOMBSTONE = Tombstone()

MAX_SYMBOL_DEPTH = 4


def path_join(parent: str, key: str) -> str:
    """Derived symbol name for a property of a symbolic value; keys are
    JSON-quoted so arbitrary property names cannot collide."""
    return f"{parent}.{json.dumps(key)}"


_GEN_SUFFIX = __import__("re").compile(r"(#g\d+)+\Z")


def is_generation_name(name: str) -> bool:
    return _GEN_SUFFIX.search(name) is not None


def path_split(name: str) -> tuple[str, list[str]]:
    """Inverse of repeated path_join: root symbol plus property key path.
    Generation suffixes (``#gN``) are stripped before parsing."""
    m = _GEN_SUFFIX.search(name)
    if m:
        name = name[:m.start()]
    root_end = name.find('."')
    if root_end < 0:
        return name, []
    root = name[:root_end]
    keys = []
    dec = json.JSONDecoder()
    i = root_end + 1
    while i < len(name):
        key, end = dec.raw_decode(name, i)
        keys.append(key)
        i = end
        if i < len(name):
            if name[i] != ".":
                raise ValueError(f"malformed symbol path: {name!r}")
            i += 1
    return root, keys


def path_depth(name: str) -> int:
    return len(path_split(name)[1])


@dataclass
class SymbolicObjectState:
    """Known-property map for one symbolic object."""

    name: str
    known: dict[str, object] = field(default_factory=dict)  # key -> ConcolicValue | TOMBSTONE
    origin: str = "input-symbol"  # or "downgraded-array"

    def known_keys(self) -> list[str]:
        return list(self.known)

    def live_value(self, key: str) -> Optional[ConcolicValue]:
        v = self.known.get(key)
        if v is None or v is TOMBSTONE:
            return None
        return v


def _enumerate_symbolic_name(state, prop: ConcolicValue, ctx) -> str:
    """Alg. 1/2 shared preamble: constrain a symbolic property name against
    every known key, then resolve to the concrete name."""
    concrete_name = to_string(prop.concrete)
    name_expr = _as_str_expr(prop)
    for known_prop in list(state.known):
        eq = mk("str.eq", name_expr, const(known_prop))
        taken = concrete_name == known_prop
        ctx.pc.append(eq, taken, True,
                      f"sym:obj:{state.name}:key={known_prop}")
    return concrete_name


def _as_str_expr(prop: ConcolicValue) -> SymExpr:
    expr = prop.expr_or_const()
    if S.sort_of(expr) != S.STR:
        expr = mk("to.str", expr)
    return expr


def obj_get(state: SymbolicObjectState, prop: ConcolicValue, ctx) -> ConcolicValue:
    if prop.is_symbolic:
        key = _enumerate_symbolic_name(state, prop, ctx)
    else:
        key = to_string(prop.concrete)
    existing = state.known.get(key)
    if existing is not None and existing is not TOMBSTONE:
        return existing
    if existing is TOMBSTONE:
        # erased slot: a lookup mints a brand new symbol under a fresh name
        fresh_name = ctx.fresh_generation_name(path_join(state.name, key))
    else:
        fresh_name = path_join(state.name, key)
    if path_depth(fresh_name) > MAX_SYMBOL_DEPTH:
        ctx.log_event(f"concretized: depth cap at {fresh_name}")
        value = ConcolicValue(UNDEFINED, None)
    else:
        value = ctx.fresh_untyped(fresh_name)
    state.known[key] = value
    ctx.mirror_concrete(state, key, value)
    return value


def obj_set(state: SymbolicObjectState, prop: ConcolicValue,
            value: ConcolicValue, ctx) -> ConcolicValue:
    if prop.is_symbolic:
        key = _enumerate_symbolic_name(state, prop, ctx)
    else:
        key = to_string(prop.concrete)
    state.known[key] = value
    ctx.mirror_concrete(state, key, value)
    return value


def obj_delete(state: SymbolicObjectState, prop: ConcolicValue, ctx) -> bool:
    if prop.is_symbolic:
        key = _enumerate_symbolic_name(state, prop, ctx)
    else:
        key = to_string(prop.concrete)
    if key in state.known and state.known[key] is not TOMBSTONE:
        state.known[key] = TOMBSTONE
        ctx.mirror_concrete(state, key, None)
        return True
    return False
