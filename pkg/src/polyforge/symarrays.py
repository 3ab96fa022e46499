"""Symbolic arrays: mixed-type arrays with a symbolic length, and
SMT-style homogeneously typed arrays (select/store) with downgrade.

Mixed mode concretizes symbolic numeric indices (logged); homogeneous mode
keeps indices fully symbolic and falls back to mixed via downgrade when an
element of the wrong sort is stored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import symcore as S
from .symcore import ConcolicValue, SymExpr, mk, const, var
from .symobjects import TOMBSTONE, path_join, path_depth, MAX_SYMBOL_DEPTH
from .values import UNDEFINED, Value, to_number, to_string, to_uint32


class JSRangeError(Exception):
    """Raised for invalid array length writes; the interpreter converts it
    into a language-level RangeError throw."""


def canonical_index(key: Value) -> Optional[int]:
    """Return the integer for an array-index key, else None (string key)."""
    if isinstance(key, float):
        if key >= 0 and not math.isinf(key) and key == int(key) and key < 2 ** 32 - 1:
            return int(key)
        return None
    if isinstance(key, str):
        if key.isdigit() and (key == "0" or not key.startswith("0")):
            i = int(key)
            return i if i < 2 ** 32 - 1 else None
        return None
    if isinstance(key, bool):
        return None
    return None


@dataclass
class SymbolicArrayState:
    """One symbolic array: known element/property map plus symbolic length.

    ``mode`` is "mixed" or "homogeneous"; homogeneous arrays additionally
    carry an element sort and a select/store base term.
    """

    name: str
    known: dict[str, object] = field(default_factory=dict)  # key -> ConcolicValue | TOMBSTONE
    length_sym: SymExpr = None
    length_conc: int = 0
    length_pinned: bool = False
    mode: str = "mixed"
    elem_sort: str = S.NUM
    base: SymExpr = None  # homogeneous select/store chain

    def __post_init__(self):
        if self.length_sym is None:
            self.length_sym = var(path_join(self.name, "length"), S.NUM)
        if self.base is None and self.mode == "homogeneous":
            self.base = var(self.name + "#arr", S.HARR)

    def live_value(self, key: str) -> Optional[ConcolicValue]:
        v = self.known.get(key)
        if v is None or v is TOMBSTONE:
            return None
        return v

    def max_live_index(self) -> int:
        best = -1
        for k, v in self.known.items():
            if v is TOMBSTONE:
                continue
            i = canonical_index(k)
            if i is not None and i > best:
                best = i
        return best


# --- Mixed-type arrays ------------------------------------------------------

def _string_key_get(state: SymbolicArrayState, key: str, ctx) -> ConcolicValue:
    existing = state.live_value(key)
    if existing is not None:
        return existing
    if state.known.get(key) is TOMBSTONE:
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


def arr_get_mixed(state: SymbolicArrayState, key: ConcolicValue, ctx) -> ConcolicValue:
    if key.is_symbolic:
        ctx.log_event(f"concretized: symbolic index on mixed array {state.name}")
    idx = canonical_index(key.concrete)
    if idx is None:
        return _string_key_get(state, to_string(key.concrete), ctx)
    in_range = state.length_conc > idx
    if not state.length_pinned:
        cond = mk("num.gt", state.length_sym, const(float(idx)))
        ctx.pc.append(cond, in_range, True, f"sym:arr:{state.name}:len>{idx}")
    if not in_range:
        return ConcolicValue(UNDEFINED, None)
    key_s = str(idx)
    existing = state.live_value(key_s)
    if existing is not None:
        return existing
    return _string_key_get(state, key_s, ctx)


def arr_set_mixed(state: SymbolicArrayState, key: ConcolicValue,
                  value: ConcolicValue, ctx) -> ConcolicValue:
    if key.is_symbolic:
        ctx.log_event(f"concretized: symbolic index on mixed array {state.name}")
    idx = canonical_index(key.concrete)
    if idx is None:
        key_s = to_string(key.concrete)
        state.known[key_s] = value
        ctx.mirror_concrete(state, key_s, value)
        return value
    if idx + 1 > state.length_conc:
        state.length_conc = idx + 1
        if not state.length_pinned:
            ctx.pc.append(mk("num.ge", state.length_sym, const(float(idx + 1))),
                          True, False, f"sym:arr:{state.name}:len>={idx + 1}")
    state.known[str(idx)] = value
    ctx.mirror_concrete(state, str(idx), value)
    return value


def arr_set_length(state: SymbolicArrayState, new_len: ConcolicValue, ctx) -> None:
    n_num = to_number(new_len.concrete)
    n = to_uint32(new_len.concrete)
    if math.isnan(n_num) or n_num != n:
        raise JSRangeError("Invalid array length")
    n = int(n)
    for k in list(state.known):
        i = canonical_index(k)
        if i is not None and i >= n and state.known[k] is not TOMBSTONE:
            state.known[k] = TOMBSTONE
            ctx.mirror_concrete(state, k, None)
    state.length_conc = n
    state.length_sym = const(float(n))
    state.length_pinned = True
    ctx.mirror_length(state, n)


# --- Homogeneous arrays -----------------------------------------------------

def _sort_of_value(v: Value) -> Optional[str]:
    if isinstance(v, bool):
        return S.BOOL
    if isinstance(v, float):
        return S.NUM
    if isinstance(v, str):
        return S.STR
    return None


def arr_get_hom(state: SymbolicArrayState, index: ConcolicValue, ctx) -> ConcolicValue:
    idx_num = to_number(index.concrete)
    idx_i = canonical_index(index.concrete)
    if idx_i is None and not index.is_symbolic:
        # non-index concrete key: behaves like an object property
        return _string_key_get(state, to_string(index.concrete), ctx)
    idx_expr = index.expr_or_const()
    if S.sort_of(idx_expr) != S.NUM:
        idx_expr = mk("to.num", idx_expr)
    in_range = idx_i is not None and idx_i < state.length_conc
    cond = mk("and",
              mk("num.ge", idx_expr, const(0.0)),
              mk("num.lt", idx_expr, state.length_sym))
    if index.is_symbolic or not state.length_pinned:
        ctx.pc.append(cond, in_range, True, f"sym:harr:{state.name}:bounds")
    if not in_range:
        return ConcolicValue(UNDEFINED, None)
    concrete = ctx.hom_concrete_element(state, idx_i)
    return ConcolicValue(concrete, mk("select", state.base, idx_expr,
                                      data=state.elem_sort))


def arr_set_hom(state: SymbolicArrayState, index: ConcolicValue,
                value: ConcolicValue, ctx) -> ConcolicValue:
    idx_i = canonical_index(index.concrete)
    val_sort = _sort_of_value(value.concrete)
    if idx_i is None or val_sort != state.elem_sort:
        downgrade(state, ctx)
        if idx_i is None:
            key_s = to_string(index.concrete)
            state.known[key_s] = value
            ctx.mirror_concrete(state, key_s, value)
            return value
        return arr_set_mixed(state, index, value, ctx)
    idx_expr = index.expr_or_const()
    if S.sort_of(idx_expr) != S.NUM:
        idx_expr = mk("to.num", idx_expr)
    grows = idx_i >= state.length_conc
    if index.is_symbolic or not state.length_pinned:
        ctx.pc.append(mk("num.ge", idx_expr, state.length_sym), grows, True,
                      f"sym:harr:{state.name}:grow")
    if grows:
        state.length_conc = idx_i + 1
        state.length_sym = mk("add", idx_expr, const(1.0))
    val_expr = value.expr_or_const()
    state.base = mk("store", state.base, idx_expr, val_expr, data=state.elem_sort)
    ctx.hom_store_concrete(state, idx_i, value.concrete)
    return value


def downgrade(state: SymbolicArrayState, ctx) -> SymbolicArrayState:
    """Convert a homogeneous array to the generic mixed encoding in place,
    binding every in-length element to its select term; length constraints
    carry over because the length symbol is reused."""
    assert state.mode == "homogeneous"
    for i in range(state.length_conc):
        key = str(i)
        if key in state.known:
            continue
        concrete = ctx.hom_concrete_element(state, i)
        cv = ConcolicValue(concrete, mk("select", state.base, const(float(i)),
                                        data=state.elem_sort))
        state.known[key] = cv
        ctx.mirror_concrete(state, key, cv)
    state.mode = "mixed"
    ctx.log_event(f"downgrade: {state.name}")
    return state
