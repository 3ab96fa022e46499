"""Bounded constraint solving by systematic enumeration.

Candidate values are drawn from small, deterministic domains (bounded
integers plus numeric sentinels, short strings over a tiny alphabet,
bounded arrays) and checked with the shared reference evaluator.  A
backtracking search assigns variables one at a time and prunes as soon as
any fully bound conjunct evaluates false.  Exhausting the domains yields
"unsat" *relative to the bounds*; exceeding the evaluation budget yields
"unknown".  A deliberately naive product-enumeration (`brute_force`) over
the same domains serves as an independent cross-check, and `to_smtlib2`
exports a query for an external solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from . import symcore as S
from . import values as V
from .symcore import SymExpr, eval_symbolic, free_vars
from .symobjects import path_join


@dataclass(frozen=True)
class Bounds:
    int_lo: int = -32
    int_hi: int = 32
    sentinels: tuple = (0.5, 1e9, -0.0, math.nan)
    alphabet: str = "ab0 /"
    max_str_len: int = 4
    max_array_len: int = 4
    elem_int_lo: int = -4
    elem_int_hi: int = 8
    elem_str_len: int = 2
    eval_budget: int = 2_000_000


DEFAULT_BOUNDS = Bounds()


@dataclass
class SolveResult:
    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[dict] = None
    evaluations: int = 0


# --- domains ----------------------------------------------------------------

def _int_domain(lo: int, hi: int) -> list[float]:
    """0, 1, -1, 2, -2, ... — small magnitudes first, deterministic."""
    out = [0.0]
    for m in range(1, max(hi, -lo) + 1):
        if m <= hi:
            out.append(float(m))
        if -m >= lo:
            out.append(float(-m))
    return out


def _num_domain(b: Bounds) -> list[float]:
    return _int_domain(b.int_lo, b.int_hi) + list(b.sentinels)


def _str_domain(alphabet: str, max_len: int) -> list[str]:
    out = [""]
    for n in range(1, max_len + 1):
        out.extend("".join(t) for t in itertools.product(alphabet, repeat=n))
    return out


def _elem_domain(b: Bounds, sort: str) -> list:
    if sort == S.STR:
        return _str_domain(b.alphabet, b.elem_str_len)
    if sort == S.BOOL:
        return [False, True]
    return _int_domain(b.elem_int_lo, b.elem_int_hi) + [0.5, math.nan]


def domain_for(sort: str, b: Bounds) -> list:
    if sort == S.NUM:
        return _num_domain(b)
    if sort == S.STR:
        return _str_domain(b.alphabet, b.max_str_len)
    if sort == S.BOOL:
        return [False, True]
    if sort == S.TAG:
        return list(S.TYPE_TAGS)
    raise ValueError(f"no enumerable domain for sort {sort}")


# --- variable discovery -----------------------------------------------------

def _collect_vars(conjuncts: Iterable[SymExpr]) -> tuple[dict, dict, dict]:
    """Return (var sorts, tagof names, HArr element sorts)."""
    sorts: dict[str, str] = {}
    tags: dict[str, bool] = {}
    elem_sorts: dict[str, str] = {}

    def walk(e: SymExpr):
        if e.op == "var":
            name, sort = e.data
            sorts[name] = sort
        elif e.op == "tagof":
            tags[e.data] = True
        if e.op in ("select", "store"):
            base = e.args[0]
            root = base
            while root.op == "store":
                root = root.args[0]
            if root.op == "var":
                elem_sorts[root.data[0]] = e.data
        for a in e.args:
            walk(a)

    for c in conjuncts:
        walk(c)
    return sorts, tags, elem_sorts


def _harr_length_var(name: str) -> str:
    assert name.endswith("#arr")
    return path_join(name[: -len("#arr")], "length")


# --- backtracking search ----------------------------------------------------

class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        return self.used <= self.limit


def _check(conjuncts_by_var: dict, bound: set, name: str,
           assignment: dict, budget: _Budget) -> Optional[bool]:
    """Evaluate every conjunct that just became fully bound; None on budget."""
    for fn, needed in conjuncts_by_var.get(name, ()):
        if not needed <= bound:
            continue
        if not budget.spend():
            return None
        try:
            if not fn(assignment):
                return False
        except S.EvalLimit:
            return False
        except S.UnboundVariable:
            return False
    return True


def solve(conjuncts: list[SymExpr], bounds: Bounds = DEFAULT_BOUNDS,
          fixed: Optional[dict] = None,
          hint: Optional[dict] = None) -> SolveResult:
    """Find an assignment satisfying all conjuncts within the bounds.

    ``fixed`` pre-binds variables (including ``#tag:<name>`` entries for
    type-tag pins); they are not enumerated.  ``hint`` values are tried
    first for their variable: negating one branch of a long path leaves
    every prefix constraint satisfied by the parent model, so hinting with
    it usually binds all but the decisive variables immediately.
    """
    fixed = dict(fixed or {})
    hint = hint or {}
    sorts, tag_names, elem_sorts = _collect_vars(conjuncts)

    names: list[str] = []
    for t in sorted(tag_names):
        key = "#tag:" + t
        if key not in fixed:
            names.append(key)
    plain = sorted(n for n in sorts if n not in fixed and sorts[n] != S.HARR)
    harrs = sorted(n for n in sorts if n not in fixed and sorts[n] == S.HARR)
    # length variables must be bound before their dependent array variables
    for h in harrs:
        lv = _harr_length_var(h)
        if lv in plain:
            plain.remove(lv)
            names.append(lv)
    names = [n for n in names] + plain + harrs

    budget = _Budget(bounds.eval_budget)

    # index conjuncts by the last variable (in `names` order) they mention,
    # so each is checked exactly once, as soon as it becomes fully bound
    order = {n: i for i, n in enumerate(names)}
    conjuncts_by_var: dict[str, list] = {}
    immediate: list[SymExpr] = []
    for c in conjuncts:
        needed = set()
        for v_ in free_vars(c):
            key = v_ if (v_ in sorts or v_ in fixed or v_.startswith("#tag:")) else v_
            needed.add(key)
        needed_names = {n for n in needed if n in order}
        extra_tags = {"#tag:" + t for t in tag_names if "#tag:" + t in order
                      and ("#tag:" + t) in needed}
        needed_names |= extra_tags
        if not needed_names:
            immediate.append(c)
            continue
        last = max(needed_names, key=lambda n: order[n])
        conjuncts_by_var.setdefault(last, []).append(
            (S.compile_symbolic(c), needed_names))

    assignment = dict(fixed)
    for c in immediate:
        if not budget.spend():
            return SolveResult("unknown", evaluations=budget.used)
        try:
            if not eval_symbolic(c, assignment):
                return SolveResult("unsat", evaluations=budget.used)
        except (S.UnboundVariable, S.EvalLimit):
            return SolveResult("unsat", evaluations=budget.used)

    if not names:
        return SolveResult("sat", {}, budget.used)

    bound: set[str] = set()
    out_of_budget = False

    def candidates(name: str) -> Iterable:
        if name in hint:
            yield hint[name]
        if name.startswith("#tag:"):
            yield from domain_for(S.TAG, bounds)
            return
        sort = sorts.get(name)
        if sort == S.HARR:
            lv = _harr_length_var(name)
            if lv in assignment:
                n = V.to_uint32(V.to_number(assignment[lv]))
                length = int(min(n, bounds.max_array_len))
            else:
                length = None
            elems = _elem_domain(bounds, elem_sorts.get(name, S.NUM))
            lengths = [length] if length is not None else \
                list(range(0, bounds.max_array_len + 1))
            for L in lengths:
                for t in itertools.product(elems, repeat=L):
                    yield list(t)
            return
        yield from domain_for(sort, bounds)

    def search(i: int) -> Optional[dict]:
        nonlocal out_of_budget
        if i == len(names):
            return {n: assignment[n] for n in names}
        name = names[i]
        for cand in candidates(name):
            assignment[name] = cand
            bound.add(name)
            ok = _check(conjuncts_by_var, bound, name, assignment, budget)
            if ok is None:
                out_of_budget = True
                bound.discard(name)
                del assignment[name]
                return None
            if ok:
                found = search(i + 1)
                if found is not None:
                    return found
                if out_of_budget:
                    bound.discard(name)
                    del assignment[name]
                    return None
            bound.discard(name)
            del assignment[name]
        return None

    model = search(0)
    if model is not None:
        return SolveResult("sat", model, budget.used)
    if out_of_budget:
        return SolveResult("unknown", evaluations=budget.used)
    return SolveResult("unsat", evaluations=budget.used)


# --- naive cross-check ------------------------------------------------------

def brute_force(conjuncts: list[SymExpr], bounds: Bounds = DEFAULT_BOUNDS,
                fixed: Optional[dict] = None) -> SolveResult:
    """Full cartesian-product enumeration with no pruning: an independent
    oracle for small queries (use tiny bounds; cost is the domain product)."""
    fixed = dict(fixed or {})
    sorts, tag_names, elem_sorts = _collect_vars(conjuncts)
    names = []
    domains = []
    for t in sorted(tag_names):
        key = "#tag:" + t
        if key not in fixed:
            names.append(key)
            domains.append(domain_for(S.TAG, bounds))
    harrs = []
    for n in sorted(sorts):
        if n in fixed:
            continue
        if sorts[n] == S.HARR:
            harrs.append(n)
            continue
        names.append(n)
        domains.append(domain_for(sorts[n], bounds))
    for h in harrs:
        names.append(h)
        elems = _elem_domain(bounds, elem_sorts.get(h, S.NUM))
        dom = []
        for L in range(0, bounds.max_array_len + 1):
            dom.extend(list(t) for t in itertools.product(elems, repeat=L))
        domains.append(dom)

    used = 0
    for combo in itertools.product(*domains):
        assignment = dict(fixed)
        assignment.update(zip(names, combo))
        used += 1
        if used > bounds.eval_budget:
            return SolveResult("unknown", evaluations=used)
        try:
            if all(eval_symbolic(c, assignment) for c in conjuncts):
                return SolveResult("sat", {n: assignment[n] for n in names}, used)
        except (S.UnboundVariable, S.EvalLimit):
            continue
    return SolveResult("unsat", evaluations=used)


# --- SMT-LIB2 export --------------------------------------------------------

_SMT_SORT = {S.NUM: "Real", S.STR: "String", S.BOOL: "Bool", S.TAG: "String"}

_SMT_OP = {
    "add": "+", "sub": "-", "mul": "*", "div": "/", "neg": "-",
    "num.lt": "<", "num.le": "<=", "num.gt": ">", "num.ge": ">=",
    "num.eq": "=", "str.eq": "=", "bool.eq": "=", "tag.eq": "=",
    "and": "and", "or": "or", "not": "not",
    "str.concat": "str.++", "str.len": "str.len",
    "str.contains": "str.contains", "str.indexof": "str.indexof",
    "str.startswith": "str.prefixof", "str.endswith": "str.suffixof",
}


def _smt_atom(e: SymExpr) -> str:
    if e.op == "var":
        return "|" + e.data[0] + "|"
    if e.op == "tagof":
        return "|#tag:" + e.data + "|"
    if e.op == "tag":
        return '"' + e.data + '"'
    if e.op == "const":
        v = e.data
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            if math.isnan(v) or math.isinf(v):
                return "|" + repr(v) + "|"  # no finite encoding; placeholder
            return repr(v) if v >= 0 else f"(- {repr(-v)})"
        if isinstance(v, str):
            return '"' + v.replace('"', '""') + '"'
        return '"' + V.to_string(v) + '"'
    op = _SMT_OP.get(e.op)
    inner = " ".join(_smt_atom(a) for a in e.args)
    if op is None:
        return f"(|{e.op}| {inner})" if inner else f"|{e.op}|"
    if e.op == "str.startswith":
        a, b = (_smt_atom(x) for x in e.args[:2])
        return f"(str.prefixof {b} {a})"
    if e.op == "str.endswith":
        a, b = (_smt_atom(x) for x in e.args[:2])
        return f"(str.suffixof {b} {a})"
    return f"({op} {inner})"


def to_smtlib2(conjuncts: list[SymExpr]) -> str:
    """Best-effort SMT-LIB2 rendering of a query (escape hatch for external
    solvers; ops without a standard encoding appear as quoted symbols)."""
    sorts, tag_names, _ = _collect_vars(conjuncts)
    lines = ["(set-logic ALL)"]
    for name in sorted(sorts):
        smt = _SMT_SORT.get(sorts[name], "Real")
        lines.append(f"(declare-const |{name}| {smt})")
    for t in sorted(tag_names):
        lines.append(f"(declare-const |#tag:{t}| String)")
    for c in conjuncts:
        lines.append(f"(assert {_smt_atom(c)})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"
