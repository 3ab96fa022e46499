"""Harness construction: wraps a corpus polyfill or native built-in in an
entry function over untyped symbolic inputs.

The harness program defines ``impl`` (from the corpus file, or bound to
the built-in) plus ``function harness(S_this, ...)`` which performs
``impl.call(S_this, ...)`` inside try/catch and reports exactly one result
envelope through ``__emitResult``.  Callback-typed parameters are not
symbolic functions; a fixed predicate family is selected by one bounded
symbolic integer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import frontend as F
from .interp import EntryCall, SymbolSpec


class UnknownTarget(Exception):
    pass


CORPUS_DIR = Path(__file__).parent / "corpus"


@dataclass(frozen=True)
class TargetInfo:
    method: str
    kind: str          # "array" | "string"
    arity: int
    callback_positions: tuple = ()


TARGETS = {
    t.method: t for t in [
        TargetInfo("Array.prototype.find", "array", 1, (0,)),
        TargetInfo("Array.prototype.findIndex", "array", 1, (0,)),
        TargetInfo("Array.prototype.includes", "array", 2),
        TargetInfo("Array.prototype.fill", "array", 3),
        TargetInfo("Array.prototype.some", "array", 1, (0,)),
        TargetInfo("String.prototype.includes", "string", 2),
        TargetInfo("String.prototype.startsWith", "string", 2),
        TargetInfo("String.prototype.endsWith", "string", 2),
        TargetInfo("String.prototype.repeat", "string", 1),
        TargetInfo("String.prototype.padStart", "string", 2),
        TargetInfo("String.prototype.padEnd", "string", 2),
        TargetInfo("String.prototype.trim", "string", 0),
    ]
}


@dataclass(frozen=True)
class HarnessDescriptor:
    method: str
    selector: str = "mdn"   # "mdn" | "corejs" | "native" | path to a .mini file
    arity: Optional[int] = None

    def resolved_arity(self) -> int:
        if self.arity is not None:
            return self.arity
        return TARGETS[self.method].arity


@dataclass
class Harness:
    descriptor: HarnessDescriptor
    source: str
    program: F.Node
    entry: EntryCall
    target_sites: frozenset  # branch sites belonging to the implementation


PREDICATE_FAMILY = """\
function __pred0(x) { return x % 2 === 0; }
function __pred1(x) { return x > 10; }
function __pred2(x) { return false; }
function __pred3(x) { return true; }
function __pred4(x, i) { return i === 1; }
function __pick(n) {
  if (n === 0) { return __pred0; }
  if (n === 1) { return __pred1; }
  if (n === 2) { return __pred2; }
  if (n === 3) { return __pred3; }
  return __pred4;
}
"""


def implementation_source(method: str, selector: str) -> str:
    if method not in TARGETS:
        raise UnknownTarget(method)
    if selector == "native":
        return f"var impl = {method};\n"
    if selector in ("mdn", "corejs"):
        path = CORPUS_DIR / method / f"{selector}.mjs.mini"
    else:
        path = Path(selector)
    if not path.is_file():
        raise UnknownTarget(f"{method} [{selector}]: no corpus file {path}")
    return path.read_text()


def list_mutants() -> dict[str, Path]:
    """Map mutant slug -> corpus file path."""
    out = {}
    mutants = CORPUS_DIR / "mutants"
    if mutants.is_dir():
        for p in sorted(mutants.glob("*.mjs.mini")):
            out[p.name[: -len(".mjs.mini")]] = p
    return out


def _collect_sites(node: F.Node, acc: set) -> set:
    if node.site is not None:
        acc.add(node.site)
    for child in node.children():
        _collect_sites(child, acc)
    return acc


def build_harness(d: HarnessDescriptor) -> Harness:
    if d.method not in TARGETS:
        raise UnknownTarget(d.method)
    info = TARGETS[d.method]
    impl_src = implementation_source(d.method, d.selector)
    arity = d.resolved_arity()

    params, arg_exprs, symbols = ["S_this"], [], [SymbolSpec("S_this", "untyped")]
    needs_predicates = False
    for i in range(arity):
        if i in info.callback_positions:
            name = f"S_cb{i}"
            params.append(name)
            arg_exprs.append(f"__pick({name})")
            symbols.append(SymbolSpec(name, "number"))
            needs_predicates = True
        else:
            name = f"S_arg{i}"
            params.append(name)
            arg_exprs.append(name)
            symbols.append(SymbolSpec(name, "untyped"))

    parts = [impl_src]
    if needs_predicates:
        parts.append(PREDICATE_FAMILY)
    call = f"impl.call({', '.join(['S_this'] + arg_exprs)})"
    parts.append(
        f"function harness({', '.join(params)}) {{\n"
        f"  try {{\n"
        f"    __emitResult('ok', {call});\n"
        f"  }} catch (e) {{\n"
        f"    __emitResult('throw', e);\n"
        f"  }}\n"
        f"}}\n"
    )
    source = "\n".join(parts)

    impl_ast = F.parse(impl_src)
    program = F.parse(source)
    target_sites: set = set()
    for stmt in program.body[: len(impl_ast.body)]:
        _collect_sites(stmt, target_sites)

    entry = EntryCall("harness", symbols)
    return Harness(d, source, program, entry, frozenset(target_sites))
