"""Differential execution: translate each test for several implementations,
run them all, and majority-vote on the outcomes.

Outcomes are compared by (status, error type, canonical value encoding);
exception message text is never compared.  Crash and timeout are outcome
classes of their own.  A single dissenting runner is outvoted; two or more
distinct dissents mean no conclusion can be drawn and the test is marked
for manual review.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import shutil
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import frontend as F
from . import inputs as I
from . import values as V
from .driver import TestCase, envelope_of
from .harness import PREDICATE_FAMILY, TARGETS, implementation_source
from .interp import Config, execute
from .symarrays import canonical_index
from .symobjects import path_join


class Unserializable(Exception):
    pass


@dataclass
class ImplementationRunner:
    name: str
    kind: str                      # "internal-native" | "internal-polyfill" | "external-engine"
    variant: Optional[str] = None  # polyfill selector ("mdn", "corejs", or a path)
    command: Optional[list] = None # external: argv with a "{file}" placeholder
    timeout: float = 10.0

    def available(self) -> bool:
        if self.kind == "external-engine":
            return bool(self.command) and shutil.which(self.command[0]) is not None
        return True


def default_runners() -> list[ImplementationRunner]:
    return [
        ImplementationRunner("native", "internal-native"),
        ImplementationRunner("mdn", "internal-polyfill", variant="mdn"),
        ImplementationRunner("corejs", "internal-polyfill", variant="corejs"),
    ]


def load_runner_config(path) -> list[ImplementationRunner]:
    """Runner list from a JSON config: [{name, kind, variant?, command?,
    timeout?}].  Commands may be given as argv lists or shell-like strings."""
    out = []
    with open(path) as f:
        for spec in json.load(f):
            command = spec.get("command")
            if isinstance(command, str):
                command = shlex.split(command)
            out.append(ImplementationRunner(
                name=spec["name"], kind=spec["kind"],
                variant=spec.get("variant"), command=command,
                timeout=float(spec.get("timeout",
                                       30.0 if spec["kind"] == "external-engine"
                                       else 10.0)),
            ))
    return out


def resolve_runners(path: Optional[str] = None) -> list[ImplementationRunner]:
    path = path or os.environ.get("POLYFORGE_RUNNERS")
    if path:
        return load_runner_config(path)
    return default_runners()


# --- input literal reconstruction -------------------------------------------


def _num_literal(x: float) -> str:
    if math.isnan(x):
        return "(0 / 0)"
    if math.isinf(x):
        return "(1 / 0)" if x > 0 else "(-1 / 0)"
    if x == 0.0 and math.copysign(1.0, x) < 0:
        return "(-0)"
    return V.js_number_to_string(x)


class _LiteralBuilder:
    """Emits statements rebuilding a test input from its assignment entries.
    Structured values are built imperatively so NaN, -0, holes, and extra
    properties round-trip exactly."""

    def __init__(self, assignment: I.Assignment):
        self.assignment = assignment
        self.lines: list[str] = []
        self.counter = 0

    def _fresh(self) -> str:
        self.counter += 1
        return f"__v{self.counter}"

    def expr(self, name: str, depth: int = 0) -> str:
        if depth > 6:
            raise Unserializable(f"{name}: nesting too deep")
        entry = self.assignment.get(name)
        tag = entry["tag"] if entry and "tag" in entry else "undefined"
        if tag == "undefined":
            return "undefined"
        if tag == "null":
            return "null"
        if tag in ("number", "string", "boolean"):
            v = I.entry_primitive(self.assignment, name, tag)
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return _num_literal(v)
            return F._quote(v)
        if tag == "array":
            return self._array(name, depth)
        if tag == "object":
            return self._object(name, depth)
        raise Unserializable(f"{name}: tag {tag!r}")

    def _array(self, name: str, depth: int) -> str:
        var = self._fresh()
        self.lines.append(f"var {var} = [];")
        children = I.child_entries(self.assignment, name)
        length = 0
        if "length" in children:
            length_v = I.materialize_value(self.assignment, children["length"])
            length = int(V.to_uint32(length_v))
        for key, child in sorted(
                children.items(),
                key=lambda kv: (canonical_index(kv[0]) is None,
                                canonical_index(kv[0]) or 0, kv[0])):
            if key == "length":
                continue
            value = self.expr(child, depth + 1)
            idx = canonical_index(key)
            if idx is not None:
                length = max(length, idx + 1)
                self.lines.append(f"{var}[{idx}] = {value};")
            else:
                self.lines.append(f"{var}[{F._quote(key)}] = {value};")
        self.lines.append(f"{var}.length = {length};")
        return var

    def _object(self, name: str, depth: int) -> str:
        var = self._fresh()
        self.lines.append(f"var {var} = {{}};")
        for key, child in I.child_entries(self.assignment, name).items():
            value = self.expr(child, depth + 1)
            self.lines.append(f"{var}[{F._quote(key)}] = {value};")
        return var


# --- program translation ----------------------------------------------------

# Matches the envelope the interpreter's __emitResult builtin produces:
# numbers as shortest round-trip strings with -0 kept distinct, array holes
# explicit, nesting beyond depth 6 collapsed to an opaque marker, and the
# name of Error instances (only) as the error type.
_JS_EMIT_SHIM = """\
function __encode(v, depth) {
  if (depth > 6) { throw "toodeep"; }
  if (v === undefined) { return {t: "undefined"}; }
  if (v === null) { return {t: "null"}; }
  if (typeof v === "boolean") { return {t: "bool", v: v}; }
  if (typeof v === "number") {
    if (v === 0 && 1 / v === -Infinity) { return {t: "num", v: "-0"}; }
    return {t: "num", v: String(v)};
  }
  if (typeof v === "string") { return {t: "str", v: v}; }
  if (typeof v === "function") { throw "toodeep"; }
  if (Array.isArray(v)) {
    if (v.length > 4096) { throw "toolong"; }
    var elems = [];
    for (var i = 0; i < v.length; i++) {
      elems.push(i in v ? __encode(v[i], depth + 1) : {t: "hole"});
    }
    var extra = {};
    var hasExtra = false;
    for (var k in v) {
      if (!Object.prototype.hasOwnProperty.call(v, k)) { continue; }
      if (/^[0-9]+$/.test(k) && Number(k) < v.length) { continue; }
      extra[k] = __encode(v[k], depth + 1);
      hasExtra = true;
    }
    var out = {t: "arr", v: elems};
    if (hasExtra) { out.props = extra; }
    return out;
  }
  var props = {};
  for (var key in v) {
    if (Object.prototype.hasOwnProperty.call(v, key)) {
      props[key] = __encode(v[key], depth + 1);
    }
  }
  return {t: "obj", v: props};
}
function __emitResult(status, v) {
  var envelope;
  if (status === "ok") {
    var enc;
    try { enc = __encode(v, 0); } catch (e) { enc = {t: "opaque"}; }
    envelope = {status: "ok", value: enc, errorType: null};
  } else {
    var name = (v instanceof Error) ? v.name : "UserThrown";
    envelope = {status: "throw", value: null, errorType: name};
  }
  var line = "result:" + JSON.stringify(envelope);
  if (typeof console !== "undefined" && console.log) { console.log(line); }
  else { print(line); }
}
"""


def translate(tc: TestCase, runner: ImplementationRunner) -> str:
    """Standalone program text executing one test on one implementation
    and printing exactly one result-envelope line."""
    method = tc.target.get("method")
    if not method or method not in TARGETS:
        raise Unserializable(f"target {tc.target!r} is not a known method")
    info = TARGETS[method]

    external = runner.kind == "external-engine"
    parts: list[str] = []
    if external:
        parts.append(_JS_EMIT_SHIM)

    if runner.kind == "internal-native":
        parts.append(f"var impl = {method};")
    elif runner.kind == "internal-polyfill" or (external and runner.variant):
        parts.append(implementation_source(method, runner.variant))
        if external:
            # replace any existing implementation on the prototype
            parts.append(f"{method} = impl;")
            parts.append(f"impl = {method};")
    else:
        parts.append(f"var impl = {method};")

    builder = _LiteralBuilder(tc.assignment)
    this_expr = builder.expr("S_this")
    args = []
    needs_predicates = False
    for i in range(info.arity):
        if i in info.callback_positions:
            pick = builder.expr(f"S_cb{i}")
            args.append(f"__pick({pick})")
            needs_predicates = True
        else:
            args.append(builder.expr(f"S_arg{i}"))
    if needs_predicates:
        parts.append(PREDICATE_FAMILY)
    parts.extend(builder.lines)

    call = ", ".join(["impl.call(" + this_expr] + args) + ")"
    parts.append(
        "try {\n"
        f"  __emitResult('ok', {call});\n"
        "} catch (e) {\n"
        "  __emitResult('throw', e);\n"
        "}"
    )
    return "\n".join(parts) + "\n"


# --- execution --------------------------------------------------------------


def _crash(note: str) -> dict:
    return {"status": "crash", "value": None, "errorType": None, "note": note}


def run_internal(program_text: str, timeout: float = 10.0) -> dict:
    try:
        ast = F.parse(program_text)
    except F.ParseError as exc:
        return _crash(f"parse error: {exc}")
    try:
        result = execute(ast, None, {}, mode="concrete", config=Config())
    except Exception as exc:  # interpreter bug: a crash outcome, not ours to hide
        return _crash(f"{type(exc).__name__}: {exc}")
    return envelope_of(result)


def run_external(program_text: str, runner: ImplementationRunner) -> dict:
    with tempfile.NamedTemporaryFile(
            "w", suffix=".js", prefix="polyforge-", delete=False) as f:
        f.write(program_text)
        path = f.name
    try:
        argv = [a.replace("{file}", path) for a in runner.command]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True,
                                  timeout=runner.timeout)
        except subprocess.TimeoutExpired:
            return {"status": "timeout", "value": None, "errorType": None}
        except OSError as exc:
            return _crash(f"spawn failed: {exc}")
        for line in proc.stdout.splitlines():
            if line.startswith("result:"):
                try:
                    return json.loads(line[len("result:"):])
                except json.JSONDecodeError:
                    return _crash("malformed envelope")
        return _crash(f"no envelope (exit {proc.returncode})")
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass


def run_one(tc: TestCase, runner: ImplementationRunner) -> dict:
    try:
        program = translate(tc, runner)
    except Unserializable as exc:
        return _crash(f"unserializable: {exc}")
    if runner.kind == "external-engine":
        return run_external(program, runner)
    return run_internal(program, runner.timeout)


# --- voting -----------------------------------------------------------------


def _canon(encoded) -> str:
    def sort_enc(e):
        if isinstance(e, dict):
            return {k: sort_enc(e[k]) for k in sorted(e)}
        if isinstance(e, list):
            return [sort_enc(x) for x in e]
        return e
    return json.dumps(sort_enc(encoded), sort_keys=True, separators=(",", ":"))


def outcome_class(envelope: dict) -> tuple:
    status = envelope.get("status")
    if status == "ok":
        return ("ok", _canon(envelope.get("value")))
    if status == "throw":
        return ("throw", envelope.get("errorType"))
    if status == "timeout":
        return ("timeout",)
    return ("crash",)


@dataclass
class Verdict:
    test_id: int
    outcomes: dict               # runner name -> envelope
    vote: str                    # "unanimous" | "outvoted" | "manual-review"
    dissenter: Optional[str] = None

    def signature(self) -> Optional[tuple]:
        """(dissent class, majority class) for outvoted verdicts."""
        if self.vote != "outvoted":
            return None
        dissent = outcome_class(self.outcomes[self.dissenter])
        majority = next(outcome_class(e) for n, e in sorted(self.outcomes.items())
                        if n != self.dissenter)
        return (dissent, majority)


def vote(test_id: int, outcomes: dict) -> Verdict:
    if len(outcomes) < 3:
        raise ValueError("a vote requires at least 3 participating runners")
    groups: dict[tuple, list[str]] = {}
    for name in sorted(outcomes):
        groups.setdefault(outcome_class(outcomes[name]), []).append(name)
    if len(groups) == 1:
        return Verdict(test_id, outcomes, "unanimous")
    if len(groups) == 2:
        smaller, larger = sorted(groups.values(), key=len)
        if len(smaller) == 1:
            return Verdict(test_id, outcomes, "outvoted", smaller[0])
    return Verdict(test_id, outcomes, "manual-review")


# --- suite execution --------------------------------------------------------


@dataclass
class Bug:
    runner: str
    signature: tuple
    witness_ids: list = field(default_factory=list)

    def to_json(self) -> str:
        dissent, majority = self.signature
        return json.dumps({
            "runner": self.runner,
            "signature": {"dissent": list(dissent), "majority": list(majority)},
            "witnesses": self.witness_ids,
        }, sort_keys=True, separators=(",", ":"))


@dataclass
class SuiteReport:
    verdicts: list
    bugs: list
    availability_failures: list  # runners whose every outcome was a crash

    def unanimity_rate(self) -> float:
        if not self.verdicts:
            return 1.0
        n = sum(1 for v in self.verdicts if v.vote == "unanimous")
        return n / len(self.verdicts)


def run_suite(suite: list[TestCase], runners: Optional[list] = None,
              workers: int = 1) -> SuiteReport:
    runners = [r for r in (runners or default_runners()) if r.available()]
    if len(runners) < 3:
        raise ValueError(f"need at least 3 available runners, have {len(runners)}")

    def run_test(tc: TestCase) -> Verdict:
        outcomes = {r.name: run_one(tc, r) for r in runners}
        return vote(tc.id, outcomes)

    if workers > 1 and len(suite) > 1:
        with ThreadPoolExecutor(workers) as pool:
            verdicts = list(pool.map(run_test, suite))
    else:
        verdicts = [run_test(tc) for tc in suite]

    crash_counts = {r.name: 0 for r in runners}
    for v in verdicts:
        for name, env in v.outcomes.items():
            if env.get("status") == "crash":
                crash_counts[name] += 1
    failures = sorted(n for n, c in crash_counts.items()
                      if suite and c == len(suite))

    bugs: dict[tuple, Bug] = {}
    for v in verdicts:
        if v.vote != "outvoted" or v.dissenter in failures:
            continue
        key = (v.dissenter, v.signature())
        bug = bugs.setdefault(key, Bug(v.dissenter, v.signature()))
        bug.witness_ids.append(v.test_id)
    return SuiteReport(verdicts, sorted(bugs.values(),
                                        key=lambda b: (b.runner, b.signature)),
                       failures)


def write_bug_report(report: SuiteReport, path) -> None:
    with open(path, "w") as f:
        for name in report.availability_failures:
            f.write(json.dumps({"runner": name, "availabilityFailure": True},
                               sort_keys=True, separators=(",", ":")) + "\n")
        for bug in report.bugs:
            f.write(bug.to_json() + "\n")
