"""The test-generation campaign: execute, verify, negate, repeat.

Each verified execution is expanded two ways: every negatable path-
condition entry is flipped (deepest first) and handed to the bounded
solver, and every untyped input symbol spawns candidates for its six
sibling type tags.  Candidates are deduplicated by canonical assignment
hash, so revisiting an already-seen input combination is free.  A path
verifier re-runs every accepted input in concrete-only mode and discards
the test when the two executions disagree.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Any, Optional

from . import inputs as I
from . import solver as SV
from . import symcore as S
from . import values as V
from .interp import Config, EntryCall, ExecutionResult, execute
from .symcore import TAG_ORDER, eval_symbolic
from . import symarrays as SA
from .symobjects import path_join, path_split


@dataclass
class Budget:
    max_tests: int = 500
    max_seconds: float = 300.0
    workers: int = 1


@dataclass
class TestCase:
    id: int
    target: dict                  # {"method":..., "selector":...} or {"program": "<inline>"}
    assignment: I.Assignment
    provenance: dict              # {"kind": "seed" | "flip" | "tag", ...}
    expect: dict                  # result envelope
    coverage: list                # sorted [site, outcome] pairs
    pc_dump: str
    hash: str

    def branch_signature(self) -> frozenset:
        return frozenset((site, outcome) for site, outcome in self.coverage)

    def to_json(self) -> str:
        record = {
            "id": self.id,
            "target": self.target,
            "provenance": self.provenance,
            "assignment": self.assignment,
            "expect": self.expect,
            "coverage": self.coverage,
        }
        return json.dumps(record, sort_keys=True, separators=(",", ":"))


@dataclass
class CampaignStats:
    executed: int = 0
    accepted: int = 0
    discarded: int = 0
    deduped: int = 0
    sat: int = 0
    unsat: int = 0
    unknown: int = 0


@dataclass
class CampaignState:
    frontier: list = field(default_factory=list)  # heap of (priority, seq, candidate)
    executed_hashes: set = field(default_factory=set)
    coverage: dict = field(default_factory=dict)  # site -> set of outcomes
    explored_tags: dict = field(default_factory=dict)  # symbol -> set of tags
    stats: CampaignStats = field(default_factory=CampaignStats)
    seq: int = 0

    def push(self, priority: tuple, candidate: "Candidate"):
        heappush(self.frontier, (priority, self.seq, candidate))
        self.seq += 1


@dataclass
class Candidate:
    assignment: I.Assignment
    provenance: dict


@dataclass
class CampaignResult:
    suite: list
    coverage: dict              # site -> sorted list of outcomes (target sites only)
    target_sites: frozenset
    stats: CampaignStats
    infeasible: list            # [{"parent": id, "flip": i, "site": ...}]
    discards: list              # [{"assignment":..., "concolic":..., "concrete":...}]
    events: list

    def coverage_summary(self) -> tuple[int, int]:
        total = 2 * len(self.target_sites)
        covered = sum(len(v) for s, v in self.coverage.items()
                      if s in self.target_sites)
        return covered, total


# --- assignment bookkeeping -------------------------------------------------


def _ancestors(name: str) -> list[str]:
    root, keys = path_split(name)
    out, cur = [], root
    for key in keys:
        out.append(cur)
        cur = path_join(cur, key)
    return out


# explicit-element fill limit for homogeneous arrays with large lengths
_HOM_FILL_CAP = 64

# expansion caps keeping loop-heavy paths from dominating the campaign
_MAX_FLIPS_PER_SITE = 4
_MAX_SOLVES_PER_EXPANSION = 120
_MAX_TAG_SYMBOLS = 48


def normalize_assignment(assignment: I.Assignment, minted: dict,
                         homogeneous: bool = True) -> I.Assignment:
    """Explicit entry (tag + concrete seed value) for every minted symbol,
    so equal input vectors hash equally however they were reached.

    Homogeneous arrays read unbound elements as the element-sort default,
    never as holes, so their element and length entries are made explicit
    too — concrete re-execution and external engines then see exactly the
    values the concolic run saw."""
    out: I.Assignment = {}
    for name, tag in minted.items():
        entry: dict = {"tag": tag}
        if tag in ("number", "string", "boolean"):
            entry["value"] = V.encode_value(
                I.entry_primitive(assignment, name, tag))
        out[name] = entry
    array_roots = {n for n, t in minted.items() if t == "array"}
    for name, entry in assignment.items():
        if name in out:
            continue
        if name.endswith("#sort"):
            if name[: -len("#sort")] in array_roots:
                out[name] = entry
            continue
        # keep element/length entries that belong to a minted array
        if any(a in array_roots for a in _ancestors(name)):
            out[name] = entry
    if homogeneous:
        for root in array_roots:
            sort = I.elem_sort(assignment, root)
            out[root + "#sort"] = {"sort": sort}
            default = S._sort_default(sort)
            children = I.child_entries(out, root)
            length = 0
            if "length" in children:
                length_v = I.materialize_value(out, children["length"])
                length = int(V.to_uint32(length_v))
            for key in children:
                if key != "length" and SA.canonical_index(key) is not None:
                    length = max(length, SA.canonical_index(key) + 1)
            out[path_join(root, "length")] = {
                "tag": "number", "value": V.encode_value(float(length))}
            for i in range(min(length, _HOM_FILL_CAP)):
                child = path_join(root, str(i))
                if child not in out:
                    out[child] = {"tag": V.type_tag(default),
                                  "value": V.encode_value(default)}
    return out


def retag(assignment: I.Assignment, name: str, tag: str) -> I.Assignment:
    """Candidate assignment exploring `name` under a sibling type tag;
    stale descendants of the symbol are dropped."""
    out: I.Assignment = {}
    for key, entry in assignment.items():
        base = key[: -len("#sort")] if key.endswith("#sort") else key
        if base == name or name in _ancestors(base):
            continue
        out[key] = entry
    out[name] = {"tag": tag}
    return out


def _remodeled_arrays(model: dict, tags: dict) -> set:
    out = set()
    for name in model:
        if name.endswith("#arr"):
            out.add(name[: -len("#arr")])
            continue
        root, keys = path_split(name)
        if keys and keys[-1] == "length":
            parent = root
            for key in keys[:-1]:
                parent = path_join(parent, key)
            if tags.get(parent) == "array":
                out.add(parent)
    return out


def child_assignment(model: dict, parent: I.Assignment, minted: dict) -> I.Assignment:
    sorts = {}
    for key, entry in parent.items():
        if key.endswith("#sort") and "sort" in entry:
            sorts[key[: -len("#sort")]] = entry["sort"]
    child = I.assignment_from_model(model, dict(minted), sorts)
    remodeled = _remodeled_arrays(model, minted)
    for name, entry in parent.items():
        if name in child:
            continue
        base = name[: -len("#sort")] if name.endswith("#sort") else name
        if any(a in remodeled for a in _ancestors(base)) or base in remodeled:
            continue
        child[name] = entry
    return child


# --- envelopes --------------------------------------------------------------


def envelope_of(result: ExecutionResult) -> dict:
    for line in result.transcript:
        if line.startswith("result:"):
            return json.loads(line[len("result:"):])
    if result.error_type == "EngineLimit":
        return {"status": "timeout", "value": None, "errorType": "EngineLimit"}
    if result.status == "thrown":
        return {"status": "throw", "value": None, "errorType": result.error_type}
    try:
        encoded = V.encode_value(result.value)
    except ValueError:
        encoded = {"t": "opaque"}
    return {"status": "ok", "value": encoded, "errorType": None}


# --- path verifier ----------------------------------------------------------


def pc_holds(result: ExecutionResult, assignment: I.Assignment) -> bool:
    """Best-effort check that the recorded PC is true under the input
    assignment; conjuncts over unmodeled helper variables are skipped."""
    binding: dict[str, Any] = {}
    for name, tag in result.minted.items():
        binding["#tag:" + name] = tag
        if tag in ("number", "string", "boolean"):
            binding[name] = I.entry_primitive(assignment, name, tag)
    for entry in result.pc.entries:
        try:
            if not eval_symbolic(entry.conjunct(), binding):
                return False
        except (S.UnboundVariable, S.EvalLimit):
            continue
    return True


def verify_path(program, entry: EntryCall, assignment: I.Assignment,
                concolic: ExecutionResult, config: Config) -> Optional[dict]:
    """None when the test is sound; otherwise a discard record."""
    if not pc_holds(concolic, assignment):
        return {"reason": "pc-violation", "assignment": assignment}
    concrete_config = Config(step_budget=config.step_budget,
                             heap_budget=config.heap_budget,
                             string_budget=config.string_budget,
                             homogeneous=config.homogeneous)
    concrete = execute(program, entry, assignment, mode="concrete",
                       config=concrete_config)
    if concolic.outcome_key() != concrete.outcome_key():
        return {
            "reason": "outcome-mismatch",
            "assignment": assignment,
            "concolic": envelope_of(concolic),
            "concrete": envelope_of(concrete),
        }
    return None


# --- campaign ---------------------------------------------------------------


def run_campaign(program, entry: EntryCall, target: dict,
                 budget: Optional[Budget] = None,
                 bounds: SV.Bounds = SV.DEFAULT_BOUNDS,
                 config: Optional[Config] = None,
                 state: Optional[CampaignState] = None) -> CampaignResult:
    budget = budget or Budget()
    config = config or Config()
    state = state or CampaignState()
    deadline = time.monotonic() + budget.max_seconds

    suite: list[TestCase] = []
    infeasible: list[dict] = []
    discards: list[dict] = []
    events: list[str] = []

    state.push((-2, 0, 0), Candidate({}, {"kind": "seed"}))

    def ready() -> bool:
        return (bool(state.frontier)
                and state.stats.executed < budget.max_tests
                and time.monotonic() < deadline)

    pool = ThreadPoolExecutor(budget.workers) if budget.workers > 1 else None
    try:
        while ready():
            wave: list[Candidate] = []
            while state.frontier and len(wave) < max(budget.workers, 1) \
                    and state.stats.executed + len(wave) < budget.max_tests:
                _, _, cand = heappop(state.frontier)
                key = I.canonical_assignment(cand.assignment)
                if key in state.executed_hashes:
                    state.stats.deduped += 1
                    continue
                state.executed_hashes.add(key)
                wave.append(cand)
            if not wave:
                continue

            def run(cand: Candidate) -> ExecutionResult:
                return execute(program, entry, cand.assignment,
                               mode="concolic", config=config)

            results = list(pool.map(run, wave)) if pool else [run(c) for c in wave]

            for cand, result in zip(wave, results):
                state.stats.executed += 1
                normalized = normalize_assignment(cand.assignment, result.minted,
                                                  config.homogeneous)
                norm_key = I.canonical_assignment(normalized)
                state.executed_hashes.add(norm_key)

                discard = verify_path(program, entry, normalized, result, config)
                if discard is not None:
                    state.stats.discarded += 1
                    discards.append(discard)
                    continue

                tc = TestCase(
                    id=len(suite),
                    target=target,
                    assignment=normalized,
                    provenance=cand.provenance,
                    expect=envelope_of(result),
                    coverage=sorted((site, outcome)
                                    for site, outs in result.coverage.items()
                                    for outcome in outs
                                    if isinstance(site, int)),
                    pc_dump=result.pc.dump(),
                    hash=norm_key,
                )
                suite.append(tc)
                state.stats.accepted += 1
                events.extend(result.events)
                for site, outs in result.coverage.items():
                    state.coverage.setdefault(site, set()).update(outs)

                _expand(tc, result, normalized, bounds, state, infeasible, deadline)
    finally:
        if pool:
            pool.shutdown(wait=False)

    coverage = {site: sorted(outs) for site, outs in state.coverage.items()}
    target_sites = frozenset(target.get("sites", ()))
    return CampaignResult(suite, coverage, target_sites, state.stats,
                          infeasible, discards, events)


def _model_hint(normalized: I.Assignment, minted: dict) -> dict:
    """Solver hint reproducing the executed input vector."""
    hint: dict = {}
    for name, tag in minted.items():
        if tag in ("number", "string", "boolean"):
            hint[name] = I.entry_primitive(normalized, name, tag)
        elif tag == "array":
            sort = I.elem_sort(normalized, name)
            children = I.child_entries(normalized, name)
            length = 0
            if "length" in children:
                length = int(V.to_uint32(
                    I.materialize_value(normalized, children["length"])))
            hint[path_join(name, "length")] = float(length)
            elems = []
            for i in range(min(length, _HOM_FILL_CAP)):
                child = children.get(str(i))
                elems.append(I.entry_primitive(normalized, child)
                             if child else S._sort_default(sort))
            hint[name + "#arr"] = elems
    return hint


def _expand(tc: TestCase, result: ExecutionResult, normalized: I.Assignment,
            bounds: SV.Bounds, state: CampaignState,
            infeasible: list, deadline: float) -> None:
    fixed = {"#tag:" + name: tag for name, tag in result.minted.items()}
    hint = _model_hint(normalized, result.minted)
    entries = result.pc.entries

    # long paths (loops, engine-limit runs) revisit the same branch sites;
    # flips beyond a few per site only re-derive already-seen prefixes, so
    # they are skipped to keep expansion cost linear in distinct sites
    site_flips: dict = {}
    solves = 0
    for i in range(len(entries) - 1, -1, -1):
        if not entries[i].negatable:
            continue
        if site_flips.get(entries[i].site, 0) >= _MAX_FLIPS_PER_SITE \
                or solves >= _MAX_SOLVES_PER_EXPANSION:
            continue
        if time.monotonic() >= deadline:
            return
        site_flips[entries[i].site] = site_flips.get(entries[i].site, 0) + 1
        solves += 1
        flipped = S.mk("not", entries[i].conjunct())
        seen = {flipped}
        conjuncts = []
        for e in entries[:i]:
            c = e.conjunct()
            if c not in seen:
                seen.add(c)
                conjuncts.append(c)
        conjuncts.append(flipped)
        solved = SV.solve(conjuncts, bounds, fixed, hint)
        if solved.status == "sat":
            state.stats.sat += 1
            child = child_assignment(solved.model, normalized, result.minted)
            state.push((0, tc.id, -i), Candidate(
                child, {"kind": "flip", "parent": tc.id, "index": i,
                        "site": str(entries[i].site)}))
        elif solved.status == "unsat":
            state.stats.unsat += 1
            infeasible.append({"parent": tc.id, "flip": i,
                               "site": str(entries[i].site)})
        else:
            state.stats.unknown += 1

    # shallow symbols first; deep generated names past the cap add nothing
    # a fresh shallow exploration would not reach anyway
    tag_symbols = sorted(result.untyped,
                         key=lambda n: (len(_ancestors(n)), n))
    for name in tag_symbols[:_MAX_TAG_SYMBOLS]:
        tag = result.minted[name]
        explored = state.explored_tags.setdefault(name, set())
        explored.add(tag)
        for alt in TAG_ORDER:
            if alt == tag:
                continue
            # a never-seen (symbol, tag) shape jumps the queue; revisits of
            # a known shape in a new sibling context wait behind the flips
            priority = (1, tc.id, 0) if alt in explored else (-1, 0, 0)
            explored.add(alt)
            state.push(priority, Candidate(
                retag(normalized, name, alt),
                {"kind": "tag", "parent": tc.id, "symbol": name, "tag": alt}))


# --- suite I/O --------------------------------------------------------------


def write_suite(suite: list[TestCase], path) -> None:
    with open(path, "w") as f:
        for tc in suite:
            f.write(tc.to_json() + "\n")


def read_suite(path) -> list[TestCase]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(TestCase(
                id=rec["id"], target=rec["target"], assignment=rec["assignment"],
                provenance=rec["provenance"], expect=rec["expect"],
                coverage=[tuple(c) for c in rec["coverage"]],
                pc_dump="", hash=I.canonical_assignment(rec["assignment"]),
            ))
    return out
