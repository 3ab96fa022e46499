"""Command-line interface: generate suites, run them across implementations,
and inspect programs, constraints, and reports.

Exit codes: 0 = clean, 1 = findings (divergences), 2 = usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import diffexec as X
from . import driver as D
from . import frontend as F
from . import harness as H
from . import solver as SV
from . import symcore as S
from .interp import Config, execute


def _bounds(args) -> SV.Bounds:
    return SV.Bounds(int_lo=-args.int_bound, int_hi=args.int_bound,
                     max_str_len=args.str_len, alphabet=args.alphabet)


def _add_bounds_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--int-bound", type=int, default=32,
                   help="solver integer magnitude bound")
    p.add_argument("--str-len", type=int, default=4,
                   help="solver maximum string length")
    p.add_argument("--alphabet", default="ab0 /",
                   help="solver string alphabet")


def cmd_generate(args) -> int:
    try:
        h = H.build_harness(H.HarnessDescriptor(args.target, args.selector))
    except (H.UnknownTarget, F.ParseError) as exc:
        print(f"error: unknown target: {exc}", file=sys.stderr)
        return 2
    budget = D.Budget(max_tests=args.budget_tests,
                      max_seconds=args.budget_seconds,
                      workers=args.workers)
    target = {"method": args.target, "selector": args.selector,
              "sites": sorted(h.target_sites, key=str)}
    result = D.run_campaign(h.program, h.entry, target, budget, _bounds(args))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    D.write_suite(result.suite, out / "suite.jsonl")
    covered, total = result.coverage_summary()
    with open(out / "coverage.json", "w") as f:
        json.dump({
            "target": args.target,
            "selector": args.selector,
            "sites": {str(site): outs for site, outs in sorted(
                result.coverage.items(), key=lambda kv: str(kv[0]))},
            "targetOutcomesCovered": covered,
            "targetOutcomesTotal": total,
        }, f, indent=2, sort_keys=True)
        f.write("\n")
    with open(out / "stats.json", "w") as f:
        json.dump({
            "target": args.target,
            "selector": args.selector,
            "seed": args.seed,
            "tests": len(result.suite),
            "executed": result.stats.executed,
            "accepted": result.stats.accepted,
            "discarded": result.stats.discarded,
            "deduped": result.stats.deduped,
            "sat": result.stats.sat,
            "unsat": result.stats.unsat,
            "unknown": result.stats.unknown,
            "infeasible": result.infeasible,
            "discards": len(result.discards),
        }, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"{len(result.suite)} tests -> {out / 'suite.jsonl'}; "
          f"target coverage {covered}/{total}")
    return 0


def cmd_run(args) -> int:
    try:
        suite = D.read_suite(args.suite)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: cannot read suite: {exc}", file=sys.stderr)
        return 2
    try:
        runners = X.resolve_runners(args.runners)
        report = X.run_suite(suite, runners, workers=args.workers)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        X.write_bug_report(report, out / "bugs.jsonl")
        with open(out / "verdicts.jsonl", "w") as f:
            for v in report.verdicts:
                f.write(json.dumps({
                    "test": v.test_id, "vote": v.vote,
                    "dissenter": v.dissenter,
                    "outcomes": {n: e for n, e in sorted(v.outcomes.items())},
                }, sort_keys=True, separators=(",", ":")) + "\n")
    n_manual = sum(1 for v in report.verdicts if v.vote == "manual-review")
    print(f"{len(suite)} tests, unanimity {report.unanimity_rate():.1%}, "
          f"{len(report.bugs)} bug(s), {n_manual} for manual review")
    for name in report.availability_failures:
        print(f"runner {name}: availability failure (crashed on every test)")
    for bug in report.bugs:
        dissent, majority = bug.signature
        print(f"bug: {bug.runner} diverges ({dissent} vs {majority}), "
              f"{len(bug.witness_ids)} witness(es): "
              f"{bug.witness_ids[:5]}")
    findings = bool(report.bugs) or bool(report.availability_failures) or n_manual
    return 1 if findings else 0


def cmd_exec(args) -> int:
    try:
        source = Path(args.file).read_text()
        program = F.parse(source)
    except (OSError, F.ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    result = execute(program, None, {}, mode=args.mode, config=Config())
    print(json.dumps(D.envelope_of(result), separators=(",", ":")))
    if args.mode == "concolic" and result.pc.entries:
        sys.stdout.write(result.pc.dump())
    return 0


def cmd_solve(args) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    conjuncts = []
    try:
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            # accept both bare s-expressions and path-condition dump lines
            # ("site<TAB>T|F[ pin]<TAB>sexpr")
            parts = line.split("\t")
            taken = True
            if len(parts) == 3:
                sexpr, taken = parts[2], parts[1].split()[0] == "T"
            else:
                sexpr = line
            expr = S.from_sexpr(sexpr)
            conjuncts.append(expr if taken else S.mk("not", expr))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    solved = SV.solve(conjuncts, _bounds(args))
    print(solved.status)
    if solved.status == "sat":
        from . import values as V
        enc = {}
        for name, v in sorted(solved.model.items()):
            if isinstance(v, list):
                enc[name] = [V.encode_value(x) for x in v]
            else:
                enc[name] = V.encode_value(v)
        print(json.dumps(enc, sort_keys=True, separators=(",", ":")))
    return 0


def cmd_report(args) -> int:
    out = Path(args.dir)
    suite_path = out / "suite.jsonl"
    tests = 0
    if suite_path.is_file():
        tests = sum(1 for line in suite_path.read_text().splitlines() if line.strip())
    print(f"{tests} tests")
    coverage_path = out / "coverage.json"
    if coverage_path.is_file():
        cov = json.loads(coverage_path.read_text())
        print(f"target coverage {cov.get('targetOutcomesCovered', 0)}"
              f"/{cov.get('targetOutcomesTotal', 0)}")
    bugs_path = out / "bugs.jsonl"
    if bugs_path.is_file():
        bugs = [json.loads(l) for l in bugs_path.read_text().splitlines() if l.strip()]
        print(f"{len(bugs)} bug report entries")
        for b in bugs:
            if b.get("availabilityFailure"):
                print(f"  {b['runner']}: availability failure")
            else:
                print(f"  {b['runner']}: {len(b.get('witnesses', []))} witness(es)")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polyforge",
        description="Conformance test generation for JavaScript built-ins "
                    "via concolic execution and differential voting.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a test suite for a target")
    g.add_argument("--target", required=True,
                   help="built-in method, e.g. String.prototype.includes")
    g.add_argument("--selector", default="mdn",
                   help="implementation to explore: mdn, corejs, native, "
                        "or a source file path")
    g.add_argument("--budget-tests", type=int, default=500)
    g.add_argument("--budget-seconds", type=float, default=300.0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="out")
    _add_bounds_flags(g)
    g.set_defaults(fn=cmd_generate)

    r = sub.add_parser("run", help="run a suite across implementations and vote")
    r.add_argument("--suite", required=True)
    r.add_argument("--runners", default=None,
                   help="runner config JSON (default: POLYFORGE_RUNNERS or "
                        "the three built-in runners)")
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--out", default=None)
    r.set_defaults(fn=cmd_run)

    e = sub.add_parser("exec", help="execute a program file")
    e.add_argument("file")
    e.add_argument("--mode", choices=("concrete", "concolic"), default="concrete")
    e.set_defaults(fn=cmd_exec)

    s = sub.add_parser("solve", help="solve a constraint dump")
    s.add_argument("file")
    _add_bounds_flags(s)
    s.set_defaults(fn=cmd_solve)

    p = sub.add_parser("report", help="summarize an output directory")
    p.add_argument("dir")
    p.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
