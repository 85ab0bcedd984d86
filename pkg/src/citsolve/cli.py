"""Command-line interface.

Exit codes: 0 success, 1 no model (stable semantics with an empty result),
2 usage or parse error, 3 resource cutoff, 4 benchmark correctness
regression.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import bench as bench_mod
from .cit import (
    Cit,
    build_cit,
    cit_sizes,
    load_cit,
    query_decomposed,
    run_decomposed,
)
from .errors import CitsolveError, ResourceCutoffError, UsageError
from .independence import (
    Partition3,
    ci_semantic,
    ci_syntactic,
    detect_partitions,
    load_partition,
)
from .lattice import ApproxPair
from .program import Program, parse_program
from .semantics import SEMANTICS, SemanticsResult, solve_monolithic

EXIT_OK = 0
EXIT_NO_MODEL = 1
EXIT_USAGE = 2
EXIT_CUTOFF = 3
EXIT_REGRESSION = 4

SCHEMA = "1"


@dataclass
class RunReport:
    """Everything one command run produced, renderable as text or JSON."""

    command: str
    program_file: str | None = None
    atoms: int | None = None
    rules: int | None = None
    workers: int | None = None
    sections: list[tuple[str, object]] = field(default_factory=list)
    timings: list[tuple[str, float]] = field(default_factory=list)

    def add(self, title: str, payload) -> None:
        self.sections.append((title, payload))

    def time(self, phase: str, seconds: float) -> None:
        self.timings.append((phase, seconds))

    def to_json(self) -> str:
        doc = {
            "schema": SCHEMA,
            "command": self.command,
            "program": {
                "file": self.program_file,
                "atoms": self.atoms,
                "rules": self.rules,
            },
            "workers": self.workers,
            "sections": {title: payload for title, payload in self.sections},
            "timings": {phase: seconds for phase, seconds in self.timings},
        }
        return json.dumps(doc, indent=2)

    def to_text(self) -> str:
        lines = [f"command: {self.command}"]
        if self.program_file is not None:
            lines.append(
                f"program: {self.program_file} ({self.atoms} atoms, {self.rules} rules)"
            )
        if self.workers is not None:
            lines.append(f"workers: {self.workers}")
        for title, payload in self.sections:
            lines.append(f"{title}:")
            lines.extend("  " + ln for ln in _render_payload(payload))
        for phase, seconds in self.timings:
            lines.append(f"time[{phase}]: {seconds * 1000:.2f} ms")
        return "\n".join(lines) + "\n"


def _render_payload(payload) -> list[str]:
    if isinstance(payload, str):
        return [payload]
    if isinstance(payload, dict):
        return [f"{k}: {v}" for k, v in payload.items()]
    if isinstance(payload, list):
        out = []
        for item in payload:
            out.extend(_render_payload(item))
        return out
    return [str(payload)]


def _pair_sections(pair: ApproxPair) -> dict:
    universe = pair.universe
    true = sorted(pair.lower.names())
    undef = sorted(set(pair.upper.names()) - set(pair.lower.names()))
    false = sorted(set(universe.names) - set(pair.upper.names()))
    return {
        f"true ({len(true)})": " ".join(true),
        f"undefined ({len(undef)})": " ".join(undef),
        f"false ({len(false)})": " ".join(false),
    }


def _result_payload(result: SemanticsResult) -> dict:
    if result.kind in ("kk", "wf", "ultimate-wf"):
        return _pair_sections(result.single())
    models = result.sorted_models()
    payload = {"count": len(models)}
    for i, pair in enumerate(models, start=1):
        if pair.total:
            payload[f"model {i}"] = " ".join(sorted(pair.lower.names())) or "(empty)"
        else:
            undef = sorted(set(pair.upper.names()) - set(pair.lower.names()))
            payload[f"model {i}"] = (
                "true: " + (" ".join(sorted(pair.lower.names())) or "(none)")
                + " | undefined: " + (" ".join(undef) or "(none)")
            )
    return payload


def _result_json(result: SemanticsResult) -> dict:
    models = []
    for pair in result.sorted_models():
        models.append(
            {
                "true": sorted(pair.lower.names()),
                "undefined": sorted(
                    set(pair.upper.names()) - set(pair.lower.names())
                ),
            }
        )
    return {"kind": result.kind, "models": models}


def _load_program(path: str) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return parse_program(text)


def _emit(report: RunReport, fmt: str) -> None:
    sys.stdout.write(report.to_json() + "\n" if fmt == "json" else report.to_text())


def _cmd_solve(args) -> int:
    program = _load_program(args.file)
    report = RunReport(
        "solve", args.file, program.n_atoms, program.n_rules
    )
    t0 = time.perf_counter()
    result = solve_monolithic(program, args.semantics)
    report.time("solve", time.perf_counter() - t0)
    report.add("semantics", args.semantics)
    if args.format == "json":
        report.add("result", _result_json(result))
    else:
        report.add("result", _result_payload(result))
    _emit(report, args.format)
    if args.semantics == "stable" and not result.models:
        return EXIT_NO_MODEL
    return EXIT_OK


def _partition_verdicts(program: Program, part: Partition3) -> dict:
    verdicts = {"syntactic": str(ci_syntactic(program, part)).lower()}
    try:
        verdicts["semantic"] = str(ci_semantic(program, part)).lower()
        verdicts["cutoff"] = False
    except ResourceCutoffError as exc:
        verdicts["semantic"] = "cutoff-exceeded"
        verdicts["cutoff"] = True
        verdicts["detail"] = str(exc)
    return verdicts


def _cmd_independence(args) -> int:
    program = _load_program(args.file)
    report = RunReport(
        f"independence {args.action}", args.file, program.n_atoms, program.n_rules
    )
    if args.action == "check":
        part = load_partition(args.partition, program)
        t0 = time.perf_counter()
        verdicts = _partition_verdicts(program, part)
        report.time("check", time.perf_counter() - t0)
        report.add("partition", part.to_dict() if args.format == "json" else str(part.to_dict()))
        cutoff = verdicts.pop("cutoff")
        report.add("verdicts", verdicts)
        _emit(report, args.format)
        return EXIT_CUTOFF if cutoff else EXIT_OK
    t0 = time.perf_counter()
    partitions = detect_partitions(program)
    report.time("detect", time.perf_counter() - t0)
    if not partitions:
        report.add("partitions", "no non-trivial partition")
    elif args.format == "json":
        report.add("partitions", [p.to_dict() for p in partitions])
    else:
        report.add("partitions", [str(p.to_dict()) for p in partitions])
    _emit(report, args.format)
    return EXIT_OK


def _tree_for(args, program: Program) -> Cit:
    if getattr(args, "cit", None):
        return load_cit(args.cit, program)
    return build_cit(program)


def _cmd_cit(args) -> int:
    program = _load_program(args.file)
    report = RunReport(
        f"cit {args.action}", args.file, program.n_atoms, program.n_rules
    )
    t0 = time.perf_counter()
    tree = _tree_for(args, program)
    report.time("build", time.perf_counter() - t0)
    sizes = cit_sizes(tree)
    report.add(
        "cit",
        {"cps": sizes.cps, "cs": sizes.cs, "leaves": sizes.leaf_count},
    )
    if args.action == "build":
        if args.export:
            Path(args.export).write_text(tree.to_json() + "\n")
            report.add("exported", args.export)
        if args.format == "json":
            report.add("tree", tree.to_dict())
        else:
            report.add("tree", tree.to_json())
        _emit(report, args.format)
        return EXIT_OK

    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    report.workers = jobs
    if args.action == "solve":
        t0 = time.perf_counter()
        result, leaf_runs = run_decomposed(program, tree, args.semantics, jobs)
        report.time("solve", time.perf_counter() - t0)
        report.add("semantics", args.semantics)
        if args.format == "json":
            report.add("result", _result_json(result))
        else:
            report.add("result", _result_payload(result))
        for run in leaf_runs:
            report.time("leaf " + " ".join(sorted(run.scope.names())), run.seconds)
        _emit(report, args.format)
        if args.semantics == "stable" and not result.models:
            return EXIT_NO_MODEL
        return EXIT_OK

    t0 = time.perf_counter()
    answer = query_decomposed(program, tree, args.mode, args.atom, args.semantics, jobs)
    report.time("query", time.perf_counter() - t0)
    report.add(
        "query",
        {"mode": args.mode, "atom": args.atom, "semantics": args.semantics,
         "answer": str(answer).lower()},
    )
    _emit(report, args.format)
    return EXIT_OK


def _cmd_bench(args) -> int:
    rows = bench_mod.bench_corpus(args.corpus, args.semantics, args.repeat, args.jobs)
    bench_mod.write_csv(rows)
    if args.plot:
        bench_mod.plot_rows(rows, args.plot)
        print(f"wrote {args.plot}", file=sys.stderr)
    if any(row.answers_equal is False for row in rows):
        print("correctness regression: decomposed answer differs", file=sys.stderr)
        return EXIT_REGRESSION
    return EXIT_OK


def _cmd_gen_chain(args) -> int:
    blocks = [int(tok) for tok in args.blocks.split(",") if tok]
    paths = bench_mod.write_chain_corpus(args.directory, blocks)
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citsolve",
        description="Fixpoint semantics for normal logic programs, with "
        "conditional-independence decomposition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a program monolithically")
    p_solve.add_argument("file")
    p_solve.add_argument("--semantics", choices=SEMANTICS, default="wf")
    p_solve.add_argument("--format", choices=("text", "json"), default="text")
    p_solve.set_defaults(func=_cmd_solve)

    p_ind = sub.add_parser("independence", help="check or detect independencies")
    ind_sub = p_ind.add_subparsers(dest="action", required=True)
    p_check = ind_sub.add_parser("check", help="verify a partition")
    p_check.add_argument("file")
    p_check.add_argument("--partition", required=True, help="partition JSON file")
    p_check.add_argument("--format", choices=("text", "json"), default="text")
    p_check.set_defaults(func=_cmd_independence)
    p_detect = ind_sub.add_parser("detect", help="search for partitions")
    p_detect.add_argument("file")
    p_detect.add_argument("--format", choices=("text", "json"), default="text")
    p_detect.set_defaults(func=_cmd_independence)

    p_cit = sub.add_parser("cit", help="build or use an independence tree")
    cit_sub = p_cit.add_subparsers(dest="action", required=True)
    p_build = cit_sub.add_parser("build", help="build and print the tree")
    p_build.add_argument("file")
    p_build.add_argument("--cit", help="load this tree instead of building")
    p_build.add_argument("--export", help="write the tree JSON here")
    p_build.add_argument("--format", choices=("text", "json"), default="text")
    p_build.set_defaults(func=_cmd_cit)
    p_csolve = cit_sub.add_parser("solve", help="solve decomposed")
    p_csolve.add_argument("file")
    p_csolve.add_argument("--semantics", choices=SEMANTICS, default="wf")
    p_csolve.add_argument("--cit", help="load this tree instead of building")
    p_csolve.add_argument("--jobs", type=int, default=0, help="worker count")
    p_csolve.add_argument("--format", choices=("text", "json"), default="text")
    p_csolve.set_defaults(func=_cmd_cit)
    p_query = cit_sub.add_parser("query", help="credulous/skeptical atom query")
    p_query.add_argument("file")
    p_query.add_argument("--mode", choices=("credulous", "skeptical"), required=True)
    p_query.add_argument("--atom", required=True)
    p_query.add_argument("--semantics", choices=("supported", "stable"), default="stable")
    p_query.add_argument("--cit", help="load this tree instead of building")
    p_query.add_argument("--jobs", type=int, default=0)
    p_query.add_argument("--format", choices=("text", "json"), default="text")
    p_query.set_defaults(func=_cmd_cit)

    p_bench = sub.add_parser("bench", help="compare monolithic and decomposed")
    p_bench.add_argument("corpus", help="directory of .lp files")
    p_bench.add_argument("--semantics", choices=SEMANTICS, default="wf")
    p_bench.add_argument("--repeat", type=int, default=1)
    p_bench.add_argument("--jobs", type=int, default=None)
    p_bench.add_argument("--plot", help="render timings to this image file")
    p_bench.set_defaults(func=_cmd_bench)

    p_gen = sub.add_parser("gen-chain", help="write a chain benchmark corpus")
    p_gen.add_argument("directory")
    p_gen.add_argument("--blocks", default="1,2,4,8", help="comma-separated block counts")
    p_gen.set_defaults(func=_cmd_gen_chain)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ResourceCutoffError as exc:
        print(f"citsolve: resource cutoff: {exc}", file=sys.stderr)
        return EXIT_CUTOFF
    except UsageError as exc:
        print(f"citsolve: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CitsolveError as exc:
        print(f"citsolve: internal error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
