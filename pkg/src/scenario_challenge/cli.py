"""Command-line interface: ``analyze`` scenarios and ``generate`` built-in scenario files."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import List, Optional, Sequence

from .challenge import analyze
from .reachability import dump_layers
from .render import render_svg
from .sampling import sample_states, uncovered_states
from .scenario import (
    BUILTIN_NAMES,
    AnalysisTask,
    ScenarioParseError,
    ScenarioValidationError,
    bounds_from_dict,
    builtin_task,
    dump_task,
    load_task,
    task_with_bounds,
)

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4

EPILOG = """\
exit codes:
  0  success
  1  I/O error (missing or unwritable file)
  2  usage error
  3  parse error (malformed JSON or schema violation)
  4  validation error (a scenario invariant is violated)

Errors are reported as one JSON line on stderr: {"error": KIND, "message": TEXT}.
Output never contains color codes, so NO_COLOR is honoured trivially.
"""


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError("io", f"{path}: {exc.strerror or exc}", EXIT_IO) from None


def _write(path: str, text: str) -> None:
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError("io", f"{path}: {exc.strerror or exc}", EXIT_IO) from None


def _load_file(path: str) -> AnalysisTask:
    text = _read(path)
    try:
        return load_task(text)
    except ScenarioParseError as exc:
        raise CliError("parse", f"{path}: {exc}", EXIT_PARSE) from None
    except ScenarioValidationError as exc:
        raise CliError("validation", f"{path}: {exc}", EXIT_VALIDATION) from None


def _load_bounds(path: str):
    try:
        doc = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise CliError("parse", f"{path}: malformed JSON: {exc}", EXIT_PARSE) from None
    if isinstance(doc, dict) and "bounds" in doc:
        doc = doc["bounds"]
    try:
        return bounds_from_dict(doc)
    except ScenarioParseError as exc:
        raise CliError("parse", f"{path}: {exc}", EXIT_PARSE) from None


def _run_one(task: AnalysisTask, samples: int, seed: int, timing: bool):
    result = analyze(task, timing=timing)
    if samples:
        missing = uncovered_states(result.reach, sample_states(task, samples, seed))
        result.description.diagnostics["soundness"] = {
            "samples": samples,
            "seed": seed,
            "uncovered_states": int(sum(len(m) for m in missing)),
        }
    return result


def _describe_only(args) -> dict:
    task, samples, seed, timing = args
    return _run_one(task, samples, seed, timing).description.to_dict()


def cmd_analyze(ns: argparse.Namespace) -> int:
    if ns.blocked and ns.builtin != "d":
        raise CliError("usage", "--blocked requires --builtin d", EXIT_USAGE)
    tasks: List[AnalysisTask] = []
    if ns.builtin:
        tasks.append(builtin_task(ns.builtin, blocked=ns.blocked))
    for path in ns.file or ():
        tasks.append(_load_file(path))
    if not tasks:
        raise CliError("usage", "give --builtin NAME or at least one --file PATH", EXIT_USAGE)
    if ns.bounds:
        bounds = _load_bounds(ns.bounds)
        try:
            tasks = [task_with_bounds(t, bounds) for t in tasks]
        except ScenarioValidationError as exc:
            raise CliError("validation", f"{ns.bounds}: {exc}", EXIT_VALIDATION) from None
    if len(tasks) > 1 and (ns.render or ns.dump_layers):
        raise CliError("usage", "--render and --dump-layers need a single scenario", EXIT_USAGE)

    if len(tasks) == 1:
        result = _run_one(tasks[0], ns.samples, ns.seed, ns.timing)
        if ns.dump_layers:
            try:
                dump_layers(result.reach, ns.dump_layers)
            except OSError as exc:
                raise CliError("io", f"{ns.dump_layers}: {exc}", EXIT_IO) from None
        if ns.render:
            _write(ns.render, render_svg(result))
        sys.stdout.write(result.description.to_json())
        return EXIT_OK

    jobs = [(t, ns.samples, ns.seed, ns.timing) for t in tasks]
    if ns.jobs > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            outputs = list(pool.map(_describe_only, jobs))
    else:
        outputs = [_describe_only(j) for j in jobs]
    sys.stdout.write(json.dumps(outputs, indent=2) + "\n")
    return EXIT_OK


def cmd_generate(ns: argparse.Namespace) -> int:
    if ns.blocked and ns.name != "d":
        raise CliError("usage", "--blocked requires scenario d", EXIT_USAGE)
    task = builtin_task(ns.name, blocked=ns.blocked)
    _write(ns.out, dump_task(task))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenario-challenge",
        description="Describe the tactical challenge of highway scenarios.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="analyze a scenario and print its challenge description",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    a.add_argument("--builtin", choices=BUILTIN_NAMES, help="one of the built-in scenarios")
    a.add_argument("--blocked", action="store_true",
                   help="with --builtin d: both leads brake to a standstill")
    a.add_argument("--file", action="append", metavar="PATH",
                   help="scenario JSON file; repeat for batch mode (prints a JSON list)")
    a.add_argument("--bounds", metavar="PATH", help="JSON file overriding the normal-operation bounds")
    a.add_argument("--dump-layers", metavar="DIR", help="write one JSON record per reachable-set layer")
    a.add_argument("--render", metavar="PATH", help="write an SVG visualization")
    a.add_argument("--samples", type=int, default=0, metavar="N",
                   help="audit the reachable set with N sampled trajectories")
    a.add_argument("--seed", type=int, default=0, metavar="N", help="seed for --samples")
    a.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes in batch mode")
    a.add_argument("--timing", action="store_true",
                   help="add runtime to diagnostics (output is then no longer reproducible)")
    a.set_defaults(func=cmd_analyze)

    g = sub.add_parser("generate", help="write a built-in scenario as a scenario file",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    g.add_argument("name", choices=BUILTIN_NAMES)
    g.add_argument("out", metavar="OUT_PATH")
    g.add_argument("--blocked", action="store_true", help="blocked variant of scenario d")
    g.set_defaults(func=cmd_generate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except CliError as exc:
        sys.stderr.write(json.dumps({"error": exc.kind, "message": str(exc)}) + "\n")
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
