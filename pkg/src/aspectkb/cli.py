"""The ``akb`` command.

Subcommands: ``run`` a scenario under a seeded or scripted scheduler,
``explore`` its whole state space, ``lemmas`` for the randomized
policy-vs-audit harness, ``check`` for parse and validation only.

Exit codes are part of the interface:

  0  success
  1  scenario not found or parse error
  2  validation error (including undeclared level names)
  3  scripted redex not enabled
  4  exploration hit the depth or state bound before finishing
  5  lemma harness found counterexamples

--scenario takes a builtin name, a path to an ``.akb`` file, or a bare
name looked up in the directories on AKB_SCENARIO_PATH; an unknown name
fails with the list of builtins on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import blp
from .engine import FixedScript, ScriptMismatch, SeededRandom, explore, run
from .parser import ParseError, UndeclaredLevel, parse_scenario
from .syntax import Net, validate

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_SCRIPT = 3
EXIT_DEPTH = 4
EXIT_COUNTEREXAMPLES = 5


class ScenarioNotFound(Exception):
    pass


def _scenario_text(name: str) -> tuple[str, str]:
    p = Path(name)
    if p.suffix == ".akb" or os.sep in name:
        if p.is_file():
            return p.read_text(), str(p)
        raise ScenarioNotFound("no scenario file %r" % name)
    try:
        return blp.builtin_scenario_text(name), name + ".akb"
    except KeyError:
        pass
    for d in os.environ.get("AKB_SCENARIO_PATH", "").split(os.pathsep):
        if not d:
            continue
        cand = Path(d) / (name + ".akb")
        if cand.is_file():
            return cand.read_text(), str(cand)
    raise ScenarioNotFound(
        "no builtin or AKB_SCENARIO_PATH scenario %r; builtins: %s"
        % (name, ", ".join(blp.list_builtin_scenarios()))
    )


def _load(name: str) -> tuple[Net | None, int]:
    try:
        text, fname = _scenario_text(name)
        net = parse_scenario(text, filename=fname)
    except ScenarioNotFound as e:
        print("error: %s" % e, file=sys.stderr)
        return None, EXIT_PARSE
    except UndeclaredLevel as e:
        print("error: %s" % e, file=sys.stderr)
        return None, EXIT_VALIDATION
    except ParseError as e:
        print("error: %s" % e, file=sys.stderr)
        return None, EXIT_PARSE
    diags = validate(net)
    if diags:
        for d in diags:
            print("invalid: %s" % d, file=sys.stderr)
        return None, EXIT_VALIDATION
    return net, EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    net, code = _load(args.scenario)
    if net is None:
        return code
    if args.script is not None:
        scheduler = FixedScript([k for k in args.script.split(",") if k])
    else:
        scheduler = SeededRandom(args.seed)
    try:
        trace = run(net, scheduler, max_steps=args.max_steps)
    except ScriptMismatch as e:
        print("error: %s" % e, file=sys.stderr)
        return EXIT_SCRIPT
    if args.format == "json-lines":
        sys.stdout.write(trace.to_jsonl())
    else:
        sys.stdout.write(trace.to_text())
    if args.trace:
        Path(args.trace).write_text(trace.to_jsonl())
    if args.plot:
        from . import report

        report.plot_history(trace, args.plot)
    return EXIT_OK


def cmd_explore(args: argparse.Namespace) -> int:
    net, code = _load(args.scenario)
    if net is None:
        return code
    graph = explore(net, max_depth=args.depth, max_states=args.max_states)
    granted = sum(1 for _s, _d, ev in graph.edges if ev.granted and ev.enabled)
    denied = sum(1 for _s, _d, ev in graph.edges if not ev.granted)
    stalled = sum(1 for _s, _d, ev in graph.edges if not ev.enabled)
    print("states:      %d" % len(graph.states))
    print("edges:       %d (%d granted, %d denied, %d not enabled)"
          % (len(graph.edges), granted, denied, stalled))
    print("terminal:    %s" % (", ".join("#%d" % i for i in graph.terminal) or "none"))
    if graph.truncated:
        print("exploration stopped at the depth or state bound")
    if args.plot:
        from . import report

        report.plot_reachability(graph, args.plot)
    return EXIT_DEPTH if graph.truncated else EXIT_OK


def cmd_lemmas(args: argparse.Namespace) -> int:
    rep = blp.lemma_harness(args.instances, args.lattice, seed=args.seed)
    print(rep.summary())
    for ce in rep.counterexamples[:5]:
        print("counterexample: candidate %s after %s, decision %s, audit says %s"
              % (ce["candidate"], " -> ".join(ce["path"]) or "start", ce["decision"], ce["expected"]))
    if args.report:
        payload = {
            "lattice": rep.lattice_kind,
            "instances": rep.instances,
            "seed": rep.seed,
            "decisions": rep.decisions,
            "grants": rep.grants,
            "denials": rep.denials,
            "states_visited": rep.states_visited,
            "truncated_instances": rep.truncated_instances,
            "counterexamples": rep.counterexamples,
        }
        Path(args.report).write_text(json.dumps(payload, indent=2) + "\n")
    if args.plot:
        from . import report

        report.plot_harness([rep], args.plot)
    return EXIT_COUNTEREXAMPLES if rep.counterexamples else EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    net, code = _load(args.scenario)
    if net is None:
        return code
    print("OK: %d items, lattice %s" % (len(net.items), "/".join(net.lattice.level_names)))
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="akb",
        description="Interpreter and analysis tools for aspect-guarded tuple-space nets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one schedule of a scenario")
    p_run.add_argument("--scenario", required=True, help="builtin name or .akb file")
    p_run.add_argument("--seed", type=int, default=0, help="random scheduler seed")
    p_run.add_argument("--script", help="comma separated redex keys to follow instead of the seed")
    p_run.add_argument("--max-steps", type=int, default=200)
    p_run.add_argument("--trace", help="write the json-lines trace to this file")
    p_run.add_argument("--format", choices=("text", "json-lines"), default="text",
                       help="stdout format")
    p_run.add_argument("--plot", help="render the history chart to this file")
    p_run.set_defaults(func=cmd_run)

    p_exp = sub.add_parser("explore", help="exhaustive state-space exploration")
    p_exp.add_argument("--scenario", required=True)
    p_exp.add_argument("--depth", type=int, default=100)
    p_exp.add_argument("--max-states", type=int, default=5000)
    p_exp.add_argument("--plot", help="render the reachability graph to this file")
    p_exp.set_defaults(func=cmd_explore)

    p_lem = sub.add_parser("lemmas", help="random nets: policy decisions vs the audit model")
    p_lem.add_argument("--instances", type=int, default=100)
    p_lem.add_argument("--lattice", choices=("chain3", "diamond"), default="chain3")
    p_lem.add_argument("--seed", type=int, default=0)
    p_lem.add_argument("--report", help="write the full json report to this file")
    p_lem.add_argument("--plot", help="render the decision summary to this file")
    p_lem.set_defaults(func=cmd_lemmas)

    p_chk = sub.add_parser("check", help="parse and validate a scenario, no execution")
    p_chk.add_argument("--scenario", required=True)
    p_chk.set_defaults(func=cmd_check)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
