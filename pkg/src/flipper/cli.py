"""Command-line entry points: serve the API, run a program file, or REPL."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .executor import execute, trace_to_json
from .lang import ParseError, parse_core, pretty
from .world import GridWorld, world_from_json, world_to_json


def _load_world(path: str) -> GridWorld:
    return world_from_json(json.loads(Path(path).read_text()))


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import build_server

    app = build_server(args.data, args.embeddings)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    w = _load_world(args.world)
    text = Path(args.program).read_text().strip()
    try:
        program = parse_core(text, named_areas=tuple(sorted(w.named_areas)))
    except ParseError as e:
        print(f"parse error at token {e.position}: {e}", file=sys.stderr)
        return 2
    outcome = execute(program, w)
    print(json.dumps(world_to_json(outcome.trace.final), indent=1))
    for warning in outcome.trace.warnings:
        print(f"warning at {warning.path or '<root>'}: {warning.reason}",
              file=sys.stderr)
    if args.strict_exit and outcome.trace.warnings:
        return 1
    return 0


def cmd_repl(args: argparse.Namespace) -> int:
    w = _load_world(args.world)
    areas = tuple(sorted(w.named_areas))
    print("enter commands; blank line or EOF exits")
    while True:
        try:
            line = input("> ").strip()
        except EOFError:
            break
        if not line:
            break
        try:
            program = parse_core(line, named_areas=areas)
        except ParseError as e:
            print(f"cannot parse at token {e.position}"
                  + (f" (expected {', '.join(e.expected)})" if e.expected else ""))
            continue
        outcome = execute(program, w)
        w = outcome.trace.final
        print(f"{pretty(program)}")
        print(f"  {len(outcome.trace.steps)} steps; robot at {w.robot.position}")
        for warning in outcome.trace.warnings:
            print(f"  warning: {warning.reason}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="flipper",
        description="interactive robot command language")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP/WebSocket API")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--data", required=True,
                         help="data directory (rules, params, worlds, sessions)")
    p_serve.add_argument("--embeddings", default=None,
                         help="word-vector file; bundled vectors if omitted")
    p_serve.set_defaults(func=cmd_serve)

    p_run = sub.add_parser("run", help="execute a program file on a world")
    p_run.add_argument("--world", required=True, help="world JSON file")
    p_run.add_argument("--program", required=True, help="program text file")
    p_run.add_argument("--strict-exit", action="store_true",
                       help="exit 1 when execution emitted warnings")
    p_run.set_defaults(func=cmd_run)

    p_repl = sub.add_parser("repl", help="interactive command loop on a world")
    p_repl.add_argument("--world", required=True, help="world JSON file")
    p_repl.set_defaults(func=cmd_repl)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
