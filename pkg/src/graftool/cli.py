"""Command line interface.

    graftool run <script.grs> [--emit-to F] [--debug-port N] [--max-iter N]
                 [--out-dir D] [--ui-dir D] [--validate]
    graftool check <rules.grg>
    graftool test-corpus [--case NAME]

Exit codes: 0 ok, 1 script or check failure, 2 usage.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .ecore import import_ecore
from .errors import Diagnostic, GraftoolError, RuleError
from .model import parse_model
from .ruleparser import check_rule, parse_rules


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="graftool")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a .grs script")
    run_p.add_argument("script")
    run_p.add_argument("--emit-to", help="initial emit sink file")
    run_p.add_argument("--debug-port", type=int,
                       help="serve the debug protocol (and UI) on this port")
    run_p.add_argument("--max-iter", type=int, default=1_000_000,
                       help="iteration cap for * and + sequences")
    run_p.add_argument("--out-dir", help="directory for redirect/export outputs")
    run_p.add_argument("--ui-dir",
                       help="static assets served on the debug port "
                            "(default: ./frontend/dist if present)")
    run_p.add_argument("--debug-all", action="store_true",
                       help="route every xgrs through the debugger, not just "
                            "debug xgrs lines")
    run_p.add_argument("--validate", action="store_true",
                       help="check store invariants after every rewrite")

    check_p = sub.add_parser("check", help="parse and check a rule file")
    check_p.add_argument("rules")

    corpus_p = sub.add_parser("test-corpus", help="run the shipped task corpus")
    corpus_p.add_argument("--case", help="run a single case by name")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0

    if args.command == "run":
        return _cmd_run(args)
    if args.command == "check":
        return _cmd_check(args)
    return _cmd_corpus(args)


def _cmd_run(args) -> int:
    from .debug import DebugController
    from .shellio import Shell

    script = Path(args.script)
    if not script.is_file():
        print(f"graftool: script not found: {script}", file=sys.stderr)
        return 2
    controller = None
    if args.debug_port is not None:
        ui_dir = args.ui_dir
        if ui_dir is None and Path("frontend/dist").is_dir():
            ui_dir = "frontend/dist"
        controller = DebugController(port=args.debug_port, ui_dir=ui_dir)
        print(f"debug port listening on {controller.host}:{controller.port}",
              file=sys.stderr)
    shell = Shell(out_dir=args.out_dir, emit_to=args.emit_to, debug=controller,
                  max_iter=args.max_iter, validate=args.validate,
                  force_debug=args.debug_all and controller is not None)
    try:
        return shell.run_script(script)
    finally:
        if controller is not None:
            controller.close()


def _cmd_check(args) -> int:
    path = Path(args.rules)
    if not path.is_file():
        print(f"graftool: rule file not found: {path}", file=sys.stderr)
        return 2

    def model_resolver(name: str):
        gm = path.parent / f"{name}.gm"
        if gm.is_file():
            return parse_model(gm.read_text(encoding="utf-8"), name=name,
                               filename=str(gm))
        if name.endswith("__ecore"):
            ecore = path.parent / f"{name[:-len('__ecore')]}.ecore"
            if ecore.is_file():
                return import_ecore(ecore.read_text(encoding="utf-8"),
                                    stem=ecore.stem).types
        raise GraftoolError(f"cannot find {name}.gm or matching .ecore next to "
                            f"{path.name}")

    def include_resolver(name: str) -> str:
        return (path.parent / name).read_text(encoding="utf-8")

    try:
        rs = parse_rules(path.read_text(encoding="utf-8"), include_resolver,
                         model_resolver, filename=path.name, strict=False)
    except RuleError as exc:
        for diag in exc.diagnostics or [Diagnostic("error", str(exc))]:
            print(diag, file=sys.stderr)
        return 1
    except GraftoolError as exc:
        print(exc, file=sys.stderr)
        return 1
    failed = False
    for name in rs.rules:
        for diag in check_rule(rs, name):
            failed = failed or diag.severity == "error"
            print(f"{path.name}: rule {name}: {diag}", file=sys.stderr)
    if failed:
        return 1
    print(f"{path.name}: {len(rs.rules)} rule(s) OK")
    return 0


def _cmd_corpus(args) -> int:
    from .corpus import CASES, run_case

    names = [args.case] if args.case else list(CASES)
    if args.case and args.case not in CASES:
        print(f"graftool: unknown case {args.case!r}; available: "
              f"{', '.join(CASES)}", file=sys.stderr)
        return 2
    failed = False
    for name in names:
        report = run_case(name)
        print(f"{name}: {'PASS' if report.ok else 'FAIL'}")
        if not report.ok:
            failed = True
            for problem in report.problems:
                print(f"  {problem}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
