"""Batch script runner for `.grs` files.

Input paths (models, instances, rules, includes) resolve relative to the
script being read; output paths (redirect emit, export) resolve against
the shell's out_dir, which defaults to the working directory. A failing
command aborts the script with a nonzero status. The emit sink starts at
stdout; `redirect emit` retargets it, opening the file lazily and closing
it on quit or the next redirect.
"""

from __future__ import annotations

import shlex
import sys
from pathlib import Path

from .ecore import import_ecore, import_instance
from .errors import GraftoolError, ShellError
from .exports import StyleHints, export_graph, to_dot
from .graph import Graph
from .model import TypeGraph, parse_model
from .ruleast import RuleSet
from .ruleparser import parse_rules
from .sequences import ExecEnv, execute, parse_sequence


class _Quit(Exception):
    pass


class Shell:
    def __init__(self, out_dir=None, emit_to=None, debug=None,
                 max_iter: int = 1_000_000, force_debug: bool = False,
                 stdout=None, validate: bool = False):
        self.models: dict[str, TypeGraph] = {}
        self.graph: Graph | None = None
        self.rules: RuleSet | None = None
        self.styles = StyleHints()
        self.vars: dict[str, object] = {}
        self.out_dir = Path(out_dir) if out_dir else Path.cwd()
        self.debug = debug
        self.max_iter = max_iter
        self.force_debug = force_debug
        self.stdout = stdout if stdout is not None else sys.stdout
        self.validate = validate
        self._emit_path: Path | None = Path(emit_to) if emit_to else None
        self._emit_file = None

    # --- emit sink -------------------------------------------------------------

    def emit(self, chunk: str) -> None:
        if self._emit_path is not None and self._emit_file is None:
            self._emit_file = open(self._emit_path, "w", encoding="utf-8",
                                   newline="")
        target = self._emit_file if self._emit_file is not None else self.stdout
        target.write(chunk)

    def _redirect_emit(self, raw_path: str) -> None:
        self._close_emit()
        self._emit_path = self.out_dir / raw_path

    def _close_emit(self) -> None:
        if self._emit_file is not None:
            self._emit_file.close()
            self._emit_file = None

    def close(self) -> None:
        self._close_emit()

    # --- script driving ----------------------------------------------------------

    def run_script(self, path) -> int:
        """Execute a `.grs` script; 0 on success, 1 on command failure."""
        path = Path(path)
        try:
            self._run_file(path, ())
        except _Quit:
            pass
        except ShellError as exc:
            print(str(exc), file=sys.stderr)
            self.close()
            return 1
        self.close()
        return 0

    def _run_file(self, path: Path, stack: tuple) -> None:
        resolved = path.resolve()
        if resolved in stack:
            raise ShellError(f"include cycle via {path}")
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ShellError(f"cannot read script {path}: {exc}") from exc
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                self.execute_command(line, script_dir=path.parent,
                                     stack=stack + (resolved,))
            except _Quit:
                raise
            except ShellError as exc:
                if exc.line is None:
                    raise ShellError(str(exc), str(path), lineno) from exc
                raise
            except GraftoolError as exc:
                raise ShellError(str(exc), str(path), lineno) from exc

    def execute_command(self, line: str, script_dir: Path | None = None,
                        stack: tuple = ()) -> None:
        """Run one shell command line."""
        script_dir = script_dir or Path.cwd()
        if line.startswith("xgrs "):
            self._cmd_xgrs(line[len("xgrs "):].strip(), debug=False)
            return
        if line.startswith("debug xgrs "):
            self._cmd_xgrs(line[len("debug xgrs "):].strip(), debug=True)
            return
        if line.startswith("debug set layout "):
            self.styles.set_layout(line.split()[-1])
            return
        try:
            words = shlex.split(line)
        except ValueError as exc:
            raise ShellError(f"bad quoting: {exc}") from exc
        if not words:
            return
        head = words[0]
        if head == "quit":
            raise _Quit()
        if head == "import":
            self._cmd_import(words[1:], script_dir)
        elif head == "new":
            self._cmd_new(words[1:], script_dir)
        elif head == "include":
            if len(words) != 2:
                raise ShellError("include expects one file")
            self._run_file(script_dir / words[1], stack)
        elif head == "redirect":
            if len(words) != 3 or words[1] != "emit":
                raise ShellError("usage: redirect emit <file>")
            self._redirect_emit(words[2])
        elif head == "show":
            self._cmd_show(words[1:])
        elif head == "export":
            if len(words) != 2:
                raise ShellError("usage: export <file.{dot,gxl,native}>")
            export_graph(self._need_graph(), self.out_dir / words[1], self.styles)
        elif head == "dump":
            self._cmd_dump(words[1:])
        else:
            raise ShellError(f"unknown command {head!r}")

    # --- commands ---------------------------------------------------------------

    def _need_graph(self) -> Graph:
        if self.graph is None:
            raise ShellError("no graph loaded; use import or new graph first")
        return self.graph

    def _model_resolver(self, base_dir: Path):
        def resolve(name: str) -> TypeGraph:
            if name in self.models:
                return self.models[name]
            gm = base_dir / f"{name}.gm"
            if gm.is_file():
                tg = parse_model(gm.read_text(encoding="utf-8"), name=name,
                                 filename=str(gm))
                self.models[name] = tg
                return tg
            raise ShellError(f"unknown model {name!r}")
        return resolve

    def _include_resolver(self, base_dir: Path):
        def resolve(name: str) -> str:
            return (base_dir / name).read_text(encoding="utf-8")
        return resolve

    def _load_rules(self, path: Path) -> RuleSet:
        text = path.read_text(encoding="utf-8")
        return parse_rules(text, self._include_resolver(path.parent),
                           self._model_resolver(path.parent),
                           filename=path.name)

    def _cmd_import(self, args: list[str], script_dir: Path) -> None:
        if len(args) not in (2, 3):
            raise ShellError("usage: import <file.ecore> [<instance.xmi>] "
                             "<rules.grg>")
        ecore_path = script_dir / args[0]
        rules_path = script_dir / args[-1]
        instance_path = script_dir / args[1] if len(args) == 3 else None
        if not args[0].endswith(".ecore"):
            raise ShellError("import expects an .ecore metamodel first")
        model = import_ecore(ecore_path.read_text(encoding="utf-8"),
                             stem=ecore_path.stem)
        self.models[model.name] = model.types
        self.graph = Graph(model.types)
        self.vars = {}
        if instance_path is not None:
            import_instance(instance_path.read_text(encoding="utf-8"),
                            model.types, self.graph)
        self.rules = self._load_rules(rules_path)

    def _cmd_new(self, args: list[str], script_dir: Path) -> None:
        if len(args) != 2 or args[0] != "graph":
            raise ShellError('usage: new graph "<model.gm | rules.grg>"')
        target = script_dir / args[1]
        if args[1].endswith(".gm"):
            tg = parse_model(target.read_text(encoding="utf-8"),
                             name=target.stem, filename=target.name)
            self.models[target.stem] = tg
            self.graph = Graph(tg)
            self.rules = None
        elif args[1].endswith(".grg"):
            self.rules = self._load_rules(target)
            self.graph = Graph(self.rules.types)
        else:
            raise ShellError("new graph expects a .gm or .grg file")
        self.vars = {}

    def _cmd_xgrs(self, seq_text: str, debug: bool) -> None:
        graph = self._need_graph()
        if self.rules is None:
            raise ShellError("no rules loaded")
        expr = parse_sequence(seq_text, self.rules)
        env = ExecEnv(graph, self.rules, vars=self.vars, emit=self.emit,
                      max_iter=self.max_iter, validate=self.validate)
        use_debug = self.debug is not None and (debug or self.force_debug)
        if use_debug:
            result = self.debug.run_session(env, expr, seq_text, self.styles)
        else:
            result = execute(env, expr)
        if not result:
            raise ShellError(f"sequence failed: {seq_text}")

    def _cmd_show(self, args: list[str]) -> None:
        if args == ["graph"]:
            graph = self._need_graph()
            if self.debug is not None and self.debug.has_client():
                self.debug.push_snapshot(graph, self.styles)
            else:
                self.stdout.write(to_dot(graph, self.styles))
            return
        if len(args) == 3 and args[0] == "num" and args[1] == "nodes":
            count = self._need_graph().count_elements(args[2], "with-subtypes")
            self.stdout.write(f"{count}\n")
            return
        raise ShellError("usage: show graph | show num nodes <type>")

    def _cmd_dump(self, args: list[str]) -> None:
        graph = self._need_graph()
        tg = graph.types

        def known(type_name: str, kind: str) -> str:
            if kind == "node" and type_name not in tg.node_types:
                raise ShellError(f"unknown node type {type_name}")
            if kind == "edge" and type_name not in tg.edge_types:
                raise ShellError(f"unknown edge type {type_name}")
            return type_name

        if len(args) == 5 and args[0] == "set" and args[1] in ("node", "edge"):
            kind, type_name, prop, value = args[1], known(args[2], args[1]), \
                args[3], args[4]
            tables = {
                ("node", "color"): self.styles.node_color,
                ("node", "shape"): self.styles.node_shape,
                ("node", "label"): self.styles.node_label,
                ("edge", "color"): self.styles.edge_color,
                ("edge", "style"): self.styles.edge_style,
                ("edge", "label"): self.styles.edge_label,
            }
            table = tables.get((kind, prop))
            if table is None:
                raise ShellError(f"unknown dump property {prop!r} for {kind}s")
            table[type_name] = "" if prop == "label" and value == "off" else value
            return
        if len(args) == 6 and args[:2] == ["add", "node"] and \
                args[3:5] == ["group", "by"]:
            container = known(args[2], "node")
            edge_type = known(args[5], "edge")
            self.styles.add_containment(container, edge_type)
            return
        raise ShellError("unrecognized dump command")


def run_script(path, **shell_kwargs) -> int:
    """Convenience wrapper: build a Shell, run one script, return its status."""
    shell = Shell(**shell_kwargs)
    return shell.run_script(path)
