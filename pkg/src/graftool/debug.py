"""Step-debug session server.

The engine listens on a local TCP port. A peer either speaks newline
delimited JSON directly, or HTTP: plain GET requests serve the bundled
browser UI, and an upgrade on /ws bridges the same JSON lines over a
websocket. Events flow engine to client, commands flow back:

    {"event": "sequence_started", "step": 0, "text": "..."}
    {"event": "graph_snapshot", "step": 1, "graph": {...}, "hints": {...}}
    {"event": "match_found", "step": 2, "rule": "r",
     "bindings": [["n", 5], ...], "suspended": true}
    {"event": "pre_apply", "step": 3, "rule": "r", "suspended": true}
    {"event": "post_apply", "step": 4, "rule": "r", "delta": {...}}
    {"event": "sequence_finished", "step": 5, "result": true}

    {"command": "step" | "continue" | "abort" | "snapshot"}

Events with "suspended": true block the engine until the next command;
`continue` stops suspending for the rest of the sequence, `abort` ends it
with result false (effects so far stay in the graph), and `snapshot` asks
for a fresh graph_snapshot while staying suspended. A closed transport is
treated as abort. Step indices are monotone per session.
"""

from __future__ import annotations

import base64
import hashlib
import json
import queue
import socket
import threading
from pathlib import Path

from .errors import DebugTransportError, SequenceAborted
from .exports import StyleHints
from .graph import Graph
from .rewriter import RewriteOutcome
from .ruleast import Rule
from .sequences import ExecEnv, SequenceHook, execute
from .values import EnumValue, format_literal

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".json": "application/json",
}


def _json_value(value):
    if isinstance(value, (bool, int, float, str)):
        return value
    if isinstance(value, EnumValue):
        return str(value)
    return format_literal(value)


def graph_payload(g: Graph) -> dict:
    nodes = []
    for nid in g.nodes():
        nodes.append({"id": nid, "type": g.element_type(nid),
                      "attrs": {k: _json_value(v)
                                for k, v in sorted(g.attrs_of(nid).items())}})
    edges = []
    for eid in g.edges():
        edges.append({"id": eid, "type": g.element_type(eid),
                      "src": g.source(eid), "trg": g.target(eid),
                      "attrs": {k: _json_value(v)
                                for k, v in sorted(g.attrs_of(eid).items())}})
    return {"nodes": nodes, "edges": edges}


def delta_payload(g: Graph, outcome: RewriteOutcome) -> dict:
    created = []
    for elem in outcome.created:
        if not g.is_live(elem):
            continue
        record = {"id": elem, "type": g.element_type(elem),
                  "attrs": {k: _json_value(v)
                            for k, v in sorted(g.attrs_of(elem).items())}}
        if g.is_edge(elem):
            record["src"] = g.source(elem)
            record["trg"] = g.target(elem)
        created.append(record)
    retyped = [[elem, g.element_type(elem)] for elem in outcome.retyped
               if g.is_live(elem)]
    return {"created": created, "deleted": list(outcome.deleted),
            "retyped": retyped}


class _ClosedLink(Exception):
    pass


def _shutdown_and_close(sock: socket.socket) -> None:
    # shutdown first: a bare close neither wakes a thread blocked in recv
    # nor sends FIN while that recv holds the file description open.
    try:
        sock.shutdown(socket.SHUT_RDWR)
    except OSError:
        pass
    try:
        sock.close()
    except OSError:
        pass


class _RawLink:
    """Newline-delimited JSON over a plain socket."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._buffer = b""
        self._lock = threading.Lock()

    def send(self, obj: dict) -> None:
        data = (json.dumps(obj, separators=(",", ":")) + "\n").encode("utf-8")
        with self._lock:
            try:
                self.sock.sendall(data)
            except OSError as exc:
                raise _ClosedLink() from exc

    def recv(self) -> dict:
        while b"\n" not in self._buffer:
            try:
                chunk = self.sock.recv(4096)
            except OSError as exc:
                raise _ClosedLink() from exc
            if not chunk:
                raise _ClosedLink()
            self._buffer += chunk
        line, self._buffer = self._buffer.split(b"\n", 1)
        if not line.strip():
            return self.recv()
        return json.loads(line.decode("utf-8"))

    def close(self) -> None:
        _shutdown_and_close(self.sock)


class _WsLink:
    """RFC 6455 text frames carrying one JSON object per message."""

    def __init__(self, sock: socket.socket):
        self.sock = sock
        self._lock = threading.Lock()

    def send(self, obj: dict) -> None:
        payload = json.dumps(obj, separators=(",", ":")).encode("utf-8")
        header = bytearray([0x81])
        n = len(payload)
        if n < 126:
            header.append(n)
        elif n < 1 << 16:
            header.append(126)
            header += n.to_bytes(2, "big")
        else:
            header.append(127)
            header += n.to_bytes(8, "big")
        with self._lock:
            try:
                self.sock.sendall(bytes(header) + payload)
            except OSError as exc:
                raise _ClosedLink() from exc

    def _read_exact(self, n: int) -> bytes:
        out = b""
        while len(out) < n:
            try:
                chunk = self.sock.recv(n - len(out))
            except OSError as exc:
                raise _ClosedLink() from exc
            if not chunk:
                raise _ClosedLink()
            out += chunk
        return out

    def recv(self) -> dict:
        while True:
            head = self._read_exact(2)
            opcode = head[0] & 0x0F
            masked = head[1] & 0x80
            length = head[1] & 0x7F
            if length == 126:
                length = int.from_bytes(self._read_exact(2), "big")
            elif length == 127:
                length = int.from_bytes(self._read_exact(8), "big")
            mask = self._read_exact(4) if masked else b"\x00" * 4
            payload = self._read_exact(length)
            if masked:
                payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
            if opcode == 0x8:  # close
                raise _ClosedLink()
            if opcode == 0x9:  # ping -> pong
                with self._lock:
                    self.sock.sendall(bytes([0x8A, len(payload)]) + payload)
                continue
            if opcode in (0x1, 0x2):
                if not payload.strip():
                    continue
                return json.loads(payload.decode("utf-8"))

    def close(self) -> None:
        _shutdown_and_close(self.sock)


class DebugController:
    """Owns the listening socket and at most one live debug client."""

    def __init__(self, port: int = 0, host: str = "127.0.0.1",
                 ui_dir: str | None = None, accept_timeout: float | None = None):
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self.accept_timeout = accept_timeout
        self._server = socket.create_server((host, port))
        self.host, self.port = self._server.getsockname()[:2]
        self._link: _RawLink | _WsLink | None = None
        self._link_ready = threading.Event()
        self._commands: queue.Queue = queue.Queue()
        self._step = 0
        self._closing = False
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               daemon=True)
        self._accept_thread.start()

    # --- connection handling ------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._closing:
            try:
                sock, _addr = self._server.accept()
            except OSError:
                return
            try:
                self._handle_connection(sock)
            except Exception:
                try:
                    sock.close()
                except OSError:
                    pass

    def _handle_connection(self, sock: socket.socket) -> None:
        # HTTP peers talk first; raw JSON-lines peers connect silently and
        # wait for events. A short peek decides which one this is.
        sock.settimeout(0.4)
        try:
            head = sock.recv(4, socket.MSG_PEEK)
        except socket.timeout:
            head = b""
        finally:
            sock.settimeout(None)
        if head[:4] in (b"GET ", b"POST", b"HEAD") or head[:3] == b"GET":
            self._handle_http(sock)
            return
        if self._link is not None:
            sock.close()
            return
        self._install_link(_RawLink(sock))

    def _install_link(self, link) -> None:
        self._link = link
        self._link_ready.set()
        threading.Thread(target=self._reader_loop, args=(link,),
                         daemon=True).start()

    def _reader_loop(self, link) -> None:
        try:
            while True:
                self._commands.put(link.recv())
        except (_ClosedLink, json.JSONDecodeError):
            self._commands.put({"command": "__closed__"})
            if self._link is link:
                self._link = None
                self._link_ready.clear()

    def _handle_http(self, sock: socket.socket) -> None:
        data = b""
        while b"\r\n\r\n" not in data:
            chunk = sock.recv(4096)
            if not chunk:
                sock.close()
                return
            data += chunk
        headers = data.split(b"\r\n\r\n", 1)[0].decode("latin-1")
        request_line = headers.splitlines()[0]
        parts = request_line.split()
        path = parts[1] if len(parts) > 1 else "/"
        header_map = {}
        for line in headers.splitlines()[1:]:
            if ":" in line:
                key, value = line.split(":", 1)
                header_map[key.strip().lower()] = value.strip()
        if header_map.get("upgrade", "").lower() == "websocket":
            key = header_map.get("sec-websocket-key", "")
            accept = base64.b64encode(
                hashlib.sha1((key + _WS_GUID).encode()).digest()).decode()
            response = ("HTTP/1.1 101 Switching Protocols\r\n"
                        "Upgrade: websocket\r\nConnection: Upgrade\r\n"
                        f"Sec-WebSocket-Accept: {accept}\r\n\r\n")
            sock.sendall(response.encode("latin-1"))
            if self._link is not None:
                sock.close()
                return
            self._install_link(_WsLink(sock))
            return
        self._serve_static(sock, path)

    def _serve_static(self, sock: socket.socket, path: str) -> None:
        body = b"not found"
        status = "404 Not Found"
        ctype = "text/plain"
        if self.ui_dir is not None:
            rel = "index.html" if path in ("/", "") else path.lstrip("/")
            target = (self.ui_dir / rel).resolve()
            inside = target.is_relative_to(self.ui_dir.resolve())
            if inside and target.is_file():
                body = target.read_bytes()
                status = "200 OK"
                ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        response = (f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                    f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n")
        try:
            sock.sendall(response.encode("latin-1") + body)
        finally:
            sock.close()

    # --- engine-facing API ----------------------------------------------------

    def has_client(self) -> bool:
        return self._link is not None

    def wait_for_client(self) -> None:
        if not self._link_ready.wait(timeout=self.accept_timeout):
            raise DebugTransportError(
                f"no debug client connected to port {self.port}")

    def _next_step(self) -> int:
        step = self._step
        self._step += 1
        return step

    def send_event(self, event: str, **fields) -> bool:
        link = self._link
        if link is None:
            return False
        payload = {"event": event, "step": self._next_step()}
        payload.update(fields)
        try:
            link.send(payload)
            return True
        except _ClosedLink:
            self._link = None
            self._link_ready.clear()
            return False

    def push_snapshot(self, g: Graph, styles: StyleHints, **extra) -> bool:
        return self.send_event("graph_snapshot", graph=graph_payload(g),
                               hints=styles.to_payload(), **extra)

    def run_session(self, env: ExecEnv, expr, text: str,
                    styles: StyleHints | None = None) -> bool:
        """Run one sequence under stepwise control; returns its result."""
        self.wait_for_client()
        while not self._commands.empty():  # drop stale commands
            self._commands.get_nowait()
        self._step = 0
        self.send_event("sequence_started", text=text)
        self.push_snapshot(env.graph, styles or StyleHints())
        hook = _SessionHook(self, env, styles or StyleHints())
        env.hook = hook
        try:
            result = execute(env, expr)
        except SequenceAborted:
            result = False
        finally:
            env.hook = None
        self.send_event("sequence_finished", result=result)
        return result

    def close(self) -> None:
        self._closing = True
        if self._link is not None:
            self._link.close()
            self._link = None
        _shutdown_and_close(self._server)


class _SessionHook(SequenceHook):
    def __init__(self, controller: DebugController, env: ExecEnv,
                 styles: StyleHints):
        self.controller = controller
        self.env = env
        self.styles = styles
        self.continuing = False

    def _suspend(self) -> None:
        while True:
            cmd = self.controller._commands.get()
            verb = cmd.get("command")
            if verb == "step":
                return
            if verb == "continue":
                self.continuing = True
                return
            if verb in ("abort", "__closed__"):
                raise SequenceAborted()
            if verb == "snapshot":
                # still suspended: the snapshot asks for the next command
                self.controller.push_snapshot(self.env.graph, self.styles,
                                              suspended=True)
                continue
            # Unknown verbs are ignored; the engine stays suspended.

    def _emit_suspending(self, event: str, **fields) -> None:
        suspended = not self.continuing
        sent = self.controller.send_event(event, suspended=suspended, **fields)
        if not sent:
            raise SequenceAborted()
        if suspended:
            self._suspend()

    def match_found(self, rule: Rule, match) -> None:
        self._emit_suspending("match_found", rule=rule.name,
                              bindings=[[n, i] for n, i in match.named_bindings()])

    def pre_apply(self, rule: Rule, match) -> None:
        self._emit_suspending("pre_apply", rule=rule.name)

    def post_apply(self, rule: Rule, outcome: RewriteOutcome) -> None:
        self.controller.send_event("post_apply", rule=rule.name,
                                   delta=delta_payload(self.env.graph, outcome))
