"""Headless scripted debug client.

Connects to the engine's debug port over plain TCP JSON lines, answers
suspension events according to a policy, and records the full event log.
Used by the test suite to prove debug transparency and by the browser UI's
parity checks. Also runnable as a module:

    python3 -m graftool.debugclient script.grs --policy continue
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
import threading
import time


class ScriptedDebugClient:
    """Drives debug sessions with a fixed or computed command per suspension.

    `policy` is either a command string ("continue", "step", "abort") or a
    callable taking the event dict and returning a command string.
    """

    def __init__(self, host: str, port: int, policy="continue",
                 connect_timeout: float = 10.0):
        self.host = host
        self.port = port
        self.policy = policy
        self.connect_timeout = connect_timeout
        self.events: list[dict] = []

    def _connect(self) -> socket.socket:
        deadline = time.monotonic() + self.connect_timeout
        last_error = None
        while time.monotonic() < deadline:
            try:
                return socket.create_connection((self.host, self.port),
                                                timeout=self.connect_timeout)
            except OSError as exc:
                last_error = exc
                time.sleep(0.05)
        raise ConnectionError(f"cannot reach debug port {self.port}: {last_error}")

    def run(self) -> list[dict]:
        """Read events until the engine closes the connection."""
        sock = self._connect()
        buffer = b""
        try:
            with sock:
                sock.settimeout(60)
                while True:
                    while b"\n" not in buffer:
                        chunk = sock.recv(4096)
                        if not chunk:
                            return self.events
                        buffer += chunk
                    line, buffer = buffer.split(b"\n", 1)
                    if not line.strip():
                        continue
                    event = json.loads(line.decode("utf-8"))
                    self.events.append(event)
                    if event.get("suspended"):
                        verb = (self.policy(event) if callable(self.policy)
                                else self.policy)
                        sock.sendall((json.dumps({"command": verb}) + "\n")
                                     .encode("utf-8"))
        except OSError:
            return self.events
        return self.events


def run_script_with_client(script_path: str, policy="continue",
                           out_dir: str | None = None):
    """Run a script with an in-process debug controller and scripted client.

    Returns (exit_status, event_log, shell). All xgrs commands are routed
    through the debugger.
    """
    from .debug import DebugController
    from .shellio import Shell

    controller = DebugController(port=0, accept_timeout=30)
    shell = Shell(out_dir=out_dir, debug=controller, force_debug=True)
    client = ScriptedDebugClient("127.0.0.1", controller.port, policy)
    status_box = {}

    def drive():
        status_box["status"] = shell.run_script(script_path)
        controller.close()

    runner = threading.Thread(target=drive, daemon=True)
    runner.start()
    events = client.run()
    runner.join(timeout=120)
    return status_box.get("status"), events, shell


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="run a .grs script under the step debugger with a "
                    "scripted client and print the event log as JSON lines")
    parser.add_argument("script")
    parser.add_argument("--policy", default="continue",
                        choices=["continue", "step", "abort"])
    parser.add_argument("--out-dir", default=None)
    args = parser.parse_args(argv)
    status, events, _shell = run_script_with_client(args.script, args.policy,
                                                    args.out_dir)
    for event in events:
        print(json.dumps(event, separators=(",", ":")))
    return int(status or 0)


if __name__ == "__main__":
    sys.exit(main())
