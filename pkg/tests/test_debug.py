import json
import socket
import threading
import urllib.request

import pytest

from graftool.corpus import CASES, DATA_DIR, run_case
from graftool.debug import DebugController
from graftool.debugclient import ScriptedDebugClient
from graftool.graph import canonical_text
from graftool.shellio import Shell


def run_debug_script(script, policy, tmp_path, force_debug=True):
    controller = DebugController(port=0, accept_timeout=20)
    shell = Shell(out_dir=tmp_path, debug=controller, force_debug=force_debug,
                  validate=True)
    client = ScriptedDebugClient("127.0.0.1", controller.port, policy)
    box = {}

    def drive():
        box["status"] = shell.run_script(script)
        controller.close()

    thread = threading.Thread(target=drive, daemon=True)
    thread.start()
    events = client.run()
    thread.join(timeout=60)
    assert "status" in box, "script did not finish"
    return box["status"], events, shell


def events_of(events, kind):
    return [e for e in events if e["event"] == kind]


def test_count_debug_emits_one_looping_match(tmp_path):
    # Only the `debug xgrs` line engages the debugger when force_debug is off.
    status, events, _ = run_debug_script(DATA_DIR / "Count.grs", "continue",
                                         tmp_path, force_debug=False)
    assert status == 0
    started = events_of(events, "sequence_started")
    assert len(started) == 1
    looping = [e for e in events_of(events, "match_found")
               if e["rule"] == "countLoopingEdge"]
    assert len(looping) == 1
    names = {name for name, _gid in looping[0]["bindings"]}
    assert names == {"e", "n"}
    finished = events_of(events, "sequence_finished")
    assert finished and finished[-1]["result"] is True


def test_debug_event_order_and_steps(tmp_path):
    status, events, _ = run_debug_script(DATA_DIR / "Count.grs", "step",
                                         tmp_path, force_debug=False)
    assert status == 0
    steps = [e["step"] for e in events]
    assert steps == sorted(steps)
    assert len(set(steps)) == len(steps)
    kinds = [e["event"] for e in events]
    assert kinds[0] == "sequence_started"
    assert kinds[1] == "graph_snapshot"
    assert kinds[-1] == "sequence_finished"
    # every pre_apply is eventually followed by its post_apply
    assert kinds.count("pre_apply") == kinds.count("post_apply")


def test_step_and_continue_equivalent_results(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    a_status, _, a_shell = run_debug_script(DATA_DIR / "Count.grs", "step",
                                            tmp_path / "a")
    b_status, _, b_shell = run_debug_script(DATA_DIR / "Count.grs", "continue",
                                            tmp_path / "b")
    assert a_status == b_status == 0
    assert canonical_text(a_shell.graph) == canonical_text(b_shell.graph)


def test_abort_stops_with_failure_and_no_rewrite(tmp_path):
    status, events, shell = run_debug_script(DATA_DIR / "HelloWorld.grs",
                                             "abort", tmp_path)
    # the aborted sequence fails, which aborts the script
    assert status == 1
    finished = events_of(events, "sequence_finished")
    assert finished and finished[0]["result"] is False
    assert events_of(events, "post_apply") == []
    assert shell.graph.count_elements("helloworld_Greeting") == 0


def test_snapshot_command_keeps_suspension(tmp_path):
    state = {"asked": False}

    def policy(event):
        if event["event"] == "match_found" and not state["asked"]:
            state["asked"] = True
            return "snapshot"
        return "continue"

    status, events, _ = run_debug_script(DATA_DIR / "HelloWorld.grs", policy,
                                         tmp_path)
    assert status == 0
    snapshots = events_of(events, "graph_snapshot")
    assert len(snapshots) >= 2  # session start plus the requested resync
    assert events_of(events, "sequence_finished")[-1]["result"] is True


def test_post_apply_delta_payload(tmp_path):
    status, events, shell = run_debug_script(DATA_DIR / "HelloWorld.grs",
                                             "continue", tmp_path)
    assert status == 0
    deltas = events_of(events, "post_apply")
    assert len(deltas) == 1
    created = deltas[0]["delta"]["created"]
    assert len(created) == 1
    assert created[0]["type"] == "helloworld_Greeting"
    assert created[0]["attrs"]["_text"] == "Hello World"


@pytest.mark.parametrize("case_name", sorted(CASES))
def test_debug_transparency_whole_corpus(case_name, tmp_path):
    (tmp_path / "plain").mkdir()
    (tmp_path / "debug").mkdir()
    plain = run_case(case_name, out_dir=tmp_path / "plain")
    assert plain.ok, plain.problems

    controller = DebugController(port=0, accept_timeout=20)
    client = ScriptedDebugClient("127.0.0.1", controller.port, "continue")
    box = {}

    def drive():
        box["report"] = run_case(case_name, out_dir=tmp_path / "debug",
                                 debug=controller, force_debug=True)
        controller.close()

    thread = threading.Thread(target=drive, daemon=True)
    thread.start()
    client.run()
    thread.join(timeout=120)
    report = box["report"]
    assert report.ok, report.problems


def test_http_serves_ui_assets(tmp_path):
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<html>debugger</html>")
    controller = DebugController(port=0, ui_dir=ui)
    try:
        with urllib.request.urlopen(
                f"http://127.0.0.1:{controller.port}/") as resp:
            assert b"debugger" in resp.read()
        with pytest.raises(urllib.error.HTTPError):
            urllib.request.urlopen(
                f"http://127.0.0.1:{controller.port}/missing.js")
    finally:
        controller.close()


def test_websocket_bridge_speaks_protocol(tmp_path):
    import base64
    import hashlib
    import os

    controller = DebugController(port=0, accept_timeout=20)
    shell = Shell(out_dir=tmp_path, debug=controller, force_debug=True,
                  validate=True)
    box = {}

    def drive():
        box["status"] = shell.run_script(DATA_DIR / "HelloWorld.grs")
        controller.close()

    thread = threading.Thread(target=drive, daemon=True)
    thread.start()

    sock = socket.create_connection(("127.0.0.1", controller.port), timeout=20)
    key = base64.b64encode(os.urandom(16)).decode()
    sock.sendall((f"GET /ws HTTP/1.1\r\nHost: x\r\nUpgrade: websocket\r\n"
                  f"Connection: Upgrade\r\nSec-WebSocket-Key: {key}\r\n"
                  "Sec-WebSocket-Version: 13\r\n\r\n").encode())
    head = b""
    while b"\r\n\r\n" not in head:
        head += sock.recv(4096)
    expect = base64.b64encode(hashlib.sha1(
        (key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()).digest()).decode()
    assert expect in head.decode()

    def ws_send(obj):
        payload = json.dumps(obj).encode()
        mask = os.urandom(4)
        masked = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        sock.sendall(bytes([0x81, 0x80 | len(payload)]) + mask + masked)

    def ws_recv():
        def read_exact(n):
            out = b""
            while len(out) < n:
                chunk = sock.recv(n - len(out))
                if not chunk:
                    raise ConnectionError("closed")
                out += chunk
            return out
        while True:
            header = read_exact(2)
            length = header[1] & 0x7F
            if length == 126:
                length = int.from_bytes(read_exact(2), "big")
            payload = read_exact(length)
            if header[0] & 0x0F == 0x1:
                return json.loads(payload.decode())

    events = []
    try:
        while True:
            event = ws_recv()
            events.append(event)
            if event.get("suspended"):
                ws_send({"command": "continue"})
            if event.get("event") == "sequence_finished":
                break
    finally:
        sock.close()
    thread.join(timeout=60)
    assert box["status"] == 0
    kinds = [e["event"] for e in events]
    assert "match_found" in kinds and kinds[-1] == "sequence_finished"
    assert events[-1]["result"] is True
