"""Live-process serve tests: real uvicorn, real WebSocket, SIGTERM durability."""

import asyncio
import json
import os
import signal
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from drivelab.canonical import save_document
from drivelab.fixtures import build_study_document


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_up(port: int, proc, timeout=30.0) -> None:
    deadline = time.time() + timeout
    while time.time() < deadline:
        if proc.poll() is not None:
            raise RuntimeError(f"server exited early: {proc.returncode}")
        try:
            httpx.get(f"http://127.0.0.1:{port}/sessions", timeout=1.0)
            return
        except httpx.TransportError:
            time.sleep(0.2)
    raise TimeoutError("server did not come up")


@pytest.fixture(scope="module")
def fixture_config(tmp_path_factory):
    path = tmp_path_factory.mktemp("served") / "config.json"
    save_document(build_study_document(), path)
    return path


def _spawn(args, data_dir):
    env = dict(os.environ, AUTOVIS_DATA_DIR=str(data_dir), PYTHONUNBUFFERED="1")
    return subprocess.Popen(
        [sys.executable, "-m", "drivelab.cli", *args],
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )


def test_serve_host_sync_sigterm_restart(fixture_config, tmp_path):
    data_dir = tmp_path / "data"
    port = _free_port()
    proc = _spawn(["serve", "--config", str(fixture_config), "--bind", f"127.0.0.1:{port}"], data_dir)
    try:
        _wait_up(port, proc)
        sessions = httpx.get(f"http://127.0.0.1:{port}/sessions").json()
        assert len(sessions) == 1
        sid = sessions[0]["id"]

        config_bytes = httpx.get(f"http://127.0.0.1:{port}/sessions/{sid}/config").content
        assert config_bytes == fixture_config.read_bytes()

        state = asyncio.run(_drive_sync(port, sid))
        assert state["playback"]["t"] == 42_000
        assert "spot" in {g["label"] for g in state["ghosts"].values()}
    finally:
        proc.send_signal(signal.SIGTERM)
        proc.wait(timeout=15)

    # restart against the same data dir: ledger replay must reproduce state
    port2 = _free_port()
    proc2 = _spawn(["serve", "--bind", f"127.0.0.1:{port2}"], data_dir)
    try:
        _wait_up(port2, proc2)
        sessions = httpx.get(f"http://127.0.0.1:{port2}/sessions").json()
        assert [s["id"] for s in sessions] == [sid]
        snap = asyncio.run(_join_snapshot(port2, sid))
        assert snap["payload"]["state"]["playback"]["t"] == 42_000
        assert snap["payload"]["state"]["annotations"]["a1"]["text"] == "worth a look"
        assert snap["seq"] == 3
    finally:
        proc2.send_signal(signal.SIGTERM)
        proc2.wait(timeout=15)


async def _drive_sync(port: int, sid: str) -> dict:
    import websockets

    uri = f"ws://127.0.0.1:{port}/sessions/{sid}/sync"
    async with websockets.connect(uri) as ws:
        await ws.send(json.dumps({"seq": 0, "kind": "hello", "origin": "ana", "payload": {}}))
        snap = json.loads(await ws.recv())
        assert snap["kind"] == "snapshot"

        async def apply(msg_kind, **payload):
            await ws.send(json.dumps({"seq": 0, "kind": msg_kind, "origin": "ana", "payload": payload}))
            return json.loads(await ws.recv())

        a1 = await apply("create_annotation", id="a1", kind="comment", text="worth a look", author="ana")
        assert a1["seq"] == 1
        g1 = await apply("create_ghost", id="g1", t=42_000, camera={"position": [1.0, 2.0, 3.0]}, label="spot")
        assert g1["seq"] == 2
        sel = await apply("select_ghost", id="g1")
        assert sel["kind"] == "set_playback" and sel["payload"]["t"] == 42_000

        await ws.send(json.dumps({"seq": 0, "kind": "hello", "origin": "ana", "payload": {}}))
        # hello mid-stream is invalid as a proposal -> error, no seq
        err = json.loads(await ws.recv())
        assert err["kind"] == "error"

    async with websockets.connect(uri) as ws2:
        await ws2.send(json.dumps({"seq": 0, "kind": "hello", "origin": "ben", "payload": {}}))
        snap = json.loads(await ws2.recv())
        return snap["payload"]["state"]


async def _join_snapshot(port: int, sid: str) -> dict:
    import websockets

    uri = f"ws://127.0.0.1:{port}/sessions/{sid}/sync"
    async with websockets.connect(uri) as ws:
        await ws.send(json.dumps({"seq": 0, "kind": "hello", "origin": "late", "payload": {}}))
        return json.loads(await ws.recv())


def test_port_in_use_exits_2(fixture_config, tmp_path):
    port = _free_port()
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", port))
    blocker.listen(1)
    try:
        proc = _spawn(["serve", "--config", str(fixture_config), "--bind", f"127.0.0.1:{port}"], tmp_path / "d2")
        rc = proc.wait(timeout=60)
        assert rc == 2, proc.stdout.read()
    finally:
        blocker.close()
