"""HTTP + WebSocket front end for hosted sessions.

One UTF-8 JSON SyncMessage per WebSocket frame, fields exactly
{seq, kind, origin, payload}. Broadcasts preserve the server sequence
order on every connection.
"""

from __future__ import annotations

import asyncio
import json
from itertools import count

from fastapi import FastAPI, HTTPException, Request, Response, WebSocket, WebSocketDisconnect

from .service import InvalidDocument, SessionService
from .state import SyncMessage
from ..analytics.heatmap import layer_to_f32, layer_to_png


def _csv_set(raw: str | None) -> frozenset[str] | None:
    if raw is None or raw == "":
        return None
    return frozenset(x for x in raw.split(",") if x)


def create_app(service: SessionService, console_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="study replay server")
    app.state.service = service
    conn_ids = count(1)

    @app.get("/sessions")
    async def list_sessions():
        return service.list_sessions()

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        form = await request.form()
        upload = form.get("config")
        if upload is None:
            raise HTTPException(status_code=400, detail="multipart field 'config' required")
        data = await upload.read() if hasattr(upload, "read") else str(upload).encode()
        try:
            session = service.host(data)
        except InvalidDocument as exc:
            raise HTTPException(status_code=422, detail=exc.report.to_json())
        except (ValueError, KeyError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"id": session.id, "title": session.title, "duration": session.engine.duration}

    def _session(session_id: str):
        try:
            return service.get(session_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")

    @app.get("/sessions/{session_id}/config")
    async def get_config(session_id: str):
        session = _session(session_id)
        return Response(content=session.doc_bytes, media_type="application/json")

    @app.get("/sessions/{session_id}/heatmaps")
    async def list_heatmaps(session_id: str):
        session = _session(session_id)
        return session.layer_names()

    @app.get("/sessions/{session_id}/heatmaps/{name}")
    async def get_heatmap(session_id: str, name: str):
        session = _session(session_id)
        base, dot, ext = name.rpartition(".")
        if dot != "." or ext not in ("f32", "png"):
            raise HTTPException(status_code=400, detail="expected <layer>.f32 or <layer>.png")
        try:
            layer = await asyncio.to_thread(session.layer, base)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        if ext == "f32":
            return Response(content=layer_to_f32(layer), media_type="application/octet-stream")
        return Response(content=layer_to_png(layer), media_type="image/png")

    @app.get("/sessions/{session_id}/events")
    async def get_events(session_id: str, request: Request):
        session = _session(session_id)
        q = request.query_params
        try:
            t_from = int(q["from"]) if "from" in q else 0
            t_to = int(q["to"]) if "to" in q else session.engine.duration
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"bad query parameter: {exc}")
        events = service.query_events(
            session_id, t_from, t_to,
            kinds=_csv_set(q.get("kinds")),
            participants=_csv_set(q.get("participants")),
        )
        return [e.to_json() for e in events]

    @app.get("/sessions/{session_id}/streams/{name}")
    async def get_stream(
        session_id: str,
        name: str,
        request: Request,
    ):
        _session(session_id)
        q = request.query_params
        try:
            t_from = int(q["from"]) if "from" in q else None
            t_to = int(q["to"]) if "to" in q else None
            max_points = int(q.get("max_points", 1000))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=f"bad query parameter: {exc}")
        try:
            payload = service.stream_window(
                session_id, name, t_from=t_from, t_to=t_to,
                max_points=max_points, participant=q.get("participant"),
            )
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return payload

    @app.get("/sessions/{session_id}/layout")
    async def get_layout(session_id: str, exploded: bool = True):
        from ..artifacts import compute_layout

        session = _session(session_id)
        layout = compute_layout(session.doc, exploded=exploded)
        return layout.to_json() if layout else {"exploded": exploded, "entries": []}

    @app.get("/sessions/{session_id}/snapshot")
    async def get_snapshot(session_id: str, t: int = 0, participants: str | None = None):
        session = _session(session_id)
        return session.snapshot_at(t, participants=_csv_set(participants)).to_json()

    @app.websocket("/sessions/{session_id}/sync")
    async def sync_socket(ws: WebSocket, session_id: str):
        try:
            session = service.get(session_id)
        except KeyError:
            await ws.close(code=4404)
            return
        await ws.accept()
        conn_id = next(conn_ids)
        queue: asyncio.Queue = asyncio.Queue()
        # subscribers may live on different event loops (e.g. test harnesses);
        # broadcasts must hop loops thread-safely
        session.subscribers[conn_id] = (asyncio.get_running_loop(), queue)

        async def pump():
            while True:
                msg = await queue.get()
                await ws.send_text(msg.encode())

        sender = asyncio.create_task(pump())
        try:
            # first frame must be hello; reply with the state snapshot
            hello_raw = await ws.receive_text()
            hello = SyncMessage.from_json(json.loads(hello_raw))
            if hello.kind != "hello":
                await ws.send_text(
                    SyncMessage(seq=0, kind="error", origin="server",
                                payload={"reason": "first frame must be hello"}).encode()
                )
                return
            await ws.send_text(service.join(session_id).encode())
            while True:
                raw = await ws.receive_text()
                try:
                    proposal = SyncMessage.from_json(json.loads(raw))
                except (ValueError, json.JSONDecodeError) as exc:
                    await ws.send_text(
                        SyncMessage(seq=0, kind="error", origin="server",
                                    payload={"reason": f"bad frame: {exc}"}).encode()
                    )
                    continue
                applied, rejection = service.apply(session_id, proposal)
                if rejection is not None:
                    await ws.send_text(rejection.encode())
                    continue
                for loop, q in list(session.subscribers.values()):
                    loop.call_soon_threadsafe(q.put_nowait, applied)
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            session.subscribers.pop(conn_id, None)

    if console_dir:
        from pathlib import Path

        from fastapi.staticfiles import StaticFiles

        if Path(console_dir).is_dir():
            app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app
