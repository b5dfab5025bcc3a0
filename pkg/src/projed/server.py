"""FastAPI service hosting one editor session over a WebSocket.

All clients of the socket endpoint see the same session: events are
serialized through a lock and every accepted event is answered with a
scene broadcast (or a diagnostic to the sender only).
"""

from __future__ import annotations

import asyncio
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import bridge
from .session import DragNode, Session, SessionError, dispatch, menu_reply

FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>projed</title></head>
<body><h1>projed</h1>
<p>The editor UI bundle is not installed; the wire protocol is live on
<code>/ws</code>.</p></body></html>
"""


def _frontend_dist() -> Path | None:
    here = Path(__file__).resolve()
    for base in [here.parent.parent.parent.parent, here.parent.parent.parent]:
        dist = base / "frontend" / "dist"
        if (dist / "index.html").exists():
            return dist
    return None


def create_app(session: Session, record_path=None) -> FastAPI:
    app = FastAPI(title="projed", version="0.1.0")
    clients: set[WebSocket] = set()
    lock = asyncio.Lock()
    app.state.session = session

    def record(event, label=None):
        if record_path is None:
            return
        from .cli import event_to_script
        from .session import MenuSelected
        from .terms import Atom

        if (label is None and isinstance(event, MenuSelected)
                and isinstance(event.message, Atom) and event.message.kind == "string"):
            label = event.message.value
        line = event_to_script(event, label)
        if line is not None:
            with open(record_path, "a", encoding="utf-8") as f:
                f.write(line + "\n")

    async def broadcast(payload: str):
        dead = []
        for ws in clients:
            try:
                await ws.send_text(payload)
            except Exception:
                dead.append(ws)
        for ws in dead:
            clients.discard(ws)

    @app.get("/health")
    async def health():
        return JSONResponse({"language": session.language.name, "revision": session.revision})

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        clients.add(ws)
        try:
            await ws.send_text(bridge.encode_scene(session.last_scene, session.revision).decode())
            while True:
                data = await ws.receive_text()
                async with lock:
                    await _handle(ws, data)
        except WebSocketDisconnect:
            pass
        finally:
            clients.discard(ws)

    async def _handle(ws: WebSocket, data: str):
        try:
            msg = bridge.decode_client_message(data)
        except bridge.ProtocolError as e:
            await ws.send_text(bridge.diagnostic(str(e)).model_dump_json())
            return
        if isinstance(msg, bridge.HelloMessage):
            await ws.send_text(bridge.encode_scene(session.last_scene, session.revision).decode())
            return
        if isinstance(msg, bridge.MenuReplyMessage):
            try:
                menu_reply(session, msg.label)
            except SessionError as e:
                await ws.send_text(bridge.diagnostic(str(e)).model_dump_json())
                return
            if record_path is not None:
                with open(record_path, "a", encoding="utf-8") as f:
                    f.write(f"menu -1 {msg.label}\n")
            await broadcast(bridge.encode_scene(session.last_scene, session.revision).decode())
            return
        try:
            event = bridge.event_from_model(msg.event)
        except Exception as e:
            await ws.send_text(bridge.diagnostic(str(e)).model_dump_json())
            return
        if msg.revision < session.revision and not isinstance(event, DragNode):
            await ws.send_text(bridge.diagnostic(
                f"stale event (revision {msg.revision} < {session.revision})").model_dump_json())
            return
        record(event, msg.event.label)
        before = len(session.diagnostics)
        dispatch(session, event)
        for diag in session.diagnostics[before:]:
            await ws.send_text(bridge.diagnostic(diag).model_dump_json())
        if session.pending_menu is not None:
            await ws.send_text(bridge.menu_request(session.pending_menu, session.revision).model_dump_json())
        await broadcast(bridge.encode_scene(session.last_scene, session.revision).decode())

    dist = _frontend_dist()
    if dist is not None:
        app.mount("/", StaticFiles(directory=dist, html=True), name="ui")
    else:
        @app.get("/")
        async def index():
            return HTMLResponse(FALLBACK_PAGE)

    return app
