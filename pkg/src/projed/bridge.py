"""Wire protocol between the session engine and UI clients (JSON, v1).

The server pushes full scenes with a monotonically increasing revision
number; clients send events stamped with the revision they were generated
against.  Identities travel as their canonical comma-joined encoding and
terms as small nested objects.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from .persist import decode_identity, encode_identity
from .scene import Menu, Scene
from .session import (
    DoubleClick,
    DragNode,
    EdgeDrag,
    EditText,
    Event,
    KeyPressed,
    MenuSelected,
    NewEdge,
)
from .terms import Atom, Compound, Hole, Term, string_atom

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7155


class ProtocolError(Exception):
    pass


# ---------------------------------------------------------------------------
# Term codec

def term_to_json(t: Term):
    if isinstance(t, Atom):
        return {"atom": t.kind, "v": t.value}
    if isinstance(t, Hole):
        out = {"hole": encode_identity(t.identity), "clause": t.clause}
        if t.display is not None:
            out["text"] = t.display.value
        return out
    return {
        "f": t.functor,
        "id": encode_identity(t.identity),
        "ch": [term_to_json(c) for c in t.children],
    }


def term_from_json(obj) -> Term:
    if not isinstance(obj, dict):
        raise ProtocolError(f"bad term: {obj!r}")
    if "atom" in obj:
        return Atom(obj["atom"], obj["v"])
    if "hole" in obj:
        display = string_atom(obj["text"]) if "text" in obj else None
        return Hole(decode_identity(obj["hole"]), obj.get("clause", "or:?"), display)
    if "f" in obj:
        return Compound(obj["f"], decode_identity(obj["id"]),
                        tuple(term_from_json(c) for c in obj.get("ch", [])))
    raise ProtocolError(f"bad term: {obj!r}")


# ---------------------------------------------------------------------------
# Server -> client

class MenuEntryModel(BaseModel):
    label: str
    message: dict


class PrimitiveModel(BaseModel):
    kind: str
    x: float
    y: float
    w: float
    h: float
    text: Optional[str] = None
    size: Optional[float] = None
    points: list = Field(default_factory=list)
    color: Optional[str] = None
    filled: bool = False
    stroke: Optional[float] = None
    concrete: Optional[str] = None
    abstract: Optional[str] = None
    menu: Optional[list[MenuEntryModel]] = None
    selectable: bool = False
    editable: bool = False
    hole_clause: Optional[str] = None
    node_id: Optional[str] = None
    path: Optional[str] = None


class NodeModel(BaseModel):
    node_id: str
    node_type: str
    abstract: dict
    x: float
    y: float
    w: float
    h: float


class GraphModel(BaseModel):
    edge_types: list[list[str]]
    nodes: list[NodeModel]


class SceneMessage(BaseModel):
    v: Literal[1] = 1
    type: Literal["scene"] = "scene"
    revision: int
    width: float
    height: float
    primitives: list[PrimitiveModel]
    graphs: list[GraphModel] = Field(default_factory=list)


class DiagnosticMessage(BaseModel):
    v: Literal[1] = 1
    type: Literal["diagnostic"] = "diagnostic"
    text: str
    path: Optional[str] = None


class MenuRequestMessage(BaseModel):
    v: Literal[1] = 1
    type: Literal["menu-request"] = "menu-request"
    revision: int
    choices: list[MenuEntryModel]


ServerMessage = Union[SceneMessage, DiagnosticMessage, MenuRequestMessage]


def _menu_model(menu: Menu) -> list[MenuEntryModel]:
    return [MenuEntryModel(label=label, message=term_to_json(msg)) for label, msg in menu.entries]


def scene_message(scene: Scene, revision: int) -> SceneMessage:
    prims = []
    for p in scene.primitives:
        prims.append(PrimitiveModel(
            kind=p.kind, x=p.x, y=p.y, w=p.w, h=p.h, text=p.text, size=p.size,
            points=[list(pt) for pt in p.points], color=p.color, filled=p.filled,
            stroke=p.stroke,
            concrete=encode_identity(p.concrete) if p.concrete else None,
            abstract=encode_identity(p.abstract) if p.abstract else None,
            menu=_menu_model(p.menu) if p.menu else None,
            selectable=p.selectable, editable=p.editable,
            hole_clause=p.hole_clause,
            node_id=encode_identity(p.node_id) if p.node_id else None,
            path=p.path))
    graphs = []
    for g in scene.graphs:
        graphs.append(GraphModel(
            edge_types=[list(et) for et in g.edge_types],
            nodes=[NodeModel(node_id=encode_identity(n.node_id), node_type=n.node_type,
                             abstract=term_to_json(n.abstract_term),
                             x=n.x, y=n.y, w=n.w, h=n.h) for n in g.nodes]))
    return SceneMessage(revision=revision, width=scene.width, height=scene.height,
                        primitives=prims, graphs=graphs)


def encode_scene(scene: Scene, revision: int) -> bytes:
    return scene_message(scene, revision).model_dump_json(exclude_none=True).encode()


def menu_request(menu: Menu, revision: int) -> MenuRequestMessage:
    return MenuRequestMessage(revision=revision, choices=_menu_model(menu))


def diagnostic(text: str, path: str | None = None) -> DiagnosticMessage:
    return DiagnosticMessage(text=text, path=path)


# ---------------------------------------------------------------------------
# Client -> server

class EventModel(BaseModel):
    kind: Literal["key", "dblclick", "new-edge", "menu", "drag", "edit", "edge-drag"]
    selected: Optional[str] = None
    key: Optional[str] = None
    target: Optional[str] = None
    message: Optional[dict] = None
    label: Optional[str] = None  # menu entry label, for replay recording
    edge_type: Optional[dict] = None
    source: Optional[str] = None
    x: Optional[float] = None
    y: Optional[float] = None
    text: Optional[str] = None
    node: Optional[str] = None


class EventMessage(BaseModel):
    v: Literal[1] = 1
    type: Literal["event"] = "event"
    revision: int
    event: EventModel


class MenuReplyMessage(BaseModel):
    v: Literal[1] = 1
    type: Literal["menu-reply"] = "menu-reply"
    revision: int = 0
    label: str


class HelloMessage(BaseModel):
    v: Literal[1] = 1
    type: Literal["hello"] = "hello"
    version: int = PROTOCOL_VERSION


def _ident(s: str | None, what: str):
    if s is None:
        raise ProtocolError(f"event needs {what}")
    return decode_identity(s)


def event_from_model(m: EventModel) -> Event:
    if m.kind == "key":
        if not m.key:
            raise ProtocolError("key event needs a key")
        selected = decode_identity(m.selected) if m.selected else None
        return KeyPressed(selected, m.key)
    if m.kind == "dblclick":
        return DoubleClick(_ident(m.target, "a target"))
    if m.kind == "new-edge":
        if m.edge_type is None:
            raise ProtocolError("new-edge needs an edge type")
        return NewEdge(term_from_json(m.edge_type), _ident(m.source, "a source"), _ident(m.target, "a target"))
    if m.kind == "menu":
        if m.message is None:
            raise ProtocolError("menu event needs a message")
        return MenuSelected(_ident(m.target, "a target"), term_from_json(m.message))
    if m.kind == "drag":
        if m.x is None or m.y is None:
            raise ProtocolError("drag needs x and y")
        return DragNode(_ident(m.node, "a node"), m.x, m.y)
    if m.kind == "edit":
        return EditText(_ident(m.target, "a target"), m.text or "")
    if m.kind == "edge-drag":
        return EdgeDrag(_ident(m.source, "a source"), _ident(m.target, "a target"))
    raise ProtocolError(f"unknown event kind {m.kind!r}")


def event_to_model(e: Event) -> EventModel:
    if isinstance(e, KeyPressed):
        return EventModel(kind="key", selected=encode_identity(e.selected) if e.selected else None, key=e.key)
    if isinstance(e, DoubleClick):
        return EventModel(kind="dblclick", target=encode_identity(e.target))
    if isinstance(e, NewEdge):
        return EventModel(kind="new-edge", edge_type=term_to_json(e.edge_type),
                          source=encode_identity(e.source), target=encode_identity(e.target))
    if isinstance(e, MenuSelected):
        return EventModel(kind="menu", target=encode_identity(e.target), message=term_to_json(e.message))
    if isinstance(e, DragNode):
        return EventModel(kind="drag", node=encode_identity(e.node), x=e.x, y=e.y)
    if isinstance(e, EditText):
        return EventModel(kind="edit", target=encode_identity(e.target), text=e.text)
    if isinstance(e, EdgeDrag):
        return EventModel(kind="edge-drag", source=encode_identity(e.source), target=encode_identity(e.target))
    raise ProtocolError(f"cannot encode {e!r}")


class ClientEnvelope(BaseModel):
    v: Literal[1] = 1
    type: Literal["hello", "event", "menu-reply"]
    version: Optional[int] = None
    revision: Optional[int] = None
    event: Optional[EventModel] = None
    label: Optional[str] = None


def decode_client_message(data: bytes | str) -> HelloMessage | EventMessage | MenuReplyMessage:
    try:
        env = ClientEnvelope.model_validate_json(data)
    except ValidationError as e:
        raise ProtocolError(f"malformed message: {e.errors()[0]['msg']}") from e
    if env.type == "hello":
        return HelloMessage(version=env.version or PROTOCOL_VERSION)
    if env.type == "event":
        if env.event is None or env.revision is None:
            raise ProtocolError("event messages need revision and event")
        return EventMessage(revision=env.revision, event=env.event)
    if env.label is None:
        raise ProtocolError("menu-reply needs a label")
    return MenuReplyMessage(revision=env.revision or 0, label=env.label)


def decode_event(data: bytes | str) -> tuple[Event, int]:
    msg = decode_client_message(data)
    if not isinstance(msg, EventMessage):
        raise ProtocolError(f"expected an event message, got {msg.type}")
    return event_from_model(msg.event), msg.revision
