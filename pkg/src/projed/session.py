"""The editor loop: own the abstract tree and the two identity caches,
expand holes from the abstract grammar, turn user events into ``send``
messages for the transform rules, and publish laid-out scenes.

Events that the engine handles itself (hole menus, text edits, node drags,
edge-type gating) never reach the rules; everything else is reified as a
term and wrapped as ``(send abstract event)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import rewrite
from .langdef import (
    ClauseRef,
    LanguageDef,
    Node,
    Or,
    StrLeaf,
    instantiate_clause,
    instantiate_element,
    site_of_hole,
)
from .matching import identity_from_term, reify_identity
from .rewrite import Fuel, FuelExhausted, NotNormalForm, RewriteError
from .scene import LayoutCache, Menu, Scene, edge_types_between, layout, validate_nf
from .terms import (
    Atom,
    Compound,
    Hole,
    Identity,
    Path,
    Term,
    char_atom,
    find_by_identity,
    fresh_identity,
    int_atom,
    is_string_hole,
    make_compound,
    replace_at_path,
    string_atom,
    subterm_at,
    walk,
)

NAMED_KEYS = ("up", "down", "left", "right", "enter", "backspace")


class SessionError(Exception):
    pass


@dataclass(frozen=True)
class KeyPressed:
    selected: Identity | None
    key: str  # one character, or a named key

    def __post_init__(self):
        if len(self.key) != 1 and self.key not in NAMED_KEYS:
            raise SessionError(f"bad key {self.key!r}")


@dataclass(frozen=True)
class DoubleClick:
    target: Identity


@dataclass(frozen=True)
class NewEdge:
    edge_type: Term
    source: Identity
    target: Identity


@dataclass(frozen=True)
class MenuSelected:
    target: Identity
    message: Term


@dataclass(frozen=True)
class DragNode:
    node: Identity
    x: float
    y: float


@dataclass(frozen=True)
class EditText:
    target: Identity
    text: str


@dataclass(frozen=True)
class EdgeDrag:
    source: Identity
    target: Identity


Event = KeyPressed | DoubleClick | NewEdge | MenuSelected | DragNode | EditText | EdgeDrag


def reify_selection(ident: Identity | None) -> Term:
    return reify_identity(ident) if ident is not None else int_atom(-1)


def reify_key(key: str) -> Atom:
    return char_atom(key) if len(key) == 1 else string_atom(key)


def reify_event(e: Event) -> Term:
    if isinstance(e, KeyPressed):
        return make_compound("key-pressed", None, [reify_selection(e.selected), reify_key(e.key)])
    if isinstance(e, DoubleClick):
        return make_compound("double-click", None, [reify_identity(e.target)])
    if isinstance(e, NewEdge):
        return make_compound("new-edge", None,
                             [e.edge_type, reify_identity(e.source), reify_identity(e.target)])
    raise SessionError(f"{type(e).__name__} is engine-level and has no term form")


@dataclass
class Session:
    language: LanguageDef
    start_clause: str
    abstract: Term
    abstract_cache: dict = field(default_factory=dict)  # Identity -> Path
    layout_cache: LayoutCache = field(default_factory=LayoutCache)
    fuel: Fuel = field(default_factory=Fuel)
    viewport: tuple = (800, 600)
    last_scene: Scene | None = None
    revision: int = 0
    pending_menu: Menu | None = None
    diagnostics: list = field(default_factory=list)
    fuel_failures: int = 0


def new_session(d: LanguageDef, start_clause: str, fuel: Fuel = Fuel(), viewport=(800, 600),
                abstract: Term | None = None) -> Session:
    if abstract is None:
        abstract = instantiate_clause(d, start_clause)
    s = Session(d, start_clause, abstract, fuel=fuel, viewport=viewport)
    rebuild_abstract_cache(s)
    publish(s)
    return s


def rebuild_abstract_cache(s: Session) -> Session:
    cache: dict[Identity, Path] = {}
    for t, path in walk(s.abstract):
        if isinstance(t, (Compound, Hole)) and t.identity not in cache:
            cache[t.identity] = path
    s.abstract_cache = cache
    return s


def publish(s: Session):
    """Reduce the abstract tree, lay it out and attach hole menus."""
    nf = rewrite.reduce(s.language, s.abstract, s.fuel)
    scn = layout(validate_nf(nf), s.layout_cache, s.viewport)
    for p in scn.primitives:
        if p.hole_clause is not None and p.menu is None and not p.hole_clause.startswith("str:"):
            hole = _hole_at(s, p.concrete)
            if hole is not None:
                p.menu = hole_options(s, p.concrete)
    s.last_scene = scn
    s.revision += 1
    return scn


def _hole_at(s: Session, ident: Identity) -> Hole | None:
    path = s.abstract_cache.get(ident)
    if path is None:
        return None
    t = subterm_at(s.abstract, path)
    return t if isinstance(t, Hole) else None


DELETE_LABEL = "delete previous"


def _form_label(form) -> str:
    if isinstance(form, ClauseRef):
        return form.name
    if isinstance(form, Node):
        return form.functor
    if isinstance(form, StrLeaf):
        return "str"
    if isinstance(form, Or):
        return "choice"
    return "item"


def hole_options(s: Session, hole_id: Identity) -> Menu:
    hole = _hole_at(s, hole_id)
    if hole is None:
        raise SessionError(f"identity {hole_id} does not address a hole")
    if is_string_hole(hole):
        return Menu((("edit", string_atom("edit")),))
    site = site_of_hole(s.language, hole)
    if site is None:
        raise SessionError(f"hole has unknown clause position {hole.clause!r}")
    entries = []
    if site.kind == "or":
        alts = site.alternatives()
        # a repeated-choice position inlines the alternatives of a referenced
        # or-clause only through its own hole, so labels come from the forms
        for alt in alts:
            entries.append((_form_label(alt), string_atom(_form_label(alt))))
    elif site.kind == "star":
        for form in site.add_forms():
            entries.append((_form_label(form), string_atom(_form_label(form))))
        path = s.abstract_cache[hole_id]
        if path and path[-1] > site.preceding:
            entries.append((DELETE_LABEL, string_atom(DELETE_LABEL)))
    return Menu(tuple(entries))


def expand_hole(s: Session, hole_id: Identity, choice: str) -> Session:
    hole = _hole_at(s, hole_id)
    if hole is None:
        raise SessionError(f"identity {hole_id} does not address a hole")
    if is_string_hole(hole):
        return s  # the string editor handles its own input
    site = site_of_hole(s.language, hole)
    path = s.abstract_cache[hole_id]
    clause_name = hole.clause.split(":")[1]
    if site.kind == "or":
        for alt in site.alternatives():
            if _form_label(alt) == choice:
                replacement = instantiate_element(s.language, clause_name, alt, frozenset())
                s.abstract = replace_at_path(s.abstract, path, replacement)
                break
        else:
            raise SessionError(f"no alternative {choice!r} here")
    elif site.kind == "star":
        if choice == DELETE_LABEL:
            if not path or path[-1] <= site.preceding:
                raise SessionError("nothing to delete")
            parent = subterm_at(s.abstract, path[:-1])
            kids = list(parent.children)
            del kids[path[-1] - 1]
            s.abstract = replace_at_path(
                s.abstract, path[:-1], Compound(parent.functor, parent.identity, tuple(kids)))
        else:
            for form in site.add_forms():
                if _form_label(form) == choice:
                    new_elem = instantiate_element(s.language, clause_name, form, frozenset())
                    parent = subterm_at(s.abstract, path[:-1]) if path else None
                    if parent is None:
                        raise SessionError("repetition hole has no parent")
                    kids = list(parent.children)
                    kids.insert(path[-1], new_elem)
                    s.abstract = replace_at_path(
                        s.abstract, path[:-1], Compound(parent.functor, parent.identity, tuple(kids)))
                    break
            else:
                raise SessionError(f"no repeatable form {choice!r} here")
    rebuild_abstract_cache(s)
    publish(s)
    return s


def allowed_edge_types(s: Session, source: Identity, target: Identity) -> list[Term]:
    if s.last_scene is None:
        return []
    try:
        labels = edge_types_between(s.last_scene, source, target)
    except KeyError as e:
        raise SessionError(str(e)) from e
    return [make_compound(label, None, []) for label, _, _ in labels]


def _node_abstract_id(s: Session, node: Identity) -> Identity:
    for g in s.last_scene.graphs:
        for n in g.nodes:
            if n.node_id == node or identity_from_term(n.abstract_term) == node:
                ident = identity_from_term(n.abstract_term)
                if ident is None:
                    raise SessionError(f"node {node} carries a non-identity abstract tag")
                return ident
    raise SessionError(f"{node} is not a graph node in the current scene")


def edit_string(s: Session, target: Identity, text: str) -> Session:
    hole = _hole_at(s, target)
    if hole is None or not is_string_hole(hole):
        raise SessionError(f"{target} is not an editable string")
    path = s.abstract_cache[target]
    s.abstract = replace_at_path(s.abstract, path, Hole(hole.identity, hole.clause, string_atom(text)))
    rebuild_abstract_cache(s)
    publish(s)
    return s


def menu_message(s: Session, target: Identity, label: str) -> Term:
    """The message behind a menu entry label, looked up on the current
    scene (or the pending edge-type menu)."""
    if s.pending_menu is not None:
        for lab, msg in s.pending_menu.entries:
            if lab == label:
                return msg
    if s.last_scene is not None:
        for p in s.last_scene.primitives:
            if p.concrete == target and p.menu is not None:
                for lab, msg in p.menu.entries:
                    if lab == label:
                        return msg
    if _hole_at(s, target) is not None:
        return string_atom(label)
    raise SessionError(f"no menu entry {label!r} at {target}")


def menu_reply(s: Session, label: str) -> Session:
    """Answer the pending disambiguation menu (edge-type choices)."""
    if s.pending_menu is None:
        raise SessionError("no menu is open")
    for lab, msg in s.pending_menu.entries:
        if lab == label:
            return dispatch(s, MenuSelected(Identity((int_atom(-1),)), msg))
    raise SessionError(f"no menu entry {label!r}")


def dispatch(s: Session, e: Event) -> Session:
    """Apply one event.  Failures leave the previous state intact and are
    recorded as diagnostics."""
    saved = (s.abstract, s.abstract_cache, s.last_scene, s.revision)
    try:
        return _dispatch(s, e)
    except (RewriteError, NotNormalForm, FuelExhausted, SessionError) as err:
        s.abstract, s.abstract_cache, s.last_scene, s.revision = saved
        if isinstance(err, FuelExhausted) or isinstance(getattr(err, "cause", None), FuelExhausted):
            s.fuel_failures += 1
        s.diagnostics.append(str(err))
        return s


def _dispatch(s: Session, e: Event) -> Session:
    s.pending_menu = None
    if isinstance(e, DragNode):
        s.layout_cache.positions[e.node] = (e.x, e.y)
        publish(s)
        return s
    if isinstance(e, EditText):
        return edit_string(s, e.target, e.text)
    if isinstance(e, EdgeDrag):
        types = allowed_edge_types(s, e.source, e.target)
        if not types:
            return s  # no admissible edge type: the event is never generated
        if len(types) > 1:
            src, tgt = _node_abstract_id(s, e.source), _node_abstract_id(s, e.target)
            entries = tuple(
                (t.functor, reify_event(NewEdge(t, src, tgt))) for t in types
            )
            s.pending_menu = Menu(entries)
            return s
        return _dispatch(s, NewEdge(types[0], _node_abstract_id(s, e.source), _node_abstract_id(s, e.target)))
    if isinstance(e, MenuSelected):
        hole = _hole_at(s, e.target)
        if hole is not None:
            label = e.message.value if isinstance(e.message, Atom) and e.message.kind == "string" else None
            if label is None:
                raise SessionError("hole menu selections carry their label")
            if is_string_hole(hole):
                return s
            return expand_hole(s, e.target, label)
        return _send(s, e.message)
    if isinstance(e, KeyPressed):
        if e.selected is not None and len(e.key) == 1:
            hole = _hole_at(s, e.selected)
            if hole is not None:
                if is_string_hole(hole):
                    current = hole.display.value if hole.display else ""
                    return edit_string(s, e.selected, current + e.key)
                options = [label for label, _ in hole_options(s, e.selected).entries]
                hits = [label for label in options if label.startswith(e.key)]
                if len(hits) == 1:
                    return expand_hole(s, e.selected, hits[0])
        return _send(s, reify_event(e))
    if isinstance(e, (DoubleClick, NewEdge)):
        return _send(s, reify_event(e))
    raise SessionError(f"unknown event {e!r}")


def _send(s: Session, message: Term) -> Session:
    wrapped = make_compound("send", None, [s.abstract, message])
    outcome = rewrite.transform(s.language, wrapped, s.fuel)
    if not outcome.converged:
        raise FuelExhausted(outcome)
    result = outcome.result
    if isinstance(result, Compound) and result.functor == "send" and result.children:
        # no rule consumed the event: drop it, keep the (possibly rewritten) tree
        result = result.children[0]
    s.abstract = result
    rebuild_abstract_cache(s)
    publish(s)
    return s
