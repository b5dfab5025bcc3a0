"""Command-line front door: check language definitions, replay event
scripts headlessly, render saved sessions, and serve the editor.

Exit codes: 0 ok, 1 language or semantic error, 2 I/O error, 3 fuel
exhausted.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import persist, session as sess
from .langdef import LangError, load_language_file, validate_language
from .rewrite import DEFAULT_FUEL, Fuel
from .scene import render_svg, render_text
from .sexpr import ReadError
from .terms import reset_identity_counter

OK, SEMANTIC, IO, FUEL = 0, 1, 2, 3


def _fuel_default() -> int:
    env = os.environ.get("PROJED_FUEL")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return DEFAULT_FUEL


def _viewport(size: str):
    w, _, h = size.partition("x")
    return int(w), int(h)


def _load_language(path, err):
    try:
        return load_language_file(path), OK
    except OSError as e:
        print(f"{path}: {e.strerror or e}", file=err)
        return None, IO
    except (ReadError, LangError) as e:
        print(f"{path}: {e}", file=err)
        return None, SEMANTIC


def cmd_check(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    d, status = _load_language(args.language, err)
    if d is None:
        return status
    diags = validate_language(d)
    for diag in diags:
        print(f"{args.language}:{diag}", file=err)
    if diags:
        return SEMANTIC
    print(f"{args.language}: {d.name} ok "
          f"({len(d.clauses)} clauses, {len(d.transform_rules)} transform, {len(d.reduce_rules)} reduce)",
          file=out)
    return OK


class ScriptError(Exception):
    pass


def parse_script(text: str):
    """One event per line; identities are comma-joined parts; # comments."""
    events = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        op, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            events.append((lineno, _parse_event(op, rest)))
        except (ScriptError, persist.PersistError, ValueError) as e:
            raise ScriptError(f"line {lineno}: {e}") from e
    return events


def _ident(tok: str):
    return persist.decode_identity(tok)


def _parse_event(op: str, rest: str):
    if op == "snapshot":
        if not rest:
            raise ScriptError("snapshot needs a name")
        return ("snapshot", rest)
    if op == "key":
        sel, _, key = rest.partition(" ")
        key = key.strip()
        if not key:
            raise ScriptError("key needs a selection and a key")
        selected = None if sel == "-1" else _ident(sel)
        return ("event", sess.KeyPressed(selected, key))
    if op == "dblclick":
        return ("event", sess.DoubleClick(_ident(rest)))
    if op == "edge":
        parts = rest.split()
        if len(parts) == 2:
            return ("event", sess.EdgeDrag(_ident(parts[0]), _ident(parts[1])))
        if len(parts) == 3:
            return ("edge-typed", (_ident(parts[0]), _ident(parts[1]), parts[2]))
        raise ScriptError("edge needs source, target and an optional type")
    if op == "menu":
        ident, _, label = rest.partition(" ")
        if not label:
            raise ScriptError("menu needs a target and a label")
        return ("menu", (_ident(ident), label))
    if op == "drag":
        ident, x, y = rest.split()
        return ("event", sess.DragNode(_ident(ident), float(x), float(y)))
    if op == "edit":
        ident, _, text = rest.partition(" ")
        return ("event", sess.EditText(_ident(ident), text))
    raise ScriptError(f"unknown event {op!r}")


def event_to_script(event, label: str | None = None) -> str | None:
    """Inverse of _parse_event for the events a client can send; returns
    None for events with no script form."""
    enc = persist.encode_identity
    if isinstance(event, sess.KeyPressed):
        sel = enc(event.selected) if event.selected is not None else "-1"
        return f"key {sel} {event.key}"
    if isinstance(event, sess.DoubleClick):
        return f"dblclick {enc(event.target)}"
    if isinstance(event, sess.EdgeDrag):
        return f"edge {enc(event.source)} {enc(event.target)}"
    if isinstance(event, sess.DragNode):
        return f"drag {enc(event.node)} {_num(event.x)} {_num(event.y)}"
    if isinstance(event, sess.EditText):
        return f"edit {enc(event.target)} {event.text}"
    if isinstance(event, sess.MenuSelected) and label is not None:
        return f"menu {enc(event.target)} {label}"
    return None


def _num(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


def _snapshot(s, out_dir: Path, name: str):
    (out_dir / f"{name}.svg").write_text(render_svg(s.last_scene), encoding="utf-8")
    (out_dir / f"{name}.txt").write_text(render_text(s.last_scene), encoding="utf-8")
    (out_dir / f"{name}.pxml").write_text(persist.save_session(s), encoding="utf-8")


def _typed_edge(s, src, tgt, type_label):
    from .terms import make_compound

    try:
        src_abs = sess._node_abstract_id(s, src)
        tgt_abs = sess._node_abstract_id(s, tgt)
    except sess.SessionError:
        src_abs, tgt_abs = src, tgt
    return sess.NewEdge(make_compound(type_label, None, []), src_abs, tgt_abs)


def cmd_run(args, out=None, err=None) -> int:
    err = err or sys.stderr
    reset_identity_counter()
    d, status = _load_language(args.language, err)
    if d is None:
        return status
    try:
        script = parse_script(Path(args.script).read_text(encoding="utf-8"))
    except OSError as e:
        print(f"{args.script}: {e.strerror or e}", file=err)
        return IO
    except ScriptError as e:
        print(f"{args.script}: {e}", file=err)
        return SEMANTIC
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    fuel = Fuel(args.fuel)
    viewport = _viewport(args.viewport)
    try:
        if args.load:
            s = persist.load_session(Path(args.load).read_text(encoding="utf-8"), d)
            s.fuel, s.viewport = fuel, viewport
        else:
            s = sess.new_session(d, args.start, fuel=fuel, viewport=viewport)
    except OSError as e:
        print(f"{args.load}: {e.strerror or e}", file=err)
        return IO
    except Exception as e:
        print(f"cannot start session: {e}", file=err)
        return SEMANTIC
    replay(s, script, out_dir, err=err, source=args.script)
    return FUEL if s.fuel_failures else OK


def replay(s, script, out_dir: Path | None, err=None, source="script"):
    """Apply parsed script entries to a session, snapshotting on demand and
    once more at the end."""
    err = err or sys.stderr
    seen_diags = 0
    for lineno, (kind, payload) in script:
        if kind == "snapshot":
            if out_dir is not None:
                _snapshot(s, out_dir, payload)
            continue
        if kind == "menu":
            ident, label = payload
            try:
                message = sess.menu_message(s, ident, label)
            except sess.SessionError as e:
                print(f"{source}:{lineno}: {e}", file=err)
                continue
            event = sess.MenuSelected(ident, message)
        elif kind == "edge-typed":
            event = _typed_edge(s, *payload)
        else:
            event = payload
        sess.dispatch(s, event)
        for diag in s.diagnostics[seen_diags:]:
            print(f"{source}:{lineno}: {diag}", file=err)
        seen_diags = len(s.diagnostics)
    if out_dir is not None:
        _snapshot(s, out_dir, "final")
    return s


def cmd_render(args, out=None, err=None) -> int:
    err = err or sys.stderr
    d, status = _load_language(args.language, err)
    if d is None:
        return status
    try:
        doc = Path(args.session).read_text(encoding="utf-8")
    except OSError as e:
        print(f"{args.session}: {e.strerror or e}", file=err)
        return IO
    try:
        s = persist.load_session(doc, d)
    except Exception as e:
        print(f"{args.session}: {e}", file=err)
        return SEMANTIC
    Path(args.out_svg).write_text(render_svg(s.last_scene), encoding="utf-8")
    return OK


def cmd_serve(args, out=None, err=None) -> int:
    err = err or sys.stderr
    reset_identity_counter()
    d, status = _load_language(args.language, err)
    if d is None:
        return status
    diags = validate_language(d)
    if diags:
        for diag in diags:
            print(f"{args.language}:{diag}", file=err)
        return SEMANTIC
    try:
        s = sess.new_session(d, args.start, fuel=Fuel(args.fuel), viewport=_viewport(args.viewport))
    except Exception as e:
        print(f"cannot start session: {e}", file=err)
        return SEMANTIC
    from .server import create_app

    import uvicorn

    app = create_app(s, record_path=args.record)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as e:
        return IO if e.code else OK
    except OSError as e:
        print(f"cannot serve on port {args.port}: {e}", file=err)
        return IO
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="projed", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="validate a language definition")
    c.add_argument("language")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="replay an event script headlessly")
    r.add_argument("language")
    r.add_argument("start", help="starting abstract clause")
    r.add_argument("script")
    r.add_argument("--out", default="out", help="snapshot directory")
    r.add_argument("--fuel", type=int, default=_fuel_default())
    r.add_argument("--viewport", default="800x600")
    r.add_argument("--load", help="start from a saved .pxml session")
    r.set_defaults(func=cmd_run)

    n = sub.add_parser("render", help="render a saved session to SVG")
    n.add_argument("session")
    n.add_argument("language")
    n.add_argument("out_svg")
    n.set_defaults(func=cmd_render)

    v = sub.add_parser("serve", help="serve the editor over the wire protocol")
    v.add_argument("language")
    v.add_argument("start")
    v.add_argument("--port", type=int, default=7155)
    v.add_argument("--host", default="127.0.0.1")
    v.add_argument("--fuel", type=int, default=_fuel_default())
    v.add_argument("--viewport", default="800x600")
    v.add_argument("--record", help="append accepted events to a replayable script file")
    v.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
