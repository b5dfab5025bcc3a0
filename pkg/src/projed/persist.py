"""Canonical XML save and load for terms and sessions.

Output is UTF-8, LF line endings, two-space indentation, attributes in a
fixed order, so saving the same value twice gives byte-identical documents.
Identity parts are joined with commas; string parts that could be mistaken
for other kinds (or that contain a comma) are written in double quotes with
backslash escapes.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET

from .session import Session, publish, rebuild_abstract_cache
from .terms import (
    Atom,
    Compound,
    Hole,
    Identity,
    Term,
    advance_identity_counter,
    bool_atom,
    char_atom,
    int_atom,
    max_int_id_part,
    string_atom,
)


class PersistError(Exception):
    pass


_INT_RE = re.compile(r"^-?[0-9]+$")
_PLAIN_STRING_RE = re.compile(r'^(?!-?[0-9]+$)(?!#)[^,"\\]+$')


def _encode_part(a: Atom) -> str:
    if a.kind == "integer":
        return str(a.value)
    if a.kind == "boolean":
        return "#t" if a.value else "#f"
    if a.kind == "character":
        return f"#\\{a.value}"
    if _PLAIN_STRING_RE.match(a.value):
        return a.value
    return '"' + a.value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _decode_part(s: str) -> Atom:
    if _INT_RE.match(s):
        return int_atom(int(s))
    if s in ("#t", "#f"):
        return bool_atom(s == "#t")
    if s.startswith("#\\") and len(s) == 3:
        return char_atom(s[2])
    if s.startswith('"'):
        out, i = [], 1
        while i < len(s) - 1:
            c = s[i]
            if c == "\\" and i + 1 < len(s) - 1:
                i += 1
                c = s[i]
            out.append(c)
            i += 1
        return string_atom("".join(out))
    return string_atom(s)


def encode_identity(ident: Identity) -> str:
    return ",".join(_encode_part(p) for p in ident.parts)


def decode_identity(s: str) -> Identity:
    parts, buf, in_str, esc = [], "", False, False
    for c in s:
        if esc:
            buf += c
            esc = False
        elif not in_str and buf == "#\\":
            buf += c  # character-literal payload, even a comma or quote
        elif c == "\\" and in_str:
            buf += c
            esc = True
        elif c == '"':
            buf += c
            in_str = not in_str
        elif c == "," and not in_str:
            parts.append(buf)
            buf = ""
        else:
            buf += c
    parts.append(buf)
    if parts == [""]:
        raise PersistError("empty identity")
    return Identity(tuple(_decode_part(p) for p in parts))


_ATOM_TAGS = {"string": "str", "integer": "int", "boolean": "bool", "character": "char"}
_TAG_KINDS = {v: k for k, v in _ATOM_TAGS.items()}


def _term_element(t: Term) -> ET.Element:
    if isinstance(t, Atom):
        el = ET.Element(_ATOM_TAGS[t.kind])
        el.set("v", t.text() if t.kind != "string" else t.value)
        return el
    if isinstance(t, Hole):
        el = ET.Element("hole")
        el.set("id", encode_identity(t.identity))
        el.set("clause", t.clause)
        if t.display is not None:
            el.append(_term_element(t.display))
        return el
    el = ET.Element("term")
    el.set("functor", t.functor)
    el.set("id", encode_identity(t.identity))
    for c in t.children:
        el.append(_term_element(c))
    return el


def _get(el: ET.Element, name: str):
    v = el.get(name)
    return _dec_chars(v) if v is not None else None


def _term_from_element(el: ET.Element, where="/") -> Term:
    tag = el.tag
    if tag in _TAG_KINDS:
        kind = _TAG_KINDS[tag]
        v = _get(el, "v")
        if v is None:
            raise PersistError(f"{where}: <{tag}> needs a v attribute")
        if kind == "integer":
            return int_atom(int(v))
        if kind == "boolean":
            return bool_atom(v == "#t")
        if kind == "character":
            if len(v) != 1:
                raise PersistError(f"{where}: bad character {v!r}")
            return char_atom(v)
        return string_atom(v)
    if tag == "hole":
        ident = decode_identity(_get(el, "id") or "")
        clause = _get(el, "clause")
        if clause is None:
            raise PersistError(f"{where}: <hole> needs a clause")
        display = None
        kids = list(el)
        if kids:
            d = _term_from_element(kids[0], where + "hole/")
            if not isinstance(d, Atom):
                raise PersistError(f"{where}: hole display must be an atom")
            display = d
        return Hole(ident, clause, display)
    if tag == "term":
        functor = _get(el, "functor")
        if not functor:
            raise PersistError(f"{where}: <term> needs a functor")
        ident = decode_identity(_get(el, "id") or "")
        kids = tuple(_term_from_element(c, f"{where}{functor}/") for c in el)
        return Compound(functor, ident, kids)
    raise PersistError(f"{where}: unknown element <{tag}>")


def _serialize(root: ET.Element) -> str:
    lines = ['<?xml version="1.0" encoding="UTF-8"?>']

    def emit(el: ET.Element, depth: int):
        pad = "  " * depth
        attrs = "".join(f' {k}="{_attr_escape(v)}"' for k, v in el.attrib.items())
        kids = list(el)
        if kids:
            lines.append(f"{pad}<{el.tag}{attrs}>")
            for k in kids:
                emit(k, depth + 1)
            lines.append(f"{pad}</{el.tag}>")
        else:
            lines.append(f"{pad}<{el.tag}{attrs}/>")

    emit(root, 0)
    return "\n".join(lines) + "\n"


def _xml_valid(c: str) -> bool:
    o = ord(c)
    return o in (0x9, 0xA, 0xD) or 0x20 <= o <= 0xD7FF or 0xE000 <= o <= 0xFFFD or 0x10000 <= o <= 0x10FFFF


def _enc_chars(v: str) -> str:
    # characters XML 1.0 cannot carry at all are backslash-escaped
    out = []
    for c in v:
        if c == "\\":
            out.append("\\\\")
        elif _xml_valid(c):
            out.append(c)
        else:
            out.append(f"\\u{ord(c):06x}")
    return "".join(out)


def _dec_chars(v: str) -> str:
    out, i = [], 0
    while i < len(v):
        c = v[i]
        if c == "\\" and i + 1 < len(v):
            if v[i + 1] == "\\":
                out.append("\\")
                i += 2
                continue
            if v[i + 1] == "u" and i + 8 <= len(v):
                out.append(chr(int(v[i + 2:i + 8], 16)))
                i += 8
                continue
        out.append(c)
        i += 1
    return "".join(out)


def _attr_escape(v: str) -> str:
    v = _enc_chars(v)
    return (v.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
            .replace('"', "&quot;").replace("\n", "&#10;").replace("\t", "&#9;")
            .replace("\r", "&#13;"))


def save_term(t: Term) -> str:
    return _serialize(_term_element(t))


def load_term(doc: str) -> Term:
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as e:
        raise PersistError(f"bad XML: {e}") from e
    t = _term_from_element(root)
    advance_identity_counter(max_int_id_part(t))
    return t


def save_session(s: Session) -> str:
    root = ET.Element("session")
    root.set("language", s.language.name)
    root.set("start", s.start_clause)
    abstract = ET.SubElement(root, "abstract")
    abstract.append(_term_element(s.abstract))
    lay = ET.SubElement(root, "layout")
    for ident in sorted(s.layout_cache.positions, key=encode_identity):
        x, y = s.layout_cache.positions[ident]
        pos = ET.SubElement(lay, "position")
        pos.set("id", encode_identity(ident))
        pos.set("x", _num(x))
        pos.set("y", _num(y))
    return _serialize(root)


def _num(v) -> str:
    if isinstance(v, float) and v.is_integer():
        return str(int(v))
    return str(v)


def _parse_num(s: str) -> float:
    return float(s)


def load_session(doc: str, d) -> Session:
    try:
        root = ET.fromstring(doc)
    except ET.ParseError as e:
        raise PersistError(f"bad XML: {e}") from e
    if root.tag != "session":
        raise PersistError(f"expected <session>, found <{root.tag}>")
    lang_name = root.get("language")
    if lang_name != d.name:
        raise PersistError(f"session was saved for language {lang_name!r}, not {d.name!r}")
    abstract_el = root.find("abstract")
    if abstract_el is None or not len(abstract_el):
        raise PersistError("session has no abstract tree")
    term = _term_from_element(abstract_el[0])
    advance_identity_counter(max_int_id_part(term))
    s = Session(d, root.get("start") or "", term)
    lay = root.find("layout")
    if lay is not None:
        for pos in lay.findall("position"):
            s.layout_cache.positions[decode_identity(_get(pos, "id") or "")] = (
                _parse_num(pos.get("x", "0")), _parse_num(pos.get("y", "0")))
    rebuild_abstract_cache(s)
    publish(s)
    return s
