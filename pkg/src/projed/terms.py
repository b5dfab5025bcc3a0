"""Identity-bearing tree values: the substrate every other module works on.

A term is an atom (string/integer/boolean/character), a compound with a
functor, an identity and children, or a hole standing for an unmade user
choice.  Identities are sequences of atoms; engine-coined identities are
single integer parts drawn from a process-wide counter.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field


class TermError(Exception):
    pass


ATOM_KINDS = ("string", "integer", "boolean", "character")


@dataclass(frozen=True)
class Atom:
    kind: str
    value: object

    def __post_init__(self):
        if self.kind not in ATOM_KINDS:
            raise TermError(f"bad atom kind {self.kind!r}")
        if self.kind == "character" and (not isinstance(self.value, str) or len(self.value) != 1):
            raise TermError(f"character atom must hold exactly one character: {self.value!r}")

    def text(self) -> str:
        """Canonical display text for this atom."""
        if self.kind == "boolean":
            return "#t" if self.value else "#f"
        return str(self.value)

    def __repr__(self):
        if self.kind == "string":
            return repr(self.value)
        if self.kind == "character":
            return f"#\\{self.value}"
        return self.text()


def string_atom(s: str) -> Atom:
    return Atom("string", s)


def int_atom(n: int) -> Atom:
    return Atom("integer", int(n))


def bool_atom(b: bool) -> Atom:
    return Atom("boolean", bool(b))


def char_atom(c: str) -> Atom:
    return Atom("character", c)


@dataclass(frozen=True)
class Identity:
    parts: tuple[Atom, ...]

    def __post_init__(self):
        if not self.parts:
            raise TermError("identity must have at least one part")

    def __repr__(self):
        return "@(" + " ".join(repr(p) for p in self.parts) + ")"


@dataclass(frozen=True)
class Compound:
    functor: str
    identity: Identity
    children: tuple["Term", ...] = ()

    def __post_init__(self):
        if not self.functor:
            raise TermError("functor names must be non-empty")

    def __repr__(self):
        inner = " ".join([self.functor] + [repr(c) for c in self.children])
        return f"({inner})"


@dataclass(frozen=True)
class Hole:
    """A placeholder for an unmade choice.

    ``clause`` is a label naming a position in a language definition (an
    alternative point, a repetition point or a string leaf); ``display``
    holds the current text atom for string-edit holes.
    """

    identity: Identity
    clause: str
    display: Atom | None = None

    def __repr__(self):
        if self.display is not None:
            return f"(hole:{self.clause} {self.display!r})"
        return f"(hole:{self.clause})"


Term = Atom | Compound | Hole

Path = tuple[int, ...]

# Functor reserved for the normal-form presentation of a hole.  Matching a
# hole with a ``(hole p)`` pattern binds p to this mark; the mark itself is
# an ordinary compound so rules that pass it along terminate.
HOLE_MARK = "hole-mark"

_counter = itertools.count(1)
_counter_lock = threading.Lock()


def fresh_identity() -> Identity:
    with _counter_lock:
        n = next(_counter)
    return Identity((int_atom(n),))


def reset_identity_counter(start: int = 1) -> None:
    """Restart the identity counter.  Only the CLI entry points use this,
    so that replays are reproducible run to run."""
    global _counter
    with _counter_lock:
        _counter = itertools.count(start)


def advance_identity_counter(beyond: int) -> None:
    """Ensure future fresh identities are numbered above ``beyond``."""
    global _counter
    with _counter_lock:
        probe = next(_counter)
        _counter = itertools.count(max(probe, beyond + 1))


def make_compound(functor: str, identity: Identity | None, children) -> Compound:
    return Compound(functor, identity if identity is not None else fresh_identity(), tuple(children))


def hole_mark(h: Hole) -> Compound:
    """The normal-form face of a hole: what a ``(hole p)`` pattern binds."""
    kids: tuple[Term, ...] = (string_atom(h.clause),)
    if h.display is not None:
        kids += (h.display,)
    return Compound(HOLE_MARK, h.identity, kids)


def mark_to_hole(t: Term) -> Hole | None:
    """Recover a hole from its mark compound, if t is one."""
    if isinstance(t, Compound) and t.functor == HOLE_MARK and t.children:
        clause = t.children[0]
        if isinstance(clause, Atom) and clause.kind == "string":
            display = None
            if len(t.children) > 1 and isinstance(t.children[1], Atom):
                display = t.children[1]
            return Hole(t.identity, clause.value, display)
    return None


def is_string_hole(h: Hole) -> bool:
    return h.clause.startswith("str:")


def structurally_equal(a: Term, b: Term) -> bool:
    """Shape equality, blind to all identities."""
    if isinstance(a, Atom) or isinstance(b, Atom):
        return a == b
    if isinstance(a, Hole) or isinstance(b, Hole):
        return (
            isinstance(a, Hole)
            and isinstance(b, Hole)
            and a.clause == b.clause
            and a.display == b.display
        )
    if a.functor != b.functor or len(a.children) != len(b.children):
        return False
    return all(structurally_equal(x, y) for x, y in zip(a.children, b.children))


def children_of(t: Term) -> tuple[Term, ...]:
    if isinstance(t, Compound):
        return t.children
    return ()


def walk(t: Term, path: Path = ()):
    """Pre-order traversal yielding (term, path)."""
    yield t, path
    if isinstance(t, Compound):
        for i, c in enumerate(t.children):
            yield from walk(c, path + (i,))


def find_by_identity(root: Term, ident: Identity):
    """First compound or hole carrying ``ident``, in pre-order, with its path."""
    for t, path in walk(root):
        if isinstance(t, (Compound, Hole)) and t.identity == ident:
            return t, path
    return None


def subterm_at(root: Term, path: Path) -> Term:
    t = root
    for i in path:
        kids = children_of(t)
        if i >= len(kids):
            raise TermError(f"invalid path {path} (stale cache?)")
        t = kids[i]
    return t


def replace_at_path(root: Term, path: Path, replacement: Term) -> Term:
    if not path:
        return replacement
    if not isinstance(root, Compound) or path[0] >= len(root.children):
        raise TermError(f"invalid path {path} (stale cache?)")
    i = path[0]
    kids = list(root.children)
    kids[i] = replace_at_path(kids[i], path[1:], replacement)
    return Compound(root.functor, root.identity, tuple(kids))


def term_text(t: Term) -> str:
    """Compact identity-free rendering, used in diagnostics and tests."""
    if isinstance(t, Atom):
        return repr(t)
    if isinstance(t, Hole):
        if t.display is not None:
            return f"<hole {t.display!r}>"
        return "<hole>"
    if not t.children:
        return f"({t.functor})"
    return "(" + " ".join([t.functor] + [term_text(c) for c in t.children]) + ")"


def max_int_id_part(t: Term) -> int:
    """Largest integer appearing in any identity part of the tree."""
    best = 0
    for node, _ in walk(t):
        if isinstance(node, (Compound, Hole)):
            for part in node.identity.parts:
                if part.kind == "integer":
                    best = max(best, part.value)
    return best
