"""Parse the textual meta-language into a validated LanguageDef and
instantiate abstract clauses into hole-bearing starting trees.

A definition looks like::

    (deflang name
      (abstract [clause g-element] ...)
      (locals [(fn pat ...) exp] [name exp] ...)
      (transform [pattern exp] ...)
      (reduce [pattern exp] ...))

The locals and transform clauses are optional.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .sexpr import Char, SList, Symbol, read_sexpr
from .terms import Atom, Hole, Term, bool_atom, char_atom, fresh_identity, int_atom, make_compound, string_atom


class LangError(Exception):
    pass


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int = 0
    col: int = 0

    def __str__(self):
        if self.line:
            return f"{self.line}:{self.col}: {self.message}"
        return self.message


# ---------------------------------------------------------------------------
# Grammar elements of abstract clauses

@dataclass(frozen=True)
class ClauseRef:
    name: str


@dataclass(frozen=True)
class StrLeaf:
    pass


@dataclass(frozen=True)
class Node:
    functor: str
    children: tuple


@dataclass(frozen=True)
class Star:
    elements: tuple


@dataclass(frozen=True)
class Or:
    alternatives: tuple


GElement = ClauseRef | StrLeaf | Node | Star | Or


@dataclass(frozen=True)
class AbstractClause:
    name: str
    body: GElement
    line: int = 0
    col: int = 0


# ---------------------------------------------------------------------------
# Patterns and expressions

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Wildcard:
    pass


@dataclass(frozen=True)
class Literal:
    atom: Atom


@dataclass(frozen=True)
class Comp:
    functor: str
    children: tuple


@dataclass(frozen=True)
class CompWithId:
    functor: str
    id_patterns: tuple
    children: tuple


@dataclass(frozen=True)
class Segment:
    """A pattern followed by ... ; matches zero or more children."""

    pattern: object


Pattern = Var | Wildcard | Literal | Comp | CompWithId | Segment


@dataclass(frozen=True)
class Construct:
    functor: str
    args: tuple


@dataclass(frozen=True)
class ConstructWithId:
    functor: str
    id_exprs: tuple
    args: tuple


@dataclass(frozen=True)
class Splice:
    expr: object


@dataclass(frozen=True)
class Case:
    subject: object
    rules: tuple


@dataclass(frozen=True)
class FreshStr:
    """The bare symbol ``str`` in expression position: a new empty
    editable-string hole (used by rules that mint named elements)."""


Expr = Var | Literal | Construct | ConstructWithId | Splice | Case | FreshStr


@dataclass(frozen=True)
class Rule:
    pattern: Pattern
    body: Expr
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class LocalDef:
    name: str
    params: tuple | None  # None for a value local
    body: Expr
    line: int = 0
    col: int = 0


@dataclass(frozen=True)
class HoleSite:
    """A hole-capable position inside a clause body."""

    label: str
    kind: str  # "or" | "star" | "str"
    element: GElement
    preceding: int = 0  # siblings before a star inside its parent node

    def add_forms(self):
        assert self.kind == "star"
        return self.element.elements

    def alternatives(self):
        assert self.kind == "or"
        return self.element.alternatives


@dataclass
class LanguageDef:
    name: str
    clauses: dict[str, AbstractClause]
    locals: tuple[LocalDef, ...]
    transform_rules: tuple[Rule, ...]
    reduce_rules: tuple[Rule, ...]
    hole_sites: dict[str, HoleSite] = field(default_factory=dict)

    def local_function(self, name: str) -> LocalDef | None:
        for loc in self.locals:
            if loc.name == name and loc.params is not None:
                return loc
        return None

    def local_value(self, name: str) -> LocalDef | None:
        for loc in self.locals:
            if loc.name == name and loc.params is None:
                return loc
        return None


DOTS = "..."

# The site label for string holes minted by expressions, not tied to any
# clause position.
EXPR_STR_SITE = "str:@"


def _is_sym(x, name=None):
    return isinstance(x, Symbol) and (name is None or x.name == name)


def _atom_of(x) -> Atom | None:
    if isinstance(x, str):
        return string_atom(x)
    if isinstance(x, bool):
        return bool_atom(x)
    if isinstance(x, int):
        return int_atom(x)
    if isinstance(x, Char):
        return char_atom(x.value)
    return None


# ---------------------------------------------------------------------------
# Parsing

def _attach_dots(items, parse, ctx):
    """Parse a list of forms, folding trailing ``...`` into Segment/Splice."""
    out = []
    for x in items:
        if _is_sym(x, DOTS):
            if not out:
                raise LangError(f"{ctx}: ellipsis cannot start a sequence")
            out[-1] = Segment(out[-1]) if parse is parse_pattern else Splice(out[-1])
        else:
            out.append(parse(x))
    return tuple(out)


def parse_pattern(sx) -> Pattern:
    atom = _atom_of(sx)
    if atom is not None:
        return Literal(atom)
    if isinstance(sx, Symbol):
        if sx.name == "_":
            return Wildcard()
        if sx.name == DOTS:
            raise LangError("stray ellipsis in pattern")
        return Var(sx.name)
    if isinstance(sx, SList):
        if not sx.items:
            raise LangError("empty pattern")
        head = sx.items[0]
        rest = _attach_dots(sx.items[1:], parse_pattern, "pattern")
        if isinstance(head, Symbol):
            return Comp(head.name, rest)
        if isinstance(head, SList) and head.items and isinstance(head.items[0], Symbol):
            idpats = _attach_dots(head.items[1:], parse_pattern, "identity pattern")
            if not idpats:
                raise LangError(f"({head.items[0].name} ...) identity pattern needs at least one element")
            return CompWithId(head.items[0].name, idpats, rest)
        raise LangError(f"bad pattern head: {head!r}")
    raise LangError(f"bad pattern: {sx!r}")


def parse_expr(sx) -> Expr:
    atom = _atom_of(sx)
    if atom is not None:
        return Literal(atom)
    if isinstance(sx, Symbol):
        if sx.name == "str":
            return FreshStr()
        if sx.name == DOTS:
            raise LangError("stray ellipsis in expression")
        return Var(sx.name)
    if isinstance(sx, SList):
        if not sx.items:
            raise LangError("empty expression")
        head = sx.items[0]
        if _is_sym(head, "case"):
            if len(sx.items) < 2:
                raise LangError("case needs a subject")
            subject = parse_expr(sx.items[1])
            rules = tuple(_parse_rule(r) for r in sx.items[2:])
            return Case(subject, rules)
        rest = _attach_dots(sx.items[1:], parse_expr, "expression")
        if isinstance(head, Symbol):
            return Construct(head.name, rest)
        if isinstance(head, SList) and head.items and isinstance(head.items[0], Symbol):
            idexprs = _attach_dots(head.items[1:], parse_expr, "identity expression")
            if not idexprs:
                raise LangError(f"({head.items[0].name} ...) identity designator needs at least one element")
            return ConstructWithId(head.items[0].name, idexprs, rest)
        raise LangError(f"bad expression head: {head!r}")
    raise LangError(f"bad expression: {sx!r}")


def _parse_rule(sx) -> Rule:
    if not isinstance(sx, SList) or len(sx.items) != 2:
        raise LangError(f"a rule is (pattern exp): {sx!r}")
    return Rule(parse_pattern(sx.items[0]), parse_expr(sx.items[1]), sx.line, sx.col)


def _parse_gelement(sx) -> GElement:
    if _is_sym(sx, "str"):
        return StrLeaf()
    if isinstance(sx, Symbol):
        return ClauseRef(sx.name)
    if isinstance(sx, SList) and sx.items and isinstance(sx.items[0], Symbol):
        head = sx.items[0].name
        rest = tuple(_parse_gelement(e) for e in sx.items[1:])
        if head == "*":
            if not rest:
                raise LangError("(*) needs at least one element")
            return Star(rest)
        if head == "or":
            if not rest:
                raise LangError("(or) needs at least one alternative")
            return Or(rest)
        return Node(head, rest)
    raise LangError(f"bad g-element: {sx!r}")


def _parse_local(sx) -> LocalDef:
    if not isinstance(sx, SList) or len(sx.items) != 2:
        raise LangError(f"a local is (id exp) or ((id pattern ...) exp): {sx!r}")
    head, body = sx.items
    if isinstance(head, Symbol):
        return LocalDef(head.name, None, parse_expr(body), sx.line, sx.col)
    if isinstance(head, SList) and head.items and isinstance(head.items[0], Symbol):
        params = _attach_dots(head.items[1:], parse_pattern, "local parameters")
        return LocalDef(head.items[0].name, params, parse_expr(body), sx.line, sx.col)
    raise LangError(f"bad local head: {head!r}")


def _index_hole_sites(clause: AbstractClause, sites: dict[str, HoleSite]):
    counter = 0

    def visit(el: GElement, preceding: int):
        nonlocal counter
        if isinstance(el, (Star, Or, StrLeaf)):
            kind = {"Star": "star", "Or": "or", "StrLeaf": "str"}[type(el).__name__]
            label = f"{kind}:{clause.name}:{counter}"
            counter += 1
            sites[label] = HoleSite(label, kind, el, preceding)
        if isinstance(el, Node):
            for i, c in enumerate(el.children):
                visit(c, i)
        elif isinstance(el, Star):
            for c in el.elements:
                visit(c, 0)
        elif isinstance(el, Or):
            for c in el.alternatives:
                visit(c, 0)

    visit(clause.body, 0)


def parse_language(form) -> LanguageDef:
    if not isinstance(form, SList) or not form.items or not _is_sym(form.items[0], "deflang"):
        raise LangError("expected a (deflang ...) form")
    if len(form.items) < 2 or not isinstance(form.items[1], Symbol):
        raise LangError("deflang needs a name")
    name = form.items[1].name
    clauses: dict[str, AbstractClause] = {}
    locals_: list[LocalDef] = []
    transform: list[Rule] = []
    reduce_: list[Rule] = []
    for section in form.items[2:]:
        if not isinstance(section, SList) or not section.items or not isinstance(section.items[0], Symbol):
            raise LangError(f"bad deflang clause: {section!r}")
        key = section.items[0].name
        body = section.items[1:]
        if key == "abstract":
            for c in body:
                if not isinstance(c, SList) or len(c.items) != 2 or not isinstance(c.items[0], Symbol):
                    raise LangError(f"an abstract clause is [name g-element]: {c!r}")
                cname = c.items[0].name
                if cname in clauses:
                    raise LangError(f"duplicate clause {cname}")
                clauses[cname] = AbstractClause(cname, _parse_gelement(c.items[1]), c.line, c.col)
        elif key == "locals":
            locals_.extend(_parse_local(l) for l in body)
        elif key == "transform":
            transform.extend(_parse_rule(r) for r in body)
        elif key == "reduce":
            reduce_.extend(_parse_rule(r) for r in body)
        else:
            raise LangError(f"unknown deflang clause {key!r}")
    d = LanguageDef(name, clauses, tuple(locals_), tuple(transform), tuple(reduce_))
    for clause in clauses.values():
        _index_hole_sites(clause, d.hole_sites)
    return d


def load_language(text: str) -> LanguageDef:
    forms = read_sexpr(text)
    if len(forms) != 1:
        raise LangError(f"expected exactly one deflang form, found {len(forms)}")
    return parse_language(forms[0])


def load_language_file(path) -> LanguageDef:
    with open(path, encoding="utf-8") as f:
        return load_language(f.read())


# ---------------------------------------------------------------------------
# Validation

def pattern_vars(p: Pattern) -> set[str]:
    if isinstance(p, Var):
        return {p.name}
    if isinstance(p, Segment):
        return pattern_vars(p.pattern)
    if isinstance(p, Comp):
        out = set()
        for c in p.children:
            out |= pattern_vars(c)
        return out
    if isinstance(p, CompWithId):
        out = set()
        for c in p.id_patterns + p.children:
            out |= pattern_vars(c)
        return out
    return set()


def _check_expr(e: Expr, bound: set[str], d: LanguageDef, out: list[Diagnostic]):
    if isinstance(e, Var):
        if e.name not in bound and d.local_value(e.name) is None:
            out.append(Diagnostic(f"unbound variable {e.name!r} in rule expression"))
    elif isinstance(e, Splice):
        _check_expr(e.expr, bound, d, out)
    elif isinstance(e, Construct):
        for a in e.args:
            _check_expr(a, bound, d, out)
    elif isinstance(e, ConstructWithId):
        for a in e.id_exprs + e.args:
            _check_expr(a, bound, d, out)
    elif isinstance(e, Case):
        _check_expr(e.subject, bound, d, out)
        for r in e.rules:
            _check_expr(r.body, bound | pattern_vars(r.pattern), d, out)


def validate_language(d: LanguageDef) -> list[Diagnostic]:
    out: list[Diagnostic] = []

    def refs(el: GElement):
        if isinstance(el, ClauseRef):
            yield el.name
        elif isinstance(el, Node):
            for c in el.children:
                yield from refs(c)
        elif isinstance(el, Star):
            for c in el.elements:
                yield from refs(c)
        elif isinstance(el, Or):
            for c in el.alternatives:
                yield from refs(c)

    for clause in d.clauses.values():
        for r in refs(clause.body):
            if r not in d.clauses:
                out.append(Diagnostic(
                    f"clause {clause.name!r} references undefined clause {r!r}", clause.line, clause.col))

    seen_locals = set()
    for loc in d.locals:
        if loc.name in seen_locals:
            out.append(Diagnostic(f"duplicate local {loc.name!r}", loc.line, loc.col))
        seen_locals.add(loc.name)
        bound = set()
        if loc.params is not None:
            for p in loc.params:
                bound |= pattern_vars(p)
        pre = len(out)
        _check_expr(loc.body, bound, d, out)
        out[pre:] = [Diagnostic(x.message, x.line or loc.line, x.col or loc.col) for x in out[pre:]]

    for kind, rules in (("transform", d.transform_rules), ("reduce", d.reduce_rules)):
        for i, rule in enumerate(rules):
            pre = len(out)
            _check_expr(rule.body, pattern_vars(rule.pattern), d, out)
            if len(out) > pre:
                out[pre:] = [Diagnostic(f"{kind} rule {i + 1}: {x.message}",
                                        x.line or rule.line, x.col or rule.col) for x in out[pre:]]
    return out


# ---------------------------------------------------------------------------
# Instantiation

def _fresh_hole(site: HoleSite) -> Hole:
    display = string_atom("") if site.kind == "str" else None
    return Hole(fresh_identity(), site.label, display)


def _site_for(d: LanguageDef, clause_name: str, element: GElement) -> HoleSite:
    for site in d.hole_sites.values():
        if site.element is element and site.label.split(":")[1] == clause_name:
            return site
    # element built outside the clause index (e.g. instantiating a nested
    # alternative): register it on the fly
    kind = {"Star": "star", "Or": "or", "StrLeaf": "str"}[type(element).__name__]
    label = f"{kind}:{clause_name}:x{len(d.hole_sites)}"
    site = HoleSite(label, kind, element)
    d.hole_sites[label] = site
    return site


def instantiate_element(d: LanguageDef, clause_name: str, el: GElement, active: frozenset) -> Term:
    """Build the starting tree for one g-element; Star/Or/str positions
    become holes."""
    if isinstance(el, (Star, Or, StrLeaf)):
        return _fresh_hole(_site_for(d, clause_name, el))
    if isinstance(el, Node):
        kids = []
        for c in el.children:
            if isinstance(c, Star):
                # repetitions accumulate in place, before the trailing hole
                kids.append(_fresh_hole(_site_for(d, clause_name, c)))
            else:
                kids.append(instantiate_element(d, clause_name, c, active))
        return make_compound(el.functor, None, kids)
    if isinstance(el, ClauseRef):
        if el.name not in d.clauses:
            raise LangError(f"undefined clause {el.name!r}")
        if el.name in active:
            raise LangError(f"clause {el.name!r} is not instantiable (recursion without * or or)")
        target = d.clauses[el.name]
        return instantiate_element(d, target.name, target.body, active | {el.name})
    raise LangError(f"cannot instantiate {el!r}")


def instantiate_clause(d: LanguageDef, clause: str) -> Term:
    if clause not in d.clauses:
        raise LangError(f"no clause named {clause!r}")
    c = d.clauses[clause]
    return instantiate_element(d, c.name, c.body, frozenset({clause}))


def site_of_hole(d: LanguageDef, hole: Hole) -> HoleSite | None:
    return d.hole_sites.get(hole.clause)


# ---------------------------------------------------------------------------
# Term literals (used by tests, persistence fixtures and scripted corpora)

def term_from_sexpr(sx) -> Term:
    """Turn a read s-expression into a term, coining fresh identities.

    A leading ``(functor part ...)`` list designates the identity, mirroring
    the expression syntax: ``((box "b" 7) x)``.
    """
    atom = _atom_of(sx)
    if atom is not None:
        return atom
    if isinstance(sx, Symbol):
        raise LangError(f"bare symbol {sx.name!r} is not a term; write ({sx.name})")
    if isinstance(sx, SList):
        if not sx.items:
            raise LangError("empty term")
        head = sx.items[0]
        kids = [term_from_sexpr(k) for k in sx.items[1:]]
        if isinstance(head, Symbol):
            return make_compound(head.name, None, kids)
        if isinstance(head, SList) and head.items and isinstance(head.items[0], Symbol):
            from .terms import Identity

            parts = []
            for p in head.items[1:]:
                a = _atom_of(p)
                if a is None:
                    raise LangError(f"identity parts must be atoms: {p!r}")
                parts.append(a)
            return make_compound(head.items[0].name, Identity(tuple(parts)), kids)
    raise LangError(f"bad term source: {sx!r}")


def term_from_source(text: str) -> Term:
    forms = read_sexpr(text)
    if len(forms) != 1:
        raise LangError("expected one term")
    return term_from_sexpr(forms[0])
