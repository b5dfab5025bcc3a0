"""Pattern matching over terms and evaluation of rule expressions.

Matching yields bindings lazily so that a failure later in a pattern can
re-drive earlier ellipsis splits; the first binding that satisfies the whole
pattern wins, which with leftmost-shortest split enumeration gives a single
deterministic answer.
"""

from __future__ import annotations

from dataclasses import dataclass

from .langdef import (
    Case,
    Comp,
    CompWithId,
    Construct,
    ConstructWithId,
    EXPR_STR_SITE,
    Expr,
    FreshStr,
    LanguageDef,
    Literal,
    Pattern,
    Rule,
    Segment,
    Splice,
    Var,
    Wildcard,
    pattern_vars,
)
from .terms import (
    Atom,
    Compound,
    Hole,
    Identity,
    Term,
    fresh_identity,
    hole_mark,
    int_atom,
    string_atom,
    structurally_equal,
    term_text,
)


class EvalError(Exception):
    pass


class CaseExhausted(EvalError):
    pass


@dataclass(frozen=True)
class Single:
    term: Term

    @property
    def depth(self):
        return 0


@dataclass(frozen=True)
class Multi:
    items: tuple

    @property
    def depth(self):
        return 1 + (self.items[0].depth if self.items else 0)


Binding = Single | Multi

Env = dict  # name -> Binding


def _binding_equal(a: Binding, b: Binding) -> bool:
    if isinstance(a, Single) and isinstance(b, Single):
        return structurally_equal(a.term, b.term)
    if isinstance(a, Multi) and isinstance(b, Multi):
        return len(a.items) == len(b.items) and all(_binding_equal(x, y) for x, y in zip(a.items, b.items))
    return False


def reify_identity(ident: Identity) -> Term:
    """An identity as a term: the bare atom for one part, (list a1 a2 ...)
    for several."""
    if len(ident.parts) == 1:
        return ident.parts[0]
    return Compound("list", fresh_identity(), ident.parts)


def identity_from_term(t: Term) -> Identity | None:
    """Inverse of reify_identity, tolerating any all-atom (list ...)."""
    if isinstance(t, Atom):
        return Identity((t,))
    if isinstance(t, Compound) and t.functor == "list" and t.children and all(isinstance(c, Atom) for c in t.children):
        return Identity(tuple(t.children))
    return None


# ---------------------------------------------------------------------------
# Split enumeration

def segment_shape(patterns) -> list[bool]:
    """True per position holding an ellipsis segment."""
    return [isinstance(p, Segment) for p in patterns]


def enumerate_splits(n_children: int, shape: list[bool]):
    """Assign contiguous runs to a fixed/segment shape over ``n_children``
    children.  Yields lists whose entries are an int index (fixed) or a
    (start, stop) run (segment); earlier segments take shorter runs first.
    """

    def go(pos: int, i: int):
        if i == len(shape):
            if pos == n_children:
                yield []
            return
        if not shape[i]:
            if pos < n_children:
                for rest in go(pos + 1, i + 1):
                    yield [pos] + rest
        else:
            for take in range(n_children - pos + 1):
                for rest in go(pos + take, i + 1):
                    yield [(pos, pos + take)] + rest

    yield from go(0, 0)


# ---------------------------------------------------------------------------
# Matching

def _match_all(p: Pattern, t: Term, env: Env):
    if isinstance(p, Wildcard):
        yield env
        return
    if isinstance(p, Var):
        prior = env.get(p.name)
        if prior is not None:
            # repeated identifier: equal structure required
            if isinstance(prior, Single) and structurally_equal(prior.term, t):
                yield env
            return
        new = dict(env)
        new[p.name] = Single(t)
        yield new
        return
    if isinstance(p, Literal):
        if isinstance(t, Atom) and t == p.atom:
            yield env
        return
    if isinstance(p, Segment):
        return  # segments only make sense inside a child sequence
    if isinstance(p, (Comp, CompWithId)):
        if isinstance(t, Hole):
            if p.functor != "hole":
                return
            subject_children: tuple[Term, ...] = (hole_mark(t),)
            ident = t.identity
        elif isinstance(t, Compound):
            if p.functor != t.functor:
                return
            subject_children = t.children
            ident = t.identity
        else:
            return
        if isinstance(p, CompWithId):
            id_terms = _identity_subject(ident, p.id_patterns)
            for env1 in match_children(p.id_patterns, id_terms, env):
                yield from match_children(p.children, subject_children, env1)
        else:
            yield from match_children(p.children, subject_children, env)
        return
    raise TypeError(f"bad pattern {p!r}")


def _identity_subject(ident: Identity, id_patterns) -> tuple[Term, ...]:
    # One plain pattern against a composite identity sees the reified
    # (list ...) form; otherwise patterns run over the parts themselves.
    if len(id_patterns) == 1 and not isinstance(id_patterns[0], Segment) and len(ident.parts) > 1:
        return (reify_identity(ident),)
    return ident.parts


def match_children(patterns, terms, env: Env):
    patterns = tuple(patterns)
    terms = tuple(terms)
    shape = segment_shape(patterns)
    if not any(shape):
        if len(patterns) != len(terms):
            return
        yield from _match_seq(patterns, terms, env)
        return
    for split in enumerate_splits(len(terms), shape):
        yield from _match_split(patterns, terms, split, 0, env)


def _match_seq(patterns, terms, env: Env):
    if not patterns:
        yield env
        return
    for env1 in _match_all(patterns[0], terms[0], env):
        yield from _match_seq(patterns[1:], terms[1:], env1)


def _match_split(patterns, terms, split, i, env: Env):
    if i == len(patterns):
        yield env
        return
    p, part = patterns[i], split[i]
    if isinstance(p, Segment):
        start, stop = part
        for env1 in _match_run(p.pattern, terms[start:stop], env):
            yield from _match_split(patterns, terms, split, i + 1, env1)
    else:
        for env1 in _match_all(p, terms[part], env):
            yield from _match_split(patterns, terms, split, i + 1, env1)


def _match_run(p: Pattern, run, env: Env):
    """Match every term of a run against p, collecting per-element bindings
    of p's fresh variables into Multi bindings (one ellipsis level).

    A variable already repeated at this depth (bound to a Multi by an
    earlier run) is re-collected and must come out equal, extending the
    repeated-identifier rule across runs."""
    repeated = sorted(v for v in pattern_vars(p) if isinstance(env.get(v), Multi))
    names = sorted(v for v in pattern_vars(p) if v not in env) + repeated
    base = {k: v for k, v in env.items() if k not in repeated}

    def go(k, collected):
        if k == len(run):
            out = dict(env)
            for name in names:
                found = Multi(tuple(c[name] for c in collected))
                if name in repeated:
                    if not _binding_equal(env[name], found):
                        return
                else:
                    out[name] = found
            yield out
            return
        for envk in _match_all(p, run[k], dict(base)):
            frag = {n: envk[n] for n in names}
            yield from go(k + 1, collected + [frag])

    yield from go(0, [])


def match_pattern(p: Pattern, t: Term, env: Env | None = None) -> Env | None:
    """First (deterministic) binding extending env, or None."""
    return next(_match_all(p, t, dict(env or {})), None)


# ---------------------------------------------------------------------------
# Evaluation

_ARITH = {"-": lambda a, b: a - b, "+": lambda a, b: a + b}


def eval_expr(e: Expr, env: Env, d: LanguageDef) -> Term:
    if isinstance(e, Literal):
        return e.atom
    if isinstance(e, FreshStr):
        return Hole(fresh_identity(), EXPR_STR_SITE, string_atom(""))
    if isinstance(e, Var):
        b = env.get(e.name)
        if b is None:
            val = d.local_value(e.name)
            if val is not None:
                return eval_expr(val.body, {}, d)
            raise EvalError(f"unbound variable {e.name!r}")
        if isinstance(b, Multi):
            raise EvalError(f"variable {e.name!r} is bound under an ellipsis; use {e.name} ...")
        return b.term
    if isinstance(e, Splice):
        raise EvalError("ellipsis used outside a child sequence")
    if isinstance(e, Case):
        return eval_case(eval_expr(e.subject, env, d), e.rules, env, d)
    if isinstance(e, (Construct, ConstructWithId)):
        local = d.local_function(e.functor)
        if local is not None and not isinstance(e, ConstructWithId):
            args = _eval_children(e.args, env, d)
            return apply_local(d, e.functor, args, env)
        if e.functor in _ARITH and not isinstance(e, ConstructWithId) and len(e.args) == 2:
            a = eval_expr(e.args[0], env, d)
            b = eval_expr(e.args[1], env, d)
            if isinstance(a, Atom) and a.kind == "integer" and isinstance(b, Atom) and b.kind == "integer":
                return int_atom(_ARITH[e.functor](a.value, b.value))
            raise EvalError(f"({e.functor} _ _) needs integer atoms, got {term_text(a)} and {term_text(b)}")
        children = _eval_children(e.args, env, d)
        if isinstance(e, ConstructWithId):
            ident = _eval_identity(e.id_exprs, env, d)
            return Compound(e.functor, ident, tuple(children))
        return Compound(e.functor, fresh_identity(), tuple(children))
    raise TypeError(f"bad expression {e!r}")


def _eval_children(args, env: Env, d: LanguageDef) -> list[Term]:
    out: list[Term] = []
    for a in args:
        if isinstance(a, Splice):
            out.extend(_eval_splice(a, env, d))
        else:
            out.append(eval_expr(a, env, d))
    return out


def _splice_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Splice):
        return _splice_vars(e.expr)
    if isinstance(e, Construct):
        out = set()
        for a in e.args:
            out |= _splice_vars(a)
        return out
    if isinstance(e, ConstructWithId):
        out = set()
        for a in e.id_exprs + e.args:
            out |= _splice_vars(a)
        return out
    if isinstance(e, Case):
        out = _splice_vars(e.subject)
        for r in e.rules:
            out |= _splice_vars(r.body)
        return out
    return set()


def _eval_splice(s: Splice, env: Env, d: LanguageDef) -> list[Term]:
    controlling = sorted(
        v for v in _splice_vars(s.expr) if isinstance(env.get(v), Multi)
    )
    if not controlling:
        raise EvalError("ellipsis does not control any repeated variable")
    lengths = {len(env[v].items) for v in controlling}
    if len(lengths) != 1:
        detail = ", ".join(f"{v}={len(env[v].items)}" for v in controlling)
        raise EvalError(f"repeated variables have mismatched lengths: {detail}")
    (n,) = lengths
    out: list[Term] = []
    for i in range(n):
        env_i = dict(env)
        for v in controlling:
            env_i[v] = env[v].items[i]
        inner = s.expr
        if isinstance(inner, Splice):
            out.extend(_eval_splice(inner, env_i, d))
        else:
            out.append(eval_expr(inner, env_i, d))
    return out


def _eval_identity(id_exprs, env: Env, d: LanguageDef) -> Identity:
    parts: list[Atom] = []
    for e in id_exprs:
        vals = _eval_children([e], env, d)
        for v in vals:
            if isinstance(v, Atom):
                parts.append(v)
                continue
            ident = identity_from_term(v)
            if ident is not None:
                parts.extend(ident.parts)
                continue
            raise EvalError(f"identity parts must be atoms, got {term_text(v)}")
    if not parts:
        raise EvalError("empty identity designator")
    return Identity(tuple(parts))


def eval_case(subject: Term, rules, env: Env, d: LanguageDef) -> Term:
    for rule in rules:
        m = match_pattern(rule.pattern, subject, {})
        if m is not None:
            merged = dict(env)
            merged.update(m)
            return eval_expr(rule.body, merged, d)
    head = subject.functor if isinstance(subject, Compound) else term_text(subject)
    raise CaseExhausted(f"no case rule matches {head}")


def apply_local(d: LanguageDef, name: str, args, env: Env) -> Term:
    local = d.local_function(name)
    if local is None:
        raise EvalError(f"no local function {name!r}")
    if not any(isinstance(p, Segment) for p in local.params) and len(local.params) != len(args):
        raise EvalError(f"{name} expects {len(local.params)} arguments, got {len(args)}")
    bound = next(match_children(local.params, tuple(args), {}), None)
    if bound is None:
        shown = " ".join(term_text(a) for a in args)
        raise EvalError(f"parameters of {name} do not match ({shown})")
    return eval_expr(local.body, bound, d)
