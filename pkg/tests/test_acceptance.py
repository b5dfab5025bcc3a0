"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL
line.  Run with `pytest tests/test_acceptance.py -v -s`."""

import itertools
import json
import random
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from projed import bundled_language_path
from projed.cli import main, parse_script, replay
from projed.langdef import load_language, term_from_source
from projed.matching import enumerate_splits, eval_expr, match_pattern
from projed.langdef import parse_expr, parse_pattern
from projed.persist import load_session, load_term, save_session, save_term
from projed.rewrite import Fuel, apply_rules_once, reduce, rewrite_fixpoint
from projed.scene import BoxNF, TreeNF, render_svg, render_text, validate_nf
from projed.session import (
    DoubleClick,
    DragNode,
    EdgeDrag,
    KeyPressed,
    dispatch,
    new_session,
)
from projed.sexpr import read_one
from projed.terms import (
    Compound,
    Hole,
    Identity,
    fresh_identity,
    int_atom,
    make_compound,
    string_atom,
    structurally_equal,
    subterm_at,
)

import lambda_oracle as oracle
from tests_support_random import random_rules, random_term

LANGS = Path(bundled_language_path("dna")).parent
SCRIPTS = LANGS / "scripts"

CORPUS_RUNS = [
    ("dna", "DNA", None),
    ("boxes", "root", None),
    ("lambda_calculus", "exp", LANGS / "sessions" / "lambda_y.pxml"),
    ("nested_graph", "machine", None),
    ("class_models", "model", None),
    ("dungeon", "game", None),
]


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"FAIL: {name}")
        raise
    print(f"PASS: {name}")


def session_holes(s, prefix):
    out = []
    for ident, path in sorted(s.abstract_cache.items(), key=lambda kv: kv[1]):
        t = subterm_at(s.abstract, path)
        if isinstance(t, Hole) and t.clause.startswith(prefix):
            out.append(ident)
    return out


def box_id(node):
    return Identity((string_atom("b"), node.abstract_term))


# --- 1. corpus parse ----------------------------------------------------------


def test_corpus_parse():
    with criterion("corpus parse: six definitions check clean in under a second"):
        t0 = time.perf_counter()
        for name, _, _ in CORPUS_RUNS:
            assert main(["check", str(bundled_language_path(name))]) == 0, name
        assert time.perf_counter() - t0 < 1.0


# --- 2. DNA reproduction --------------------------------------------------------


def test_dna_reproduction(dna):
    with criterion("DNA: scripted a a c t g g reduces to (seq \"A\"... hole)"):
        t0 = time.perf_counter()
        s = new_session(dna, "DNA")
        for letter in "aactgg":
            star = session_holes(s, "star:")[0]
            from projed.session import expand_hole

            expand_hole(s, star, "letter")
            expand_hole(s, session_holes(s, "or:")[0], letter)
        target = term_from_source("(gene (a) (a) (c) (t) (g) (g))")
        hole = Hole(fresh_identity(), s.abstract.children[-1].clause)
        target = Compound(target.functor, target.identity, target.children + (hole,))
        assert structurally_equal(s.abstract, target)
        reduced = reduce(dna, s.abstract)
        expected = term_from_source('(seq "A" "A" "C" "T" "G" "G")')
        expected = Compound(expected.functor, expected.identity, expected.children + (hole,))
        assert structurally_equal(reduced, expected)
        assert time.perf_counter() - t0 < 1.0


# --- 3. decision-tree mode toggle ------------------------------------------------

ANIMALS = """
(root (tree)
  (tree "hair?"
    (tree "legs < 5?" (leaf "mammal") (leaf "insect"))
    (tree "feathers?"
      (leaf "bird")
      (tree "tail?"
        (tree "legs < 2?"
          (leaf "fish")
          (tree "legs < 6?" (leaf "reptile") (leaf "shellfish")))
        (tree "legs < 5?" (leaf "frog") (leaf "insect"))))))
"""


def test_decision_tree_mode_toggle(boxes):
    with criterion("decision trees: t and b toggle tree/box roots, toggling twice is stable"):
        s = new_session(boxes, "root", abstract=term_from_source(ANIMALS))
        dispatch(s, KeyPressed(None, "t"))
        assert isinstance(validate_nf(reduce(boxes, s.abstract)), TreeNF)
        svg_t1 = render_svg(s.last_scene)
        dispatch(s, KeyPressed(None, "b"))
        nf_b = validate_nf(reduce(boxes, s.abstract))
        assert isinstance(nf_b, BoxNF) and nf_b.orient == "hbox"
        svg_b1 = render_svg(s.last_scene)
        dispatch(s, KeyPressed(None, "t"))
        assert render_svg(s.last_scene) == svg_t1
        dispatch(s, KeyPressed(None, "b"))
        assert render_svg(s.last_scene) == svg_b1
        assert not s.diagnostics


# --- 4. lambda-calculus Y combinator ----------------------------------------------

Y_SOURCE = """(apply (lambda "f" (apply (lambda "x" (apply (ident "f") (apply (ident "x") (ident "x"))))
                                  (lambda "x" (apply (ident "f") (apply (ident "x") (ident "x"))))))
       (lambda "L" (pair (const "1") (ident "L"))))"""

# Frozen from the oracle: emitted pairs on the spine after k keystrokes.
# (The stepper spends two keystrokes per emitted pair: one unfolds the
# fixpoint application, the next reduces the head redex.)
SPINE_PAIRS_BY_STEP = [0, 0, 1, 1, 2, 2]


def to_oracle(t):
    if isinstance(t, Compound):
        kids = tuple(to_oracle(c) for c in t.children)
        return (t.functor,) + kids
    return t.value


def test_lambda_y_combinator(lam):
    with criterion("lambda calculus: six eval steps match the independent interpreter"):
        t0 = time.perf_counter()
        s = new_session(lam, "exp", abstract=term_from_source(Y_SOURCE))
        state = oracle.ONES
        for k in range(1, 7):
            dispatch(s, KeyPressed(None, "e"))
            assert not s.diagnostics
            state = oracle.eval_step(state)
            assert to_oracle(s.abstract) == state, f"diverged from oracle at step {k}"
            spine = oracle.spine_pairs(state)
            assert len(spine) == SPINE_PAIRS_BY_STEP[k - 1]
            assert all(first == ("const", "1") for first in spine)
        assert time.perf_counter() - t0 < 1.0


# --- 5. nested-graph dump round trip ------------------------------------------------


def random_machine(nested, rng):
    star_label = next(l for l in nested.hole_sites if l.startswith("star:G"))

    def graph(depth):
        count = rng.randrange(1, 4) if depth > 0 else 0
        entities = [entity(depth - 1) for _ in range(count)]
        entities.append(Hole(fresh_identity(), star_label))
        return make_compound("graph", None, [
            make_compound("entities", None, entities),
            make_compound("relationships", None, []),
        ])

    def entity(depth):
        return make_compound("entity", None, [graph(depth if rng.random() < 0.6 else 0)])

    return make_compound("machine", None, [graph(rng.randrange(1, 4)), make_compound("empty", None, [])])


def test_nested_graph_dump_round_trip(nested):
    with criterion("nested graphs: descend + 3 drags + up restores the tree, 100 random instances"):
        t0 = time.perf_counter()
        rng = random.Random(42)
        for i in range(100):
            s = new_session(nested, "machine", abstract=random_machine(nested, rng))
            pre = s.abstract
            nodes = [n for g in s.last_scene.graphs for n in g.nodes if n.node_type == "entity" and n.w > 20]
            target = nodes[0]
            dispatch(s, DoubleClick(box_id(target)))
            assert s.abstract.children[1].functor == "dump", f"instance {i} did not descend"
            for _ in range(3):
                inner = [n for g in s.last_scene.graphs for n in g.nodes]
                victim = rng.choice(inner)
                dispatch(s, DragNode(victim.node_id, float(rng.randrange(600)), float(rng.randrange(400))))
            dispatch(s, KeyPressed(None, "up"))
            assert structurally_equal(pre, s.abstract), f"instance {i} corrupted"
            assert not s.diagnostics
        assert time.perf_counter() - t0 < 10.0


# --- 6. class-model mixed mode -------------------------------------------------------


def test_class_model_mixed_mode(classes):
    with criterion("class models: double-click toggles modes and textual shows class { }"):
        from projed.session import edit_string, expand_hole

        s = new_session(classes, "model")
        expand_hole(s, session_holes(s, "star:")[0], "class")
        edit_string(s, session_holes(s, "str:")[0], "Library")
        node = [n for g in s.last_scene.graphs for n in g.nodes if n.node_type == "class"][0]

        def mode():
            return s.abstract.children[0].children[0].children[0].functor

        assert mode() == "graphical"
        dispatch(s, DoubleClick(box_id(node)))
        assert mode() == "textual"
        text = render_text(s.last_scene)
        line = [l for l in text.splitlines() if "class " in l]
        assert line and "{" in line[0]
        assert any(l.strip() == "}" for l in text.splitlines())
        assert "class Library {" in line[0]
        dispatch(s, DoubleClick(box_id(node)))
        assert mode() == "graphical"


# --- 7. edge-type gating ---------------------------------------------------------------

USE_CASES = """
(deflang use-cases
  (abstract [sys (sys (actors (* actor)) (cases (* ucase)) (links))]
            [actor (actor str)]
            [ucase (ucase str)])
  (transform
   [(send (sys a c (links l ...)) (new-edge t s tg))
    (sys a c (links (link t s tg) l ...))])
  (reduce
   [(sys (actors a ...) (cases c ...) (links l ...))
    (graph (edge-types (uses (actor) (use-case)) (includes (use-case) (use-case)) (extends (use-case) (use-case)))
           (->a a) ... (->c c) ... (->l l) ...)]
   [(->a ((hole i) h)) ((node "ha" i) (hole-spot) i h)]
   [(->c ((hole i) h)) ((node "hc" i) (hole-spot) i h)]
   [(->a ((actor i) n)) ((node "n" i) (actor) i ((box "b" i) (border 1) (centre n)))]
   [(->c ((ucase i) n)) ((node "n" i) (use-case) i ((box "b" i) (border 1) (centre n)))]
   [(->l ((link x) t s tg)) ((edge x) s (none) tg (arrow))]))
"""


def test_edge_type_gating(classes):
    with criterion("edge gating: class->class assoc only; use-case rules per declaration"):
        from projed.session import allowed_edge_types, expand_hole

        s = new_session(classes, "model")
        star = session_holes(s, "star:")[0]
        expand_hole(s, star, "class")
        expand_hole(s, star, "class")
        k1, k2 = [n for g in s.last_scene.graphs for n in g.nodes if n.node_type == "class"][:2]
        assert [t.functor for t in allowed_edge_types(s, k1.node_id, k2.node_id)] == ["assoc"]
        dispatch(s, EdgeDrag(k1.node_id, k2.node_id))
        assocs = s.abstract.children[1]
        assert len(assocs.children) == 1 and assocs.children[0].functor == "assoc"

        uc = load_language(USE_CASES)
        su = new_session(uc, "sys")
        star_a = session_holes(su, "star:sys:0")[0]
        star_c = session_holes(su, "star:sys:1")[0]
        expand_hole(su, star_a, "actor")
        expand_hole(su, star_c, "ucase")
        expand_hole(su, star_c, "ucase")
        actor = [n for g in su.last_scene.graphs for n in g.nodes if n.node_type == "actor"][0]
        u1, u2 = [n for g in su.last_scene.graphs for n in g.nodes if n.node_type == "use-case"][:2]
        assert [t.functor for t in allowed_edge_types(su, actor.node_id, u1.node_id)] == ["uses"]
        assert allowed_edge_types(su, u1.node_id, actor.node_id) == []
        assert [t.functor for t in allowed_edge_types(su, u1.node_id, u2.node_id)] == ["includes", "extends"]
        # no admissible type: dropped without a trace
        before = su.abstract
        dispatch(su, EdgeDrag(u1.node_id, actor.node_id))
        assert su.abstract is before and su.pending_menu is None and not su.diagnostics
        # several: the user must choose via a menu
        dispatch(su, EdgeDrag(u1.node_id, u2.node_id))
        assert [l for l, _ in su.pending_menu.entries] == ["includes", "extends"]
        # exactly one: the edge is created directly
        dispatch(su, EdgeDrag(actor.node_id, u1.node_id))
        links = su.abstract.children[2]
        assert len(links.children) == 1
        assert links.children[0].children[0].functor == "uses"


# --- 8. rewrite properties ---------------------------------------------------------------


def brute_force_splits(n, shape):
    seg_positions = [i for i, isseg in enumerate(shape) if isseg]
    fixed = len(shape) - len(seg_positions)
    if n < fixed:
        return
    candidates = []
    for lengths in itertools.product(range(n + 1), repeat=len(seg_positions)):
        if sum(lengths) != n - fixed:
            continue
        out, pos, li = [], 0, 0
        for isseg in shape:
            if isseg:
                out.append((pos, pos + lengths[li]))
                pos += lengths[li]
                li += 1
            else:
                out.append(pos)
                pos += 1
        candidates.append((lengths, out))
    for _, out in sorted(candidates, key=lambda c: c[0]):
        yield out


def test_rewrite_properties():
    with criterion("rewrite: sound convergence, oracle splits, identity-blind equality, id round trip"):
        # (a) convergence flag soundness on 1,000 random instances
        rng = random.Random(202)
        for _ in range(1000):
            d = random_rules(rng)
            t = random_term(rng)
            outcome = rewrite_fixpoint(d.transform_rules, t, Fuel(60), d)
            if outcome.converged:
                assert apply_rules_once(d.transform_rules, outcome.result, d) is None

        # (b) split enumeration against the brute-force oracle
        for length in range(0, 6):
            for bits in itertools.product([False, True], repeat=length):
                if sum(bits) > 3:
                    continue
                for n in range(0, 7):
                    assert list(enumerate_splits(n, list(bits))) == list(brute_force_splits(n, list(bits)))

        # (c) non-linear patterns are identity-blind
        pat = parse_pattern(read_one("(f x x)"))
        a1 = make_compound("a", None, [])
        a2 = make_compound("a", None, [])
        assert a1.identity != a2.identity
        assert match_pattern(pat, make_compound("f", None, [a1, a2]), {}) is not None

        # (d) designated identities round-trip through identity patterns
        d = load_language("(deflang t (abstract [x (x)]))")
        env = match_pattern(parse_pattern(read_one("((box i) x)")),
                            term_from_source('((box "b" 3) (y))'), {})
        rebuilt = eval_expr(parse_expr(read_one("((box i) (z))")), env, d)
        assert rebuilt.identity == Identity((string_atom("b"), int_atom(3)))
        env2 = match_pattern(parse_pattern(read_one("((box j) y)")), rebuilt, {})
        assert structurally_equal(env2["j"].term, env["i"].term)


# --- 9. persistence -----------------------------------------------------------------------


def test_persistence(tmp_path, corpus):
    with criterion("persistence: 1,000 random terms and all corpus snapshots round-trip canonically"):
        rng = random.Random(99)
        from projed.terms import bool_atom, char_atom

        def rnd_term(depth=3):
            if depth == 0 or rng.random() < 0.3:
                return rng.choice([
                    string_atom(f"s{rng.randrange(20)}"),
                    int_atom(rng.randrange(-9, 9)),
                    bool_atom(rng.random() < 0.5),
                    char_atom(chr(rng.randrange(33, 127))),
                ])
            return make_compound(rng.choice("fgh"), None,
                                 [rnd_term(depth - 1) for _ in range(rng.randrange(0, 4))])

        for _ in range(1000):
            t = rnd_term()
            doc = save_term(t)
            assert load_term(doc) == t
            assert save_term(t) == doc

        for name, start, load in CORPUS_RUNS:
            out = tmp_path / name
            args = ["run", str(bundled_language_path(name)), start,
                    str(SCRIPTS / f"{name}.script"), "--out", str(out)]
            if load:
                args += ["--load", str(load)]
            assert main(args) == 0
            d = corpus[name]
            for pxml in sorted(out.glob("*.pxml")):
                doc = pxml.read_text()
                s = load_session(doc, d)
                assert save_session(s) == doc
                assert s.abstract == load_session(save_session(s), d).abstract


# --- 10. replay determinism ------------------------------------------------------------------


def test_replay_determinism(tmp_path):
    with criterion("determinism: every corpus script replays to byte-identical snapshots"):
        for name, start, load in CORPUS_RUNS:
            outs = []
            for attempt in ("a", "b"):
                out = tmp_path / f"{name}-{attempt}"
                args = ["run", str(bundled_language_path(name)), start,
                        str(SCRIPTS / f"{name}.script"), "--out", str(out)]
                if load:
                    args += ["--load", str(load)]
                assert main(args) == 0
                outs.append(out)
            a, b = outs
            names = sorted(p.name for p in a.iterdir())
            assert names == sorted(p.name for p in b.iterdir())
            for fname in names:
                assert (a / fname).read_bytes() == (b / fname).read_bytes(), (name, fname)


# --- 11. the dungeon game ---------------------------------------------------------------------


def test_game_scenario(dungeon):
    with criterion("dungeon: build two rooms, play through n/u/s, play mode is pure text"):
        from projed.session import expand_hole, menu_reply

        s = new_session(dungeon, "game")
        star = session_holes(s, "star:")[0]
        expand_hole(s, star, "room")
        expand_hole(s, session_holes(s, "or:")[0], "blue")
        expand_hole(s, session_holes(s, "or:")[0], "empty")
        expand_hole(s, star, "room")
        expand_hole(s, session_holes(s, "or:")[0], "green")
        expand_hole(s, session_holes(s, "or:")[0], "cage")
        expand_hole(s, session_holes(s, "or:")[0], "red")
        expand_hole(s, session_holes(s, "or:")[0], "blue")
        rooms = [n for g in s.last_scene.graphs for n in g.nodes if n.node_type == "room"]
        dispatch(s, EdgeDrag(rooms[0].node_id, rooms[1].node_id))
        menu_reply(s, "north")

        def here_colour():
            text = render_text(s.last_scene)
            return next(l for l in text.splitlines() if "You are in" in l)

        dispatch(s, KeyPressed(None, "p"))
        assert "blue" in here_colour()
        scene = s.last_scene
        assert scene.graphs == []
        assert all(p.kind == "text" for p in scene.primitives)

        dispatch(s, KeyPressed(None, "u"))  # nothing to unlock here
        keys_line = [l for l in render_text(s.last_scene).splitlines() if l.startswith("Keys")][0]
        assert keys_line == "Keys: red"

        dispatch(s, KeyPressed(None, "n"))
        assert "green" in here_colour()
        assert "red cage" in render_text(s.last_scene)

        dispatch(s, KeyPressed(None, "u"))  # red key opens the red cage
        text = render_text(s.last_scene)
        assert "opened cage" in text.lower()
        keys_line = [l for l in text.splitlines() if l.startswith("Keys")][0]
        assert keys_line == "Keys: red blue"

        dispatch(s, KeyPressed(None, "s"))
        assert "blue" in here_colour()
        assert not s.diagnostics
