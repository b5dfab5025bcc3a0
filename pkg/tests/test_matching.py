import itertools

import pytest

from projed.langdef import Segment, load_language, parse_expr, parse_pattern, term_from_source
from projed.matching import (
    EvalError,
    CaseExhausted,
    Multi,
    Single,
    apply_local,
    enumerate_splits,
    eval_expr,
    match_pattern,
    segment_shape,
)
from projed.sexpr import read_one
from projed.terms import (
    Identity,
    fresh_identity,
    int_atom,
    string_atom,
    structurally_equal,
    term_text,
)

EMPTY = load_language("(deflang empty (abstract [x (x)]))")


def pat(src):
    return parse_pattern(read_one(src))


def ex(src):
    return parse_expr(read_one(src))


def match(psrc, tsrc, env=None):
    return match_pattern(pat(psrc), term_from_source(tsrc), env or {})


def test_plain_compound_match():
    assert match("(a)", "(a)") == {}
    assert match("(a)", "(c)") is None


def test_functor_and_arity_must_agree():
    assert match("(f x y)", "(f (a) (b) (c))") is None
    assert match("(g x)", "(f (a))") is None


def test_nonlinear_variables_require_structural_equality():
    env = match("(subst new old (ident old))", '(subst (const "1") "x" (ident "x"))')
    assert env is not None
    assert term_text(env["new"].term) == "(const '1')"
    assert env["old"].term == string_atom("x")
    assert match("(subst new old (ident old))", '(subst (const "1") "x" (ident "y"))') is None


def test_nonlinear_equality_is_identity_blind():
    env = match("(f x x)", "(f (a) (a))")
    assert env is not None  # the two (a) have distinct identities


def test_segment_split_example():
    env = match('(node c1 ... (data "x") c2 ...)', '(node (data "a") (data "x") (data "b"))')
    assert env is not None
    assert [term_text(b.term) for b in env["c1"].items] == ["(data 'a')"]
    assert [term_text(b.term) for b in env["c2"].items] == ["(data 'b')"]


def test_segment_takes_first_successful_split():
    # two (data "x") children: the earlier one is removed by the idiom
    env = match('(node c1 ... (data "x") c2 ...)', '(node (data "x") (data "x"))')
    assert len(env["c1"].items) == 0 and len(env["c2"].items) == 1


def test_identity_pattern_parts():
    env = match('((box "b" i) x)', '((box "b" 3) (y))')
    assert env["i"].term == int_atom(3)
    assert match('((box "q" i) x)', '((box "b" 3) (y))') is None


def test_single_identity_pattern_reifies_composite():
    env = match("((box i) x)", '((box "b" 3) (y))')
    lst = env["i"].term
    assert lst.functor == "list"
    assert [a.value for a in lst.children] == ["b", 3]


def test_hole_matches_hole_pattern():
    from projed.terms import Hole

    h = Hole(fresh_identity(), "or:x:0")
    env = match_pattern(pat("((hole i) h)"), h, {})
    assert env is not None
    assert env["i"].term == h.identity.parts[0]
    # and the bound mark is opaque to further hole patterns
    assert match_pattern(pat("((hole _) h2)"), env["h"].term, {}) is None


def test_wildcard_binds_nothing():
    assert match("(f _ _)", "(f (a) (b))") == {}


def test_variable_repeated_across_runs_requires_equal_runs():
    env = match("(f x ... (g) x ...)", "(f (a) (b) (g) (a) (b))")
    assert env is not None
    assert [term_text(b.term) for b in env["x"].items] == ["(a)", "(b)"]
    assert match("(f x ... (g) x ...)", "(f (a) (g) (b))") is None
    assert match("(f x ... (g) x ...)", "(f (g))") == {"x": Multi(())}


def test_depth_two_splice_round_trips():
    env = match("(f (g x ...) ...)", "(f (g (a) (b)) (g (c)))")
    assert env["x"].depth == 2
    out = eval_expr(ex("(f (h x ...) ...)"), env, EMPTY)
    assert term_text(out) == "(f (h (a) (b)) (h (c)))"


# --- split enumeration against a brute-force oracle ------------------------


def oracle_splits(n, shape):
    """All assignments, ordered lexicographically by run lengths."""
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
    candidates.sort(key=lambda c: c[0])
    for _, out in candidates:
        yield out


def all_shapes(max_len=5, max_segs=3):
    for length in range(0, max_len + 1):
        for bits in itertools.product([False, True], repeat=length):
            if sum(bits) <= max_segs:
                yield list(bits)


def test_enumerate_splits_matches_oracle_everywhere():
    for shape in all_shapes():
        for n in range(0, 7):
            got = list(enumerate_splits(n, shape))
            want = list(oracle_splits(n, shape))
            assert got == want, (n, shape)


def test_split_example_order_from_three_children():
    shape = segment_shape((Segment(None), None, Segment(None)))
    splits = list(enumerate_splits(3, shape))
    assert splits == [
        [(0, 0), 0, (1, 3)],
        [(0, 1), 1, (2, 3)],
        [(0, 2), 2, (3, 3)],
    ]


def test_zero_children_single_segment():
    assert list(enumerate_splits(0, [True])) == [[(0, 0)]]


def test_two_segments_have_n_plus_one_candidates():
    for n in range(7):
        assert len(list(enumerate_splits(n, [True, True]))) == n + 1


# --- evaluation -------------------------------------------------------------


def test_splice_single_variable():
    env = {"letter": Multi((Single(term_from_source("(a)")), Single(term_from_source("(c)"))))}
    out = eval_expr(ex("(seq letter ...)"), env, EMPTY)
    assert term_text(out) == "(seq (a) (c))"


def test_splice_two_runs():
    env = {
        "c1": Multi((Single(term_from_source('(data "a")')),)),
        "c2": Multi((Single(term_from_source('(data "b")')),)),
    }
    out = eval_expr(ex("(node c1 ... c2 ...)"), env, EMPTY)
    assert term_text(out) == "(node (data 'a') (data 'b'))"


def test_designated_identity_construction():
    env = {"i": Single(int_atom(7))}
    out = eval_expr(ex('((box i) (border 1) (centre "x"))'), env, EMPTY)
    assert out.identity == Identity((int_atom(7),))


def test_identity_designation_round_trips_composite():
    env = match("((box i) x)", '((box "b" 3) (y))')
    rebuilt = eval_expr(ex("((box i) (z))"), env, EMPTY)
    assert rebuilt.identity == Identity((string_atom("b"), int_atom(3)))


def test_identity_part_must_be_atomic():
    env = {"i": Single(term_from_source("(pair (a) (b))"))}
    with pytest.raises(EvalError):
        eval_expr(ex("((box i) (z))"), env, EMPTY)


def test_construction_coins_fresh_identity():
    a = eval_expr(ex("(f)"), {}, EMPTY)
    b = eval_expr(ex("(f)"), {}, EMPTY)
    assert a.identity != b.identity


def test_multi_variable_outside_splice_rejected():
    env = {"x": Multi((Single(term_from_source("(a)")),))}
    with pytest.raises(EvalError):
        eval_expr(ex("(f x)"), env, EMPTY)


def test_depth_zero_spliced_rejected():
    env = {"x": Single(term_from_source("(a)"))}
    with pytest.raises(EvalError):
        eval_expr(ex("(f x ...)"), env, EMPTY)


def test_zip_length_mismatch_rejected():
    env = {
        "a": Multi((Single(term_from_source("(x)")),)),
        "b": Multi((Single(term_from_source("(x)")), Single(term_from_source("(y)")))),
    }
    with pytest.raises(EvalError):
        eval_expr(ex("(f (pair a b) ...)"), env, EMPTY)


def test_unbound_variable_rejected():
    with pytest.raises(EvalError):
        eval_expr(ex("(f missing)"), {}, EMPTY)


def test_case_first_match_wins_and_extends_env():
    env = {"outer": Single(string_atom("O"))}
    out = eval_expr(ex('(case (m (a)) [(m x) (pair x outer)])'), env, EMPTY)
    assert term_text(out) == "(pair (a) 'O')"


def test_case_exhaustion_names_subject():
    with pytest.raises(CaseExhausted) as e:
        eval_expr(ex("(case (weird) [(m x) x])"), {}, EMPTY)
    assert "weird" in str(e.value)


def test_match_eval_round_trip_on_ground_patterns():
    for src in ["(a)", "(f (g) (h (a)))", '(node "x" 3 #t)']:
        built = eval_expr(ex(src), {}, EMPTY)
        assert match_pattern(pat(src), built, {}) == {}


# --- locals -----------------------------------------------------------------

LOCALS = load_language("""
(deflang locals-demo
  (abstract [x (x)])
  (locals
   [(down-font n d) (case n [0 d] [_ (font (-) (down-font (- n 1) d))])]
   [(type-name t)
    (case t [(string) "String"] [(integer) "Integer"] [(boolean) "Boolean"])]
   [(remove-xs n)
    (case n
      [(node c1 ... (data "x") c2 ...) (remove-xs (node c1 ... c2 ...))]
      [(node c ...) (node (remove-xs c) ...)]
      [(data s) (data s)])]))
""")


def test_down_font_base_case():
    out = apply_local(LOCALS, "down-font", [int_atom(0), term_from_source("(d)")], {})
    assert term_text(out) == "(d)"


def test_down_font_unfolds_twice():
    out = apply_local(LOCALS, "down-font", [int_atom(2), string_atom("x")], {})
    assert term_text(out) == "(font (-) (font (-) 'x'))"


def test_type_name():
    out = apply_local(LOCALS, "type-name", [term_from_source("(string)")], {})
    assert out == string_atom("String")


def test_remove_xs_removes_all_x_children():
    subject = term_from_source('(node (data "x") (data "y") (data "x"))')
    out = apply_local(LOCALS, "remove-xs", [subject], {})
    assert term_text(out) == "(node (data 'y'))"


def test_local_arity_mismatch():
    with pytest.raises(EvalError):
        apply_local(LOCALS, "type-name", [int_atom(1), int_atom(2)], {})


def test_local_parameter_failure():
    with pytest.raises(CaseExhausted):
        apply_local(LOCALS, "type-name", [term_from_source("(float)")], {})


def test_nonlinear_across_parameters():
    d = load_language("""
    (deflang t (abstract [x (x)])
      (locals [(find i (rooms r1 ... ((room i) c) r2 ...)) c]))
    """)
    rooms = term_from_source('(rooms ((room 1) (red)) ((room 2) (blue)))')
    out = apply_local(d, "find", [int_atom(2), rooms], {})
    assert term_text(out) == "(blue)"
    with pytest.raises(EvalError):
        apply_local(d, "find", [int_atom(9), rooms], {})


def test_value_local_reference():
    d = load_language("(deflang t (abstract [x (x)]) (locals [greeting \"hi\"]))")
    out = eval_expr(ex("(f greeting)"), {}, d)
    assert term_text(out) == "(f 'hi')"


def test_fresh_str_expression_mints_string_hole():
    from projed.terms import Hole

    out = eval_expr(ex("(assoc str)"), {}, EMPTY)
    inner = out.children[0]
    assert isinstance(inner, Hole) and inner.clause.startswith("str:")
    assert inner.display.value == ""
