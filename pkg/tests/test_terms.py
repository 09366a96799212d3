import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from infrewrite import (
    ArityError,
    PositionError,
    Signature,
    Term,
    TermGraph,
    TermSyntaxError,
    UnguardedBinderError,
    apply_substitution,
    bisimilar,
    canonicalize,
    distance,
    metric,
    parse_position,
    parse_term,
    print_term,
    subterm_at,
    truncated_bisimilar,
)
from infrewrite.sampling import random_graph
from infrewrite.terms import (
    Fun,
    Var,
    first_difference,
    format_position,
    positions_to_depth,
    replace_at,
    term_depth,
    variables_of,
)

from oracles import graph_bisimilar, graph_truncated, term_bisimilar, unfold

COMEGA = parse_term("rec x . C(x)")
SIG = Signature({"f": 2, "g": 1, "C": 1, "a": 0, "b": 0})


def P(text, vars=()):
    return parse_term(text, vars=vars)


# -- parsing and printing ----------------------------------------------------


def test_parse_cycle_is_one_node():
    assert COMEGA.nodes == (Fun("C", (0,)),)


def test_parse_constant():
    assert P("a").nodes == (Fun("a", ()),)


def test_unguarded_binder_rejected():
    with pytest.raises(UnguardedBinderError):
        P("rec x . x")


def test_nested_unguarded_binder_rejected():
    with pytest.raises(UnguardedBinderError):
        P("rec x . rec y . x")


@pytest.mark.parametrize("text", ["f(a", "f(a,)", "rec . C(x)", "a b", "", "f(a))"])
def test_syntax_errors(text):
    with pytest.raises(TermSyntaxError):
        P(text)


def test_arity_must_be_consistent():
    with pytest.raises(ArityError):
        P("f(a, f(a))")


def test_signature_closes_the_vocabulary():
    assert parse_term("f(a, b)", sig=SIG) == P("f(a, b)")
    with pytest.raises(TermSyntaxError):
        parse_term("h(a)", sig=SIG)
    with pytest.raises(ArityError):
        parse_term("g(a, b)", sig=SIG)


def test_declared_variables():
    t = P("f(x, C(y))", vars={"x", "y"})
    assert variables_of(t) == {"x", "y"}
    assert variables_of(P("f(x, x)", vars={"x"})) == {"x"}
    assert variables_of(COMEGA) == frozenset()
    # undeclared names are constants
    assert variables_of(P("f(x, C(y))")) == frozenset()


def test_print_examples():
    assert print_term(COMEGA) == "rec %0 . C(%0)"
    assert print_term(P("f(a, b)")) == "f(a, b)"
    assert print_term(P("C(rec x . C(x))")) == "rec %0 . C(%0)"


def test_print_shares_nothing_that_is_not_cyclic():
    t = P("f(g(a), g(a))")
    assert print_term(t) == "f(g(a), g(a))"


def test_print_nested_binders():
    t = P("rec x . f(x, rec y . g(f(x, y)))")
    text = print_term(t)
    assert parse_term(text) == t


def test_two_node_cycle_collapses():
    g = TermGraph({0: Fun("C", (1,)), 1: Fun("C", (0,))}, 0)
    assert canonicalize(g) == COMEGA


def test_rec_cc_is_c_omega():
    assert P("rec x . C(C(x))") == COMEGA
    assert bisimilar(COMEGA, P("rec x . C(C(x))"))


def test_acyclic_graph_gets_shared():
    g = TermGraph({"r": Fun("f", ("l", "m")), "l": Fun("g", ("x",)), "m": Fun("g", ("y",)),
                   "x": Fun("a", ()), "y": Fun("a", ())}, "r")
    t = canonicalize(g)
    assert len(t.nodes) == 3
    assert t == P("f(g(a), g(a))")


def test_canonical_numbering_is_preorder():
    t = P("f(g(b), a)")
    assert t.nodes == (Fun("f", (1, 3)), Fun("g", (2,)), Fun("b", ()), Fun("a", ()))


def test_bisimilar_examples():
    assert not bisimilar(P("C(a)"), P("C(b)"))
    assert bisimilar(P("f(a, b)"), P("f(a, b)"))


def test_variables_differ_from_constants():
    assert P("x", vars={"x"}) != P("x")
    assert P("x", vars={"x"}).is_var


# -- observations ------------------------------------------------------------


def test_truncated_examples():
    ccca = P("C(C(C(a)))")
    assert truncated_bisimilar(ccca, COMEGA, 3)
    assert not truncated_bisimilar(ccca, COMEGA, 4)
    assert truncated_bisimilar(P("a"), P("b"), 0)


def test_distance_examples():
    assert distance(COMEGA, COMEGA) == math.inf
    assert metric(COMEGA, COMEGA) == 0
    assert distance(P("a"), P("C(a)")) == 0
    assert metric(P("a"), P("C(a)")) == 1
    assert distance(P("C(a)"), P("C(C(a))")) == 1
    assert metric(P("C(a)"), P("C(C(a))")) == 0.5


def test_first_difference_matches_levels():
    assert first_difference(P("f(a, C(b))"), P("f(a, C(a))")) == 2


def test_subterm_examples():
    assert subterm_at(P("f(a, b)"), (2,)) == P("b")
    assert subterm_at(COMEGA, (1, 1, 1)) == COMEGA
    with pytest.raises(PositionError):
        subterm_at(P("a"), (1,))
    with pytest.raises(PositionError):
        subterm_at(P("f(a, b)"), (0,))


def test_substitution_examples():
    x = {"x"}
    assert apply_substitution(P("f(x, x)", x), {"x": COMEGA}) == P("f(rec y . C(y), rec y . C(y))")
    assert apply_substitution(P("x", x), {"x": P("a")}) == P("a")
    assert apply_substitution(P("C(a)"), {"x": P("b")}) == P("C(a)")


def test_substitution_into_cycle():
    t = P("rec z . f(x, z)", {"x"})
    assert apply_substitution(t, {"x": P("a")}) == P("rec z . f(a, z)")


def test_positions_examples():
    assert positions_to_depth(COMEGA, 2) == {(), (1,)}
    assert positions_to_depth(P("a"), 5) == {()}
    assert positions_to_depth(P("f(a, b)"), 2) == {(), (1,), (2,)}


def test_replace_at_copies_the_path():
    t = P("f(g(a), g(a))")
    r = replace_at(t, (1, 1), P("b"))
    assert r == P("f(g(b), g(a))")


def test_replace_inside_cycle_unrolls():
    r = replace_at(COMEGA, (1, 1), P("a"))
    assert r == P("C(C(a))")


def test_term_depth():
    assert term_depth(P("a")) == 1
    assert term_depth(P("f(a, g(b))")) == 3
    assert term_depth(COMEGA) == math.inf


def test_positions_text():
    assert format_position(()) == "ε"
    assert format_position((1, 2)) == "1.2"
    for text in ("", "ε", "e", "eps"):
        assert parse_position(text) == ()
    assert parse_position("2.1") == (2, 1)
    with pytest.raises(PositionError):
        parse_position("0")


# -- properties --------------------------------------------------------------

graphs = st.builds(
    lambda seed, n, cyc, var: random_graph(random.Random(seed), SIG, n, ("x",) if var else (), cyc),
    st.integers(0, 10**9), st.integers(1, 6), st.booleans(), st.booleans(),
)


@settings(max_examples=150, deadline=None)
@given(graphs, graphs)
def test_bisimilar_agrees_with_pair_exploration(g, h):
    s, t = canonicalize(g), canonicalize(h)
    expected = graph_bisimilar(g.labels, g.root, h.labels, h.root)
    assert bisimilar(s, t) == expected
    assert bisimilar(g, h) == expected


@settings(max_examples=150, deadline=None)
@given(graphs)
def test_canonical_form_is_bisimilar_and_stable(g):
    t = canonicalize(g)
    assert graph_bisimilar(g.labels, g.root, t.nodes, 0)
    assert canonicalize(t.graph()) == t
    assert len(t.nodes) <= len(g.reachable())


@settings(max_examples=150, deadline=None)
@given(graphs)
def test_print_parse_round_trip(g):
    t = canonicalize(g)
    assert parse_term(print_term(t), vars={"x"}) == t


@settings(max_examples=100, deadline=None)
@given(graphs, graphs, st.integers(0, 8))
def test_truncated_agrees_with_unfolding(g, h, d):
    s, t = canonicalize(g), canonicalize(h)
    assert truncated_bisimilar(s, t, d) == graph_truncated(g.labels, g.root, h.labels, h.root, d)
    assert truncated_bisimilar(s, t, d) == (unfold(s.nodes, 0, d) == unfold(t.nodes, 0, d))


@settings(max_examples=100, deadline=None)
@given(graphs, graphs)
def test_distance_is_an_ultrametric_on_samples(g, h):
    s, t = canonicalize(g), canonicalize(h)
    assert metric(s, t) == metric(t, s)
    assert (metric(s, t) == 0) == (s == t)


@settings(max_examples=100, deadline=None)
@given(graphs, st.integers(0, 10**9))
def test_substitution_commutes_with_head(g, seed):
    t = canonicalize(g)
    sigma = {"x": canonicalize(random_graph(random.Random(seed), SIG, 3))}
    out = apply_substitution(t, sigma)
    if t.is_var:
        assert out == sigma["x"]
    else:
        again = Term.fun(t.head, *(apply_substitution(a, sigma) for a in t.args))
        assert term_bisimilar(out, again)
    assert variables_of(out) == frozenset()


def test_var_label_is_not_a_function():
    assert P("x", {"x"}).label == Var("x")
