import itertools
import logging
import random

import pytest

from ltg_equiv import group_core as gc
from ltg_equiv.errors import UsageError
from ltg_equiv.formats import parse_dta, parse_transducer
from ltg_equiv.group_core import EPSILON, parse_word as w
from ltg_equiv.harness import GenParams, gen_instance
from ltg_equiv.normalizer import make_compatible
from ltg_equiv.periodicity_domain import (EMPTY, TOP, Singleton, alpha_join, alpha_of,
                                          alpha_star, analyze, analyze_iterates, is_trivial, leq,
                                          lift, periodic)
from ltg_equiv.tree_model import CompatibleMap, enum_trees, evaluate_state, min_trees


def test_alpha_of_small_sets():
    assert alpha_of([]) == EMPTY
    assert alpha_of([w("ab")]) == Singleton(w("ab"))
    assert alpha_of([w("a"), w("aba")]) == periodic(w("a"), w("ba"))
    assert alpha_of([EPSILON, w("ab"), w("abab")]) == periodic(EPSILON, w("ab"))
    assert alpha_of([EPSILON, w("a"), w("b")]) == TOP


def test_join_table():
    x = periodic(w("a"), w("ba"))
    assert alpha_join(EMPTY, x) == x
    assert alpha_join(x, EMPTY) == x
    assert alpha_join(x, TOP) == TOP
    assert alpha_join(lift(w("a")), lift(w("a"))) == lift(w("a"))
    assert alpha_join(lift(w("a")), lift(w("aba"))) == x
    assert alpha_join(x, lift(w("ababa"))) == x
    assert alpha_join(lift(w("b")), x) == TOP
    assert alpha_join(x, periodic(w("aba"), w("a-b-"))) == x
    assert alpha_join(x, periodic(EPSILON, w("ab"))) == TOP


def test_star_table():
    x = periodic(w("a"), w("ba"))
    assert alpha_star(EMPTY, TOP) == EMPTY
    assert alpha_star(TOP, x) == TOP
    assert alpha_star(lift(w("a")), lift(w("b"))) == lift(w("ab"))
    assert alpha_star(x, lift(w("b"))) == periodic(EPSILON, w("ab"))
    assert alpha_star(lift(w("b")), x) == periodic(w("ba"), w("ba"))
    assert alpha_star(periodic(EPSILON, w("ab")), x) == periodic(w("a"), w("ba"))
    assert alpha_star(periodic(EPSILON, w("a")), periodic(EPSILON, w("b"))) == TOP


def test_leq():
    x = periodic(w("a"), w("ba"))
    assert leq(EMPTY, x)
    assert leq(x, TOP)
    assert leq(lift(w("aba")), x)
    assert not leq(lift(w("b")), x)
    assert not leq(x, lift(w("a")))
    assert not leq(TOP, x)
    assert leq(x, x)


def test_str_forms():
    assert str(periodic(w("a"), w("ba"))) == "PERIODIC rep=a period=ba"
    assert str(lift(EPSILON)) == "SINGLETON word=_"
    assert str(EMPTY) == "EMPTY"
    assert str(TOP) == "TOP"


def _random_language(rng):
    """Up to eight words of at most five letters, often drawn from a single coset."""
    size = rng.randint(0, 8)
    if rng.random() < 0.5:
        return [gc.reduce(gc.SignedLetter(rng.choice("ab"), rng.random() < 0.5)
                          for _ in range(rng.randint(0, 5)))
                for _ in range(size)]
    g = rng.choice([EPSILON, w("a"), w("b-"), w("ab"), w("ba-")])
    p = rng.choice([w("a"), w("b"), w("ab"), w("ba"), w("b-ab")])
    words = (gc.concat(g, gc.power(p, rng.randint(-2, 2))) for _ in range(size))
    return [word for word in words if len(word) <= 5]


def test_abstraction_commutes_with_union_and_product():
    rng = random.Random(17)
    for _ in range(1000):
        xs, ys = _random_language(rng), _random_language(rng)
        assert alpha_of(xs + ys) == alpha_join(alpha_of(xs), alpha_of(ys))
        products = [gc.concat(x, y) for x, y in itertools.product(xs, ys)]
        assert alpha_of(products) == alpha_star(alpha_of(xs), alpha_of(ys))


def test_analysis_of_running_example(running, running_dta):
    product, iota = make_compatible(running, running_dta)
    result = analyze(product, running_dta, iota)
    assert result == {
        "q0": periodic(EPSILON, w("ab")),
        "q1": periodic(w("a"), w("ba")),
        "q2": periodic(EPSILON, w("ab")),
    }
    assert result["q1"].rep == w("a")
    assert not any(is_trivial(v) for v in result.values())


def test_iterates_abstract_bounded_depth_languages(running, running_dta):
    product, iota = make_compatible(running, running_dta)
    for i, values in enumerate(analyze_iterates(product, running_dta, iota)):
        for q in product.states:
            outputs = [evaluate_state(product, q, tree)
                       for tree in enum_trees(running_dta, iota[q], i)]
            assert values[q] == alpha_of(outputs)


def test_iterates_reach_the_fixpoint_quickly(running, running_dta):
    product, iota = make_compatible(running, running_dta)
    rounds = list(analyze_iterates(product, running_dta, iota))
    assert rounds[0] == {q: EMPTY for q in product.states}
    deepest = max(t.depth for t in min_trees(running_dta).values())
    assert len(rounds) <= 3 * len(product.states) + deepest + 3
    assert rounds[-1] == analyze(product, running_dta, iota)


def test_rule_waits_for_its_unread_children():
    m = parse_transducer("""
        alphabet f:2 g:1 k:0
        output a b
        axiom _ q0 _
        rule q0 f -> bb
        rule q0 g -> BOTTOM
        rule q0 k -> BOTTOM
    """)
    b = parse_dta("""
        alphabet f:2 g:1 k:0
        dta start h0
        delta h0 f -> h1 h1
        delta h1 g -> h2
        delta h2 k ->
    """)
    rounds = list(analyze_iterates(m, b, CompatibleMap({"q0": "h0"})))
    assert [values["q0"] for values in rounds] == [EMPTY, EMPTY, EMPTY, lift(w("bb"))]


@pytest.mark.parametrize("seed", range(50))
def test_iterates_match_enumerated_languages_on_generated_instances(seed, caplog):
    m, b = gen_instance(GenParams(seed=seed, periodic_bias=0.5))
    if m.axiom.state is None:
        return
    iota = CompatibleMap.infer(m, b)
    with caplog.at_level(logging.WARNING, logger="ltg_equiv.periodicity_domain"):
        rounds = list(analyze_iterates(m, b, iota))
    assert "did not stabilise" not in caplog.text
    for q in m.states:
        for i in range(7):
            trees = list(itertools.islice(enum_trees(b, iota[q], i), 3001))
            if len(trees) > 3000:
                break
            outputs = [evaluate_state(m, q, tree) for tree in trees]
            assert rounds[min(i, len(rounds) - 1)][q] == alpha_of(outputs), (q, i)


def test_analysis_requires_compatible_map(running, running_dta):
    with pytest.raises(UsageError):
        analyze(running, running_dta, CompatibleMap({"q0": "h0", "q1": "h1", "q2": "h1"}))


def test_singleton_state_is_trivial(running_dta):
    m = parse_transducer("""
        alphabet f:2 g:1 k:0
        output a b
        axiom _ q0 _
        rule q0 f -> q1:1 q1:2
        rule q0 g -> BOTTOM
        rule q0 k -> BOTTOM
        rule q1 f -> BOTTOM
        rule q1 g -> b b- q1:1
        rule q1 k -> a
    """)
    result = analyze(m, running_dta, CompatibleMap.infer(m, running_dta))
    assert result["q1"] == Singleton(w("a"))
    assert is_trivial(result["q1"])
    assert result["q0"] == Singleton(w("aa"))
