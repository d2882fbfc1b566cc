import pytest

from ltg_equiv.errors import (EvaluationDepthError, InvalidInputError, OffDomainError,
                              ParseError, UsageError)
from ltg_equiv.group_core import Alphabet, parse_word as w
from ltg_equiv.tree_model import (Axiom, Call, CompatibleMap, Dta, RankedAlphabet, Rule,
                                  Transducer, Tree, check_compatible, dom_member, dta_reduce,
                                  enum_trees, evaluate, evaluate_state, min_tree, min_trees,
                                  parse_tree)

ALPHABET = RankedAlphabet({"f": 2, "g": 1, "k": 0})


def t(text):
    return parse_tree(text, ALPHABET)


def test_parse_and_print_tree():
    tree = t("f(g(k), k)")
    assert tree == Tree("f", (Tree("g", (Tree("k"),)), Tree("k")))
    assert str(tree) == "f(g(k),k)"
    assert tree.depth == 2
    assert t("k").depth == 0


@pytest.mark.parametrize("text", ["", "f(k", "f(k,k))", "f(k)", "z", "k(k)", "f(k;k)"])
def test_parse_tree_errors(text):
    with pytest.raises(ParseError):
        t(text)


def test_ranked_alphabet():
    assert ALPHABET.rank("f") == 2
    assert ALPHABET.max_rank == 2
    assert list(ALPHABET) == ["f", "g", "k"]
    with pytest.raises(InvalidInputError):
        ALPHABET.rank("z")
    with pytest.raises(InvalidInputError):
        RankedAlphabet({"f": -1})


def test_dta_validation():
    with pytest.raises(InvalidInputError):
        Dta(("h0",), {("h0", "f"): ("h0",)}, "h0", ALPHABET)
    with pytest.raises(InvalidInputError):
        Dta(("h0",), {}, "h1", ALPHABET)
    with pytest.raises(InvalidInputError):
        Dta(("h0",), {("h0", "g"): ("h9",)}, "h0", ALPHABET)


def test_dom_member(running_dta):
    assert dom_member(running_dta, "h0", t("f(k,k)"))
    assert dom_member(running_dta, "h0", t("f(g(g(k)),k)"))
    assert not dom_member(running_dta, "h0", t("g(k)"))
    assert dom_member(running_dta, "h1", t("k"))
    assert not dom_member(running_dta, "h1", t("f(k,k)"))


def test_dta_reduce_keeps_a_reduced_automaton(running_dta):
    reduced = dta_reduce(running_dta)
    assert reduced.states == running_dta.states
    assert reduced.delta == running_dta.delta


def test_dta_reduce_drops_empty_and_unreachable_states():
    b = Dta(("h0", "h1", "dead", "far"),
            {("h0", "f"): ("h1", "h1"), ("h0", "g"): ("dead",), ("h1", "k"): (),
             ("dead", "g"): ("dead",), ("far", "k"): ()},
            "h0", ALPHABET)
    reduced = dta_reduce(b)
    assert reduced.states == ("h0", "h1")
    assert reduced.transition("h0", "g") is None
    for tree in enum_trees(b, "h0", 4):
        assert dom_member(reduced, "h0", tree)


def test_dta_reduce_detects_empty_language():
    b = Dta(("h0",), {("h0", "g"): ("h0",)}, "h0", ALPHABET)
    assert dta_reduce(b) is None


def test_min_trees(running_dta):
    trees = min_trees(running_dta)
    assert trees == {"h1": t("k"), "h0": t("f(k,k)")}
    assert min_tree(running_dta, "h0") == t("f(k,k)")
    empty = Dta(("h0", "h1"), {("h0", "k"): (), ("h1", "g"): ("h1",)}, "h0", ALPHABET)
    with pytest.raises(UsageError):
        min_tree(empty, "h1")


def test_enum_trees_examples(running_dta):
    assert list(enum_trees(running_dta, "h1", 2)) == [t("k"), t("g(k)")]
    assert list(enum_trees(running_dta, "h0", 1)) == []
    assert list(enum_trees(running_dta, "h0", 2)) == [t("f(k,k)")]


def test_enum_trees_is_monotone_and_in_domain(running_dta):
    previous = set()
    for depth in range(1, 5):
        trees = list(enum_trees(running_dta, "h0", depth))
        assert len(trees) == len(set(trees))
        assert previous <= set(trees)
        assert all(dom_member(running_dta, "h0", tree) for tree in trees)
        assert all(tree.depth < depth for tree in trees)
        previous = set(trees)
    # three choices per child of f: k, g(k), g(g(k))
    assert len(previous) == 9


def test_enum_trees_orders_by_depth(running_dta):
    depths = [tree.depth for tree in enum_trees(running_dta, "h0", 4)]
    assert depths == sorted(depths)


def test_evaluate_running_example(running):
    assert evaluate(running, t("f(k,k)")) == w("abab")
    assert evaluate(running, t("f(g(k),k)")) == w("ababab")
    assert evaluate_state(running, "q1", t("g(g(k))")) == w("ababa")


def test_evaluate_constant_axiom():
    m = Transducer(ALPHABET, Alphabet(("a", "b")), (), Axiom(w("ab")), {})
    assert evaluate(m, t("f(k,g(k))")) == w("ab")


def test_evaluate_reports_bottom():
    rules = {("q", "f"): Rule.bottom_rule("q", "f"),
             ("q", "g"): Rule("q", "g", (w("a"), w("_")), (Call("q", 1),)),
             ("q", "k"): Rule("q", "k", (w("b"),))}
    m = Transducer(ALPHABET, Alphabet(("a", "b")), ("q",), Axiom(state="q"), rules)
    assert evaluate(m, t("g(g(k))")) == w("aab")
    with pytest.raises(OffDomainError) as info:
        evaluate(m, t("g(f(k,k))"))
    assert info.value.subtree == t("f(k,k)")
    with pytest.raises(EvaluationDepthError):
        evaluate(m, t("g(g(g(k)))"), max_depth=1)


def test_transducer_validation():
    output = Alphabet(("a",))
    leaf = {("q", "k"): Rule("q", "k", (w("a"),))}
    with pytest.raises(InvalidInputError):
        Transducer(ALPHABET, output, ("q",), Axiom(state="q"), leaf)
    with pytest.raises(InvalidInputError):
        Rule("q", "f", (w("a"),), (Call("q", 1),))
    with pytest.raises(InvalidInputError):
        Rule("q", "f", (w("a"), w("a"), w("a")), (Call("q", 1), Call("q", 1)))
    rules = {("q", s): Rule("q", s, (w("b"),)) for s in ALPHABET}
    with pytest.raises(InvalidInputError):
        Transducer(ALPHABET, output, ("q",), Axiom(state="q"), rules)


def test_compatibility(running, running_dta):
    iota = CompatibleMap({"q0": "h0", "q1": "h1", "q2": "h1"})
    violations = check_compatible(running, running_dta, iota)
    # the raw transducer still has rules where the DTA has no transition
    assert any("must be BOTTOM" in v for v in violations)
    assert check_compatible(running, running_dta, CompatibleMap({"q0": "h0"}))


def test_infer_compatible_map(running, running_dta):
    iota = CompatibleMap.infer(running, running_dta)
    assert iota.assignment == {"q0": "h0", "q1": "h1", "q2": "h1"}


def test_infer_rejects_conflicting_assignment(running_dta):
    rules = {("q", "f"): Rule("q", "f", (w("_"), w("_")), (Call("q", 1),)),
             ("q", "g"): Rule("q", "g"), ("q", "k"): Rule("q", "k")}
    m = Transducer(ALPHABET, Alphabet(("a",)), ("q",), Axiom(state="q"), rules)
    with pytest.raises(UsageError):
        CompatibleMap.infer(m, running_dta)
