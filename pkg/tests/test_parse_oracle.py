import pytest
from hypothesis import given, settings

from csu.errors import CyclicGrammarError, MalformedTreeError, TreeLimitExceeded, UnknownSymbolError
from csu.fo_match import words_up_to
from csu.grammar import DerivationTree, parse_grammar
from csu.parse_oracle import (
    count_trees,
    describe_tree,
    earley_recognize,
    enumerate_trees,
    parse_tree,
    yield_of,
)

from oracles import language_by_generation, leftmost_derivation_count
from strategies import cfg, dgnf, words


def test_recognition_examples(worked, tree_grammar):
    assert earley_recognize(tree_grammar, "aaababbaabba")
    assert earley_recognize(worked, "aaabbababba")
    assert not earley_recognize(worked, "")
    assert not earley_recognize(worked, "aa")


def test_unknown_symbol(worked):
    with pytest.raises(UnknownSymbolError):
        earley_recognize(worked, "abc")


def test_counts(worked):
    assert count_trees(worked, "aaabbababba") == 1
    assert count_trees(worked, "abba") == 1
    assert count_trees(worked, "abab") == 0
    assert enumerate_trees(worked, "abab") == []


def test_ambiguous_witness(ambiguous):
    trees = enumerate_trees(ambiguous, "aabbb")
    assert [t.to_sexpr() for t in trees] == ["(0.1 (1.1))", "(0.2 (2.1))"]
    assert all(yield_of(t, ambiguous) == tuple("aabbb") for t in trees)


def test_limit_is_reported_distinctly(ambiguous):
    with pytest.raises(TreeLimitExceeded) as info:
        enumerate_trees(ambiguous, "aabbb", limit=1)
    assert info.value.total == 2 and len(info.value.trees) == 1
    assert len(enumerate_trees(ambiguous, "aabbb", limit=2)) == 2


@pytest.mark.parametrize("name", ["worked", "tree", "ambiguous"])
def test_recognizer_agrees_with_counter(name, request):
    g = request.getfixturevalue({"worked": "worked", "tree": "tree_grammar", "ambiguous": "ambiguous"}[name])
    for w in words_up_to(g.terminals, 12):
        assert earley_recognize(g, w) == (count_trees(g, w) >= 1)


def test_enumeration_is_deterministic(ambiguous):
    assert enumerate_trees(ambiguous, "aabbb") == enumerate_trees(ambiguous, "aabbb")


def test_yield_examples(worked, tree_grammar):
    fig = parse_tree("(0.1 (1.1 (3.1) (2.2)) (2.1))")
    assert "".join(yield_of(fig, tree_grammar)) == "aaababbaabba"
    t = parse_tree("(0.2 (1.2 (2.1)) (2.1))")
    assert "".join(yield_of(t, worked)) == "aaabbababba"
    single = parse_grammar("start: S\nS -> a")
    assert yield_of(DerivationTree((0, 1)), single) == ("a",)


@pytest.mark.parametrize(
    "text",
    ["(0.2 (1.2) (2.1))", "(0.2 (2.1) (2.1))", "(9.9)", "(0.1 (2.1))"],
)
def test_malformed_trees(worked, text):
    with pytest.raises(MalformedTreeError):
        yield_of(parse_tree(text), worked)


@pytest.mark.parametrize("text", ["", "(0.1", "(x)", "((0.1))", "0.1"])
def test_bad_tree_syntax(text):
    with pytest.raises(MalformedTreeError):
        parse_tree(text)


def test_cycles_are_detected():
    g = parse_grammar("start: S\nS -> S | a\n")
    assert earley_recognize(g, "a")
    with pytest.raises(CyclicGrammarError):
        count_trees(g, "a")


def test_epsilon_and_units_are_recognized():
    g = parse_grammar("start: S\nS -> A B\nA -> a A |\nB -> b | A\n")
    assert earley_recognize(g, "")
    assert earley_recognize(g, "aab")
    assert not earley_recognize(g, "ba")


def test_describe_tree(worked):
    text = describe_tree(parse_tree("(0.1)"), worked)
    assert "S -> a b b a" in text and text.endswith("yield: abba")


@settings(max_examples=60, deadline=None)
@given(cfg(allow_epsilon=False), words(6))
def test_earley_matches_generation(g, w):
    lang = language_by_generation(g, 6)
    assert earley_recognize(g, w) == (tuple(w) in lang)


@settings(max_examples=60, deadline=None)
@given(dgnf(), words(8))
def test_counts_match_leftmost_derivations(g, w):
    n = count_trees(g, w)
    assert n == leftmost_derivation_count(g, w)
    trees = enumerate_trees(g, w)
    assert len(trees) == n
    assert trees == sorted(trees, key=DerivationTree.preorder)
    assert all(yield_of(t, g) == tuple(w) for t in trees)
    assert len({t.preorder() for t in trees}) == n
