"""Acceptance suite: one test per criterion, exact comparisons only.

The session summary prints a PASS/FAIL line per criterion.
"""

import itertools
import random

import pytest

from csu import fixtures
from csu.cs_encoding import (
    apply_hom,
    build_bracket_alphabet,
    build_homomorphism,
    check_local_conditions,
    decode_dyck,
    dyck_encodings,
    emit_local_formula,
    encode_tree,
    format_dyck,
    is_dyck,
)
from csu.fo_match import (
    build_psi_g,
    enumerate_matchings,
    matching_from_tree,
    satisfying_matchings,
    unambiguity_probe,
    words_up_to,
)
from csu.formula import WordModel, compile_formula, eval_formula
from csu.grammar import DerivationTree, parse_grammar
from csu.normalize import eliminate_short_productions, make_patterns_injective, to_double_greibach
from csu.parse_oracle import count_trees, earley_recognize, enumerate_trees, yield_of

from oracles import all_dyck_words, brute_force_matchings

WORD = "aaabbababba"
W_D = "2 4 9 ~9 ~4 5 ~5 ~2"
M_T = ((1, 11), (2, 5), (3, 4), (8, 9))


def report(n, ok, detail=""):
    print(f"[criterion {n}] {'PASS' if ok else 'FAIL'} {detail}".rstrip())
    assert ok, detail


def worked_tree():
    return DerivationTree((0, 2), (DerivationTree((1, 2), (DerivationTree((2, 1)),)), DerivationTree((2, 1))))


@pytest.mark.criterion(1, title="bracket alphabet of the worked grammar")
def test_c1_bracket_alphabet(worked):
    got = [b.tuple for b in build_bracket_alphabet(worked)]
    expected = [
        (0, 0, 1, 1, 0, 1),
        (0, 0, 1, 1, 0, 2),
        (0, 2, 2, 1, 1, 1),
        (0, 2, 2, 1, 1, 2),
        (0, 2, 2, 2, 2, 1),
        (1, 1, 2, 1, 1, 1),
        (1, 1, 2, 1, 1, 2),
        (1, 1, 2, 2, 2, 1),
        (1, 2, 1, 1, 2, 1),
    ]
    report(1, got == expected, f"{len(got)} brackets")


@pytest.mark.criterion(2, title="18-entry homomorphism table")
def test_c2_homomorphism(worked):
    alphabet = build_bracket_alphabet(worked)
    h = build_homomorphism(worked, alphabet)
    opens = ["abba", "a", "aa", "a", "ab", "aa", "a", "ab", "ab"]
    closes = ["", "", "ab", "ab", "ba", "ba", "ba", "bb", "b"]
    got_open = ["".join(h[alphabet.from_alias(k)]) for k in range(1, 10)]
    got_close = ["".join(h[alphabet.from_alias(k, opening=False)]) for k in range(1, 10)]
    ok = got_open == opens and got_close == closes and len(h) == 18
    report(2, ok, f"open={got_open} close={got_close}")


@pytest.mark.criterion(3, title="encoding of the worked tree and its image")
def test_c3_encoding(worked):
    trees = enumerate_trees(worked, WORD)
    alphabet = build_bracket_alphabet(worked)
    z = encode_tree(worked_tree(), worked)
    image = "".join(apply_hom(build_homomorphism(worked, alphabet), z))
    ok = trees == [worked_tree()] and format_dyck(z, alphabet, alias=True) == W_D and image == WORD
    report(3, ok, f"{format_dyck(z, alphabet, alias=True)} -> {image}")


@pytest.mark.criterion(4, title="derivation-tree example parses uniquely")
def test_c4_tree_example(tree_grammar):
    trees = enumerate_trees(tree_grammar, "aaababbaabba")
    expected = DerivationTree(
        (0, 1),
        (DerivationTree((1, 1), (DerivationTree((3, 1)), DerivationTree((2, 2)))), DerivationTree((2, 1))),
    )
    ok = trees == [expected] and "".join(yield_of(expected, tree_grammar)) == "aaababbaabba"
    report(4, ok, trees[0].to_sexpr() if trees else "no tree")


@pytest.mark.criterion(5, title="trees of w are in bijection with valid bracket words mapping to w")
@pytest.mark.parametrize("name", ["worked", "tree"])
def test_c5_bijection(name):
    g = fixtures.load(name)
    alphabet = build_bracket_alphabet(g)
    h = build_homomorphism(g, alphabet)
    checked = members = 0
    for w in words_up_to(g.terminals, 12):
        checked += 1
        trees = enumerate_trees(g, w)
        found = list(dyck_encodings(g, w, alphabet))
        encoded = [encode_tree(t, g) for t in trees]
        assert len(found) == len(trees) == count_trees(g, w), w
        assert sorted(found) == sorted(encoded), w
        for z in found:
            assert is_dyck(z) and check_local_conditions(z, g, alphabet)
            assert apply_hom(h, z) == tuple(w)
            t = decode_dyck(z, g, alphabet)
            assert encode_tree(t, g) == z
            assert t in trees
        members += bool(trees)
    report(5, True, f"{name}: {checked} words, {members} members")


@pytest.mark.criterion(6, title="satisfying matchings are exactly the tree matchings")
def test_c6_matching_equivalence(worked):
    assert make_patterns_injective(worked) == worked
    checked = members = 0
    for w in words_up_to(worked.terminals, 12):
        checked += 1
        ms = satisfying_matchings(worked, w)
        trees = enumerate_trees(worked, w)
        tree_ms = [matching_from_tree(t, worked) for t in trees]
        assert earley_recognize(worked, w) == bool(ms), w
        assert count_trees(worked, w) == len(ms), w
        assert set(ms) == set(tree_ms) and len(set(tree_ms)) == len(trees), w
        members += bool(ms)
    report(6, True, f"{checked} words, {members} members")


@pytest.mark.criterion(7, title="unique matching on the unambiguous fixture, witness on the ambiguous one")
def test_c7_probe(worked, ambiguous):
    clean = unambiguity_probe(worked, 12)
    assert clean.ok and clean.records
    assert all(r.trees == r.matchings == 1 for r in clean.records)
    amb = unambiguity_probe(ambiguous, 8)
    witness = [r for r in amb.flagged if r.word == tuple("aabbb")]
    ok = len(witness) == 1 and witness[0].trees == witness[0].matchings == 2
    assert all(r.trees == r.matchings for r in amb.records)
    report(7, ok, f"{len(clean.records)} members clean; {len(amb.flagged)} flagged on the ambiguous fixture")


@pytest.mark.criterion(8, title="floating arc: accepted by the literal sentence only")
def test_c8_strengthening(worked):
    literal = build_psi_g(worked, "literal")
    exact = build_psi_g(worked, "exact")
    floating = M_T + ((6, 7),)
    results = (
        eval_formula(literal, WORD, M_T),
        eval_formula(exact, WORD, M_T),
        eval_formula(literal, WORD, floating),
        eval_formula(exact, WORD, floating),
    )
    report(8, results == (True, True, True, False), f"literal/exact on M_T and M_T+(6,7): {results}")


@pytest.mark.criterion(9, title="matching counts 1,1,2,4,9,21,51,127,323")
def test_c9_matching_counts():
    counts = []
    for n in range(9):
        got = [m.arcs for m in enumerate_matchings(n)]
        assert got == brute_force_matchings(n), n
        counts.append(len(got))
    report(9, counts == [1, 1, 2, 4, 9, 21, 51, 127, 323], str(counts))


@pytest.mark.criterion(10, title="local-condition sentence agrees with the checker")
@pytest.mark.parametrize("name", ["worked", "tree", "ambiguous"])
def test_c10_formula_agreement(name):
    g = fixtures.load(name)
    alphabet = build_bracket_alphabet(g)
    symbols = alphabet.symbols()
    sentence = compile_formula(emit_local_formula(g))

    def agree(z):
        model = WordModel(tuple(b.token() for b in z))
        return sentence(model) == bool(check_local_conditions(z, g, alphabet))

    exhaustive = 0
    for z in all_dyck_words(list(alphabet), 6):
        assert agree(z), z
        exhaustive += 1
    for n in range(5):
        for z in itertools.product(symbols, repeat=n):
            assert agree(z), z
            exhaustive += 1
    rng = random.Random(f"local-{name}")
    positives = 0
    for _ in range(1000):
        z = tuple(rng.choice(symbols) for _ in range(rng.randint(0, 12)))
        assert agree(z), z
    trees = [t for w in words_up_to(g.terminals, 12) for t in enumerate_trees(g, w)][:2000]
    for _ in range(1000):
        z = list(encode_tree(rng.choice(trees), g))
        if rng.random() < 0.5 and len(z) > 1:
            z[rng.randrange(len(z))] = rng.choice(symbols)
        assert agree(tuple(z)), z
        positives += bool(check_local_conditions(tuple(z), g, alphabet))
    report(10, positives > 0, f"{name}: {exhaustive} exhaustive, 2000 random ({positives} valid)")


_GRAMMARS = {
    "short": "start: S\nS -> b X b\nX -> a | c X c\n",
    "double": "start: S\nS -> a X X b | a b\nX -> a | b a X\n",
    "pattern": "start: S\nS -> a X b\nX -> a X b | a b\n",
    "collide": "start: S\nS -> a X b | b Y a\nX -> a Y b | a b\nY -> a X b | b a\n",
    "anbn": "start: S\nS -> a S b | a b\n",
    "dyck": "start: S\nS -> S S | a S b | a b\n",
    "eps-unit": "start: S\nS -> A B | B\nA -> a A |\nB -> b | A b | B b a\n",
}

_CASES = [
    ("eliminate_short", "short"),
    ("eliminate_short", "double"),
    ("eliminate_short", "worked"),
    ("eliminate_short", "ambiguous"),
    ("make_injective", "pattern"),
    ("make_injective", "collide"),
    ("make_injective", "worked"),
    ("make_injective", "ambiguous"),
    ("to_dgnf", "anbn"),
    ("to_dgnf", "dyck"),
    ("to_dgnf", "eps-unit"),
    ("to_dgnf", "tree"),
]

_TRANSFORMS = {
    "eliminate_short": eliminate_short_productions,
    "make_injective": make_patterns_injective,
    "to_dgnf": to_double_greibach,
}


@pytest.mark.criterion(11, title="normalization preserves languages and tree counts")
@pytest.mark.parametrize("transform,name", _CASES)
def test_c11_normalization(transform, name):
    g = fixtures.load(name) if name in fixtures.NAMES else parse_grammar(_GRAMMARS[name])
    h = _TRANSFORMS[transform](g)
    counts = transform != "to_dgnf"
    members = 0
    for w in words_up_to(g.terminals, 10):
        a, b = earley_recognize(g, w), earley_recognize(h, w)
        assert a == b, w
        if counts and a:
            assert count_trees(g, w) == count_trees(h, w), w
        members += a
    report(11, True, f"{transform}({name}): {len(h.productions)} productions, {members} members")
