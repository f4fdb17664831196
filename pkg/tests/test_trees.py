import random

import pytest

from wreathlab.errors import BudgetExceededError
from wreathlab.trees import (
    AUT_ID,
    Portrait,
    aut_from_word,
    aut_inv,
    aut_mul,
    aut_serialize,
    aut_vertex_action,
    is_trivial_in_G,
    portrait_mul,
    portrait_of_word,
    vertex_action,
    word_vertex_action,
)
from wreathlab.words import reduce_word, word_inv

rng = random.Random(2024)


def rand_word(n):
    return reduce_word("".join(rng.choice("aAbB") for _ in range(n)))


def rand_vertex(n):
    return "".join(rng.choice("012") for _ in range(n))


def test_defining_action():
    assert vertex_action("a", "0") == "1"
    assert vertex_action("a", "1") == "2"
    assert vertex_action("a", "2") == "0"
    assert vertex_action("b", "01") == "02"  # section a at child 0
    assert vertex_action("b", "11") == "11"  # trivial section at child 1
    assert vertex_action("b", "222") == "222"  # fixes the rightmost ray


def test_right_action_convention():
    # x.(gh) = (x.g).h on random words and vertices
    for _ in range(300):
        u, v = rand_word(8), rand_word(8)
        x = rand_vertex(5)
        assert word_vertex_action(u + v, x) == word_vertex_action(
            v, word_vertex_action(u, x)
        )


def test_canonical_forms_are_a_homomorphism():
    for _ in range(500):
        u, v = rand_word(rng.randint(0, 20)), rand_word(rng.randint(0, 20))
        assert aut_from_word(u + v) == aut_mul(aut_from_word(u), aut_from_word(v))
        assert aut_inv(aut_from_word(u)) == aut_from_word(word_inv(u))


def test_canonical_form_action_matches_word_action():
    for _ in range(200):
        w = rand_word(rng.randint(0, 15))
        k = aut_from_word(w)
        for _ in range(4):
            v = rand_vertex(rng.randint(1, 7))
            assert aut_vertex_action(k, v) == word_vertex_action(w, v)


def test_serialization_is_canonical():
    x = aut_mul(aut_from_word("ab"), aut_from_word("ab"))
    assert aut_serialize(x) == aut_serialize(aut_from_word("abab"))


def test_portrait_examples():
    assert portrait_of_word("aaa", 4).is_identity()
    assert portrait_of_word("bbb", 4).is_identity()
    assert portrait_of_word("b", 3).labels == {"0": 1, "20": 1}
    # b at depth n: labels 1 exactly at 2^k 0 for 0 <= k <= n-2
    for n in (2, 4, 6):
        expect = {"2" * k + "0": 1 for k in range(n - 1)}
        assert portrait_of_word("b", n).labels == expect


def test_portrait_homomorphism_and_action_oracle():
    for _ in range(1000):
        n = rng.randint(1, 6)
        u, v = rand_word(rng.randint(0, 12)), rand_word(rng.randint(0, 12))
        g, h = portrait_of_word(u, n), portrait_of_word(v, n)
        assert portrait_mul(g, h) == portrait_of_word(u + v, n)
        x = rand_vertex(n)
        assert g.act(x) == word_vertex_action(u, x)
        assert g.mul(g.inv()).is_identity()


def test_portrait_is_bijection_per_level():
    for _ in range(50):
        n = rng.randint(1, 5)
        g = portrait_of_word(rand_word(10), n)
        for level in range(1, n + 1):
            vertices = set()
            stack = [""]
            # enumerate the level by digits
            from itertools import product

            for digits in product("012", repeat=level):
                vertices.add(g.act("".join(digits)))
            assert len(vertices) == 3**level


def test_portrait_depth_mismatch_errors():
    g = portrait_of_word("a", 2)
    h = portrait_of_word("a", 3)
    with pytest.raises(ValueError):
        g.mul(h)
    with pytest.raises(ValueError):
        g.act("0000")


def test_portrait_labels_perm_roundtrip():
    for _ in range(100):
        n = rng.randint(1, 5)
        g = portrait_of_word(rand_word(12), n)
        again = Portrait(n, g.labels)
        assert again == g and again.perm() == g.perm()
        from_perm = Portrait.from_perm(n, g.perm())
        assert from_perm.labels == g.labels


def test_triviality_examples():
    assert is_trivial_in_G("")
    assert is_trivial_in_G("aaa")
    assert is_trivial_in_G("bbb")
    assert not is_trivial_in_G("abAB")
    # the commutator moves a level-2 vertex
    assert word_vertex_action("abAB", "00") != "00"


def test_triviality_against_canonical_forms():
    for _ in range(500):
        w = rand_word(rng.randint(0, 14))
        assert is_trivial_in_G(w) == (aut_from_word(w) == AUT_ID)


def test_trivial_words_have_trivial_portraits():
    found = 0
    for _ in range(3000):
        w = rand_word(rng.randint(0, 10))
        if is_trivial_in_G(w):
            found += 1
            for n in (1, 4, 8):
                assert portrait_of_word(w, n).is_identity()
    assert found > 0


def test_budget_is_honoured():
    # a trivial conjugate of a^3: passes the shallow action pre-filter, so the
    # recursion must start, and a zero budget stops it immediately
    w = "abababaaaBABABA"
    with pytest.raises(BudgetExceededError):
        is_trivial_in_G(w, budget=0)
