import random

from wreathlab.words import (
    FreeWord,
    fp_abelianize,
    fp_inv,
    fp_make,
    fp_mul,
    fp_parse,
    fp_text,
    reduce_word,
    word_inv,
    word_mul,
)


def test_reduce_basics():
    assert reduce_word("") == ""
    assert reduce_word("aA") == ""
    assert reduce_word("abBaAb") == "ab"


def test_free_word_letters_roundtrip():
    w = FreeWord([(1, 1), (2, 1), (1, -1)])
    assert w.chars == "abA"
    assert w.letters == ((1, 1), (2, 1), (1, -1))
    assert FreeWord.parse("a b A").chars == "abA"
    assert w.inv().chars == "aBA"


def test_word_group_laws_random():
    rng = random.Random(42)

    def rand(n):
        return reduce_word("".join(rng.choice("aAbB") for _ in range(n)))

    for _ in range(2000):
        u, v, w = rand(rng.randint(0, 64)), rand(rng.randint(0, 64)), rand(rng.randint(0, 64))
        assert word_mul(word_mul(u, v), w) == word_mul(u, word_mul(v, w))
        assert word_mul(u, word_inv(u)) == ""


def test_fp_normal_form():
    assert fp_make([(0, 1), (0, 2)]) == ()
    assert fp_mul(fp_parse("s t"), fp_parse("t2 s2")) == ()
    assert fp_mul(fp_parse("s t"), fp_parse("t s")) == fp_parse("s t2 s")
    assert fp_text(fp_parse("s t2 s")) == "s t2 s"
    # adjacent syllables always alternate, exponents in {1,2}
    x = fp_make([(0, 1), (1, 4), (1, 2), (0, 5)])
    for (f1, e1), (f2, e2) in zip(x, x[1:]):
        assert f1 != f2
    assert all(e in (1, 2) for _, e in x)


def test_fp_group_laws_random():
    rng = random.Random(7)

    def rand(n):
        return fp_make((rng.randint(0, 1), rng.randint(1, 2)) for _ in range(n))

    for _ in range(10_000):
        x, y, z = rand(rng.randint(0, 32)), rand(rng.randint(0, 32)), rand(rng.randint(0, 32))
        assert fp_mul(fp_mul(x, y), z) == fp_mul(x, fp_mul(y, z))
        assert fp_mul(x, fp_inv(x)) == ()
        ax, ay = fp_abelianize(x), fp_abelianize(y)
        axy = fp_abelianize(fp_mul(x, y))
        assert axy == ((ax[0] + ay[0]) % 3, (ax[1] + ay[1]) % 3)


def test_fp_abelianize_examples():
    assert fp_abelianize(()) == (0, 0)
    assert fp_abelianize(fp_parse("s t2")) == (1, 2)
    assert fp_abelianize(fp_parse("s t s2 t2")) == (0, 0)
