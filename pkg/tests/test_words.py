import itertools

import pytest
from hypothesis import given, settings, strategies as st

from balpres.words import (DyadicAffine, ResourceError, TowerInt, Word, WordError, blocks_to_word,
                           choose_n, cyclic_reduce, exp_tower, free_reduce, g_equal,
                           g_is_trivial, g_reduce, is_reduced, k_equal, k_eval, k_normal_word,
                           parse_blocks, tower_E, tower_cmp, v_decode, v_encode, word)

BS_REL = word("y^-1 x y x^-2")
BG_REL = word("t^-1 x t y^-1")


def words(alphabet, max_size=12):
    letter = st.tuples(st.sampled_from(alphabet), st.sampled_from((1, -1)))
    return st.lists(letter, max_size=max_size).map(Word.from_letters)


kwords = words(["x", "y"])
gwords = words(["x", "y", "t"], 10)


# -- parsing and free reduction ------------------------------------------

def test_parse_and_print():
    w = word("x x y^-1 y x^3")
    assert w.length == 7
    assert str(free_reduce(w)) == "x^5"
    assert str(word("")) == ""


@pytest.mark.parametrize("bad", ["x^", "x^0a", "1x", "x^^2"])
def test_parse_rejects(bad):
    with pytest.raises(WordError):
        word(bad)


@given(kwords)
def test_free_reduce_idempotent(w):
    r = free_reduce(w)
    assert is_reduced(r)
    assert free_reduce(r) == r
    assert free_reduce(w * w.inverse()).is_empty


@given(kwords)
def test_cyclic_reduce_is_conjugate_in_K(w):
    c = cyclic_reduce(w)
    assert c.length <= free_reduce(w).length
    if c.length:
        first, last = c.letters()[0], c.letters()[-1]
        assert first != (last[0], -last[1])


# -- K = BS(1,2) ------------------------------------------------------------

def test_k_relator_is_identity():
    assert k_eval(BS_REL).is_identity()


@given(kwords, kwords)
def test_k_eval_is_homomorphism(u, v):
    assert k_eval(u * v) == k_eval(u).then(k_eval(v))
    assert k_eval(u.inverse()) == k_eval(u).inverse()


@given(kwords)
def test_k_normal_word_represents(w):
    A = k_eval(w)
    assert k_eval(k_normal_word(A)) == A
    assert k_equal(w, k_normal_word(A))


@given(kwords, kwords)
def test_k_relator_conjugates_trivial(u, v):
    w = u * BS_REL * u.inverse() * v * BS_REL.inverse() * v.inverse()
    assert k_eval(w).is_identity()


def test_dyadic_power():
    A = DyadicAffine(1, 3, 2)
    assert A.power(5) == A.then(A).then(A).then(A).then(A)
    assert A.power(-2).then(A.power(2)).is_identity()


# -- G = <x, y, t> --------------------------------------------------------

@given(gwords, gwords)
def test_g_relator_conjugates_trivial(u, v):
    w = u * BG_REL * u.inverse() * v * BS_REL * v.inverse()
    assert g_is_trivial(w)


@given(gwords)
def test_g_reduce_equal_and_stable(w):
    r = g_reduce(w)
    assert g_equal(w, r)
    assert g_reduce(r) == r


def test_g_nontrivial():
    assert not g_is_trivial(word("t"))
    assert not g_is_trivial(word("t x t^-1"))
    assert g_is_trivial(word("t y t^-1 x^-1"))


def test_g_rejects_foreign_generator():
    with pytest.raises(WordError):
        g_is_trivial(word("z"))


def test_bit_budget_enforced(monkeypatch):
    monkeypatch.setenv("BALPRES_BIT_BUDGET", "64")
    with pytest.raises(ResourceError):
        k_eval(word("x y^100"))


# -- block words ------------------------------------------------------------

def test_v_encode_anchor():
    assert v_encode(word("y x y y x y x y")) == (5, 0b10110)


@given(st.lists(st.sampled_from(["y", "yx"]), min_size=1, max_size=12))
def test_v_roundtrip(blocks):
    v = blocks_to_word(blocks)
    assert parse_blocks(v) == blocks
    assert v_decode(*v_encode(v)) == v


def test_block_words_inject_into_K():
    seen = {}
    for B in range(1, 9):
        for bits in itertools.product(("y", "yx"), repeat=B):
            A = k_eval(blocks_to_word(bits))
            assert A not in seen
            seen[A] = bits


def test_parse_blocks_rejects():
    with pytest.raises(WordError):
        parse_blocks(word("x y"))


# -- towers -----------------------------------------------------------------

def _exact(h, b):
    for _ in range(h):
        b = 1 << b
    return b


SMALL = [(h, b) for h in range(4) for b in range(0, 5) if _exact(h, b) < 1 << 70000]


@pytest.mark.parametrize("budget", ["8", "1048576"])
def test_tower_cmp_matches_integers(monkeypatch, budget):
    monkeypatch.setenv("BALPRES_BIT_BUDGET", budget)
    for (h1, b1), (h2, b2) in itertools.product(SMALL, repeat=2):
        x, y = _exact(h1, b1), _exact(h2, b2)
        expect = (x > y) - (x < y)
        assert tower_cmp(exp_tower(h1, b1), exp_tower(h2, b2)) == expect, (h1, b1, h2, b2)


def test_tower_symbolic_heights():
    assert tower_cmp(tower_E(6), tower_E(5)) == 1
    # exp_3(10) = 2^2^1024 lies between E_5 = 2^65536 and E_6 = 2^2^65536
    assert tower_cmp(exp_tower(3, 10), tower_E(5)) == 1
    assert tower_cmp(exp_tower(3, 10), tower_E(6)) == -1
    assert "bit int" in repr(tower_E(5))
    assert TowerInt(3).exact == 3


def test_choose_n():
    r = choose_n(1, 0, 2)
    assert r.n == 6 and r.n_sufficient == 6
    assert choose_n(2, 1, 2).n >= choose_n(2, 0, 2).n
    with pytest.raises(ValueError):
        choose_n(0, 0, 2)


@settings(max_examples=30)
@given(st.integers(1, 60), st.integers(0, 1), st.integers(2, 5))
def test_choose_n_definition(l, m, d):
    # n is minimal with E_{n-1} > d^exp_m(22 l)
    r = choose_n(l, m, d)
    X = exp_tower(m, 22 * l)

    def holds(n):
        # E_{n-1} > d^X  iff  log2 E_{n-1} > X log2 d
        if n - 1 < 1:
            return False
        E = tower_E(n - 1)
        if d == 2:
            return tower_cmp(E, TowerInt(X, 1)) == 1
        if X.height == 0 and E.exact is not None:
            return E.exact > d ** X.base
        return tower_cmp(E, TowerInt(TowerInt(X.base * 3) if X.height == 0 else X, 1)) == 1

    assert holds(r.n)
    if d in (2,) or r.n <= 3:
        assert not holds(r.n - 1)
