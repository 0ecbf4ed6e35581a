import pytest
from hypothesis import given, strategies as st

from nagumo_lattice.words import (Letter, Order, Word, binary_words, differ_at_exactly_one,
                                  hamming, intermediate_stable_words, invert01,
                                  lyndon_representative, lyndon_words, partial_order,
                                  periodic_extend, primitive_root, reflect, shift, word_class)

words = st.text(alphabet="0a1", min_size=1, max_size=8).map(Word.parse)
binary = st.text(alphabet="01", min_size=1, max_size=8).map(Word.parse)


def W(s):
    return Word.parse(s)


def test_parse_round_trip_and_one_based_indexing():
    w = W("0a11")
    assert str(w) == "0a11"
    assert w[1] is Letter.ZERO and w[2] is Letter.A
    # cyclic: index 0 is the last letter, n + 1 the first
    assert w[0] is Letter.ONE and w[5] is Letter.ZERO


def test_parse_rejects_bad_letters():
    with pytest.raises(ValueError):
        W("012")
    with pytest.raises(ValueError):
        W("")


def test_shift_examples():
    assert shift("0a11", 1) == W("a110")
    orbit = {shift("0a11", k) for k in range(4)}
    assert orbit == {W("0a11"), W("10a1"), W("110a"), W("a110")}
    assert shift("0101", 2) == W("0101")


def test_reflect_examples():
    assert reflect("001011") == W("110100")
    assert reflect("001011") not in word_class("001011")
    assert reflect("000") == W("000")
    assert reflect("0011") in word_class("0011")


def test_all_short_binary_words_are_reflection_symmetric_up_to_shift():
    # the first chiral binary class appears at length 6
    for n in range(1, 6):
        for w in binary_words(n):
            assert reflect(w) in word_class(w)


def test_invert_examples():
    assert invert01("001") == W("110")
    assert invert01("aaa") == W("aaa")
    assert invert01(invert01("0a1")) == W("0a1")


def test_lyndon_examples():
    assert lyndon_representative("a110") == W("0a11")
    assert lyndon_representative("101") == W("011")
    assert lyndon_representative("1010") == W("0101")


def test_partial_order_examples():
    assert partial_order("0000", "0001") is Order.LESS_EQ
    assert partial_order("001", "010") is Order.INCOMPARABLE
    assert partial_order("0a1", "011") is Order.LESS_EQ
    assert partial_order("011", "0a1") is Order.GREATER_EQ
    assert partial_order("011", "011") is Order.EQUAL
    with pytest.raises(ValueError):
        partial_order("01", "011")


def test_differ_at_exactly_one_examples():
    assert differ_at_exactly_one("0001", "0011")
    assert not differ_at_exactly_one("000", "011")
    assert not differ_at_exactly_one("011", "011")


def test_periodic_extend_examples():
    assert periodic_extend("01", 4) == W("0101")
    assert periodic_extend("0", 3) == W("000")
    assert periodic_extend("001", 6) == W("001001")
    with pytest.raises(ValueError):
        periodic_extend("001", 4)


def test_intermediate_examples():
    mixed = {w for w in binary_words(3) if w not in (W("000"), W("111"))}
    assert intermediate_stable_words("000", "111") == mixed
    assert len(mixed) == 6
    assert intermediate_stable_words("0001", "0011") == set()
    assert intermediate_stable_words("000", "011") == {W("001"), W("010")}


def test_lyndon_class_counts():
    # necklace counts of binary words: 4 for n = 3, 6 for n = 4
    assert len(lyndon_words(binary_words(3))) == 4
    assert len(lyndon_words(binary_words(4))) == 6


@given(words, st.integers(0, 20), st.integers(0, 20))
def test_shift_is_a_group_action(w, j, k):
    assert shift(shift(w, j), k) == shift(w, j + k)
    assert shift(w, len(w)) == w


@given(words)
def test_reflect_and_invert_are_involutions(w):
    assert reflect(reflect(w)) == w
    assert invert01(invert01(w)) == w


@given(words, st.integers(0, 20))
def test_lyndon_is_shift_invariant_and_minimal(w, k):
    r = lyndon_representative(w)
    assert lyndon_representative(shift(w, k)) == r
    assert all(r.lex_key() <= shift(w, i).lex_key() for i in range(len(w)))


@given(words)
def test_primitive_root_extends_back(w):
    r = primitive_root(w)
    assert periodic_extend(r, len(w)) == w
    assert primitive_root(r) == r


@given(binary, st.data())
def test_intermediate_words_are_strictly_between(lo, data):
    hi_bits = data.draw(st.lists(st.booleans(), min_size=len(lo), max_size=len(lo)))
    hi = Word(tuple(Letter.ONE if (b or x is Letter.ONE) else Letter.ZERO
                    for b, x in zip(hi_bits, lo)))
    mids = intermediate_stable_words(lo, hi)
    assert len(mids) == max(0, 2 ** hamming(lo, hi) - 2)
    for m in mids:
        assert partial_order(lo, m) is Order.LESS_EQ
        assert partial_order(m, hi) is Order.LESS_EQ
