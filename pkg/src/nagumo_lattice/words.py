"""Type words over the alphabet {0, a, 1} and their symmetry actions.

A word names the d = 0 lattice root from which an equilibrium branch of the
periodic Nagumo problem bifurcates.  Indexing is 1-based and cyclic, so that
``w[i]`` is the letter at position mod(i, n) with mod taking values in
{1, ..., n}; ``w[0]`` is therefore the last letter.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "Letter",
    "Word",
    "WordClass",
    "Order",
    "shift",
    "reflect",
    "invert01",
    "lyndon_representative",
    "word_class",
    "partial_order",
    "differ_at_exactly_one",
    "periodic_extend",
    "primitive_root",
    "intermediate_stable_words",
    "binary_words",
    "lyndon_words",
]


class Letter(enum.IntEnum):
    """Alphabet letter, ordered ZERO < A < ONE."""

    ZERO = 0
    A = 1
    ONE = 2

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]

    def value_at(self, a: float) -> float:
        """Numerical value of the letter when the placeholder stands for ``a``."""
        if self is Letter.ZERO:
            return 0.0
        if self is Letter.ONE:
            return 1.0
        return float(a)


_SYMBOLS = {Letter.ZERO: "0", Letter.A: "a", Letter.ONE: "1"}
_PARSE = {v: k for k, v in _SYMBOLS.items()}


@dataclass(frozen=True)
class Word:
    letters: tuple[Letter, ...]

    def __post_init__(self):
        if len(self.letters) == 0:
            raise ValueError("a word needs at least one letter")
        object.__setattr__(self, "letters", tuple(Letter(x) for x in self.letters))

    @classmethod
    def parse(cls, text: "str | Word") -> "Word":
        if isinstance(text, Word):
            return text
        try:
            return cls(tuple(_PARSE[ch] for ch in text))
        except KeyError as exc:
            raise ValueError(f"invalid letter {exc.args[0]!r} in word {text!r}; "
                             "only '0', 'a', '1' are allowed") from None

    def __str__(self) -> str:
        return "".join(x.symbol for x in self.letters)

    def __repr__(self) -> str:
        return f"Word('{self}')"

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __getitem__(self, i: int) -> Letter:
        # 1-based cyclic index, mod(i, n) in {1, ..., n}
        return self.letters[(i - 1) % len(self.letters)]

    @property
    def n(self) -> int:
        return len(self.letters)

    def is_binary(self) -> bool:
        return Letter.A not in self.letters

    def count(self, letter: Letter) -> int:
        return self.letters.count(letter)

    def lex_key(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.letters)

    def values(self, a: float) -> np.ndarray:
        """The lattice point w|_a in {0, a, 1}^n."""
        return np.array([x.value_at(a) for x in self.letters], dtype=float)


def _as_word(w) -> Word:
    return Word.parse(w)


def shift(w, k: int) -> Word:
    """Coordinate shift T_k: result_i = w_{mod(i+k, n)}."""
    w = _as_word(w)
    if k < 0:
        raise ValueError("shift amount must be non-negative")
    n = len(w)
    k %= n
    return Word(w.letters[k:] + w.letters[:k])


def reflect(w) -> Word:
    """Reflection R: result_i = w_{mod(1-i, n)}."""
    w = _as_word(w)
    return Word(tuple(w[1 - i] for i in range(1, len(w) + 1)))


def invert01(w) -> Word:
    """Swap 0 and 1 letterwise, leaving the placeholder a fixed."""
    w = _as_word(w)
    swap = {Letter.ZERO: Letter.ONE, Letter.A: Letter.A, Letter.ONE: Letter.ZERO}
    return Word(tuple(swap[x] for x in w.letters))


def lyndon_representative(w) -> Word:
    """Lexicographically smallest member of the shift orbit of ``w``."""
    w = _as_word(w)
    return min((shift(w, k) for k in range(len(w))), key=Word.lex_key)


@dataclass(frozen=True)
class WordClass:
    """Shift class of a word; ``members`` lists distinct shifts in order of k."""

    representative: Word
    members: tuple[Word, ...]

    def __contains__(self, w) -> bool:
        return _as_word(w) in self.members

    def __len__(self) -> int:
        return len(self.members)


def word_class(w) -> WordClass:
    w = _as_word(w)
    members = []
    for k in range(len(w)):
        s = shift(w, k)
        if s not in members:
            members.append(s)
    return WordClass(lyndon_representative(w), tuple(members))


class Order(enum.Enum):
    LESS_EQ = "LESS_EQ"
    GREATER_EQ = "GREATER_EQ"
    EQUAL = "EQUAL"
    INCOMPARABLE = "INCOMPARABLE"


def _check_lengths(wa: Word, wb: Word) -> None:
    if len(wa) != len(wb):
        raise ValueError(f"length mismatch: {wa} has length {len(wa)}, "
                         f"{wb} has length {len(wb)}")


def partial_order(wa, wb) -> Order:
    """Componentwise order induced by 0 < a < 1."""
    wa, wb = _as_word(wa), _as_word(wb)
    _check_lengths(wa, wb)
    if wa == wb:
        return Order.EQUAL
    le = all(x <= y for x, y in zip(wa, wb))
    ge = all(x >= y for x, y in zip(wa, wb))
    if le:
        return Order.LESS_EQ
    if ge:
        return Order.GREATER_EQ
    return Order.INCOMPARABLE


def hamming(wa, wb) -> int:
    wa, wb = _as_word(wa), _as_word(wb)
    _check_lengths(wa, wb)
    return sum(x != y for x, y in zip(wa, wb))


def differ_at_exactly_one(wa, wb) -> bool:
    return hamming(wa, wb) == 1


def periodic_extend(w, n: int) -> Word:
    w = _as_word(w)
    if n % len(w):
        raise ValueError(f"length {len(w)} of {w} does not divide {n}")
    return Word(w.letters * (n // len(w)))


def primitive_root(w) -> Word:
    """Shortest word whose periodic extension is ``w``."""
    w = _as_word(w)
    n = len(w)
    for p in range(1, n + 1):
        if n % p == 0 and w.letters[:p] * (n // p) == w.letters:
            return Word(w.letters[:p])
    return w  # pragma: no cover


def intermediate_stable_words(w_minus, w_plus) -> set[Word]:
    """Binary words strictly between two ordered binary words."""
    lo, hi = _as_word(w_minus), _as_word(w_plus)
    _check_lengths(lo, hi)
    if not (lo.is_binary() and hi.is_binary()):
        raise ValueError("endpoints must be binary words")
    if partial_order(lo, hi) not in (Order.LESS_EQ, Order.EQUAL):
        raise ValueError(f"{lo} and {hi} are not ordered componentwise")
    free = [i for i in range(len(lo)) if lo.letters[i] != hi.letters[i]]
    out = set()
    for bits in itertools.product((Letter.ZERO, Letter.ONE), repeat=len(free)):
        letters = list(lo.letters)
        for i, b in zip(free, bits):
            letters[i] = b
        w = Word(tuple(letters))
        if w != lo and w != hi:
            out.add(w)
    return out


def binary_words(n: int) -> list[Word]:
    return [Word(t) for t in itertools.product((Letter.ZERO, Letter.ONE), repeat=n)]


def all_words(n: int) -> list[Word]:
    return [Word(t) for t in itertools.product(tuple(Letter), repeat=n)]


def lyndon_words(words: Iterable[Word]) -> list[Word]:
    """Distinct class representatives among ``words``, in lexicographic order."""
    reps = {lyndon_representative(w) for w in words}
    return sorted(reps, key=Word.lex_key)


def lcm_length(*words) -> int:
    return math.lcm(*(len(_as_word(w)) for w in words))
