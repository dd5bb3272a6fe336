"""Reduced words in a free group of rank n and uniform sampling of them.

Letters are signed integers: ``i`` stands for the generator x_i and ``-i``
for its inverse.  Internally (walk states, vectorised sampling) letters are
also addressed by a dense *letter index* in ``range(2n)`` ordered
x_1, x_1^-1, x_2, x_2^-1, ...; the inverse of index ``a`` is ``a ^ 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "ReducedWord",
    "reduce",
    "cyclically_reduce",
    "concat_reduce",
    "count_reduced",
    "enumerate_reduced",
    "sample_reduced",
    "sample_reduced_indices",
    "letter_to_index",
    "index_to_letter",
]


def letter_to_index(letter: int) -> int:
    return 2 * (abs(letter) - 1) + (letter < 0)


def index_to_letter(index: int) -> int:
    i = index // 2 + 1
    return -i if index & 1 else i


def _check_rank(n: int) -> None:
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise InvalidInputError(f"rank must be an integer >= 2, got {n!r}")


def _check_letters(letters: Sequence[int], n: int) -> None:
    for a in letters:
        if a == 0 or abs(a) > n:
            raise InvalidInputError(f"letter {a} out of range for rank {n}")


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word over ``{±1, ..., ±rank}``.

    Construct through :func:`reduce` unless the letters are known to be
    reduced; the constructor validates but does not reduce.
    """

    letters: tuple[int, ...]
    rank: int

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(int(a) for a in self.letters))
        _check_rank(self.rank)
        _check_letters(self.letters, self.rank)
        for a, b in zip(self.letters, self.letters[1:]):
            if a == -b:
                raise InvalidInputError(f"word {self.letters} is not reduced")

    def __len__(self):
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __str__(self):
        return " ".join(str(a) for a in self.letters)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return concat_reduce(self, other)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(-a for a in reversed(self.letters)), self.rank)

    def indices(self) -> np.ndarray:
        return np.array([letter_to_index(a) for a in self.letters], dtype=np.int64)

    @classmethod
    def parse(cls, text: str, rank: int) -> "ReducedWord":
        """Parse the space separated form, e.g. ``"1 2 -1"``; reduces the input."""
        try:
            letters = [int(tok) for tok in text.split()]
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse word {text!r}") from exc
        return reduce(letters, rank)

    @classmethod
    def identity(cls, rank: int) -> "ReducedWord":
        return cls((), rank)


def reduce(letters: Iterable[int], n: int) -> ReducedWord:
    """Freely reduce a sequence of letters (stack based, single pass)."""
    _check_rank(n)
    letters = [int(a) for a in letters]
    _check_letters(letters, n)
    stack: list[int] = []
    for a in letters:
        if stack and stack[-1] == -a:
            stack.pop()
        else:
            stack.append(a)
    return ReducedWord(tuple(stack), n)


def cyclically_reduce(w: ReducedWord) -> ReducedWord:
    letters = w.letters
    lo, hi = 0, len(letters)
    while hi - lo >= 2 and letters[lo] == -letters[hi - 1]:
        lo += 1
        hi -= 1
    return ReducedWord(letters[lo:hi], w.rank)


def concat_reduce(a: ReducedWord, b: ReducedWord) -> ReducedWord:
    if a.rank != b.rank:
        raise InvalidInputError(f"rank mismatch: {a.rank} vs {b.rank}")
    # only the junction can cancel
    left, right = list(a.letters), b.letters
    k = 0
    while left and k < len(right) and left[-1] == -right[k]:
        left.pop()
        k += 1
    return ReducedWord(tuple(left) + right[k:], a.rank)


def count_reduced(n: int, l: int) -> int:
    """|S_l| = 2n (2n-1)^(l-1), with one (empty) word of length 0."""
    _check_rank(n)
    if l < 0:
        raise InvalidInputError(f"length must be >= 0, got {l}")
    if l == 0:
        return 1
    return 2 * n * (2 * n - 1) ** (l - 1)


def enumerate_reduced(n: int, l: int) -> Iterator[ReducedWord]:
    """All reduced words of length ``l`` in lexicographic letter-index order."""
    _check_rank(n)
    if l == 0:
        yield ReducedWord((), n)
        return
    for first in range(2 * n):
        for rest in itertools.product(range(2 * n - 1), repeat=l - 1):
            idx = [first]
            for r in rest:
                idx.append(r + (r >= (idx[-1] ^ 1)))
            yield ReducedWord(tuple(index_to_letter(i) for i in idx), n)


def sample_reduced_indices(n: int, l: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``size`` independent uniform words of S_l as a ``(size, l)`` array of letter indices.

    The first letter is uniform over the 2n letters; every later letter is
    uniform over the 2n-1 letters other than the inverse of its predecessor.
    """
    _check_rank(n)
    if l < 0:
        raise InvalidInputError(f"length must be >= 0, got {l}")
    out = np.empty((size, l), dtype=np.int64)
    if l == 0:
        return out
    out[:, 0] = rng.integers(0, 2 * n, size=size)
    if l > 1:
        draws = rng.integers(0, 2 * n - 1, size=(size, l - 1))
        for t in range(1, l):
            r = draws[:, t - 1]
            out[:, t] = r + (r >= (out[:, t - 1] ^ 1))
    return out


def sample_reduced(n: int, l: int, rng: np.random.Generator) -> ReducedWord:
    idx = sample_reduced_indices(n, l, 1, rng)[0]
    return ReducedWord(tuple(index_to_letter(int(i)) for i in idx), n)
