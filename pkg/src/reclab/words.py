"""Words over a finite or countable alphabet and their overlap combinatorics.

A word of length n stands for the n-cylinder it determines on the full
shift: the set of one-sided sequences whose first n symbols spell the word.
Overlap questions about cylinders (does the cylinder meet its own k-shift
preimage?) reduce to suffix-prefix equalities of the word, which is what
everything in this module computes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

from .errors import InvalidInputError

WordLike = Union["Word", Sequence[int]]


@dataclass(frozen=True)
class Alphabet:
    """Symbol set: either finite of a given size, or countably infinite.

    Symbols are always nonnegative integer indices; the alphabet only
    bounds which indices are valid.  Finite alphabets must have at least
    two symbols (a one-symbol shift space carries no information).
    """

    size: int | None = None

    def __post_init__(self):
        if self.size is not None and self.size < 2:
            raise InvalidInputError(f"alphabet size must be >= 2, got {self.size}")

    @property
    def countable(self) -> bool:
        return self.size is None

    def validate_symbol(self, a: int) -> None:
        if a < 0 or (self.size is not None and a >= self.size):
            raise InvalidInputError(f"symbol {a} not valid for {self}")

    def __str__(self):
        return "alphabet(countable)" if self.size is None else f"alphabet({self.size})"


@dataclass(frozen=True)
class Word:
    """An immutable finite string of symbol indices, length >= 1."""

    symbols: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "symbols", tuple(int(a) for a in self.symbols))
        if len(self.symbols) == 0:
            raise InvalidInputError("words must have length >= 1")
        if any(a < 0 for a in self.symbols):
            raise InvalidInputError("symbol indices must be nonnegative")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[int]:
        return iter(self.symbols)

    def __getitem__(self, idx):
        got = self.symbols[idx]
        return Word(got) if isinstance(idx, slice) else got

    def validate(self, alphabet: Alphabet) -> "Word":
        for a in self.symbols:
            alphabet.validate_symbol(a)
        return self

    def to_json(self) -> str:
        return json.dumps(list(self.symbols))

    def __str__(self):
        if max(self.symbols) <= 9:
            return "".join(str(a) for a in self.symbols)
        return ",".join(str(a) for a in self.symbols)


def as_symbols(w: WordLike) -> tuple[int, ...]:
    """Normalize a word-like input to a tuple of symbol indices."""
    syms = tuple(w.symbols) if isinstance(w, Word) else tuple(int(a) for a in w)
    if len(syms) == 0:
        raise InvalidInputError("empty word")
    return syms


def parse_word(text: str | Sequence[int]) -> Word:
    """Parse a word from a JSON array of integers or a compact digit string.

    Compact strings ("101", "0212") are only unambiguous for alphabets of
    size <= 10, one digit per symbol.
    """
    if not isinstance(text, str):
        return Word(tuple(text))
    stripped = text.strip()
    if stripped.startswith("["):
        return Word(tuple(json.loads(stripped)))
    if not stripped.isdigit():
        raise InvalidInputError(f"cannot parse word from {text!r}")
    return Word(tuple(int(c) for c in stripped))


def border_array(w: WordLike) -> list[int]:
    """Failure function: b[i] = length of the longest proper border of w[:i+1]."""
    syms = as_symbols(w)
    n = len(syms)
    b = [0] * n
    k = 0
    for i in range(1, n):
        while k > 0 and syms[i] != syms[k]:
            k = b[k - 1]
        if syms[i] == syms[k]:
            k += 1
        b[i] = k
    return b


def principal_period(w: WordLike) -> int:
    """Shortest period of the word: the least k in {1,..,n} such that the
    cylinder of ``w`` meets its own k-shift preimage.

    On the full shift that intersection is nonempty iff the length-(n-k)
    suffix of ``w`` equals its length-(n-k) prefix (vacuously true at k=n),
    so the answer is n minus the longest proper border.
    """
    syms = as_symbols(w)
    return len(syms) - border_array(syms)[-1]


def principal_period_bruteforce(w: WordLike) -> int:
    """Quadratic suffix-prefix scan; reference oracle for principal_period."""
    syms = as_symbols(w)
    n = len(syms)
    for k in range(1, n + 1):
        if syms[k:] == syms[: n - k]:
            return k
    raise AssertionError("unreachable: k = n always matches")


def overlap_set(w: WordLike) -> set[int]:
    """All k in {1,..,n} at which the word overlaps itself.

    k belongs to the set iff the length-(n-k) suffix equals the
    length-(n-k) prefix, i.e. iff n-k is a border length.  n is always a
    member and the minimum is principal_period(w).
    """
    syms = as_symbols(w)
    n = len(syms)
    b = border_array(syms)
    out = {n}
    k = b[-1]
    while k > 0:
        out.add(n - k)
        k = b[k - 1]
    return out


def overlap_set_bruteforce(w: WordLike) -> set[int]:
    """Quadratic scan; reference oracle for overlap_set."""
    syms = as_symbols(w)
    n = len(syms)
    return {k for k in range(1, n + 1) if syms[k:] == syms[: n - k]}


def periodic_extension(r_word: WordLike, n: int) -> Word:
    """The length-n word repeating ``r_word`` cyclically: out[i] = r_word[i mod r].

    If a word has principal period r and period-prefix R, extending R to the
    word's own length reproduces the word.
    """
    if n < 1:
        raise InvalidInputError(f"extension length must be >= 1, got {n}")
    syms = as_symbols(r_word)
    r = len(syms)
    return Word(tuple(syms[i % r] for i in range(n)))


def prefix_period_profile(w: WordLike) -> "PeriodProfile":
    """Principal period of every prefix: values[k-1] = period of w[:k].

    Computed in one border-array pass; the sequence is nondecreasing, and
    for a prefix of an eventually periodic sequence with minimal period d
    it stabilizes at d once the prefix is at least 2d long.
    """
    syms = as_symbols(w)
    b = border_array(syms)
    return PeriodProfile(tuple(k + 1 - b[k] for k in range(len(syms))))


@dataclass(frozen=True)
class PeriodProfile:
    """Sequence r_1 <= r_2 <= ... of prefix periods, 1 <= r_k <= k."""

    values: tuple[int, ...]

    def __post_init__(self):
        vals = self.values
        for k, r in enumerate(vals, start=1):
            if not 1 <= r <= k:
                raise InvalidInputError(f"prefix period r_{k}={r} outside [1,{k}]")
        if any(a > b for a, b in zip(vals, vals[1:])):
            raise InvalidInputError("prefix periods must be nondecreasing")

    def __len__(self):
        return len(self.values)

    @property
    def final(self) -> int:
        return self.values[-1]


def thue_morse_prefix(n: int) -> Word:
    """First n symbols of the Thue-Morse sequence (0,1,1,0,1,0,0,1,...).

    A standard nonperiodic binary sequence; handy as the "very aperiodic"
    target in experiments.
    """
    if n < 1:
        raise InvalidInputError(f"prefix length must be >= 1, got {n}")
    return Word(tuple(bin(i).count("1") & 1 for i in range(n)))


def constant_word(symbol: int, n: int) -> Word:
    """The word repeating one symbol n times."""
    if n < 1:
        raise InvalidInputError(f"word length must be >= 1, got {n}")
    return Word((symbol,) * n)
