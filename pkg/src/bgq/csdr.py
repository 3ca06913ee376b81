"""Compact signed-digit representations (csdr) of integers in base q.

A digit sequence is stored least significant digit first.  Digits lie in
[-q+1, q-1].  The canonical compact form has no trailing zeros, so zero is
the empty tuple.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

Digits = tuple[int, ...]


def _check_base(q: int) -> None:
    if q < 2:
        raise ValueError(f"base must be at least 2, got {q}")


def _check_digits(digits: Sequence[int], q: int) -> None:
    for i, d in enumerate(digits):
        if not -q < d < q:
            raise ValueError(f"digit {d} at index {i} outside [{-q + 1}, {q - 1}]")


def trim(digits: Sequence[int]) -> Digits:
    end = len(digits)
    while end and digits[end - 1] == 0:
        end -= 1
    return tuple(digits[:end])


def value(digits: Sequence[int], q: int) -> int:
    """Exact integer value of a signed-digit sequence (Horner from the top)."""
    total = 0
    for d in reversed(digits):
        total = total * q + d
    return total


def satisfies_conditions(digits: Sequence[int], q: int) -> bool:
    """The two adjacency conditions on neighbouring digits.

    (1) |a_i| = q-1 forces |a_{i+1}| < q-1; (2) a nonzero digit is followed by
    zero or a digit of the same sign.
    """
    top = q - 1
    for i in range(len(digits) - 1):
        a, b = digits[i], digits[i + 1]
        if abs(a) == top and abs(b) == top:
            return False
        if a and b and (a > 0) != (b > 0):
            return False
    return True


def is_compact(digits: Sequence[int], q: int) -> bool:
    """True for the canonical compact sequences.

    For q = 2 the adjacency conditions alone characterize them.  For q >= 3
    the conditions admit two sequences for some values, e.g. (1, 2) and
    (-2, 0, 1) both denote 7 in base 3, so we additionally require the
    sequence to be the one produced by the two-pass construction.
    """
    if not satisfies_conditions(digits, q):
        return False
    if q == 2:
        return True
    if any(not -q < d < q for d in digits):
        return False
    return trim(digits) == compact_of_int(value(digits, q), q)


def standard_digits(x: int, q: int) -> Digits:
    """Ordinary base-q digits of a nonnegative integer."""
    if x < 0:
        raise ValueError("standard_digits expects a nonnegative integer")
    out = []
    while x:
        x, d = divmod(x, q)
        out.append(d)
    return tuple(out)


def _first_pass(a: Sequence[int], q: int) -> list[int]:
    # b_i = a_i - q*e_{i+1} + e_i, with the carries e_i evaluated by a single
    # left-to-right scan.  g tracks a run that started strictly below i.
    top = q - 1
    m = len(a)

    def at(i: int) -> int:
        return a[i] if 0 <= i < m else 0

    e = [0] * (m + 2)
    g = False
    for i in range(m + 1):
        start = i >= 1 and at(i) == top and at(i - 1) == top
        e[i] = 1 if (start or g) else 0
        prop = at(i) >= q - 2 and (at(i) == top or at(i + 1) == top)
        g = start or (g and prop)
    return [at(i) - q * e[i + 1] + e[i] for i in range(m + 1)]


def _second_pass(b: Sequence[int], q: int) -> list[int]:
    # c_i = b_i - q*f_{i+1} + f_i; f_i says a positive run starting at i-1
    # ends in a digit -1.  h is evaluated right to left.
    m = len(b)
    h = [False] * (m + 2)
    for i in range(m - 1, -1, -1):
        h[i] = b[i] == -1 or (b[i] > 0 and h[i + 1])
    f = [0] * (m + 2)
    for i in range(1, m + 1):
        f[i] = 1 if (b[i - 1] > 0 and h[i]) else 0
    return [b[i] - q * f[i + 1] + f[i] for i in range(m)] + [f[m]]


def _compact_nonneg(x: int, q: int) -> Digits:
    if x == 0:
        return ()
    return trim(_second_pass(_first_pass(standard_digits(x, q), q), q))


@lru_cache(maxsize=1 << 16)
def _compact_small(x: int, q: int) -> Digits:
    if x < 0:
        return tuple(-d for d in _compact_nonneg(-x, q))
    return _compact_nonneg(x, q)


def compact_of_int(x: int, q: int) -> Digits:
    """The unique csdr of an integer."""
    _check_base(q)
    if -(1 << 62) < x < (1 << 62):
        return _compact_small(x, q)
    if x < 0:
        return tuple(-d for d in _compact_nonneg(-x, q))
    return _compact_nonneg(x, q)


def make_compact(digits: Sequence[int], q: int) -> Digits:
    """Compact form of an arbitrary signed-digit sequence.

    The sequence is split into its positive and negative parts, the
    difference is written in standard base q and both passes are applied; a
    negative difference is handled by negating the result digit-wise.
    """
    _check_base(q)
    _check_digits(digits, q)
    pos = value([d if d > 0 else 0 for d in digits], q)
    neg = value([-d if d < 0 else 0 for d in digits], q)
    diff = pos - neg
    out = _compact_nonneg(abs(diff), q)
    if diff < 0:
        out = tuple(-d for d in out)
    return out


def compare(a: Sequence[int], b: Sequence[int], q: int, check: bool = True) -> int:
    """Return -1, 0 or 1 comparing the values of two compact sequences.

    The answer is read from the highest index where the digits differ.
    """
    if check:
        for seq in (a, b):
            _check_digits(seq, q)
            if not is_compact(seq, q):
                raise ValueError(f"compare needs compact input, got {tuple(seq)}")
    for i in range(max(len(a), len(b)) - 1, -1, -1):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        if x != y:
            return 1 if x > y else -1
    return 0


def max_compact_value(m: int, q: int) -> int:
    """Largest value of a compact sequence of length m.

    Built from the alternating pattern: top digit q-1, then q-2 and q-1
    alternate downwards.
    """
    _check_base(q)
    if m < 0:
        raise ValueError("length must be nonnegative")
    total = sum((q - 2) * q**i for i in range(m))
    total += sum(q ** (m - 1 - 2 * j) for j in range((m + 1) // 2))
    return total


@dataclass(frozen=True)
class SignedDigitSeq:
    """A digit sequence together with its base."""

    base: int
    digits: Digits

    def __post_init__(self) -> None:
        _check_base(self.base)
        _check_digits(self.digits, self.base)
        object.__setattr__(self, "digits", tuple(self.digits))

    @classmethod
    def of_int(cls, x: int, q: int) -> "SignedDigitSeq":
        return cls(q, compact_of_int(x, q))

    @property
    def value(self) -> int:
        return value(self.digits, self.base)

    def is_compact(self) -> bool:
        return is_compact(self.digits, self.base)

    def compact(self) -> "SignedDigitSeq":
        return SignedDigitSeq(self.base, make_compact(self.digits, self.base))

    def compare(self, other: "SignedDigitSeq") -> int:
        if other.base != self.base:
            raise ValueError("bases differ")
        return compare(self.digits, other.digits, self.base)
