"""Exact reference implementations used for differential testing.

Everything here works on plain big integers and Fractions and is meant for
small inputs only.  Sizes beyond the configured caps raise OracleOverflow so
that tests can skip instead of failing.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import log2
from typing import Optional, Sequence, Union

from . import csdr
from .grammar import tokenize
from .powercircuit import Marking, PowerCircuit

DEFAULT_CAP = 1 << 20


class OracleOverflow(ArithmeticError):
    """A value exceeded the oracle's size cap."""


# ------------------------------------------------------------------ markings


def evaluate_marking_exact(c: PowerCircuit, m: Marking, bit_cap: int = DEFAULT_CAP) -> int:
    memo: dict[int, int] = {}
    return _eval(c, m, bit_cap, memo)


def _eval(c: PowerCircuit, m: Marking, bit_cap: int, memo: dict[int, int]) -> int:
    total = 0
    for node, d in m.digits.items():
        v = memo.get(node)
        if v is None:
            e = _eval(c, c.succ[node], bit_cap, memo)
            if e < 0:
                raise ValueError("negative successor value")
            if e * log2(c.base) > bit_cap:
                raise OracleOverflow(f"node exponent {e} exceeds the bit cap")
            v = memo[node] = c.base**e
        total += d * v
    return total


def evaluate_floatrep_exact(c: PowerCircuit, r, bit_cap: int = DEFAULT_CAP) -> Fraction:
    u = evaluate_marking_exact(c, r.mantissa, bit_cap)
    e = evaluate_marking_exact(c, r.exponent, bit_cap)
    if abs(e) * log2(c.base) > bit_cap:
        raise OracleOverflow("exponent too large")
    return Fraction(u) * Fraction(c.base) ** e


# ---------------------------------------------------------------------- csdr


def compact_rep_oracle(x: int, q: int) -> tuple[int, ...]:
    """Compact digits of x via the carry formulas evaluated literally.

    e_i and f_i are written as the disjunctions over start positions, with
    no incremental reuse, so they are independent of the linear scans used
    by the main implementation.
    """
    if x == 0:
        return ()
    if x < 0:
        return tuple(-d for d in compact_rep_oracle(-x, q))
    a = []
    y = x
    while y:
        y, d = divmod(y, q)
        a.append(d)
    m = len(a)

    def A(i: int) -> int:
        return a[i] if 0 <= i < m else 0

    top = q - 1

    def e(i: int) -> int:
        for j in range(1, i + 1):
            if A(j) == top and A(j - 1) == top and all(
                (A(k) == top or A(k + 1) == top) and A(k) >= q - 2 for k in range(j + 1, i)
            ):
                return 1
        return 0

    b = [A(i) - q * e(i + 1) + e(i) for i in range(m + 1)]
    mb = len(b)

    def Bv(i: int) -> int:
        return b[i] if 0 <= i < mb else 0

    def f(i: int) -> int:
        for j in range(i, mb):
            if Bv(j) == -1 and all(Bv(l) > 0 for l in range(i - 1, j)):
                return 1
        return 0

    c = [Bv(i) - q * f(i + 1) + f(i) for i in range(mb)] + [f(mb)]
    return csdr.trim(c)


def enumerate_condition_sequences(q: int, length: int):
    """All digit words of the given length meeting the two adjacency conditions."""
    digits = range(-q + 1, q)
    for word in itertools.product(digits, repeat=length):
        if csdr.satisfies_conditions(word, q):
            yield word


# ---------------------------------------------------------------- BS and BG


@dataclass(frozen=True)
class ExactBS:
    r: Fraction
    m: int

    def is_identity(self) -> bool:
        return self.r == 0 and self.m == 0


EXACT_ID = ExactBS(Fraction(0), 0)
ExactLetter = Union[int, ExactBS]


class ExactGroup:
    """Z[1/q] x| Z arithmetic with size caps, plus the three rewriting rules."""

    def __init__(self, q: int, size_cap: int = DEFAULT_CAP):
        if abs(q) < 2:
            raise ValueError("|q| must be at least 2")
        self.q = q
        self.size_cap = size_cap
        self._lq = log2(abs(q))

    def _check(self, x: ExactBS) -> ExactBS:
        cap = self.size_cap
        if abs(x.m).bit_length() > cap or x.r.numerator.bit_length() > cap or x.r.denominator.bit_length() > cap:
            raise OracleOverflow("value exceeds size cap")
        return x

    def qpow(self, k: int) -> Fraction:
        if abs(k) * self._lq > self.size_cap:
            raise OracleOverflow("power of q exceeds size cap")
        return Fraction(self.q) ** k

    def mul(self, x: ExactBS, y: ExactBS) -> ExactBS:
        if x.is_identity():
            return y
        if y.is_identity():
            return x
        r = x.r + self.qpow(x.m) * y.r if y.r else x.r
        return self._check(ExactBS(r, x.m + y.m))

    def inv(self, x: ExactBS) -> ExactBS:
        return self._check(ExactBS(-x.r * self.qpow(-x.m) if x.r else x.r, -x.m))

    def pinch(self, beta: int, z: ExactBS) -> Optional[ExactBS]:
        if beta == 1:
            if z.m == 0 and z.r.denominator == 1:
                return self._check(ExactBS(Fraction(0), int(z.r)))
            return None
        if z.r == 0:
            return ExactBS(Fraction(z.m), 0)
        return None


def exact_letters(text: str, q: int) -> list[ExactLetter]:
    out: list[ExactLetter] = []
    for tok in tokenize(text):
        e = tok.exponent
        if tok.letter == "b":
            out.extend([1 if e > 0 else -1] * abs(e))
        elif tok.letter == "a":
            out.append(ExactBS(Fraction(e), 0))
        elif tok.letter == "t":
            out.append(ExactBS(Fraction(0), e))
        else:
            out.append(EXACT_ID)
    return out


def _stack_reduce(G: ExactGroup, letters: Sequence[ExactLetter]) -> list[ExactLetter]:
    # Leftmost-innermost: the stack is always Britton-reduced.
    st: list[ExactLetter] = []
    for x in letters:
        if isinstance(x, ExactBS):
            if x.is_identity():
                continue
            if st and isinstance(st[-1], ExactBS):
                x = G.mul(st.pop(), x)
                if x.is_identity():
                    continue
            st.append(x)
            continue
        # stable letter: look for beta^-1 [z] beta on top
        if st and st[-1] == -x:
            st.pop()
            z = G.pinch(-x, EXACT_ID)
        elif len(st) >= 2 and isinstance(st[-1], ExactBS) and st[-2] == -x:
            z = G.pinch(-x, st[-1])
            if z is not None:
                st.pop()
                st.pop()
            else:
                st.append(x)
                continue
        else:
            st.append(x)
            continue
        if z is None:
            raise AssertionError("unreachable")
        if st and isinstance(st[-1], ExactBS):
            z = G.mul(st.pop(), z)
        if not z.is_identity():
            st.append(z)
    return st


def _from_parts(betas, parts) -> list[ExactLetter]:
    out: list[ExactLetter] = []
    for i, p in enumerate(parts):
        if not p.is_identity():
            out.append(p)
        if i < len(betas):
            out.append(betas[i])
    return out


def _tree_merge(G: ExactGroup, u, v):
    ub, up = u
    vb, vp = v
    h, l = len(ub), len(vb)
    if h == 0:
        return vb, (G.mul(up[0], vp[0]),) + vp[1:]
    if l == 0:
        return ub, up[:-1] + (G.mul(up[-1], vp[0]),)
    cur = EXACT_ID
    i = 0
    while i < min(h, l) and vb[i] == -ub[h - 1 - i]:
        z = G.pinch(ub[h - 1 - i], G.mul(G.mul(up[h - i], cur), vp[i]))
        if z is None:
            break
        cur = z
        i += 1
    mid = G.mul(G.mul(up[h - i], cur), vp[i])
    return ub[: h - i] + vb[i:], up[: h - i] + (mid,) + vp[i + 1 :]


def _tree_reduce(G: ExactGroup, letters: Sequence[ExactLetter]) -> list[ExactLetter]:
    # Mirrors the engine's schedule: pad to a power of two, merge pairs.
    level = []
    for x in letters:
        if isinstance(x, int):
            level.append(((x,), (EXACT_ID, EXACT_ID)))
        else:
            level.append(((), (x,)))
    if not level:
        return []
    size = 1
    while size < len(level):
        size *= 2
    level.extend([((), (EXACT_ID,))] * (size - len(level)))
    while len(level) > 1:
        level = [_tree_merge(G, level[k], level[k + 1]) for k in range(0, len(level), 2)]
    return _from_parts(*level[0])


def britton_reduce_exact(
    word: Union[str, Sequence[ExactLetter]],
    q: int,
    size_cap: int = DEFAULT_CAP,
    strategy: str = "stack",
) -> list[ExactLetter]:
    """Britton-reduced form with exact arithmetic.

    strategy "stack" applies the rules leftmost-innermost, "reverse" runs
    the same procedure on the inverted word and inverts back, and "tree"
    mirrors the pairwise schedule of the main engine.
    """
    G = ExactGroup(q, size_cap)
    letters = exact_letters(word, q) if isinstance(word, str) else list(word)
    if strategy == "stack":
        return _stack_reduce(G, letters)
    if strategy == "reverse":
        inv = invert_letters(G, letters)
        return invert_letters(G, _stack_reduce(G, inv))
    if strategy == "tree":
        return _tree_reduce(G, letters)
    raise ValueError(f"unknown strategy {strategy!r}")


def invert_letters(G: ExactGroup, letters: Sequence[ExactLetter]) -> list[ExactLetter]:
    return [(-x if isinstance(x, int) else G.inv(x)) for x in reversed(letters)]


def is_identity_exact(word: Union[str, Sequence[ExactLetter]], q: int, size_cap: int = DEFAULT_CAP) -> bool:
    return not britton_reduce_exact(word, q, size_cap)


def equal_exact(u: Sequence[ExactLetter], v: Sequence[ExactLetter], q: int, size_cap: int = DEFAULT_CAP) -> bool:
    G = ExactGroup(q, size_cap)
    return not _stack_reduce(G, list(u) + invert_letters(G, v))


# ------------------------------------------------------------------ conjugacy

_GENS = [ExactBS(Fraction(1), 0), ExactBS(Fraction(-1), 0), ExactBS(Fraction(0), 1), ExactBS(Fraction(0), -1), 1, -1]


def _inverse_gen(x: ExactLetter) -> ExactLetter:
    if isinstance(x, int):
        return -x
    return ExactBS(-x.r, -x.m)


def find_conjugator(
    u: Sequence[ExactLetter], v: Sequence[ExactLetter], q: int, max_len: int = 4, size_cap: int = 4096
) -> Optional[list[ExactLetter]]:
    """A word z over a, t, b (and inverses) of length <= max_len with z^-1 u z = v."""
    G = ExactGroup(q, size_cap)
    u = list(u)
    vinv = invert_letters(G, v)
    for length in range(max_len + 1):
        for z in itertools.product(_GENS, repeat=length):
            if any(z[k + 1] == _inverse_gen(z[k]) for k in range(length - 1)):
                continue
            zl = list(z)
            try:
                if not _stack_reduce(G, invert_letters(G, zl) + u + zl + vinv):
                    return zl
            except OracleOverflow:
                continue
    return None


def _strip(x: int, q: int) -> int:
    while x and x % q == 0:
        x //= q
    return x


def _mantissa(r: Fraction, q: int) -> int:
    """Integer u with r = u q^e and q not dividing u."""
    num, den = r.numerator, r.denominator
    while den % q == 0:
        den //= q
    if den != 1:
        raise ValueError("not an element of Z[1/q]")
    return _strip(num, q)


def fixed_conjugacy_exact(r: Fraction, m: int, s: Fraction, n: int, q: int) -> bool:
    """(r, m) ~ (s, n) in BG(1,q), q >= 2, by the congruence case split.

    Inside BS(1,q): for m = n >= 1, (r,m) ~ (s,m) iff r q^k = s mod (q^m - 1)
    for some k (after clearing powers of q, which conjugation by t allows).
    In BG(1,q) additionally (0,m) ~ (m,0), and (x,0) ~ (y,0) iff x = q^k y.
    Each class is mapped to a canonical label and labels are compared.
    """
    return _fixed_label(Fraction(r), m, q) == _fixed_label(Fraction(s), n, q)


def _fixed_label(r: Fraction, m: int, q: int):
    if q < 2:
        raise ValueError("only positive q")
    u = _mantissa(r, q) if r else 0
    if m < 0:
        # Work with the inverse (mantissa -u, exponent -m) and invert the label.
        lab = _fixed_label(Fraction(-u), -m, q)
        if lab[0] == "a":
            return ("a", -lab[1])
        if lab[0] == "bs":
            return ("bs-inv",) + lab[1:]
        return lab
    if m > 0:
        mod = q**m - 1
        if u % mod != 0:
            # Not conjugate to any element with zero t-exponent; the class
            # is the set of residues {u q^k mod (q^m - 1)}.
            return ("bs", m, min((u * pow(q, k, mod)) % mod for k in range(m)))
        u = _strip(m, q)
    if u == 0:
        return ("id",)
    return ("a", _strip(u, q))


def _to_fixed_rep(r: Fraction, m: int, q: int) -> tuple[ExactBS, list[ExactLetter]]:
    """(rep, z) with z^-1 (r, m) z = rep, rep the class representative."""
    G = ExactGroup(q, 1 << 16)
    g = ExactBS(Fraction(r), m)
    if m < 0:
        rep, z = _to_fixed_rep(G.inv(g).r, -m, q)
        return G.inv(rep), z
    if g.is_identity():
        return g, []
    z: list[ExactLetter] = []
    u = _mantissa(g.r, q) if g.r else 0
    if g.r:
        # (r, m) = (u q^e, m); conjugating by t^e gives (u, m).
        e = 0
        x = g.r
        while x.denominator != 1 or x.numerator % q == 0:
            if x.denominator != 1:
                x *= q
                e -= 1
            else:
                x /= q
                e += 1
        z.append(ExactBS(Fraction(0), e))
    if m > 0:
        mod = q**m - 1
        if u % mod != 0:
            rho, k = min(((u * q**k) % mod, k) for k in range(m))
            x = (rho - u * q**k) // mod
            z += [ExactBS(Fraction(0), -k), ExactBS(Fraction(x), 0)]
            return ExactBS(Fraction(rho), m), z
        # (u, m) ~ (0, m) by a^(-u/mod), then b^-1 (0, m) b = (m, 0).
        z += [ExactBS(Fraction(-u // mod), 0), 1]
        u, e = m, 0
        while u % q == 0:
            u //= q
            e += 1
        z.append(ExactBS(Fraction(0), e))
    return ExactBS(Fraction(u), 0), z


def certify_fixed_conjugacy(r: Fraction, m: int, s: Fraction, n: int, q: int) -> Optional[list[ExactLetter]]:
    """An explicit z with z^-1 (r,m) z = (s,n), verified exactly, or None."""
    rep_g, zg = _to_fixed_rep(Fraction(r), m, q)
    rep_w, zw = _to_fixed_rep(Fraction(s), n, q)
    if rep_g != rep_w:
        return None
    G = ExactGroup(q, 1 << 16)
    z = zg + invert_letters(G, zw)
    g, w = ExactBS(Fraction(r), m), ExactBS(Fraction(s), n)
    if _stack_reduce(G, invert_letters(G, z) + [g] + z + [G.inv(w)]):
        raise AssertionError("constructed conjugator does not conjugate")
    return z
