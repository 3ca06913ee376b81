"""Britton reduction and decision procedures for the Baumslag group BG(1,q).

BG(1,q) = <a, b | b a b^-1 a = a^q b a b^-1> is an HNN extension of
BS(1,q) = <a, t | t a t^-1 = a^q> (with t = b a b^-1) along b^-1 t b = a.
Elements of BS(1,q) are pairs (r, m) in Z[1/q] x| Z with
(r, m)(s, n) = (r + q^m s, m + n).  Here r is a FloatRep and m a Marking
over a shared power circuit of base |q|.

A Britton-reduced word is kept internally as a pair (betas, parts) with
len(parts) == len(betas) + 1: parts[0] betas[0] parts[1] ... betas[-1] parts[-1].
Stable letters are the ints 1 (b) and -1 (b^-1); identity parts are allowed.
"""
from __future__ import annotations

import math
import time
from enum import Enum
from typing import Iterable, NamedTuple, Optional, Sequence, Union

from .grammar import tokenize
from .powercircuit import (
    FP_ZERO,
    ZERO,
    ContractViolation,
    FloatRep,
    Marking,
    PowerCircuit,
)

B, BINV = 1, -1
# Words longer than this in a single b/t/a exponent are refused by the parser.
MAX_STABLE_EXPANSION = 10_000_000


class BSElement(NamedTuple):
    r: FloatRep
    m: Marking


IDENTITY = BSElement(FP_ZERO, ZERO)

Letter = Union[int, BSElement]
_Red = tuple  # (betas: tuple[int, ...], parts: tuple[BSElement, ...])
_ID_RED: _Red = ((), (IDENTITY,))


class Conjugacy(Enum):
    CONJUGATE = "conjugate"
    NOT_CONJUGATE = "not-conjugate"
    INCONCLUSIVE = "inconclusive-in-BS"


class UnsupportedFixedElement(ValueError):
    """The fixed element lies outside the range the decision supports."""


def _is_id(x: BSElement) -> bool:
    return not x.r.mantissa.digits and not x.m.digits


class PCWord:
    """A word over stable letters and BS letters on a shared circuit."""

    def __init__(self, group: "BaumslagGroup", letters: Sequence[Letter]):
        self.group = group
        self.letters = list(letters)

    @property
    def circuit(self) -> PowerCircuit:
        return self.group.circuit

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __repr__(self) -> str:
        return f"PCWord({self.group.format_word(self)!r})"

    @property
    def beta_length(self) -> int:
        return sum(1 for x in self.letters if isinstance(x, int))

    def norm(self) -> int:
        """Sum of mantissa and t-exponent supports (exponent markings excluded)."""
        c = self.circuit
        total = 0
        for x in self.letters:
            if not isinstance(x, int):
                total += len(c.canon(x.r.mantissa)) + len(c.canon(x.m))
        return total

    def is_bs(self) -> bool:
        return self.beta_length == 0

    def bs_element(self) -> Optional[BSElement]:
        """The single BS value when the word has no stable letters."""
        if not self.is_bs():
            return None
        g = self.group
        acc = IDENTITY
        for x in self.letters:
            acc = g.mul(acc, x)
        return acc


class BaumslagGroup:
    """Arithmetic in BG(1,q) on top of one growing power circuit.

    ``merge_mode`` selects how the cancellation depth of a merge is found:
    "sequential" walks inwards and stops at the first failed pinch,
    "independent" computes every conditional bit from closed forms and
    takes the longest true prefix.
    """

    def __init__(
        self,
        q: int,
        circuit: Optional[PowerCircuit] = None,
        merge_mode: str = "sequential",
        size_constant: Optional[float] = None,
        check: bool = False,
    ):
        if abs(q) < 2:
            raise ValueError(f"|q| must be at least 2, got {q}")
        if merge_mode not in ("sequential", "independent"):
            raise ValueError(f"unknown merge mode {merge_mode!r}")
        self.q = q
        self.circuit = circuit if circuit is not None else PowerCircuit(abs(q))
        if self.circuit.base != abs(q):
            raise ValueError("circuit base must equal |q|")
        self.merge_mode = merge_mode
        self.size_constant = size_constant
        self.check = check
        self.memo_enabled = True
        self.last_stats: dict = {}
        self.norm_excess = 0
        self._intern: dict = {}
        self._merge_memo: dict = {}
        self._memo_epoch = self.circuit.epoch

    # --------------------------------------------------------- BS arithmetic

    def element(self, r: int, m: int) -> BSElement:
        """(r, m) for integers r, m."""
        c = self.circuit
        return BSElement(c.fp_from_int(r), c.from_int(m))

    def a_power(self, k: Marking) -> BSElement:
        return BSElement(self.circuit.make_floating_point(k), ZERO)

    def t_power(self, k: Marking) -> BSElement:
        return BSElement(FP_ZERO, self.circuit.canon(k))

    def scale(self, r: FloatRep, k: Marking) -> FloatRep:
        """r * q**eps(k), with the sign fix for negative q."""
        c = self.circuit
        if not r.mantissa.digits:
            return FP_ZERO
        out = c.fp_mult_power(r, k)
        if self.q < 0 and k.digits and c.mod_const(k, 2):
            out = c.fp_negate(out)
        return out

    def mul(self, x: BSElement, y: BSElement) -> BSElement:
        if _is_id(x):
            return y
        if _is_id(y):
            return x
        c = self.circuit
        if y.r.mantissa.digits:
            r = c.fp_add([x.r, self.scale(y.r, x.m)])
        else:
            r = x.r
        return BSElement(r, c.add([x.m, y.m]))

    def inv(self, x: BSElement) -> BSElement:
        if _is_id(x):
            return x
        c = self.circuit
        negm = c.negate(x.m)
        return BSElement(c.fp_negate(self.scale(x.r, negm)), negm)

    def equal(self, x: BSElement, y: BSElement) -> bool:
        c = self.circuit
        return c.fp_equal(x.r, y.r) and c.equal(x.m, y.m)

    def pinch(self, beta: int, z: BSElement) -> Optional[BSElement]:
        """beta z beta^-1 when it lies in BS, else None.

        b (g,0) b^-1 = (0,g) for integral g and b^-1 (0,k) b = (k,0).
        """
        c = self.circuit
        if beta == B:
            if z.m.digits:
                return None
            ok, g = c.fp_to_int(z.r)
            if not ok:
                return None
            return BSElement(FP_ZERO, g)
        if z.r.mantissa.digits:
            return None
        return BSElement(c.make_floating_point(z.m), ZERO)

    def pinch_check(
        self,
        outer: int,
        inner: Optional[int],
        x: BSElement,
        y: BSElement,
        cur: BSElement,
    ) -> Optional[BSElement]:
        """Decide outer x [inner ... inner^-1] y outer^-1 in BS.

        ``cur`` is the value (g, k) of the bracketed inner word.  With no
        inner stable letter the test is a plain pinch of x*y.  Otherwise one
        row of the four-case table is evaluated.
        """
        c = self.circuit
        if inner is None:
            return self.pinch(outer, self.mul(x, y))
        r, m = x
        s, n = y
        if outer == B and inner == B:
            # cur = (0, k): need m + n + k = 0 and r + q^{-n} s integral.
            if c.sign(c.add([m, n, cur.m])) != 0:
                return None
            ok, val = c.fp_to_int(c.fp_add([r, self.scale(s, c.negate(n))]))
            return BSElement(FP_ZERO, val) if ok else None
        if outer == B and inner == BINV:
            # cur = (g, 0): need m + n = 0 and r + q^m (g + s) integral.
            if c.sign(c.add([m, n])) != 0:
                return None
            inner_sum = c.fp_add([cur.r, s])
            ok, val = c.fp_to_int(c.fp_add([r, self.scale(inner_sum, m)]))
            return BSElement(FP_ZERO, val) if ok else None
        if outer == BINV and inner == B:
            # cur = (0, k): need r + q^{m+k} s = 0; result (m+n+k, 0).
            if self.check and (r.is_zero() or s.is_zero()):
                raise ContractViolation("flanking letters are not Britton-reduced")
            total = c.fp_add([r, self.scale(s, c.add([m, cur.m]))])
            if not total.is_zero():
                return None
            return self.a_power(c.add([m, n, cur.m]))
        # outer == inner == BINV; cur = (g, 0): need r + q^m (g + s) = 0.
        total = c.fp_add([r, self.scale(c.fp_add([cur.r, s]), m)])
        if not total.is_zero():
            return None
        return self.a_power(c.add([m, n]))

    def pinch_telescope(
        self, xs: Sequence[BSElement], ys: Sequence[BSElement], g: Marking
    ) -> Optional[BSElement]:
        """Closed form for an alternating segment that collapses into BS.

        The segment is b x_0 b^-1 b x_1 ... read outside-in:
        xs[t] = (r_{i-t}, m_{i-t}) and ys[t] = (s_{i-t}, n_{i-t}) for
        t = 0 .. 2j, and g is the integer with b^-1 y b = (g, 0) in the middle.
        Returns (0, value) or None if the value is not integral.
        """
        if len(xs) != len(ys) or len(xs) % 2 != 1:
            raise ValueError("telescope segment needs 2j+1 letters on each side")
        c = self.circuit
        fp = c.make_floating_point
        j = len(xs) // 2
        terms = [xs[0].r]
        kappa = ZERO
        for theta in range(j):
            kappa = c.add([kappa, xs[2 * theta].m])
            inner = c.fp_add(
                [
                    fp(xs[2 * theta + 1].m),
                    fp(ys[2 * theta + 1].m),
                    xs[2 * theta + 2].r,
                    ys[2 * theta].r,
                ]
            )
            terms.append(self.scale(inner, kappa))
        kappa = c.add([kappa, xs[2 * j].m])
        terms.append(self.scale(c.fp_add([fp(g), ys[2 * j].r]), kappa))
        ok, val = c.fp_to_int(c.fp_add(terms))
        return BSElement(FP_ZERO, val) if ok else None

    # ----------------------------------------------------------- reduced words

    def _sync_memos(self) -> None:
        if self._memo_epoch != self.circuit.epoch:
            self._intern.clear()
            self._merge_memo.clear()
            self._memo_epoch = self.circuit.epoch

    def _intern_red(self, red: _Red) -> _Red:
        if not self.memo_enabled or self._memo_epoch != self.circuit.epoch:
            return red
        hit = self._intern.get(red)
        if hit is None:
            self._intern[red] = red
            return red
        return hit

    def _leaf(self, x: Letter) -> _Red:
        if isinstance(x, int):
            red = ((x,), (IDENTITY, IDENTITY))
        else:
            red = ((), (x,))
        return self._intern_red(red)

    def merge(self, u: _Red, v: _Red) -> _Red:
        """Britton-reduced form of the product of two Britton-reduced words."""
        self._sync_memos()
        ub, up = u
        vb, vp = v
        if not ub and _is_id(up[0]):
            return v
        if not vb and _is_id(vp[0]):
            return u
        key = None
        if self.memo_enabled:
            key = (id(u), id(v))
            hit = self._merge_memo.get(key)
            if hit is not None and hit[0] is u and hit[1] is v:
                return hit[2]
        epoch = self.circuit.epoch
        out = self._merge(u, v)
        if self.check:
            n_in = self._red_norm(u) + self._red_norm(v)
            if self._red_norm(out) > n_in:
                # For base >= 3 the canonical csdr of a sum can have more
                # nonzero digits than the summands together (16 = 9+9-2 is
                # (1,2,1) in base 3), so the bound is only enforced for |q| = 2.
                if self.circuit.base == 2:
                    raise AssertionError("merge increased the marking norm")
                self.norm_excess += 1
        if key is not None and self.circuit.epoch == epoch:
            out = self._intern_red(out)
            self._merge_memo[key] = (u, v, out)
        return out

    def _merge(self, u: _Red, v: _Red) -> _Red:
        ub, up = u
        vb, vp = v
        h, l = len(ub), len(vb)
        if h == 0:
            return (vb, (self.mul(up[0], vp[0]),) + vp[1:])
        if l == 0:
            return (ub, up[:-1] + (self.mul(up[-1], vp[0]),))
        if self.merge_mode == "sequential":
            depth, cur = self._depth_sequential(u, v)
        else:
            depth, cur = self._depth_independent(u, v)
        if depth == 0:
            mid = self.mul(up[h], vp[0])
        else:
            mid = self.mul(self.mul(up[h - depth], cur), vp[depth])
        return (ub[: h - depth] + vb[depth:], up[: h - depth] + (mid,) + vp[depth + 1 :])

    def _depth_sequential(self, u: _Red, v: _Red) -> tuple[int, Optional[BSElement]]:
        ub, up = u
        vb, vp = v
        h = len(ub)
        top = min(h, len(vb))
        cur: Optional[BSElement] = None
        i = 0
        while i < top:
            outer = ub[h - 1 - i]
            if vb[i] != -outer:
                break
            inner = ub[h - i] if i else None
            res = self.pinch_check(outer, inner, up[h - i], vp[i], cur if cur else IDENTITY)
            if res is None:
                break
            cur = res
            i += 1
        return i, cur

    def _depth_independent(self, u: _Red, v: _Red) -> tuple[int, Optional[BSElement]]:
        ub, up = u
        vb, vp = v
        h = len(ub)
        # uv[i,i] needs matching stable letters at every level <= i.
        top = 0
        while top < min(h, len(vb)) and vb[top] == -ub[h - 1 - top]:
            top += 1
        memo: dict[int, Optional[BSElement]] = {}

        def beta(j: int) -> int:  # beta_j, j >= 1, counted from the junction
            return ub[h - j]

        def X(lv: int) -> BSElement:
            return up[h - lv]

        def Y(lv: int) -> BSElement:
            return vp[lv]

        def closed(lv: int) -> Optional[BSElement]:
            # Value of the level-lv window assuming every level <= lv pinches.
            if lv in memo:
                return memo[lv]
            res = self._closed_level(lv, beta, X, Y, closed)
            memo[lv] = res
            return res

        bits = []
        for i in range(top):
            if i == 0:
                bits.append(self.pinch(beta(1), self.mul(X(0), Y(0))) is not None)
                continue
            cur = closed(i - 1)
            if cur is None:
                bits.append(False)
                continue
            bits.append(self.pinch_check(beta(i + 1), beta(i), X(i), Y(i), cur) is not None)
        depth = 0
        while depth < len(bits) and bits[depth]:
            depth += 1
        if depth == 0:
            return 0, None
        return depth, closed(depth - 1)

    def _closed_level(self, lv, beta, X, Y, closed) -> Optional[BSElement]:
        c = self.circuit
        outer = beta(lv + 1)
        if lv == 0:
            return self.pinch(outer, self.mul(X(0), Y(0)))
        inner = beta(lv)
        x, y = X(lv), Y(lv)
        if outer == BINV and inner == BINV:
            return self.a_power(c.add([x.m, y.m]))
        if outer == BINV and inner == B:
            below = closed(lv - 1)
            if below is None:
                return None
            return self.a_power(c.add([x.m, y.m, below.m]))
        if outer == B and inner == B:
            ok, val = c.fp_to_int(c.fp_add([x.r, self.scale(y.r, c.negate(y.m))]))
            return BSElement(FP_ZERO, val) if ok else None
        # (b, b^-1): extend the alternating segment as far as it goes.
        j = 0
        while lv - 2 * (j + 1) - 1 >= 0 and beta(lv - 1 - 2 * j) == B and beta(lv - 2 - 2 * j) == BINV:
            j += 1
        core = closed(lv - 2 * j - 1)
        if core is None:
            return None
        ok, g = c.fp_to_int(core.r)
        if not ok or core.m.digits:
            return None
        xs = [X(lv - t) for t in range(2 * j + 1)]
        ys = [Y(lv - t) for t in range(2 * j + 1)]
        return self.pinch_telescope(xs, ys, g)

    def _red_norm(self, red: _Red) -> int:
        c = self.circuit
        return sum(len(c.canon(x.r.mantissa)) + len(c.canon(x.m)) for x in red[1])

    def inverse_red(self, red: _Red) -> _Red:
        betas, parts = red
        return (tuple(-x for x in reversed(betas)), tuple(self.inv(p) for p in reversed(parts)))

    def reduce_reds(self, reds: Sequence[_Red]) -> _Red:
        """Tree-shaped reduction: merge adjacent pairs until one word remains."""
        level = list(reds)
        if not level:
            return _ID_RED
        size = 1
        while size < len(level):
            size *= 2
        level.extend([_ID_RED] * (size - len(level)))
        while len(level) > 1:
            level = [self.merge(level[k], level[k + 1]) for k in range(0, len(level), 2)]
        return level[0]

    def to_red(self, word: PCWord) -> _Red:
        return self.reduce_reds([self._leaf(x) for x in word.letters])

    def from_red(self, red: _Red) -> PCWord:
        betas, parts = red
        letters: list[Letter] = []
        for i, p in enumerate(parts):
            if not _is_id(p):
                letters.append(p)
            if i < len(betas):
                letters.append(betas[i])
        return PCWord(self, letters)

    def is_reduced_red(self, red: _Red) -> bool:
        """No b (g,0) b^-1 or b^-1 (0,k) b window."""
        betas, parts = red
        for i in range(len(betas) - 1):
            if betas[i + 1] == -betas[i] and self.pinch(betas[i], parts[i + 1]) is not None:
                return False
        return True

    # ------------------------------------------------------------------ words

    def parse(self, text: str) -> PCWord:
        c = self.circuit
        letters: list[Letter] = []
        for tok in tokenize(text):
            e = tok.exponent
            if tok.letter == "b":
                if abs(e) > MAX_STABLE_EXPANSION:
                    raise ValueError(f"stable letter exponent too large at position {tok.position}")
                letters.extend([B if e > 0 else BINV] * abs(e))
            elif tok.letter == "a":
                letters.append(BSElement(c.fp_from_int(e), ZERO))
            elif tok.letter == "t":
                letters.append(BSElement(FP_ZERO, c.from_int(e)))
            else:
                letters.append(IDENTITY)
        return PCWord(self, letters)

    def word(self, letters: Iterable[Letter]) -> PCWord:
        return PCWord(self, list(letters))

    def britton_merge(self, u: PCWord, v: PCWord) -> PCWord:
        ru, rv = self.to_red(u), self.to_red(v)
        if self.check:
            for word, red in ((u, ru), (v, rv)):
                if len(red[0]) != word.beta_length:
                    raise ContractViolation("britton_merge needs Britton-reduced input")
        return self.from_red(self.merge(ru, rv))

    def britton_reduce(self, word: PCWord) -> PCWord:
        c = self.circuit
        n = len(word)
        gamma0 = len(c)
        t0 = time.perf_counter()
        red = self.to_red(word)
        ms = (time.perf_counter() - t0) * 1000
        out = self.from_red(red)
        gamma = len(c)
        bound_unit = max(n, 1) * math.log2(n + 2) ** 3 * gamma0
        self.last_stats = {
            "n": n,
            "gamma": gamma,
            "chains": c.chain_count(),
            "support": out.norm(),
            "ms": ms,
            "ratio": gamma / bound_unit,
        }
        if self.size_constant is not None and gamma > self.size_constant * bound_unit:
            raise AssertionError(
                f"circuit size {gamma} exceeds {self.size_constant} * n log(n+2)^3 * |Gamma0|"
            )
        return out

    def word_problem(self, word: PCWord) -> bool:
        betas, parts = self.to_red(word)
        return not betas and _is_id(parts[0])

    def subgroup_membership(self, word: PCWord) -> Optional[BSElement]:
        betas, parts = self.to_red(word)
        if betas:
            return None
        return parts[0]

    # ------------------------------------------------------- cyclic reduction

    def cyclic_red(self, red: _Red) -> _Red:
        """Cut through the beta-middle, swap halves and re-merge until stable."""
        while True:
            betas, parts = red
            h = len(betas)
            if h <= 1:
                if h == 0:
                    return red
                # p0 b p1 is conjugate to b (p1 p0); nothing can cancel.
                return (betas, (IDENTITY, self.mul(parts[1], parts[0])))
            k = (h + 1) // 2
            u = (betas[:k], parts[: k + 1])
            v = (betas[k:], (IDENTITY,) + parts[k + 1 :])
            nxt = self.merge(v, u)
            if len(nxt[0]) == h:
                return nxt
            red = nxt

    def cyclically_reduce(self, word: PCWord) -> PCWord:
        red = self.to_red(word)
        if self.check and not self.is_reduced_red(red):
            raise ContractViolation("cyclically_reduce needs Britton-reduced input")
        return self.from_red(self.cyclic_red(red))

    def _cyclic_form(self, red: _Red) -> tuple[tuple[int, ...], tuple[BSElement, ...]]:
        # beta_1 y_1 ... beta_h y_h, conjugate to red.
        betas, parts = red
        h = len(betas)
        ys = parts[1:h] + (self.mul(parts[h], parts[0]),)
        return betas, ys

    def _invert_cyclic(self, betas, ys):
        h = len(betas)
        nb = tuple(-betas[h - 1 - i] for i in range(h))
        ny = tuple(self.inv(ys[h - 2 - i]) for i in range(h - 1)) + (self.inv(ys[h - 1]),)
        return nb, ny

    def _is_identity_product(self, reds: Sequence[_Red]) -> bool:
        betas, parts = self.reduce_reds(reds)
        return not betas and _is_id(parts[0])

    def _aligned_conjugate(self, ub, uy, vb, vy) -> bool:
        """Conjugacy test for cyclic forms with equal beta words starting with b^-1."""
        c = self.circuit
        h = len(ub)
        if h == 1:
            (r, m), (s, n) = uy[0], vy[0]
            diff = c.subtract(n, m)
            lhs = self.scale(r, diff)
            rhs = c.fp_add([s, self.scale(c.make_floating_point(diff), n)])
            return c.fp_equal(lhs, rhs)
        U = (ub, (IDENTITY,) + uy)
        V = (vb, (IDENTITY,) + vy)
        if ub[1] == B:
            e = c.negate(uy[0].r.exponent)
            f = c.negate(vy[0].r.exponent)
        else:
            e = c.negate(uy[0].m)
            f = c.negate(vy[0].m)
        ae, af = self.a_power(e), self.a_power(f)
        lhs = [self._leaf(ae), U, self._leaf(self.inv(ae))]
        rhs_inv = [self._leaf(af), self.inverse_red(V), self._leaf(self.inv(af))]
        return self._is_identity_product(lhs + rhs_inv)

    def conjugacy_generic_red(self, u: _Red, v: _Red) -> Conjugacy:
        u = self.cyclic_red(u)
        v = self.cyclic_red(v)
        if not u[0] or not v[0]:
            return Conjugacy.INCONCLUSIVE
        if len(u[0]) != len(v[0]):
            return Conjugacy.NOT_CONJUGATE
        cu, cv = self._cyclic_form(u), self._cyclic_form(v)
        for flip in (False, True):
            ub, uy = self._invert_cyclic(*cu) if flip else cu
            vb, vy = self._invert_cyclic(*cv) if flip else cv
            if BINV not in ub:
                continue
            i = ub.index(BINV)
            ub, uy = ub[i:] + ub[:i], uy[i:] + uy[:i]
            h = len(ub)
            for j in range(h):
                rb = vb[j:] + vb[:j]
                if rb != ub:
                    continue
                ry = vy[j:] + vy[:j]
                if self._aligned_conjugate(ub, uy, rb, ry):
                    return Conjugacy.CONJUGATE
        return Conjugacy.NOT_CONJUGATE

    def conjugacy_generic(self, u: PCWord, v: PCWord) -> Conjugacy:
        return self.conjugacy_generic_red(self.to_red(u), self.to_red(v))

    # ------------------------------------------------- conjugacy to a BS element

    def _normalize_fixed(self, x: BSElement) -> tuple[int, int]:
        """Small integers (r, m) with q not dividing r, conjugate to x."""
        c = self.circuit
        r = c.small_value(c.canon(x.r.mantissa))
        m = c.small_value(c.canon(x.m))
        if r is None or m is None or abs(r) > 2**63 or abs(m) > 64:
            raise UnsupportedFixedElement("fixed element outside |r| <= 2^63, |m| <= 64")
        return r, m

    def _strip_q(self, x: int) -> int:
        Q = abs(self.q)
        while x and x % Q == 0:
            x //= Q
        return x

    def conjugate_to_fixed_red(self, g: _Red, w: _Red, allow_negative: bool = False) -> bool:
        if self.q < 0 and not allow_negative:
            raise UnsupportedFixedElement("fixed-element conjugacy for negative q is disabled")
        g = self.cyclic_red(g)
        if g[0]:
            return self.conjugacy_generic_red(g, w) == Conjugacy.CONJUGATE
        w = self.cyclic_red(w)
        if w[0]:
            return False
        c = self.circuit
        q = self.q
        r, m = self._normalize_fixed(g[1][0])
        x = w[1][0]
        S = c.canon(x.r.mantissa)
        n = c.canon(x.m)
        if m < 0:
            r, m = -r, -m
            S, n = -S, c.negate(n)
        if m > 0:
            mod = q**m - 1
            if r % mod != 0:
                # Not conjugate to (0, m): conjugacy inside BS decides.
                if not c.equal(n, c.from_int(m)):
                    return False
                s_mod = c.mod_const(S, mod) if S.digits else 0
                return any((r * pow(q, k, mod) - s_mod) % mod == 0 for k in range(m))
            # (r, m) ~ (0, m) ~ (m, 0)
            r, m = self._strip_q(m), 0
        if r == 0:
            return not S.digits and not n.digits
        r = self._strip_q(r)
        if not n.digits:
            return bool(S.digits) and c.equal(S, c.from_int(r))
        if c.sign(n) < 0:
            S, n, r = -S, c.negate(n), -r
        # Need n = q^k r and (s, n) ~ (0, n), i.e. s = 0 mod q^n - 1.
        if r <= 0:
            return False
        U_n, E_n = c.make_floating_point(n)
        if not c.equal(U_n, c.from_int(r)):
            return False
        return self._divisible_by_qn_minus_1(S, n, E_n, r)

    def _divisible_by_qn_minus_1(self, S: Marking, n: Marking, k: Marking, r: int) -> bool:
        """eps(S) == 0 mod Q**eps(n) - 1 where eps(n) = Q**eps(k) * r."""
        c = self.circuit
        S = c.canon(S)
        if not S.digits:
            return True
        # Q^l mod (Q^n - 1) = Q^(l mod n): fold every node below Q^n.
        items = list(S.digits.items())
        exps = [c.mod_power(c.succ[p], k, r) for p, _ in items]
        folded = c.update_nodes(exps)
        total = c.add([Marking({nid: d}, -1) for nid, (_, d) in zip(folded, items)])
        bound = len(items) + 1
        for j in range(-bound, bound + 1):
            if j == 0:
                if not total.digits:
                    return True
                continue
            shifted = c.mult_by_power(c.from_int(-j), n)
            if not c.add([total, shifted, c.from_int(j)]).digits:
                return True
        return False

    def conjugate_to_fixed(self, g: PCWord, w: PCWord, allow_negative: bool = False) -> bool:
        return self.conjugate_to_fixed_red(self.to_red(g), self.to_red(w), allow_negative)

    # ---------------------------------------------------------------- display

    def format_element(self, x: BSElement) -> str:
        c = self.circuit
        r = c.small_value(c.canon(x.r.mantissa))
        e = c.small_value(c.canon(x.r.exponent))
        m = c.small_value(c.canon(x.m))
        if r is None or e is None or m is None:
            return "(<large>)"
        if e >= 0:
            rs = str(r * self.q**e if self.q > 0 else r * abs(self.q) ** e)
        else:
            rs = f"{r}/{abs(self.q) ** -e}"
        return f"({rs},{m})"

    def format_word(self, word: PCWord) -> str:
        out = []
        for x in word.letters:
            if isinstance(x, int):
                out.append("b" if x == B else "B")
            else:
                out.append(self.format_element(x))
        return " ".join(out)


# ------------------------------------------------------------ text interface


def _group(q: int, group: Optional[BaumslagGroup]) -> BaumslagGroup:
    return group if group is not None else BaumslagGroup(q)


def parse_word(text: str, q: int, group: Optional[BaumslagGroup] = None) -> PCWord:
    return _group(q, group).parse(text)


def word_problem(text: str, q: int, group: Optional[BaumslagGroup] = None) -> bool:
    g = _group(q, group)
    return g.word_problem(g.parse(text))


def subgroup_membership(text: str, q: int, group: Optional[BaumslagGroup] = None) -> Optional[BSElement]:
    g = _group(q, group)
    return g.subgroup_membership(g.parse(text))


def britton_reduce(text: str, q: int, group: Optional[BaumslagGroup] = None) -> PCWord:
    g = _group(q, group)
    return g.britton_reduce(g.parse(text))


def conjugacy_generic(u: str, v: str, q: int, group: Optional[BaumslagGroup] = None) -> Conjugacy:
    g = _group(q, group)
    return g.conjugacy_generic(g.parse(u), g.parse(v))


def conjugate_to_fixed(
    g_text: str, w_text: str, q: int, group: Optional[BaumslagGroup] = None, allow_negative: bool = False
) -> bool:
    g = _group(q, group)
    return g.conjugate_to_fixed(g.parse(g_text), g.parse(w_text), allow_negative)


def tower_word(n: int) -> str:
    """w_0 = t, w_{k+1} = b w_k a w_k^-1 b^-1 (length 2^(n+2) - 3)."""
    return " ".join(_tower_tokens(n))


def _tower_tokens(n: int) -> list[str]:
    w = ["t"]
    inv = {"a": "A", "A": "a", "t": "T", "T": "t", "b": "B", "B": "b"}
    for _ in range(n):
        w = ["b"] + w + ["a"] + [inv[x] for x in reversed(w)] + ["B"]
    return w


def tower_marking(circuit: PowerCircuit, n: int) -> Marking:
    """Marking {+1} on the node of value tow_Q(n) in the tower chain."""
    node = 0
    for _ in range(n):
        node = circuit.update_nodes([Marking({node: 1}, circuit.epoch)])[0]
    return Marking({node: 1}, circuit.epoch)
