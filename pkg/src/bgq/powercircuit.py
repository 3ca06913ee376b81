"""Reduced base-Q power circuits with compact markings.

A circuit is a value-sorted list of nodes.  Node P has a successor marking
Lambda_P over strictly smaller nodes and evaluates to Q ** eps(Lambda_P).  A
marking assigns digits in [-Q+1, Q-1] to nodes; maximal runs of nodes whose
values grow by a factor Q form chains, and a marking is compact when its
digit word on every chain is the canonical csdr.  Compact markings are
unique, so equality of values is equality of markings and comparison is
lexicographic along the node order.

Circuits only ever grow.  Node ids are stable integers (the id is not the
sorted position); ``index_of`` gives the sorted position of a node in the
current version.
"""
from __future__ import annotations

from typing import Iterable, NamedTuple, Optional, Sequence

from .csdr import compact_of_int

# Nodes whose exponent exceeds this are never evaluated numerically.
SMALL_EXP = 256
_KEY_GAP = 1 << 32
_UNSET = object()


class ContractViolation(ValueError):
    """An operation was called outside its precondition."""


class Marking:
    """Immutable sparse digit assignment node-id -> nonzero digit."""

    __slots__ = ("digits", "epoch", "_hash")

    def __init__(self, digits: Optional[dict[int, int]] = None, epoch: int = 0):
        self.digits: dict[int, int] = digits if digits is not None else {}
        self.epoch = epoch
        self._hash: Optional[int] = None

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Marking):
            return NotImplemented
        return self.digits == other.digits

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = self._hash = hash(frozenset(self.digits.items()))
        return h

    def __bool__(self) -> bool:
        return bool(self.digits)

    def __len__(self) -> int:
        return len(self.digits)

    def __neg__(self) -> "Marking":
        return Marking({n: -d for n, d in self.digits.items()}, self.epoch)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}:{d}" for n, d in sorted(self.digits.items()))
        return f"Marking({{{inner}}})"

    def items(self):
        return self.digits.items()

    def get(self, node: int) -> int:
        return self.digits.get(node, 0)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.digits)


ZERO = Marking()


class FloatRep(NamedTuple):
    """u * Q**e with mantissa marking U and exponent marking E."""

    mantissa: Marking
    exponent: Marking

    def is_zero(self) -> bool:
        return not self.mantissa


FP_ZERO = FloatRep(ZERO, ZERO)


class PowerCircuit:
    def __init__(self, base: int):
        if base < 2:
            raise ValueError(f"circuit base must be at least 2, got {base}")
        self.base = base
        self.succ: list[Marking] = [ZERO]
        self.key: list[int] = [0]
        self.order: list[int] = [0]
        c0 = [0]
        self._chain: list[list[int]] = [c0]
        self._pos: list[int] = [0]
        self._c0 = c0
        self._by_succ: dict[Marking, int] = {ZERO: 0}
        self.epoch = 0
        self.version = 0
        self._powers: list[int] = [1]
        self._small: list = [1]
        self._index_cache: Optional[tuple[int, dict[int, int]]] = None
        self.memo_enabled = True
        self._reset_memos()

    # ------------------------------------------------------------------ basics

    def _reset_memos(self) -> None:
        self._memo_add: dict = {}
        self._memo_mbp: dict = {}
        self._memo_fp: dict = {}
        self._memo_int: dict = {}
        self._memo_mod: dict = {}

    def clear_memos(self) -> None:
        self._reset_memos()

    def __len__(self) -> int:
        return len(self.succ)

    def _qpow(self, k: int) -> int:
        p = self._powers
        while len(p) <= k:
            p.append(p[-1] * self.base)
        return p[k]

    def index_of(self, node: int) -> int:
        cache = self._index_cache
        if cache is None or cache[0] != self.version:
            cache = (self.version, {n: i for i, n in enumerate(self.order)})
            self._index_cache = cache
        return cache[1][node]

    def chains(self) -> list[list[int]]:
        """Maximal chains, bottom to top, in node order."""
        seen = set()
        out = []
        for n in self.order:
            ch = self._chain[n]
            if id(ch) not in seen:
                seen.add(id(ch))
                out.append(list(ch))
        return out

    def chain_count(self) -> int:
        return len({id(ch) for ch in self._chain})

    @property
    def initial_chain(self) -> list[int]:
        return list(self._c0)

    def chain_position(self, node: int) -> tuple[list[int], int]:
        return self._chain[node], self._pos[node]

    # ------------------------------------------------------------ canonical form

    def canon(self, m: Marking) -> Marking:
        """Return m in canonical form for the current chain structure.

        Only circuits of base >= 3 ever need work here: merging two chains
        can turn a chain-wise compact marking into a non-canonical word.
        """
        if m.epoch == self.epoch or len(m.digits) < 2:
            return m
        return self._recanon(m)

    def _recanon(self, m: Marking) -> Marking:
        groups: dict[int, list] = {}
        chain, pos = self._chain, self._pos
        for n, d in m.digits.items():
            ch = chain[n]
            g = groups.get(id(ch))
            if g is None:
                groups[id(ch)] = [ch, [(n, d)]]
            else:
                g[1].append((n, d))
        out: dict[int, int] = {}
        for ch, items in groups.values():
            if len(items) == 1:
                out[items[0][0]] = items[0][1]
                continue
            low = min(pos[n] for n, _ in items)
            v = sum(d * self._qpow(pos[n] - low) for n, d in items)
            digs = compact_of_int(v, self.base)
            if low + len(digs) > len(ch):
                raise AssertionError("canonical form does not fit its chain")
            for i, d in enumerate(digs):
                if d:
                    out[ch[low + i]] = d
        return Marking(out, self.epoch)

    def is_compact(self, m: Marking) -> bool:
        """Check digit range and chain-wise canonicity of a marking."""
        q = self.base
        for n, d in m.digits.items():
            if not 0 <= n < len(self.succ) or not 0 < abs(d) < q:
                return False
        return self._recanon(Marking(dict(m.digits), -1)).digits == m.digits

    # -------------------------------------------------------------- comparison

    def compare(self, a: Marking, b: Marking) -> int:
        """Sign of eps(a) - eps(b), read from the highest differing node."""
        a = self.canon(a)
        b = self.canon(b)
        if a is b:
            return 0
        key = self.key
        best = -1
        sign = 0
        ad, bd = a.digits, b.digits
        for n, d in ad.items():
            e = bd.get(n, 0)
            if d != e and key[n] > best:
                best = key[n]
                sign = 1 if d > e else -1
        for n, e in bd.items():
            if n not in ad and key[n] > best:
                best = key[n]
                sign = -1 if e > 0 else 1
        return sign

    def sign(self, m: Marking) -> int:
        m = self.canon(m)
        if not m.digits:
            return 0
        key = self.key
        top = max(m.digits, key=key.__getitem__)
        return 1 if m.digits[top] > 0 else -1

    def equal(self, a: Marking, b: Marking) -> bool:
        return self.canon(a) == self.canon(b)

    # ---------------------------------------------------------- node insertion

    def _is_successor(self, lo: int, hi: int) -> bool:
        """eps(Lambda_hi) == eps(Lambda_lo) + 1, decided on markings.

        Compact markings of values differing by one agree off the initial
        chain, so only the initial-chain parts need to be evaluated.
        """
        a = self.succ[lo].digits
        b = self.succ[hi].digits
        chain, pos, c0 = self._chain, self._pos, self._c0
        diff = 0
        for n, d in b.items():
            if chain[n] is c0:
                diff += d * self._qpow(pos[n])
            elif a.get(n) != d:
                return False
        for n, d in a.items():
            if chain[n] is c0:
                diff -= d * self._qpow(pos[n])
            elif n not in b:
                return False
        return diff == 1

    def _locate(self, lam: Marking) -> int:
        order, succ = self.order, self.succ
        lo, hi = 0, len(order)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.compare(succ[order[mid]], lam) < 0:
                lo = mid + 1
            else:
                hi = mid
        return lo

    def _assign_key(self, rank: int) -> int:
        order, key = self.order, self.key
        below = key[order[rank - 1]] if rank > 0 else None
        above = key[order[rank]] if rank < len(order) else None
        if above is None:
            return (below if below is not None else 0) + _KEY_GAP
        if below is None:
            below = above - 2 * _KEY_GAP
        if above - below >= 2:
            return (below + above) // 2
        return None  # type: ignore[return-value]

    def _relabel(self) -> None:
        for i, n in enumerate(self.order):
            self.key[n] = (i + 1) * _KEY_GAP

    def _insert(self, lam: Marking, rank: int) -> int:
        nid = len(self.succ)
        k = self._assign_key(rank)
        self.succ.append(lam)
        self._by_succ[lam] = nid
        order = self.order
        self.key.append(0)
        if k is None:
            order.insert(rank, nid)
            self._relabel()
        else:
            self.key[nid] = k
            order.insert(rank, nid)
        self.version += 1
        self._small.append(_UNSET)
        prev = order[rank - 1] if rank > 0 else None
        nxt = order[rank + 1] if rank + 1 < len(order) else None
        link_lo = prev is not None and self._is_successor(prev, nid)
        link_hi = nxt is not None and self._is_successor(nid, nxt)
        chain, pos = self._chain, self._pos
        if link_lo and link_hi:
            lower, upper = chain[prev], chain[nxt]
            lower.append(nid)
            chain.append(lower)
            pos.append(len(lower) - 1)
            for n in upper:
                lower.append(n)
                chain[n] = lower
                pos[n] = len(lower) - 1
            if self.base > 2:
                self._on_merge(set(lower[: pos[nid]]), set(upper))
        elif link_lo:
            ch = chain[prev]
            ch.append(nid)
            chain.append(ch)
            pos.append(len(ch) - 1)
        elif link_hi:
            ch = chain[nxt]
            ch.insert(0, nid)
            chain.append(ch)
            pos.append(0)
            for i, n in enumerate(ch):
                pos[n] = i
        else:
            chain.append([nid])
            pos.append(0)
        return nid

    def _on_merge(self, lower: set[int], upper: set[int]) -> None:
        self.epoch += 1
        self._reset_memos()
        succ, by_succ = self.succ, self._by_succ
        for p, lam in enumerate(succ):
            dg = lam.digits
            if len(dg) > 1 and any(n in upper for n in dg) and any(n in lower for n in dg):
                new = self._recanon(lam)
                if new.digits != dg:
                    del by_succ[lam]
                    by_succ[new] = p
                    succ[p] = new
                else:
                    lam.epoch = self.epoch
            else:
                lam.epoch = self.epoch

    def update_nodes(self, proposals: Sequence[Marking], check: bool = False) -> list[int]:
        """Make sure a node with each proposed successor marking exists.

        Returns the node id realizing each proposal.  Proposals must be
        compact markings over existing nodes with nonnegative value.
        """
        out = []
        for lam in proposals:
            if check:
                if not self.is_compact(lam):
                    raise ContractViolation("proposed successor marking is not compact")
                if self.sign(lam) < 0:
                    raise ContractViolation("successor marking must be nonnegative")
            lam = self.canon(lam)
            nid = self._by_succ.get(lam)
            if nid is None:
                nid = self._insert(lam, self._locate(lam))
            out.append(nid)
        return out

    def ensure_initial_chain(self, mu: int) -> None:
        """Grow the initial chain (values 1, Q, Q^2, ...) to length >= mu."""
        c0 = self._c0
        while len(c0) < mu:
            length = len(c0)
            digits = compact_of_int(length, self.base)
            lam = Marking({c0[i]: d for i, d in enumerate(digits) if d}, self.epoch)
            self.update_nodes([lam])

    def extend_chains(self, mu: int) -> None:
        """For every node P, add nodes with successor values eps(Lambda_P)+i, i <= mu."""
        if mu <= 0:
            return
        tops = [ch[-1] for ch in self.chains() if ch is not self._c0 and ch[0] != 0]
        self.ensure_initial_chain(len(self._c0) + mu)
        for t in tops:
            self._extend_top(t, mu)

    def _extend_top(self, top: int, h: int) -> None:
        ch = self._chain[top]
        if ch is self._c0:
            self.ensure_initial_chain(len(ch) + h)
            return
        base_lam = self.succ[top]
        props = [self.add([base_lam, self.from_int(i)]) for i in range(1, h + 1)]
        self.update_nodes(props)

    # ---------------------------------------------------------------- integers

    def from_int(self, x: int) -> Marking:
        """Compact marking of an integer, placed on the initial chain."""
        m = self._memo_int.get(x)
        if m is not None:
            return self.canon(m)
        if x == 0:
            return ZERO
        digits = compact_of_int(x, self.base)
        self.ensure_initial_chain(len(digits))
        c0 = self._c0
        m = Marking({c0[i]: d for i, d in enumerate(digits) if d}, self.epoch)
        if self.memo_enabled and -(1 << 64) < x < (1 << 64):
            self._memo_int[x] = m
        return m

    def _node_small(self, n: int) -> Optional[int]:
        """eps(n) when its exponent is at most SMALL_EXP, else None."""
        s = self._small[n]
        if s is _UNSET:
            e = self.small_value(self.succ[n])
            s = None if e is None or e > SMALL_EXP else self._qpow(e)
            self._small[n] = s
        return s

    def small_value(self, m: Marking) -> Optional[int]:
        """Exact value if every node in the support is small.

        A compact marking whose top node is Q**e satisfies |value| >= Q**e / 3,
        so None certifies a value of absolute size at least Q**SMALL_EXP / 3.
        """
        total = 0
        for n, d in m.digits.items():
            v = self._node_small(n)
            if v is None:
                return None
            total += d * v
        return total

    def node_exponent(self, n: int) -> Optional[int]:
        """eps(Lambda_n) when small, else None."""
        if n == 0:
            return 0
        return self.small_value(self.succ[n])

    # ---------------------------------------------------------------- addition

    def add(self, markings: Iterable[Marking]) -> Marking:
        """Compact marking of the sum; extends chains at the top when needed."""
        ms = [m for m in markings if m.digits]
        if not ms:
            return ZERO
        if len(ms) == 1:
            return self.canon(ms[0])
        ms = [self.canon(m) for m in ms]
        memo_key = None
        if len(ms) == 2 and self.memo_enabled:
            memo_key = (ms[0], ms[1])
            hit = self._memo_add.get(memo_key)
            if hit is not None and hit.epoch == self.epoch:
                return hit
        result = self._add_loop(ms)
        if memo_key is not None and result.epoch == self.epoch:
            self._memo_add[memo_key] = result
            self._memo_add[(memo_key[1], memo_key[0])] = result
        return result

    def _add_loop(self, ms: list[Marking]) -> Marking:
        q = self.base
        acc: dict[int, int] = {}
        for m in ms:
            for n, d in m.digits.items():
                acc[n] = acc.get(n, 0) + d
        while True:
            chain, pos = self._chain, self._pos
            groups: dict[int, list] = {}
            for n, d in acc.items():
                if d:
                    ch = chain[n]
                    g = groups.get(id(ch))
                    if g is None:
                        groups[id(ch)] = [ch, [(n, d)]]
                    else:
                        g[1].append((n, d))
            out: dict[int, int] = {}
            overflow = None
            for ch, items in groups.values():
                if len(items) == 1 and -q < items[0][1] < q:
                    out[items[0][0]] = items[0][1]
                    continue
                low = min(pos[n] for n, _ in items)
                v = sum(d * self._qpow(pos[n] - low) for n, d in items)
                if v == 0:
                    continue
                digs = compact_of_int(v, q)
                need = low + len(digs) - len(ch)
                if need > 0:
                    overflow = (ch[-1], need)
                    break
                for i, d in enumerate(digs):
                    if d:
                        out[ch[low + i]] = d
            if overflow is None:
                return Marking(out, self.epoch)
            self._extend_top(*overflow)

    def negate(self, m: Marking) -> Marking:
        return -self.canon(m)

    def subtract(self, a: Marking, b: Marking) -> Marking:
        return self.add([a, -self.canon(b)])

    # ----------------------------------------------------- multiply by a power

    def mult_by_power(self, k: Marking, l: Marking) -> Marking:
        """Compact marking of eps(k) * Q**eps(l); the product must be integral."""
        k = self.canon(k)
        if not k.digits:
            return ZERO
        l = self.canon(l)
        if not l.digits:
            return k
        memo_key = (k, l)
        if self.memo_enabled:
            hit = self._memo_mbp.get(memo_key)
            if hit is not None and hit.epoch == self.epoch:
                return hit
        key = self.key
        nodes = sorted(k.digits, key=key.__getitem__)
        props = [self.add([self.succ[p], l]) for p in nodes]
        if self.sign(props[0]) < 0:
            raise ContractViolation("mult_by_power: result is not an integer")
        ids = self.update_nodes(props)
        digits = {ids[i]: k.digits[p] for i, p in enumerate(nodes)}
        if self.base > 2:
            result = self._recanon(Marking(digits, -1))
        else:
            result = Marking(digits, self.epoch)
        if self.memo_enabled and result.epoch == self.epoch:
            self._memo_mbp[memo_key] = result
        return result

    # ------------------------------------------------------- floating point

    def make_floating_point(self, k: Marking) -> FloatRep:
        """Split eps(k) = u * Q**e with Q not dividing u."""
        k = self.canon(k)
        if not k.digits:
            return FP_ZERO
        if self.memo_enabled:
            hit = self._memo_fp.get(k)
            if hit is not None and hit[0].epoch == self.epoch and hit[1].epoch == self.epoch:
                return hit
        low = min(k.digits, key=self.key.__getitem__)
        e = self.succ[low]
        u = self.mult_by_power(k, -e) if e.digits else k
        res = FloatRep(u, self.canon(e))
        if self.memo_enabled:
            self._memo_fp[k] = res
        return res

    def fp_canon(self, r: FloatRep) -> FloatRep:
        u, e = r
        if u.epoch == self.epoch and e.epoch == self.epoch:
            return r
        return FloatRep(self.canon(u), self.canon(e))

    def fp_mult_power(self, r: FloatRep, m: Marking) -> FloatRep:
        if not r.mantissa.digits:
            return FP_ZERO
        if not m.digits:
            return self.fp_canon(r)
        return FloatRep(self.canon(r.mantissa), self.add([r.exponent, m]))

    def fp_to_int(self, r: FloatRep) -> tuple[bool, Optional[Marking]]:
        u, e = r
        if not u.digits:
            return True, ZERO
        if self.sign(e) < 0:
            return False, None
        return True, self.mult_by_power(u, e)

    def fp_from_int(self, x: int) -> FloatRep:
        return self.make_floating_point(self.from_int(x))

    def fp_negate(self, r: FloatRep) -> FloatRep:
        r = self.fp_canon(r)
        return FloatRep(-r.mantissa, r.exponent)

    def fp_add(self, items: Sequence[FloatRep]) -> FloatRep:
        rs = [self.fp_canon(r) for r in items if r.mantissa.digits]
        if not rs:
            return FP_ZERO
        if len(rs) == 1:
            return rs[0]
        emin = rs[0].exponent
        for r in rs[1:]:
            if self.compare(r.exponent, emin) < 0:
                emin = r.exponent
        neg = -self.canon(emin)
        terms = []
        for u, e in rs:
            if e == emin:
                terms.append(u)
            else:
                terms.append(self.mult_by_power(u, self.add([e, neg])))
        total = self.add(terms)
        if not total.digits:
            return FP_ZERO
        f = self.make_floating_point(total)
        return self.fp_mult_power(f, emin)

    def fp_equal(self, a: FloatRep, b: FloatRep) -> bool:
        a = self.fp_canon(a)
        b = self.fp_canon(b)
        return a.mantissa == b.mantissa and a.exponent == b.exponent

    # ------------------------------------------------------------------ modulo

    def mod_const(self, m: Marking, k: int) -> int:
        """eps(m) mod k for a word-sized modulus k >= 2."""
        if k < 2:
            raise ValueError("modulus must be at least 2")
        m = self.canon(m)
        total = 0
        for n, d in m.digits.items():
            total += d * self._node_mod(n, k)
        return total % k

    def _node_mod(self, n: int, k: int) -> int:
        memo = self._memo_mod
        hit = memo.get((n, k))
        if hit is not None:
            return hit
        v = self._node_small(n)
        if v is not None:
            res = v % k
        else:
            res = self._pow_mod_huge(self.succ[n], k)
        memo[(n, k)] = res
        return res

    def _pow_mod(self, d: Marking, k: int) -> int:
        """Q ** eps(d) mod k for eps(d) >= 0."""
        e = self.small_value(d)
        if e is not None:
            return pow(self.base, e, k)
        return self._pow_mod_huge(d, k)

    def _pow_mod_huge(self, d: Marking, k: int) -> int:
        # eps(d) exceeds every exponent threshold here.  Split k = ell * r
        # with gcd(ell, Q) = 1 and every prime of r dividing Q; the r-part of
        # Q**eps(d) is 0 and the ell-part follows from Euler's theorem.
        ell, r = _split_modulus(k, self.base)
        if ell == 1:
            return 0
        phi = _totient(ell)
        x = pow(self.base, self.mod_const(d, phi) if phi > 1 else 0, ell)
        return r * (x * pow(r, -1, ell) % ell) % k

    def mod_power(self, l: Marking, k: Marking, r: int = 1) -> Marking:
        """Compact marking of eps(l) mod (Q**eps(k) * r), with eps(k) >= 0."""
        if r < 1:
            raise ValueError("r must be at least 1")
        k = self.canon(k)
        l = self.canon(l)
        if self.sign(k) < 0:
            raise ContractViolation("mod_power needs a nonnegative exponent")
        modnode = self.update_nodes([k])[0]
        l = self.canon(l)
        k = self.canon(k)
        keep: dict[int, int] = {}
        high: list[tuple[int, int]] = []
        for n, d in l.digits.items():
            if self.compare(self.succ[n], k) < 0:
                keep[n] = d
            else:
                high.append((n, d))
        t = self.canon(Marking(keep, -1)) if self.base > 2 else Marking(keep, self.epoch)
        borrow = 0
        if self.sign(t) < 0:
            t = self.add([t, Marking({modnode: 1}, self.epoch)])
            borrow = 1
        if r == 1:
            return t
        neg_k = -self.canon(k)
        z = -borrow
        for n, d in high:
            z += d * self._pow_mod(self.add([self.succ[n], neg_k]), r)
        z %= r
        if z == 0:
            return t
        modnode = self.update_nodes([self.canon(k)])[0]
        shifted = self.mult_by_power(self.from_int(z), self.succ[modnode])
        return self.add([t, shifted])

    # -------------------------------------------------------------- inspection

    def stats(self) -> dict[str, int]:
        return {"gamma": len(self.succ), "chains": self.chain_count()}

    def dump(self, markings: Sequence[tuple[str, Marking]] = ()) -> str:
        return dump_circuit(self, markings)


def _split_modulus(k: int, q: int) -> tuple[int, int]:
    r = 1
    ell = k
    from math import gcd

    g = gcd(ell, q)
    while g > 1:
        ell //= g
        r *= g
        g = gcd(ell, q)
    return ell, r


_TOTIENTS: dict[int, int] = {}


def _totient(n: int) -> int:
    t = _TOTIENTS.get(n)
    if t is None:
        from sympy import totient

        t = _TOTIENTS[n] = int(totient(n))
    return t


# ------------------------------------------------------------------ text dump


def format_marking(c: PowerCircuit, m: Marking) -> str:
    m = c.canon(m)
    parts = sorted((c.index_of(n), d) for n, d in m.digits.items())
    return " ".join(f"{d}@{i}" for i, d in parts)


def dump_circuit(c: PowerCircuit, markings: Sequence[tuple[str, Marking]] = ()) -> str:
    lines = [f"base {c.base}"]
    for i, n in enumerate(c.order):
        body = format_marking(c, c.succ[n])
        lines.append(f"node {i}:" + (" " + body if body else ""))
    for name, m in markings:
        body = format_marking(c, m)
        lines.append(f"marking {name}:" + (" " + body if body else ""))
    return "\n".join(lines) + "\n"


def _parse_digits(body: str, lineno: int, limit: int) -> dict[int, int]:
    out: dict[int, int] = {}
    for tok in body.split():
        d, sep, i = tok.partition("@")
        if not sep:
            raise ValueError(f"line {lineno}: bad digit token {tok!r}")
        try:
            dv, iv = int(d), int(i)
        except ValueError:
            raise ValueError(f"line {lineno}: bad digit token {tok!r}") from None
        if not 0 <= iv < limit or iv in out or dv == 0:
            raise ValueError(f"line {lineno}: bad node reference in {tok!r}")
        out[iv] = dv
    return out


def parse_dump(text: str) -> tuple[PowerCircuit, list[tuple[str, Marking]], list[str]]:
    """Rebuild a circuit from a dump; returns (circuit, markings, other lines).

    Node indices in the dump are sorted positions.  Nodes are re-inserted in
    ascending order and must come out at the same positions.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("base "):
        raise ValueError("line 1: expected 'base <Q>'")
    c = PowerCircuit(int(lines[0].split()[1]))
    ids: list[int] = []
    markings: list[tuple[str, Marking]] = []
    extra: list[str] = []
    for lineno, line in enumerate(lines[1:], start=2):
        head, sep, body = line.partition(":")
        if line.startswith("node "):
            idx = int(head.split()[1])
            if idx != len(ids):
                raise ValueError(f"line {lineno}: nodes must be listed in order")
            digits = _parse_digits(body, lineno, len(ids))
            lam = Marking({ids[i]: d for i, d in digits.items()}, -1)
            if not c.is_compact(lam):
                raise ValueError(f"line {lineno}: successor marking is not compact")
            if idx == 0:
                if digits:
                    raise ValueError(f"line {lineno}: node 0 must have value 1")
                ids.append(0)
                continue
            lam = c.canon(lam)
            if c.compare(lam, c.succ[ids[-1]]) <= 0:
                raise ValueError(f"line {lineno}: nodes are not sorted by value")
            ids.append(c.update_nodes([lam])[0])
        elif line.startswith("marking "):
            name = head.split(None, 1)[1]
            digits = _parse_digits(body, lineno, len(ids))
            m = Marking({ids[i]: d for i, d in digits.items()}, -1)
            if not c.is_compact(m):
                raise ValueError(f"line {lineno}: marking {name} is not compact")
            markings.append((name, c.canon(m)))
        else:
            extra.append(line)
    return c, markings, extra


# -------------------------------------------------------------- batch forms
# The circuit is mutated in place (append-only); every function returns the
# results for its batch in input order.


def compare_markings(c: PowerCircuit, a: Marking, b: Marking) -> int:
    return c.compare(a, b)


def int_to_marking(c: PowerCircuit, xs: Sequence[int]) -> list[Marking]:
    return [c.from_int(x) for x in xs]


def add_markings(c: PowerCircuit, batches: Sequence[Sequence[Marking]]) -> list[Marking]:
    return [c.add(batch) for batch in batches]


def mult_by_power_batch(c: PowerCircuit, pairs: Sequence[tuple[Marking, Marking]]) -> list[Marking]:
    return [c.mult_by_power(k, l) for k, l in pairs]


def make_floating_point_batch(c: PowerCircuit, ks: Sequence[Marking]) -> list[FloatRep]:
    return [c.make_floating_point(k) for k in ks]


def fp_add_batch(c: PowerCircuit, batches: Sequence[Sequence[FloatRep]]) -> list[FloatRep]:
    return [c.fp_add(batch) for batch in batches]
