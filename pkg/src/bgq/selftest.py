"""Quick randomized self-checks against the exact oracle."""
from __future__ import annotations

import random
from typing import TextIO

from . import csdr
from .baumslag import BaumslagGroup, Conjugacy, tower_marking, tower_word
from .oracle import OracleOverflow, britton_reduce_exact, compact_rep_oracle

_INV = {"a": "A", "A": "a", "t": "T", "T": "t", "b": "B", "B": "b"}


def _check_csdr(rng: random.Random, samples: int) -> bool:
    for _ in range(samples):
        q = rng.randint(2, 6)
        x = rng.randint(-(10**6), 10**6)
        d = csdr.compact_of_int(x, q)
        if csdr.value(d, q) != x or not csdr.is_compact(d, q) or d != compact_rep_oracle(x, q):
            return False
    return True


def _check_words(rng: random.Random, samples: int) -> bool:
    for q in (2, 3, -2):
        g = BaumslagGroup(q)
        for _ in range(samples):
            text = " ".join(rng.choice("aAtTbB") for _ in range(rng.randint(0, 14)))
            try:
                expected = not britton_reduce_exact(text, q)
            except OracleOverflow:
                continue
            if g.word_problem(g.parse(text)) != expected:
                return False
    return True


def _check_tower() -> bool:
    for q in (2, 3):
        g = BaumslagGroup(q)
        for n in range(7):
            out = g.britton_reduce(g.parse(tower_word(n)))
            if len(out.letters) != 1 or not g.circuit.equal(out.letters[0].m, tower_marking(g.circuit, n)):
                return False
    return True


def _check_conjugates(rng: random.Random, samples: int) -> bool:
    for q in (2, 3):
        g = BaumslagGroup(q)
        for _ in range(samples):
            u = [rng.choice("aAtTbB") for _ in range(rng.randint(1, 8))]
            z = [rng.choice("aAtTbB") for _ in range(rng.randint(0, 4))]
            v = [_INV[c] for c in reversed(z)] + u + z
            res = g.conjugacy_generic(g.parse(" ".join(u)), g.parse(" ".join(v)))
            if res == Conjugacy.NOT_CONJUGATE:
                return False
    return True


def run_selftest(seed: int = 0, samples: int = 500, out: TextIO | None = None) -> int:
    rng = random.Random(seed)
    checks = [
        ("csdr vs literal carry formulas", lambda: _check_csdr(rng, samples)),
        ("word problem vs exact reduction", lambda: _check_words(rng, samples)),
        ("tower words", _check_tower),
        ("constructed conjugate pairs", lambda: _check_conjugates(rng, samples // 5 + 1)),
    ]
    failed = 0
    for name, fn in checks:
        ok = fn()
        failed += not ok
        if out is not None:
            print(f"{'PASS' if ok else 'FAIL'} {name}", file=out)
    return 1 if failed else 0
