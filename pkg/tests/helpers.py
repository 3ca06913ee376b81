"""Shared helpers for the test suite."""
from __future__ import annotations

import random

from bgq.oracle import OracleOverflow, evaluate_marking_exact
from bgq.powercircuit import PowerCircuit

ACCEPTANCE_LINES: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


INV = {"a": "A", "A": "a", "t": "T", "T": "t", "b": "B", "B": "b"}


def random_word(rng: random.Random, length: int) -> str:
    return " ".join(rng.choice("aAtTbB") for _ in range(length))


def invert(letters: list[str]) -> list[str]:
    return [INV[c] for c in reversed(letters)]


def node_exponents(c: PowerCircuit, bit_cap: int = 1 << 14) -> dict[int, int]:
    """Exact successor values of every node whose value stays below the cap."""
    out = {}
    for n in c.order:
        try:
            out[n] = evaluate_marking_exact(c, c.succ[n], bit_cap)
        except OracleOverflow:
            pass
    return out


def check_circuit(c: PowerCircuit) -> None:
    """Sortedness, distinct values, compact successors, maximal chains."""
    ev = node_exponents(c)
    known = [n for n in c.order if n in ev]
    vals = [ev[n] for n in known]
    assert vals == sorted(vals) and len(set(vals)) == len(vals)
    for n in range(len(c.succ)):
        assert c.is_compact(c.succ[n])
    for ch in c.chains():
        for lo, hi in zip(ch, ch[1:]):
            if lo in ev and hi in ev:
                assert ev[hi] == ev[lo] + 1
    for lo, hi in zip(known, known[1:]):
        if ev[hi] == ev[lo] + 1:
            assert c.chain_position(lo)[0] is c.chain_position(hi)[0]


def exact_word(group, word) -> list:
    """Engine word as exact letters (ints for stable letters)."""
    from bgq.oracle import ExactBS, evaluate_floatrep_exact

    c = group.circuit
    out = []
    for x in word.letters:
        if isinstance(x, int):
            out.append(x)
        else:
            out.append(ExactBS(evaluate_floatrep_exact(c, x.r), evaluate_marking_exact(c, x.m)))
    return out
