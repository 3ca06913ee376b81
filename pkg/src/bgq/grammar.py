"""Tokenizer for group words over a, A, t, T, b, B and 1.

Grammar: word := item*; item := letter exponent?; exponent := '^' '-'? digits.
Whitespace is ignored.  Upper-case letters are inverses.
"""
from __future__ import annotations

import re
from typing import NamedTuple

LETTERS = "aAtTbB1"


class WordSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class Token(NamedTuple):
    letter: str  # one of 'a', 't', 'b', '1' (lower case)
    exponent: int
    position: int


_ITEM = re.compile(r"\s*([aAtTbB1])(?:\s*(\^)\s*(-?)(\d*))?")
_SPACE = re.compile(r"\s*")
_SIGN = {"a": ("a", 1), "A": ("a", -1), "t": ("t", 1), "T": ("t", -1), "b": ("b", 1), "B": ("b", -1), "1": ("1", 1)}


def tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    i, n = 0, len(text)
    match = _ITEM.match
    while i < n:
        m = match(text, i)
        if m is None:
            j = _SPACE.match(text, i).end()
            if j == n:
                break
            raise WordSyntaxError(f"unexpected character {text[j]!r}", j)
        letter, sign = _SIGN[m.group(1)]
        exp = 1
        if m.group(2):
            if not m.group(4):
                raise WordSyntaxError("exponent needs digits", m.start(4))
            exp = int(m.group(4))
            if m.group(3):
                exp = -exp
        out.append(Token(letter, sign * exp, m.start(1)))
        i = m.end()
    return out


def invert_text(tokens: list[Token]) -> list[Token]:
    return [Token(t.letter, -t.exponent, t.position) for t in reversed(tokens)]


def format_tokens(tokens: list[tuple[str, int]]) -> str:
    parts = []
    for letter, e in tokens:
        if e == 1:
            parts.append(letter)
        elif e == -1:
            parts.append(letter.upper())
        else:
            parts.append(f"{letter}^{e}")
    return " ".join(parts)
