"""Command-line front end.

Exit codes: wp/member/conj-fixed use 0 for yes and 1 for no; conj uses
0 conjugate, 1 not conjugate, 2 inconclusive (both sides in BS); 3 means an
unsupported fixed element; 64 and above are usage or syntax errors.
"""
from __future__ import annotations

import argparse
import csv
import os
import random
import sys
import time
from typing import Optional, Sequence

from .baumslag import (
    B,
    BaumslagGroup,
    BSElement,
    Conjugacy,
    PCWord,
    UnsupportedFixedElement,
    tower_word,
)
from .grammar import WordSyntaxError
from .powercircuit import FloatRep, dump_circuit, parse_dump

EXIT_USAGE = 64
EXIT_SYNTAX = 65
EXIT_UNSUPPORTED = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with 2
        raise UsageError(message)


def format_reduced(group: BaumslagGroup, word: PCWord) -> str:
    """Circuit dump with the word's markings plus a trailing ``word:`` line."""
    markings = []
    tokens = []
    k = 0
    for x in word.letters:
        if isinstance(x, int):
            tokens.append("b" if x == B else "B")
            continue
        k += 1
        name = f"x{k}"
        markings += [(f"{name}.u", x.r.mantissa), (f"{name}.e", x.r.exponent), (f"{name}.m", x.m)]
        tokens.append(name)
    text = dump_circuit(group.circuit, markings)
    return text + "word:" + "".join(" " + t for t in tokens) + "\n"


def parse_reduced(text: str, q: int) -> tuple[BaumslagGroup, PCWord]:
    circuit, markings, extra = parse_dump(text)
    group = BaumslagGroup(q, circuit)
    table = dict(markings)
    word_lines = [ln for ln in extra if ln.startswith("word:")]
    if len(word_lines) != 1:
        raise ValueError("expected exactly one 'word:' line")
    letters: list = []
    for tok in word_lines[0][5:].split():
        if tok == "b":
            letters.append(1)
        elif tok == "B":
            letters.append(-1)
        else:
            try:
                u, e, m = table[tok + ".u"], table[tok + ".e"], table[tok + ".m"]
            except KeyError:
                raise ValueError(f"unknown letter {tok!r}") from None
            letters.append(BSElement(FloatRep(u, e), m))
    return group, PCWord(group, letters)


def _stats_line(stats: dict) -> str:
    return "n={n} gamma={gamma} chains={chains} support={support} ms={ms:.1f}".format(**stats)


def _group(args) -> BaumslagGroup:
    return BaumslagGroup(args.q)


def _reduce_with_stats(group: BaumslagGroup, text: str, args) -> PCWord:
    word = group.parse(text)
    out = group.britton_reduce(word)
    if args.stats:
        print(_stats_line(group.last_stats))
    return out


def cmd_wp(args) -> int:
    g = _group(args)
    out = _reduce_with_stats(g, args.word, args)
    ident = not out.letters
    print("identity" if ident else "not identity")
    return 0 if ident else 1


def cmd_member(args) -> int:
    g = _group(args)
    out = _reduce_with_stats(g, args.word, args)
    x = out.bs_element()
    if x is None:
        print("not in BS")
        return 1
    print(g.format_element(x))
    return 0


def cmd_reduce(args) -> int:
    g = _group(args)
    out = _reduce_with_stats(g, args.word, args)
    text = format_reduced(g, out)
    if args.dump_circuit:
        with open(args.dump_circuit, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_conj(args) -> int:
    g = _group(args)
    res = g.conjugacy_generic(g.parse(args.u), g.parse(args.v))
    print(res.value)
    return {Conjugacy.CONJUGATE: 0, Conjugacy.NOT_CONJUGATE: 1, Conjugacy.INCONCLUSIVE: 2}[res]


def cmd_conj_fixed(args) -> int:
    g = _group(args)
    ok = g.conjugate_to_fixed(g.parse(args.g), g.parse(args.w), allow_negative=args.allow_negative)
    print("conjugate" if ok else "not-conjugate")
    return 0 if ok else 1


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("POWCIRC_SEED", "0"))


def cmd_bench(args) -> int:
    rng = random.Random(_seed(args))
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["family", "n", "gamma", "chains", "support", "ms"])
    jobs: list[tuple[str, str]] = []
    if args.family in ("tower", "all"):
        for n in range(args.max_tower + 1):
            jobs.append((f"tower{n}", tower_word(n)))
    if args.family in ("random", "all"):
        length = 16
        while length <= args.max_length:
            jobs.append(("random", " ".join(rng.choice("aAtTbB") for _ in range(length))))
            length *= 2
    for family, text in jobs:
        g = _group(args)
        g.britton_reduce(g.parse(text))
        s = g.last_stats
        writer.writerow([family, s["n"], s["gamma"], s["chains"], s["support"], f"{s['ms']:.1f}"])
    return 0


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    return run_selftest(seed=_seed(args), samples=args.samples, out=sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bgq", description="Decision procedures for the Baumslag group BG(1,q).")
    common = _Parser(add_help=False)
    common.add_argument("-q", type=int, default=2, help="signed base, |q| >= 2 (default 2)")
    common.add_argument("--stats", action="store_true", help="print a stats line after reducing")
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; merges run serially")
    common.add_argument("--seed", type=int, default=None, help="overrides POWCIRC_SEED")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("wp", parents=[common], help="word problem")
    s.add_argument("word")
    s.set_defaults(func=cmd_wp)

    s = sub.add_parser("member", parents=[common], help="membership in BS(1,q)")
    s.add_argument("word")
    s.set_defaults(func=cmd_member)

    s = sub.add_parser("reduce", parents=[common], help="print the Britton-reduced word and its circuit")
    s.add_argument("word")
    s.add_argument("--dump-circuit", metavar="PATH")
    s.set_defaults(func=cmd_reduce)

    s = sub.add_parser("conj", parents=[common], help="conjugacy of two words outside BS")
    s.add_argument("u")
    s.add_argument("v")
    s.set_defaults(func=cmd_conj)

    s = sub.add_parser("conj-fixed", parents=[common], help="conjugacy to a fixed BS element")
    s.add_argument("g")
    s.add_argument("w")
    s.add_argument("--allow-negative", action="store_true", help="enable negative q (unverified)")
    s.set_defaults(func=cmd_conj_fixed)

    s = sub.add_parser("bench", parents=[common], help="CSV timings for tower and random words")
    s.add_argument("--family", choices=["tower", "random", "all"], default="all")
    s.add_argument("--max-tower", type=int, default=10)
    s.add_argument("--max-length", type=int, default=4096)
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("selftest", parents=[common], help="quick differential checks against exact arithmetic")
    s.add_argument("--samples", type=int, default=500)
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if abs(args.q) < 2:
            raise UsageError(f"|q| must be at least 2, got {args.q}")
        if args.threads < 1:
            raise UsageError("--threads must be positive")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WordSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    except UnsupportedFixedElement as exc:
        print(f"unsupported fixed element: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    raise SystemExit(main())
