import subprocess
import sys

import pytest

from bgq import cli
from bgq.baumslag import tower_word
from bgq.powercircuit import parse_dump


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_wp(capsys):
    assert run(capsys, "wp", "b a B a b A B A A")[:2] == (0, "identity\n")
    assert run(capsys, "wp", "a")[:2] == (1, "not identity\n")
    assert run(capsys, "wp", "-q", "3", "b a B a b A B a^-3")[0] == 0


def test_member(capsys):
    assert run(capsys, "member", "b a B")[:2] == (0, "(0,1)\n")
    assert run(capsys, "member", "b")[:2] == (1, "not in BS\n")


def test_stats_line(capsys):
    code, out, _ = run(capsys, "wp", "--stats", tower_word(2) + " T^4")
    first, second = out.splitlines()
    assert code == 0 and second == "identity"
    keys = [kv.split("=")[0] for kv in first.split()]
    assert keys == ["n", "gamma", "chains", "support", "ms"]


def test_conj_exit_codes(capsys):
    assert run(capsys, "conj", "B a", "B t")[:2] == (0, "conjugate\n")
    assert run(capsys, "conj", "b a b t", "b a b t b a")[:2] == (1, "not-conjugate\n")
    assert run(capsys, "conj", "t", "a")[:2] == (2, "inconclusive-in-BS\n")


def test_conj_fixed(capsys):
    assert run(capsys, "conj-fixed", "t t", "t")[0] == 0
    assert run(capsys, "conj-fixed", "t", "a^3")[0] == 1
    code, _, err = run(capsys, "conj-fixed", "t^100", "t")
    assert code == cli.EXIT_UNSUPPORTED and "unsupported" in err
    assert run(capsys, "conj-fixed", "-q", "-2", "t", "a")[0] == cli.EXIT_UNSUPPORTED
    assert run(capsys, "conj-fixed", "-q", "-2", "--allow-negative", "t", "b a B")[0] == 0


@pytest.mark.parametrize(
    "argv,code",
    [
        (["wp", "a x"], cli.EXIT_SYNTAX),
        (["wp", "-q", "1", "a"], cli.EXIT_USAGE),
        (["wp"], cli.EXIT_USAGE),
        (["frobnicate"], cli.EXIT_USAGE),
        (["wp", "--threads", "0", "a"], cli.EXIT_USAGE),
    ],
)
def test_error_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code and err


def test_syntax_error_reports_position(capsys):
    _, _, err = run(capsys, "wp", "a a ? a")
    assert "4" in err


def test_reduce_round_trip(capsys, tmp_path):
    path = tmp_path / "dump.txt"
    code, out, _ = run(capsys, "reduce", "-q", "3", "--dump-circuit", str(path), "b t a T B a^5 B t^7")
    assert code == 0
    assert path.read_text() == out
    group, word = cli.parse_reduced(out, 3)
    assert cli.format_reduced(group, word) == out
    assert out.splitlines()[-1] == "word: x1 B x2"
    circuit, markings, extra = parse_dump(out)
    assert circuit.base == 3 and extra[-1].startswith("word:")


def test_parse_reduced_errors():
    with pytest.raises(ValueError):
        cli.parse_reduced("base 2\nnode 0:\n", 2)
    with pytest.raises(ValueError):
        cli.parse_reduced("base 2\nnode 0:\nword: x9\n", 2)


def test_threads_do_not_change_output(capsys):
    word = tower_word(4) + " a b t"
    outs = {run(capsys, "reduce", "--threads", str(k), word)[1] for k in (1, 2, 8)}
    assert len(outs) == 1


def test_bench_csv(capsys):
    code, out, _ = run(capsys, "bench", "--max-tower", "3", "--max-length", "64", "--seed", "1")
    rows = out.splitlines()
    assert code == 0 and rows[0] == "family,n,gamma,chains,support,ms"
    families = [r.split(",")[0] for r in rows[1:]]
    assert families == ["tower0", "tower1", "tower2", "tower3", "random", "random", "random"]


def test_bench_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("POWCIRC_SEED", "5")
    a = run(capsys, "bench", "--family", "random", "--max-length", "64")[1]
    b = run(capsys, "bench", "--family", "random", "--max-length", "64", "--seed", "5")[1]
    strip = lambda s: [r.rsplit(",", 1)[0] for r in s.splitlines()]
    assert strip(a) == strip(b)


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--samples", "60", "--seed", "2")
    assert code == 0
    assert len(out.splitlines()) == 4 and all(line.startswith("PASS") for line in out.splitlines())


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bgq", "member", "a t"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "(1,1)\n"
