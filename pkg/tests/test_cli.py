import io
import subprocess
import sys

import pytest

from pircodes.cli import run
from pircodes.gf2core import parse_matrix
from pircodes.recovery import certificate_from_json, validate_certificate


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def ex1(tmp_path):
    prefix = str(tmp_path / "ex1")
    code, _, _ = call("catalog", "dump", "s4k4_n9", "--out", prefix)
    assert code == 0
    return prefix


def test_verify_decides(ex1):
    code, out, _ = call("verify", "--matrix", ex1 + ".txt", "--k", "4")
    assert code == 0 and out.startswith("4-PIR: yes")
    code, out, _ = call("verify", "--matrix", ex1 + ".txt", "--k", "5")
    assert code == 1 and out.startswith("5-PIR: no")
    code, out, _ = call("verify", "--matrix", ex1 + ".txt", "--k", "4", "--lam", "2")
    assert code == 2 and "unknown" in out


def test_verify_with_certificate(ex1, tmp_path):
    code, out, _ = call("verify", "--matrix", ex1 + ".txt", "--cert", ex1 + ".cert.json", "--k", "4")
    assert code == 0 and "certificate valid" in out
    code, out, _ = call("verify", "--matrix", ex1 + ".txt", "--cert", ex1 + ".cert.json", "--k", "5")
    assert code == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert call("verify", "--matrix", ex1 + ".txt", "--cert", str(bad), "--k", "4")[0] == 3


def test_verify_rejects_degenerate_matrix(tmp_path):
    m = tmp_path / "m.txt"
    m.write_text("110\n000\n")
    code, out, _ = call("verify", "--matrix", str(m), "--k", "1")
    assert code == 1 and "zero columns" in out
    m.write_text("111\n111\n")
    code, out, _ = call("verify", "--matrix", str(m), "--k", "1")
    assert code == 1 and "rank" in out


def test_bounds_output():
    code, out, _ = call("bounds", "--s", "7", "--k", "8")
    assert code == 0
    assert out.splitlines()[0] == "lower 19 upper 21"
    assert "N(7,8)" in out


def test_bounds_with_user_table(tmp_path):
    t = tmp_path / "n.txt"
    t.write_text("7 8 20\n")
    code, out, _ = call("bounds", "--s", "7", "--k", "8", "--ntable", str(t))
    assert out.splitlines()[0] == "lower 20 upper 21"
    t.write_text("7 8\n")
    assert call("bounds", "--s", "7", "--k", "8", "--ntable", str(t))[0] == 3


def test_table():
    code, out, _ = call("table")
    assert code == 0 and len(out.splitlines()) == 11 and "19-21" in out


def test_construct_remove_lines_writes_files(tmp_path):
    prefix = str(tmp_path / "rl")
    code, out, _ = call("construct", "remove-lines", "--s", "5", "--lines", "2", "--out", prefix)
    assert code == 0
    G = parse_matrix(open(prefix + ".txt").read())
    cert = certificate_from_json(open(prefix + ".cert.json").read())
    assert (G.s, G.n, cert.k) == (5, 25, 12)
    assert validate_certificate(G, 12, cert)
    assert call("verify", "--matrix", prefix + ".txt", "--cert", prefix + ".cert.json", "--k", "12")[0] == 0


def test_construct_combinations(ex1, tmp_path):
    prefix = str(tmp_path / "j")
    args = ["--matrix", ex1 + ".txt", "--cert", ex1 + ".cert.json"]
    code, out, _ = call("construct", "juxtapose", *args, *args, "--out", prefix)
    assert code == 0 and "k=8" in out
    assert call("construct", "juxtapose", *args)[0] == 3
    assert call("construct", "parity_extend", *args)[0] == 3
    code, out, _ = call("construct", "best", "--s", "5", "--k", "10")
    assert code == 0 and parse_matrix("\n".join(out.splitlines()[:5])).n == 22
    assert call("construct", "best", "--s", "7", "--k", "8")[0] == 2


def test_ilp_build_and_solve(tmp_path):
    lp = str(tmp_path / "m.lp")
    code, _, _ = call("ilp-build", "--s", "2", "--k", "3", "--lam", "2", "--out", lp)
    assert code == 0
    text = open(lp).read()
    assert text.startswith("\\") and "Minimize" in text
    code, out, _ = call("ilp-solve", "--lp", lp, "--matrix-out", str(tmp_path / "c"))
    assert code == 0
    assert out.splitlines()[0] == "exact value: 5"
    assert out.splitlines()[-1].endswith("status=optimal obj=5")
    G = parse_matrix(open(tmp_path / "c.txt").read())
    assert G.n == 5


def test_ilp_labels():
    code, out, _ = call("ilp-solve", "--s", "3", "--k", "4", "--lam", "2")
    assert out.splitlines()[0] == "upper bound with certificate: 7"
    code, out, _ = call("ilp-solve", "--s", "4", "--k", "4", "--lam", "3", "--mode", "lower")
    assert out.splitlines()[0] == "lower bound: 9"
    code, out, _ = call("ilp-solve", "--s", "4", "--k", "4", "--lam", "3", "--generator", "(1 2 3 4)")
    assert code == 0 and out.splitlines()[0] == "upper bound with certificate: 9"


def test_ilp_budget_and_usage():
    code, out, _ = call("ilp-solve", "--s", "5", "--k", "8", "--lam", "3", "--mode", "lower", "--nodes", "10")
    assert code == 2 and "status=budget" in out
    assert call("ilp-solve", "--s", "3", "--k", "2", "--generator", "(1 1)")[0] == 3
    assert call("ilp-build", "--s", "3", "--k", "2", "--mode", "lower", "--systematic")[0] == 3
    assert call("ilp-solve", "--s", "3", "--k", "2", "--nodes", "0")[0] == 3


def test_budget_environment(monkeypatch):
    monkeypatch.setenv("PIRCODES_NODES", "10")
    code, out, _ = call("ilp-solve", "--s", "5", "--k", "8", "--lam", "3", "--mode", "lower")
    assert code == 2
    monkeypatch.setenv("PIRCODES_NODES", "ten")
    assert call("ilp-solve", "--s", "2", "--k", "2")[0] == 3


def test_lengthen(ex1, tmp_path):
    prefix = str(tmp_path / "l")
    code, out, _ = call("lengthen", "--matrix", ex1 + ".txt", "--cert", ex1 + ".cert.json", "--t", "1", "--out", prefix)
    assert code == 0 and "n=10 s=5 k=4" in out
    assert call("verify", "--matrix", prefix + ".txt", "--cert", prefix + ".cert.json", "--k", "4")[0] == 0


def test_catalog():
    code, out, _ = call("catalog", "list")
    assert code == 0 and "s9k10_n28" in out and "code_17_5_8" in out
    code, out, _ = call("catalog", "dump", "code_17_5_8")
    assert code == 0 and parse_matrix(out).n == 17
    assert call("catalog", "dump", "nope")[0] == 3
    assert call("catalog", "dump")[0] == 3


def test_usage_errors():
    assert call()[0] == 3
    assert call("frobnicate")[0] == 3
    assert call("verify", "--k", "3")[0] == 3
    assert call("verify", "--matrix", "/nonexistent", "--k", "3")[0] == 3
    assert call("bounds", "--s", "x", "--k", "2")[0] == 3
    assert call("table", "--jobs", "0")[0] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "--s", "6", "--k", "12"],
        ["table", "--s-max", "6"],
        ["ilp-build", "--s", "3", "--k", "4", "--lam", "3", "--mode", "lower"],
        ["ilp-solve", "--s", "4", "--k", "3", "--lam", "3"],
        ["construct", "simplex", "--s", "4"],
        ["catalog", "list"],
    ],
)
def test_output_is_deterministic(argv):
    first = call(*argv, "--deterministic")
    assert call(*argv, "--deterministic") == first
    assert call(*argv) == first


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "pircodes.cli", "bounds", "--s", "4", "--k", "4"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("lower 9 upper 9")
