import random
from itertools import combinations

import pytest

from oracles import has_disjoint
from pircodes.constructions import (
    Line,
    catalog,
    catalog_lookup,
    fixture,
    lengthen,
    lengthen_search,
    lengthening_certificate,
    line_through,
    max_disjoint_family,
    max_removable_lines,
    partial_line_spread,
    remove_lines,
    simplex,
    spread_size,
    zero_sum_sets,
)
from pircodes.gf2core import GeneratorMatrix, min_distance
from pircodes.recovery import decide_k_pir, validate_certificate, xor_columns


@pytest.mark.parametrize("s", range(1, 9))
def test_simplex(s):
    G, cert = simplex(s)
    half = 1 << (s - 1)
    assert G.n == 2 * half - 1 and cert.k == half
    assert min_distance(G) == half
    assert validate_certificate(G, half, cert)
    want = "1^1" + (f" 2^{half - 1}" if half > 1 else "")
    assert all(cert.profile_str(i) == want for i in range(s))


@pytest.mark.parametrize("s", range(3, 9))
def test_spreads_are_maximum_and_avoid_units(s):
    sp = partial_line_spread(s)
    assert len(sp.lines) == spread_size(s)
    units = {1 << i for i in range(s)}
    assert all(bin(sp.normal & u).count("1") % 2 for u in units)
    assert not {p for L in sp.lines for p in L.points} & units


def test_line_validation():
    assert line_through(1, 2).points == (1, 2, 3)
    with pytest.raises(ValueError):
        Line(1, 2, 4)
    with pytest.raises(ValueError):
        Line(1, 1, 0)


@pytest.mark.parametrize("s,lam", [(4, 1), (5, 1), (5, 2), (5, 3)] + [(6, j) for j in range(1, 10)])
def test_remove_lines(s, lam):
    G, cert = remove_lines(s, lam)
    assert (G.n, cert.k) == ((1 << s) - 1 - 3 * lam, (1 << (s - 1)) - 2 * lam)
    assert validate_certificate(G, cert.k, cert)


def test_remove_lines_limits():
    assert [max_removable_lines(s) for s in (4, 5, 6, 7)] == [1, 5, 9, 21]
    for s in (4, 5, 6, 7):
        assert max_removable_lines(s) == spread_size(s)
        G, cert = remove_lines(s, max_removable_lines(s))
        assert validate_certificate(G, cert.k, cert)
    with pytest.raises(ValueError):
        remove_lines(5, 6)
    with pytest.raises(ValueError):
        remove_lines(2, 1)


def test_lengthen_shape():
    G, _ = simplex(2)
    H = lengthen(G, 0b101, 2)
    assert H.s == 3 and H.n == 5
    assert G.columns == (2, 1, 3)
    assert H.columns == (2 | 4, 1, 3 | 4, 4, 4)


def test_zero_sum_sets_match_brute_force():
    rng = random.Random(5)
    for _ in range(40):
        s = rng.randint(2, 4)
        G = GeneratorMatrix(s, tuple(rng.randrange(1, 1 << s) for _ in range(rng.randint(3, 9))))
        got = sorted(zero_sum_sets(G, 4))
        want = []
        for size in range(2, 5):
            for idx in combinations(range(G.n), size):
                if xor_columns(G, idx) == 0 and all(
                    xor_columns(G, sub) for r in range(1, size) for sub in combinations(idx, r)
                ):
                    want.append(idx)
        assert got == sorted(want)


def test_max_disjoint_family_is_maximum():
    rng = random.Random(8)
    for _ in range(100):
        sets = sorted({tuple(sorted(rng.sample(range(10), rng.randint(1, 4)))) for _ in range(rng.randint(0, 12))})
        fam = max_disjoint_family(sets)
        used = [j for R in fam for j in R]
        assert len(used) == len(set(used))
        masks = [sum(1 << j for j in R) for R in sets]
        assert has_disjoint(masks, len(fam))
        assert not has_disjoint(masks, len(fam) + 1)


def test_lengthening_certificate_and_search():
    G = next(e for e in catalog() if e.id == "s4k4_n9")
    found = lengthen_search(G.matrix, G.certificate, 1)
    assert found
    ext = found[0]
    assert (ext.matrix.s, ext.matrix.n) == (5, 10)
    assert validate_certificate(ext.matrix, 4, ext.certificate)
    zero = max_disjoint_family(zero_sum_sets(G.matrix, 4))
    again = lengthening_certificate(G.matrix, G.certificate, ext.row, 1, zero)
    assert again is not None and validate_certificate(ext.matrix, 4, again)
    assert lengthening_certificate(G.matrix, G.certificate, 0, 0, zero) is None


def test_catalog_entries_are_consistent():
    ids = [e.id for e in catalog()]
    assert len(ids) == len(set(ids))
    for e in catalog():
        assert (e.matrix.s, e.matrix.n) == (e.s, e.n)
        assert min_distance(e.matrix) >= e.k
        assert e.certificate is not None and validate_certificate(e.matrix, e.k, e.certificate)
    assert {e.n for e in catalog_lookup(6, 8)} == {19, 20}


def test_reference_fixtures():
    F = fixture("code_17_5_8")
    assert (F.s, F.n, min_distance(F)) == (5, 17, 8)
    for name in ("len17_code1_16_4", "len17_code2_17_4", "len17_code3_17_4", "len17_code4_17_4"):
        assert min_distance(fixture(name)) == 8


def test_small_catalog_entries_are_decided_independently():
    for e in catalog():
        if e.s <= 5 and e.n <= 18:
            assert decide_k_pir(e.matrix, e.k).answer == "yes"
