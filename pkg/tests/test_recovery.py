import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import has_disjoint, is_k_pir, minimal_sets_brute, point_multisets, rank
from pircodes.constructions import catalog, fixtures, simplex
from pircodes.gf2core import GeneratorMatrix, min_distance
from pircodes.recovery import (
    CertificateFormatError,
    RecoveryCertificate,
    certificate_from_json,
    combine_certificates,
    decide_k_pir,
    enumerate_minimal_recovery_sets,
    pack_disjoint,
    puncture_certificate,
    search_certificate,
    truncate_certificate,
    validate_certificate,
    xor_columns,
)


def _random_matrix(rng, s_lo=1, s_hi=4, n_hi=10):
    while True:
        s = rng.randint(s_lo, s_hi)
        n = rng.randint(s, n_hi)
        cols = tuple(rng.randrange(1, 1 << s) for _ in range(n))
        if rank(cols) == s:
            return GeneratorMatrix(s, cols)


def test_minimal_sets_match_enumeration():
    rng = random.Random(3)
    for _ in range(150):
        s = rng.randint(1, 4)
        n = rng.randint(1, 9)
        G = GeneratorMatrix(s, tuple(rng.randrange(0, 1 << s) for _ in range(n)))
        for i in range(s):
            for lam in (1, 2, 3, 5):
                assert enumerate_minimal_recovery_sets(G, i, lam) == minimal_sets_brute(G.columns, i, lam)


@given(st.lists(st.integers(1, (1 << 10) - 1), max_size=12), st.integers(0, 4))
@settings(max_examples=200, deadline=None)
def test_pack_disjoint_is_exact(masks, k):
    sets = sorted({tuple(j for j in range(10) if (m >> j) & 1) for m in masks})
    got = pack_disjoint(sets, k, 10)
    want = has_disjoint(masks, k)
    assert (got is not None) == want
    if got is not None:
        used = [j for R in got for j in R]
        assert len(used) == len(set(used)) and len(got) == k
        assert all(R in sets for R in got)


def test_decide_matches_brute_force_on_the_small_box():
    """Every full-rank multiset with s <= 3, n <= 8 and every k <= 4."""
    checked = 0
    for s in (1, 2, 3):
        for n in range(s, 9):
            for cols in point_multisets(s, n):
                G = GeneratorMatrix(s, cols)
                for k in range(1, 5):
                    want = is_k_pir(cols, s, k)
                    dec = decide_k_pir(G, k)
                    assert dec.answer == ("yes" if want else "no"), (cols, k)
                    if want:
                        assert validate_certificate(G, k, dec.certificate)
                    checked += 1
                    if not want:
                        break  # k-PIR is monotone in k
    assert checked > 5000


def test_search_certificate_statuses():
    G, _ = simplex(3)
    assert search_certificate(G, 4, 2).found
    out = search_certificate(G, 5, 2)
    assert out.status == "not-found-within-cap" and out.failed_index is not None
    big, _ = simplex(6)
    assert search_certificate(big, 32, 2, budget=3).status == "budget-exhausted"
    assert decide_k_pir(big, 32, budget=3).answer == "unknown"


def test_decide_with_capped_lambda_reports_unknown():
    G = next(e.matrix for e in catalog() if e.id == "s4k4_n9")
    assert decide_k_pir(G, 4, max_lam=2).answer == "unknown"
    assert decide_k_pir(G, 4, max_lam=3).answer == "yes"


# -- certificates -------------------------------------------------------------


def test_certificate_json_round_trip():
    for e in catalog():
        if e.certificate is None:
            continue
        text = e.certificate.to_json()
        back = certificate_from_json(text)
        assert back == e.certificate
        assert back.to_json() == text


@pytest.mark.parametrize(
    "text",
    ["{", "[]", '{"s": 2, "n": 3}', '{"s": 2, "n": 3, "k": 1, "sets": [[[0]]]}', '{"s": 1, "n": 1, "k": 1, "sets": [[["a"]]]}'],
)
def test_certificate_shape_errors(text):
    with pytest.raises(CertificateFormatError):
        certificate_from_json(text)


def test_validation_reports_each_defect():
    G, cert = simplex(3)
    assert validate_certificate(G, 4, cert)
    assert not validate_certificate(G, 5, cert)
    sets = [list(per_i) for per_i in cert.sets]
    sets[0][1] = sets[0][0] + sets[0][1]  # overlaps set 0 and has the wrong sum
    bad = RecoveryCertificate(3, 7, 4, tuple(tuple(p) for p in sets))
    report = validate_certificate(G, 4, bad)
    assert not report.valid
    assert any("e_1" in line for line in report.lines())
    oob = RecoveryCertificate(3, 7, 1, (((9,),), ((1,),), ((2,),)))
    assert not validate_certificate(G, 1, oob)


def _dual(G, idx):
    return xor_columns(G, idx) == 0


def test_symmetric_differences_are_dual_codewords():
    """Two recovery sets for the same unit vector differ by a dual codeword."""
    pairs = 0
    for e in catalog():
        if e.certificate is None:
            continue
        for per_i in e.certificate.sets:
            for R, T in combinations(per_i, 2):
                assert _dual(e.matrix, set(R) ^ set(T))
                pairs += 1
    for name, (G, _) in fixtures().items():
        for i in range(G.s):
            sets = enumerate_minimal_recovery_sets(G, i, 3)
            for R, T in combinations(sets, 2):
                assert _dual(G, set(R) ^ set(T))
                pairs += 1
    assert pairs > 1000


def test_parity_extension_lifts_odd_certificates():
    rng = random.Random(11)
    done = 0
    while done < 100:
        G = _random_matrix(rng, 2, 4, 10)
        k = 0
        cert = None
        for kk in range(1, min_distance(G) + 1):
            dec = decide_k_pir(G, kk)
            if dec.answer != "yes":
                break
            k, cert = kk, dec.certificate
        if cert is None:
            continue
        if k % 2 == 0:
            k -= 1
            cert = truncate_certificate(cert, k)
        H, lifted = combine_certificates("parity_extend", [(G, cert)])
        assert lifted.k == k + 1
        assert validate_certificate(H, k + 1, lifted)
        done += 1


def test_combinations_and_puncturing():
    G, c = simplex(3)
    H, ch = combine_certificates("juxtapose", [(G, c), (G, c)])
    assert ch.k == 8 and validate_certificate(H, 8, ch)
    H, ch = combine_certificates("direct_sum", [(G, c), simplex(2)])
    assert ch.k == 2 and validate_certificate(H, 2, ch)
    H, ch = puncture_certificate(G, c, 6)
    assert ch.k == 3 and validate_certificate(H, 3, ch)
    with pytest.raises(ValueError):
        combine_certificates("parity_extend", [(G, c)])
