import random

import pytest

from oracles import brute_P, ilp_brute
from pircodes.gf2core import is_projective, min_distance
from pircodes.ilp import (
    IlpModel,
    ModelError,
    apply_symmetry,
    build_exact,
    build_lower,
    cyclic_generator,
    export_lp,
    extract_code,
    parse_lp,
    solve,
)
from pircodes.ilp.build import constraint_signatures, is_invariant
from pircodes.ilp.model import EQ, GE, LE
from pircodes.ilp.pirsearch import plan
from pircodes.recovery import decide_k_pir, validate_certificate

SMALL = [(s, k) for s in (1, 2, 3) for k in (1, 2, 3, 4)]


@pytest.mark.parametrize("s,k", SMALL)
def test_exact_model_matches_brute_force(s, k):
    m = build_exact(s, k, max(2, s))
    out = solve(m)
    assert out.status == "optimal"
    assert out.objective == brute_P(s, k)


@pytest.mark.parametrize("s,k", [(2, 3), (3, 3), (3, 4), (2, 4)])
@pytest.mark.parametrize("builder", ["exact", "lower"])
def test_structured_and_generic_search_agree(s, k, builder):
    m = build_exact(s, k, 3) if builder == "exact" else build_lower(s, k, 3)
    assert plan(m) is not None
    fast = solve(m)
    slow = solve(m, structured=False)
    assert fast.status == slow.status == "optimal"
    assert fast.objective == slow.objective


@pytest.mark.parametrize("s,k", SMALL)
@pytest.mark.parametrize("lam", [2, 3])
def test_lower_model_is_sound(s, k, lam):
    out = solve(build_lower(s, k, lam))
    assert out.status == "optimal"
    assert out.objective <= brute_P(s, k)


@pytest.mark.parametrize("k,value", [(2, 5), (3, 8), (4, 9), (6, 12)])
def test_lower_model_is_sound_in_dimension_four(k, value):
    for lam in (2, 3):
        assert solve(build_lower(4, k, lam)).objective <= value


def test_lambda_two_hyperplane_rows_coincide():
    for s, k in [(3, 4), (4, 6)]:
        lo = build_lower(s, k, 2)
        ex = build_exact(s, k, 2)
        hyp_lo = {c.name: c for c in lo.constraints if c.name.startswith("hyp_")}
        hyp_ex = {c.name: c for c in ex.constraints if c.name.startswith("hyp_")}
        assert hyp_lo.keys() == hyp_ex.keys()
        for name in hyp_ex:
            assert hyp_lo[name].terms == hyp_ex[name].terms
            assert hyp_lo[name].rhs == hyp_ex[name].rhs


def test_lambda_three_tightens_some_hyperplane_rows():
    m = build_lower(4, 4, 3)
    assert any(c.name.count("_") == 2 and c.name.startswith("hyp_") for c in m.constraints)


@pytest.mark.parametrize("s,k,lam", [(2, 2, 2), (2, 3, 2), (3, 4, 2), (3, 6, 3), (4, 6, 3)])
def test_extracted_code_validates(s, k, lam):
    m = build_exact(s, k, lam)
    out = solve(m)
    G, cert = extract_code(m, out)
    assert G.n == out.objective
    assert validate_certificate(G, k, cert)
    assert decide_k_pir(G, k).answer == "yes"


def test_extract_small_cases_are_simplex_codes():
    for s, k, lam in [(2, 2, 2), (3, 4, 2)]:
        m = build_exact(s, k, lam)
        G, _ = extract_code(m, solve(m))
        assert sorted(G.columns) == list(range(1, 1 << s))


def test_extract_rejects_lower_models():
    m = build_lower(2, 2, 2)
    with pytest.raises(Exception):
        extract_code(m, solve(m))


def test_flags():
    m = build_exact(3, 2, 2, systematic=True)
    out = solve(m)
    G, _ = extract_code(m, out)
    assert {1, 2, 4} <= set(G.columns)
    m = build_exact(3, 4, 3, projective=True)
    G, _ = extract_code(m, solve(m))
    assert is_projective(G)
    m = build_exact(3, 4, 3, order_units=True, mult_cap=True)
    assert solve(m).objective == 7


def test_infeasible_toy():
    m = build_exact(2, 3, 2)
    m.add_constraint([(m.var(v.name), 1) for v in m.variables if v.name.startswith("x_")], LE, 2, "toy")
    assert solve(m).status == "infeasible"
    assert solve(m, structured=False).status == "infeasible"


def test_removing_a_defining_row_disables_the_structured_search():
    m = build_exact(2, 3, 2)
    m.constraints = [c for c in m.constraints if not c.name.startswith("demand")]
    assert plan(m) is None


def test_trailer_format():
    out = solve(build_exact(2, 3, 2))
    assert out.trailer() == f"nodes={out.nodes} status=optimal obj=5"


def test_node_budget_is_an_outcome():
    out = solve(build_lower(5, 8, 3), max_nodes=50)
    assert out.status == "budget"
    assert out.lower is not None and out.lower <= 18
    out = solve(build_exact(3, 6, 3), max_nodes=5, structured=False)
    assert out.status in ("budget", "bounds-interval")


def test_seed_lower_stops_at_first_matching_incumbent():
    m = build_exact(3, 4, 2)
    out = solve(m, seed_lower=7, structured=False)
    assert out.status == "optimal" and out.objective == 7


# -- LP text ------------------------------------------------------------------


def test_export_is_deterministic_and_named():
    m = build_exact(2, 2, 2)
    text = export_lp(m)
    assert "Minimize" in text and text.endswith("End\n")
    assert {v.name for v in m.variables if v.name.startswith("x_")} == {"x_1", "x_2", "x_3"}
    assert all(v.name.startswith(("x_", "y_")) for v in m.variables)
    assert export_lp(build_exact(2, 2, 2)) == text


def test_lp_round_trip():
    m = build_lower(3, 4, 3)
    text = export_lp(m)
    back = parse_lp(text)
    assert export_lp(back) == text
    assert solve(back).objective == solve(m).objective
    assert back.meta["k"] == 4


def test_model_rejects_unknown_variables():
    m = IlpModel()
    m.add_var("a", 0, 1)
    with pytest.raises(ModelError):
        m.add_constraint([(3, 1)], GE, 1)
    with pytest.raises(ModelError):
        m.add_var("a")


# -- symmetry -----------------------------------------------------------------


def test_identity_group_keeps_the_model():
    m = build_exact(3, 4, 2)
    r = apply_symmetry(m, [[1, 2, 3]])
    assert r.num_vars == m.num_vars
    assert len(r.constraints) == len(constraint_signatures(m))
    assert solve(r).objective == solve(m).objective


@pytest.mark.parametrize("s,k", [(3, 4), (4, 4)])
@pytest.mark.parametrize("cycles", [[[1, 2]], "full"])
def test_cyclic_reduction(s, k, cycles):
    cyc = [list(range(1, s + 1))] if cycles == "full" else cycles
    g = cyclic_generator(s, cyc)
    for builder in (build_exact, build_lower):
        m = builder(s, k, 3)
        r = apply_symmetry(m, [g])
        assert r.num_vars < m.num_vars
        base = solve(m).objective
        red = solve(r).objective
        if builder is build_exact:
            assert red >= base
        else:
            assert red <= brute_or_table(s, k)


def brute_or_table(s, k):
    return brute_P(s, k) if s <= 3 else {4: 9}[k]


def test_reduced_exact_solution_expands_to_a_code():
    m = build_exact(4, 4, 3)
    r = apply_symmetry(m, [cyclic_generator(4, [[1, 2, 3, 4]])])
    out = solve(r)
    G, cert = extract_code(r, out)
    assert G.n == out.objective == 9
    assert validate_certificate(G, 4, cert)


def test_invalid_permutation():
    with pytest.raises(ModelError):
        apply_symmetry(build_exact(3, 2, 2), [[1, 1, 2]])


def test_symmetry_breaking_flag_breaks_invariance():
    assert is_invariant(build_exact(3, 2, 2), [2, 3, 1])
    assert not is_invariant(build_exact(3, 2, 2, order_units=True), [2, 3, 1])


def test_z6_reduction_of_the_dimension_six_model_is_smaller():
    m = build_exact(6, 16, 2)
    r = apply_symmetry(m, [cyclic_generator(6, [[1, 2, 3, 4, 5, 6]])])
    xs = [key for key in r.keys if key[0][0] == "x"]
    # orbits of Z_6 on the 63 nonzero points of F_2^6 (necklaces of length 6 minus the zero word)
    assert len(xs) == 13
    assert r.num_vars < m.num_vars


# -- generic exactness ----------------------------------------------------------


def _random_model(rng):
    while True:
        nv = rng.randint(1, 7)
        ubs = [rng.randint(1, 3) for _ in range(nv)]
        size = 1
        for u in ubs:
            size *= u + 1
        if size <= 6000:
            break
    m = IlpModel()
    for j in range(nv):
        m.add_var(f"v{j}", 0, ubs[j])
    rows = []
    for _ in range(rng.randint(0, 5)):
        terms = [(j, rng.randint(-3, 3)) for j in range(nv) if rng.random() < 0.7]
        sense = rng.choice([GE, GE, LE, EQ])
        rhs = rng.randint(-3, 6)
        m.add_constraint(terms, sense, rhs)
        c = m.constraints[-1]
        rows.append((c.terms, c.sense, c.rhs))
    cost = [rng.randint(-3, 4) for _ in range(nv)]
    m.set_objective(list(enumerate(cost)))
    return m, [0] * nv, ubs, rows, cost


def test_generic_search_matches_enumeration_on_random_models():
    rng = random.Random(20240611)
    for _ in range(100):
        m, lbs, ubs, rows, cost = _random_model(rng)
        want = ilp_brute(lbs, ubs, rows, cost)
        out = solve(m, structured=False)
        if want is None:
            assert out.status == "infeasible"
        else:
            assert out.status == "optimal"
            assert out.objective == want
            assert not m.check(out.values)


def test_min_distance_of_extracted_codes():
    m = build_exact(4, 6, 3)
    G, _ = extract_code(m, solve(m))
    assert min_distance(G) >= 6
