import pytest
from mpmath import ceil as mp_ceil
from mpmath import mp, mpf, sqrt

from pircodes.bounds import (
    BoundsEngine,
    NTable,
    TABLE_COLUMNS,
    TableFormatError,
    best_lower,
    best_upper,
    default_engine,
    dual_distance_lower,
    griesmer,
    hyperplane_avg_lower,
    multiplicity_cap,
    periodicity_reduce,
    rao_vardy_lower,
    rao_vardy_term,
    reed_muller_lower,
    render_table,
)
from pircodes.recovery import validate_certificate

# best-known grid, columns k = 2, 3, 4, 6, 8, 10, 12, 14, 16; "a-b" is an interval
GRID = {
    1: "2 3 4 6 8 10 12 14 16",
    2: "3 5 6 9 12 15 18 21 24",
    3: "4 6 7 11 14 18 21 25 28",
    4: "5 8 9 12 15 20 24 27 30",
    5: "6 9 10 14 18 22 25 28 31",
    6: "7 10 11 15 19 23 27 32 36",
    7: "8 12 13 16 19-21 24-26 27-29 32-34 35-39",
    8: "9 13 14 17-18 20-23 26-27 29-33 33-38 36-42",
    9: "10 14 15 18-20 21-25 27-28 30-37 35-40 38-45",
    10: "11 15 16 20-21 22-26 28-31 31-40 36-45 40-50",
}


def _cells():
    for s, row in GRID.items():
        for k, cell in zip(TABLE_COLUMNS, row.split()):
            lo, _, up = cell.partition("-")
            yield s, k, int(lo), int(up or lo)


@pytest.mark.parametrize("s,k,lo,up", list(_cells()))
def test_grid_cell(s, k, lo, up):
    assert best_lower(s, k).value == lo
    assert best_upper(s, k).value == up


def test_spot_values():
    assert (best_lower(7, 8).value, best_upper(7, 8).value) == (19, 21)
    assert best_lower(10, 3).value == 15


def test_lower_never_exceeds_upper():
    eng = default_engine()
    for s in range(1, 11):
        for k in range(1, 17):
            lo, up = eng.bounds(s, k)
            assert lo.value <= up.value, (s, k)
            assert lo.trace and up.trace


def test_materialized_codes_meet_their_bounds():
    eng = default_engine()
    built = 0
    for s in range(1, 7):
        for k in range(1, 17):
            res = eng.materialize(s, k)
            if res is None:
                assert not eng.best_upper(s, k).materializable
                continue
            G, cert = res
            assert G.s == s and G.n == eng.best_upper(s, k).value
            assert validate_certificate(G, k, cert)
            built += 1
    assert built >= 80


@pytest.mark.parametrize("s", [1, 2, 3])
def test_monotone_in_k(s):
    eng = default_engine()
    ups = [eng.best_upper(s, k).value for k in range(1, 17)]
    los = [eng.best_lower(s, k).value for k in range(1, 17)]
    assert ups == sorted(ups) and los == sorted(los)


def test_monotone_in_s():
    eng = default_engine()
    for k in range(1, 17):
        ups = [eng.best_upper(s, k).value for s in range(1, 11)]
        assert all(a < b for a, b in zip(ups, ups[1:]))


def test_rao_vardy_against_high_precision():
    mp.dps = 40
    for s in list(range(1, 20001)) + list(range(10**6 - 20000, 10**6 + 1)):
        want = int(mp_ceil(sqrt(2 * s + mpf(1) / 4) + mpf(1) / 2))
        assert rao_vardy_term(s) == want, s
    # the square-root argument is an exact square for s = m (m + 1) / 2
    for m in range(1, 1415):
        s = m * (m + 1) // 2
        assert rao_vardy_term(s) == m + 1


def test_rao_vardy_at_dimension_92():
    assert rao_vardy_lower(92, 5) == 109
    assert best_lower(92, 5).value >= 107
    with pytest.raises(ValueError):
        rao_vardy_lower(5, 2)


def test_closed_forms():
    assert griesmer(4, 8) == 15 and griesmer(5, 8) == 16
    assert hyperplane_avg_lower(5, 8) == 16
    assert dual_distance_lower(4, 3) == 7 and dual_distance_lower(4, 4) == 8
    assert dual_distance_lower(4, 3, "unit-column") == 7
    assert reed_muller_lower(4, 4) == 9 and reed_muller_lower(4, 12) == 24
    assert reed_muller_lower(4, 5) is None and reed_muller_lower(3, 2) is None
    assert multiplicity_cap(4, 4, 9) == 2


def test_periodicity_round_trip():
    red = periodicity_reduce(4, 20, lambda b: {4: 9}[b])
    assert (red.k, red.layers, red.offset) == (4, 2, 30)
    assert best_upper(4, 20).value == best_upper(red.s, red.k).value + red.offset
    assert periodicity_reduce(5, 8, 18).layers == 0
    assert periodicity_reduce(5, 24, 25).layers == 0
    assert (best_lower(5, 24).value, best_upper(5, 24).value) == (49, 49)
    assert best_lower(5, 40).value == best_upper(5, 40).value == 80


# -- N tables -------------------------------------------------------------------


def test_ntable_parse_and_dump(tmp_path):
    t = NTable.parse("# comment\n4 8 15\n\n5 8 16  # trailing\n")
    assert t.lookup(4, 8) == (15, "user file")
    assert t.lookup(4, 7)[0] == 14
    assert t.lookup(3, 3) == (griesmer(3, 3), "Griesmer fallback")
    path = tmp_path / "n.txt"
    path.write_text(t.dump())
    assert NTable.load(str(path)).dump() == t.dump()


@pytest.mark.parametrize("text", ["4 8", "4 x 15", "0 3 5", "4 8 3"])
def test_ntable_errors(text):
    with pytest.raises(TableFormatError):
        NTable.parse(text)


def test_user_table_can_raise_lower_bounds():
    eng = BoundsEngine(table=NTable.parse("7 8 20\n", base=NTable.embedded()))
    assert eng.best_lower(7, 8).value == 20
    assert best_lower(7, 8).value == 19


def test_render_table_layout():
    text = render_table()
    lines = text.splitlines()
    assert len(lines) == 11
    assert lines[0].split()[1:] == [str(k) for k in TABLE_COLUMNS]
    assert "19-21" in lines[7]
    assert render_table() == text
