"""Certified PIR code constructions and the embedded matrix catalog."""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from itertools import combinations
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from .gf2core import (
    BudgetExceeded,
    GeneratorMatrix,
    PointMultiset,
    canonical_key,
    gf2_rank,
    multiset_to_matrix,
    parse_matrix,
    popcount,
)
from .recovery import (
    RecoveryCertificate,
    RecoverySet,
    certificate_from_json,
    validate_certificate,
    xor_columns,
)


def _index_of(G: GeneratorMatrix) -> Dict[int, int]:
    """Point -> column index (first occurrence)."""
    out: Dict[int, int] = {}
    for j, c in enumerate(G.columns):
        out.setdefault(c, j)
    return out


def _points_matrix(s: int, points) -> GeneratorMatrix:
    return multiset_to_matrix(PointMultiset(s, {p: 1 for p in points}))


def simplex(s: int) -> Tuple[GeneratorMatrix, RecoveryCertificate]:
    """All 2^s - 1 nonzero points once; k = 2^{s-1} with sets {e_i} and {x, x + e_i}."""
    if not 1 <= s <= 20:
        raise BudgetExceeded(f"simplex dimension {s} outside 1..20")
    G = _points_matrix(s, range(1, 1 << s))
    where = _index_of(G)
    sets = []
    for i in range(s):
        e = 1 << i
        group = [(where[e],)]
        for x in range(1, 1 << s):
            if not x & e:
                group.append(tuple(sorted((where[x], where[x ^ e]))))
        sets.append(tuple(group))
    return G, RecoveryCertificate(s, G.n, 1 << (s - 1), tuple(sets))


# ---------------------------------------------------------------------------
# lines and spreads


@dataclass(frozen=True)
class Line:
    a: int
    b: int
    c: int

    def __post_init__(self) -> None:
        if len({self.a, self.b, self.c}) != 3 or 0 in (self.a, self.b, self.c):
            raise ValueError("a line needs three distinct nonzero points")
        if self.a ^ self.b ^ self.c:
            raise ValueError("the three points of a line must sum to zero")

    @property
    def points(self) -> Tuple[int, int, int]:
        return (self.a, self.b, self.c)


def line_through(a: int, b: int) -> Line:
    return Line(*sorted((a, b, a ^ b)))


@dataclass(frozen=True)
class PartialLineSpread:
    s: int
    normal: int  # hyperplane H = {x : <x, normal> = 0}
    lines: Tuple[Line, ...]

    def __post_init__(self) -> None:
        seen = set()
        for L in self.lines:
            for p in L.points:
                if popcount(p & self.normal) % 2:
                    raise ValueError(f"point {p} of a spread line is outside the hyperplane")
                if p in seen:
                    raise ValueError("spread lines are not pairwise disjoint")
                seen.add(p)


def spread_size(s: int) -> int:
    """Largest partial line spread inside a hyperplane of F_2^s."""
    m = s - 1
    return ((1 << m) - 1) // 3 if m % 2 == 0 else ((1 << m) - 5) // 3


def _hyperplane_basis(s: int, normal: int) -> List[int]:
    pts = [x for x in range(1, 1 << s) if popcount(x & normal) % 2 == 0]
    basis: List[int] = []
    for x in pts:
        if gf2_rank(basis + [x]) > len(basis):
            basis.append(x)
        if len(basis) == s - 1:
            break
    return basis


def _embed(coeffs: int, basis: Sequence[int]) -> int:
    v = 0
    for t, b in enumerate(basis):
        if (coeffs >> t) & 1:
            v ^= b
    return v


def partial_line_spread(s: int, normal: Optional[int] = None, budget: int = 5_000_000) -> PartialLineSpread:
    """Maximum partial line spread of the hyperplane with the given normal.

    Even hyperplane dimension: the orbits of a fixed-point-free order-3 map
    (a 2x2 companion block per coordinate pair) form a perfect spread.  Odd
    dimension: backtracking exact cover leaving four points uncovered.
    """
    if s < 2:
        raise ValueError("need s >= 2")
    if normal is None:
        normal = (1 << s) - 1
    for i in range(s):
        if popcount((1 << i) & normal) % 2 == 0:
            raise ValueError(f"hyperplane contains the unit vector e_{i + 1}")
    m = s - 1
    basis = _hyperplane_basis(s, normal)
    target = spread_size(s)
    if m % 2 == 0:
        lines = []
        seen = set()
        for v in range(1, 1 << m):
            if v in seen:
                continue
            w = 0
            for t in range(0, m, 2):
                lo, hi = (v >> t) & 1, (v >> (t + 1)) & 1
                # companion of x^2 + x + 1: (lo, hi) -> (hi, lo + hi)
                w |= (hi << t) | ((lo ^ hi) << (t + 1))
            trio = (v, w, v ^ w)
            seen.update(trio)
            lines.append(line_through(_embed(v, basis), _embed(w, basis)))
    else:
        lines = [line_through(_embed(a, basis), _embed(b, basis)) for a, b in _odd_spread(m, budget)]
    lines.sort(key=lambda L: L.points)
    if len(lines) != target:
        raise AssertionError(f"spread construction gave {len(lines)} lines, expected {target}")
    return PartialLineSpread(s, normal, tuple(lines))


def _odd_spread(m: int, budget: int) -> List[Tuple[int, int]]:
    """Exact cover of all but 4 points of F_2^m (m odd) by disjoint lines."""
    npts = (1 << m) - 1
    holes_allowed = npts - 3 * (((1 << m) - 5) // 3)
    free = set(range(1, 1 << m))
    chosen: List[Tuple[int, int]] = []
    steps = 0

    def options(p: int) -> List[int]:
        return [q for q in free if q > 0 and q != p and (p ^ q) in free and q < (p ^ q)]

    def rec(holes: int) -> bool:
        nonlocal steps
        if not free:
            return True
        steps += 1
        if steps > budget:
            raise BudgetExceeded("line spread search exceeded its budget")
        # most constrained point first
        best, best_opts = None, None
        for p in free:
            opts = options(p)
            if best_opts is None or len(opts) < len(best_opts):
                best, best_opts = p, opts
                if len(opts) <= 1:
                    break
        p = best
        for q in best_opts:
            r = p ^ q
            free.difference_update((p, q, r))
            chosen.append((p, q))
            if rec(holes):
                return True
            chosen.pop()
            free.update((p, q, r))
        if holes < holes_allowed:
            free.discard(p)
            if rec(holes + 1):
                return True
            free.add(p)
        return False

    if not rec(0):
        raise AssertionError("no spread found")
    return chosen


# ---------------------------------------------------------------------------
# line removal


def max_removable_lines(s: int) -> int:
    return ((1 << (s - 1)) - 3 - 2 * (-1) ** s) // 3


def remove_lines(
    s: int, lam: int, spread: Optional[PartialLineSpread] = None
) -> Tuple[GeneratorMatrix, RecoveryCertificate]:
    """Simplex code minus ``lam`` disjoint lines of a hyperplane free of unit vectors.

    k = 2^{s-1} - 2 lam, n = 2^s - 1 - 3 lam.  Each removed line {a, b, c}
    trades the pairs {x, x + e_i} (x in the line) for {a+e_i, b+e_i, c+e_i}.
    """
    if s < 3:
        raise ValueError("line removal needs s >= 3")
    if not 0 <= lam <= max_removable_lines(s):
        raise ValueError(f"lambda must lie in 0..{max_removable_lines(s)} for s={s}")
    if spread is None:
        spread = partial_line_spread(s)
    if len(spread.lines) < lam:
        raise ValueError("spread has too few lines")
    removed = spread.lines[:lam]
    gone = {p for L in removed for p in L.points}
    G = _points_matrix(s, [x for x in range(1, 1 << s) if x not in gone])
    where = _index_of(G)
    sets = []
    for i in range(s):
        e = 1 << i
        group: List[RecoverySet] = [(where[e],)]
        for x in range(1, 1 << s):
            if x & e or x in gone or (x ^ e) in gone:
                continue
            group.append(tuple(sorted((where[x], where[x ^ e]))))
        for L in removed:
            group.append(tuple(sorted(where[p ^ e] for p in L.points)))
        sets.append(tuple(group))
    k = (1 << (s - 1)) - 2 * lam
    cert = RecoveryCertificate(s, G.n, k, tuple(tuple(g) for g in sets))
    return G, cert


# ---------------------------------------------------------------------------
# lengthening


def lengthen(G: GeneratorMatrix, r: int, t: int) -> GeneratorMatrix:
    """[[G, 0], [r, 1..1]]: new last row ``r`` (bit j = column j) and t copies of e_{s+1}."""
    top = 1 << G.s
    cols = tuple(c | (top if (r >> j) & 1 else 0) for j, c in enumerate(G.columns))
    return GeneratorMatrix(G.s + 1, cols + (top,) * t)


def zero_sum_sets(G: GeneratorMatrix, max_size: int = 4, budget: int = 5_000_000) -> List[RecoverySet]:
    """Minimal zero-sum column sets (supports of minimal dual codewords) up to ``max_size``."""
    n = G.n
    by_value: Dict[int, List[int]] = {}
    for j, c in enumerate(G.columns):
        by_value.setdefault(c, []).append(j)
    out: List[RecoverySet] = []
    seen = 0
    for size in range(2, max_size + 1):
        for combo in combinations(range(n), size - 1):
            seen += 1
            if seen > budget:
                raise BudgetExceeded("zero-sum set enumeration exceeded its budget")
            acc = xor_columns(G, combo)
            for j in by_value.get(acc, ()):
                if j > combo[-1]:
                    cand = combo + (j,)
                    if _no_zero_subsum(G, cand):
                        out.append(cand)
    return out


def _no_zero_subsum(G: GeneratorMatrix, idx: Sequence[int]) -> bool:
    vecs = [G.columns[j] for j in idx]
    return gf2_rank(vecs) == len(vecs) - 1


def max_disjoint_family(sets: Sequence[RecoverySet], budget: int = 10_000_000) -> List[RecoverySet]:
    """Maximum clique in the disjointness graph (branch and bound, greedy colouring bound)."""
    masks = []
    for R in sets:
        m = 0
        for j in R:
            m |= 1 << j
        masks.append(m)
    nv = len(masks)
    adj = [0] * nv
    for a in range(nv):
        for b in range(a + 1, nv):
            if not masks[a] & masks[b]:
                adj[a] |= 1 << b
                adj[b] |= 1 << a
    best: List[int] = []
    steps = 0

    def colour_bound(cand: int) -> List[Tuple[int, int]]:
        # greedy sequential colouring; returns (vertex, colour count so far) in order
        order = []
        colour = 0
        rest = cand
        while rest:
            colour += 1
            avail = rest
            while avail:
                v = (avail & -avail).bit_length() - 1
                avail &= ~(1 << v)
                avail &= ~adj[v]
                rest &= ~(1 << v)
                order.append((v, colour))
        return order

    def expand(clique: List[int], cand: int) -> None:
        nonlocal best, steps
        steps += 1
        if steps > budget:
            raise BudgetExceeded("clique search exceeded its budget")
        order = colour_bound(cand)
        for v, bound in reversed(order):
            if len(clique) + bound <= len(best):
                return
            clique.append(v)
            nxt = cand & adj[v]
            if nxt:
                expand(clique, nxt)
            elif len(clique) > len(best):
                best = list(clique)
            clique.pop()
            cand &= ~(1 << v)

    expand([], (1 << nv) - 1)
    return sorted((sets[v] for v in best), key=lambda R: (len(R), R))


def _parity(r: int, mask: int) -> int:
    return popcount(r & mask) & 1


@dataclass(frozen=True)
class Lengthening:
    matrix: GeneratorMatrix
    certificate: RecoveryCertificate
    row: int  # extension row r as a column bitmask
    t: int


def _set_mask(R: Sequence[int]) -> int:
    m = 0
    for j in R:
        m |= 1 << j
    return m


def lengthening_certificate(
    G: GeneratorMatrix, cert: RecoveryCertificate, r: int, t: int, zero_sets: Sequence[RecoverySet]
) -> Optional[RecoveryCertificate]:
    """Certificate for [[G,0],[r,1..1]] if the step-(3)/(4) parity conditions hold."""
    k = cert.k
    n = G.n
    new_cols = list(range(n, n + t))
    sets = []
    for i, per_i in enumerate(cert.sets):
        odd = [R for R in per_i[:k] if _parity(r, _set_mask(R))]
        if len(odd) > t:
            return None
        group = []
        spare = iter(new_cols)
        for R in per_i[:k]:
            group.append(tuple(R) + ((next(spare),) if _parity(r, _set_mask(R)) else ()))
        sets.append(tuple(group))
    odd_zero = [R for R in zero_sets if _parity(r, _set_mask(R))]
    if len(odd_zero) < k - t:
        return None
    last = [(j,) for j in new_cols[: min(t, k)]] + [tuple(R) for R in odd_zero[: k - min(t, k)]]
    sets.append(tuple(last))
    return RecoveryCertificate(G.s + 1, n + t, k, tuple(sets))


def _rows_by_weight(n: int, max_weight: int) -> Iterator[int]:
    for w in range(0, max_weight + 1):
        for support in combinations(range(n), w):
            yield _set_mask(support)


def lengthen_search(
    G: GeneratorMatrix,
    cert: RecoveryCertificate,
    t: int,
    budget: int = 5_000_000,
    zero_set_cap: int = 4,
    max_row_weight: Optional[int] = None,
    limit: int = 1,
    candidates: Optional[Sequence[RecoveryCertificate]] = None,
) -> List[Lengthening]:
    """Extend an s-dimensional k-PIR code by one row and t columns e_{s+1}.

    C1 is ``candidates`` (default: just ``cert``); C2 is a maximum family of
    disjoint zero-sum sets from clique search.  Extension rows are tried by
    increasing weight; a row qualifies when every C1 collection has at most
    t odd sets per index and C2 has at least k - t odd sets.  The search is
    a heuristic: an empty result proves nothing.
    """
    k = cert.k
    if not validate_certificate(G, k, cert):
        raise ValueError("input certificate does not validate")
    collections = list(candidates) if candidates else [cert]
    results: List[Lengthening] = []
    need = max(0, k - t)
    zero = max_disjoint_family(zero_sum_sets(G, zero_set_cap)) if need else []
    if len(zero) < need:
        return results
    top = G.n if max_row_weight is None else max_row_weight
    tried = 0
    for r in _search_rows(G, collections, zero, t, need, top):
        tried += 1
        if tried > budget:
            break
        for C1 in collections:
            cert2 = lengthening_certificate(G, C1, r, t, zero)
            if cert2 is None:
                continue
            H = lengthen(G, r, t)
            if not validate_certificate(H, k, cert2):
                raise AssertionError("lengthening produced an invalid certificate")
            results.append(Lengthening(H, cert2, r, t))
            break
        if len(results) >= limit:
            break
    return results


def _search_rows(G, collections, zero, t, need, max_weight) -> Iterator[int]:
    """Rows by increasing weight, pruned on partial parities.

    Depth-first over columns with the weight fixed per pass; a branch dies
    once some index is forced over t odd sets or too few zero sets can
    still become odd.
    """
    n = G.n
    C1 = collections[0]
    k = C1.k
    rec_masks = [[_set_mask(R) for R in per_i[:k]] for per_i in C1.sets]
    zmasks = [_set_mask(R) for R in zero]
    # last column of each set: its parity is decided once that column is fixed
    def last_col(m: int) -> int:
        return m.bit_length() - 1

    closes: List[List[Tuple[int, int]]] = [[] for _ in range(n)]  # column -> (kind, index)
    for i, masks in enumerate(rec_masks):
        for m in masks:
            closes[last_col(m)].append((i, m))
    zclose: List[List[int]] = [[] for _ in range(n)]
    for m in zmasks:
        zclose[last_col(m)].append(m)
    zero_remaining_after = [0] * (n + 1)
    for j in range(n - 1, -1, -1):
        zero_remaining_after[j] = zero_remaining_after[j + 1] + len(zclose[j])
    single = len(collections) == 1

    for weight in range(0, max_weight + 1):
        odd_counts = [0] * len(rec_masks)

        def rec(j: int, r: int, left: int, zodd: int) -> Iterator[int]:
            if zodd + zero_remaining_after[j] < need:
                return
            if j == n:
                if left == 0:
                    yield r
                return
            if n - j < left:
                return
            for bit in ((0, 1) if n - j > left else (1,)):
                if bit and not left:
                    continue
                rr = r | (bit << j)
                ok = True
                bumped = []
                if single:
                    for i, m in closes[j]:
                        if popcount(rr & m) & 1:
                            odd_counts[i] += 1
                            bumped.append(i)
                            if odd_counts[i] > t:
                                ok = False
                z = zodd + sum(popcount(rr & m) & 1 for m in zclose[j])
                if ok:
                    yield from rec(j + 1, rr, left - bit, z)
                for i in bumped:
                    odd_counts[i] -= 1

        yield from rec(0, 0, weight, 0)


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    s: int
    k: int
    n: int
    matrix: GeneratorMatrix
    certificate: Optional[RecoveryCertificate]
    provenance: str


def _data_text(rel: str) -> str:
    return resources.files("pircodes").joinpath("data", rel).read_text()


@lru_cache(maxsize=None)
def _index() -> dict:
    return json.loads(_data_text("catalog.json"))


@lru_cache(maxsize=None)
def catalog() -> Tuple[CatalogEntry, ...]:
    entries = []
    for meta in _index()["entries"]:
        G = parse_matrix(_data_text(f"catalog/{meta['id']}.txt"))
        cert_name = f"catalog/{meta['id']}.cert.json"
        try:
            cert = certificate_from_json(_data_text(cert_name))
        except FileNotFoundError:
            cert = None
        if G.s != meta["s"] or G.n != meta["n"]:
            raise AssertionError(f"catalog entry {meta['id']} does not match its metadata")
        entries.append(CatalogEntry(meta["id"], meta["s"], meta["k"], meta["n"], G, cert, meta["provenance"]))
    return tuple(entries)


def catalog_lookup(s: int, k: int) -> List[CatalogEntry]:
    return [e for e in catalog() if e.s == s and e.k == k]


@lru_cache(maxsize=None)
def fixtures() -> Dict[str, Tuple[GeneratorMatrix, str]]:
    """Non-PIR reference matrices (e.g. the [17,5,8] code) by name."""
    out = {}
    for meta in _index()["fixtures"]:
        out[meta["id"]] = (parse_matrix(_data_text(f"fixtures/{meta['id']}.txt")), meta["provenance"])
    return out


def fixture(name: str) -> GeneratorMatrix:
    return fixtures()[name][0]
