"""Brute-force references used as test oracles.

Nothing here imports the package's search code: subsets are enumerated as
bitmasks and every answer comes from exhaustion.
"""

from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product


def xor_of(columns, mask):
    acc = 0
    j = 0
    while mask:
        if mask & 1:
            acc ^= columns[j]
        mask >>= 1
        j += 1
    return acc


def rank(vectors):
    basis = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def has_disjoint(subsets, k, used=0, start=0):
    if k == 0:
        return True
    for t in range(start, len(subsets)):
        m = subsets[t]
        if not m & used and has_disjoint(subsets, k - 1, used | m, t + 1):
            return True
    return False


def is_k_pir(columns, s, k):
    """k pairwise disjoint column subsets summing to e_i, for every i."""
    n = len(columns)
    sums = [xor_of(columns, m) for m in range(1 << n)]
    for i in range(s):
        subsets = [m for m in range(1, 1 << n) if sums[m] == 1 << i]
        subsets.sort(key=lambda m: (bin(m).count("1"), m))
        if not has_disjoint(subsets, k):
            return False
    return True


def point_multisets(s, n):
    """Full-rank multisets of n nonzero points of F_2^s, as sorted tuples."""
    for cols in combinations_with_replacement(range(1, 1 << s), n):
        if rank(cols) == s:
            yield cols


@lru_cache(maxsize=None)
def brute_P(s, k, n_max=8):
    """Least n <= n_max with a k-PIR multiset of n points, or None."""
    for n in range(s, n_max + 1):
        if any(is_k_pir(c, s, k) for c in point_multisets(s, n)):
            return n
    return None


def weights_brute(columns, s):
    """Codeword weights indexed by message u (bit i = row i+1)."""
    out = []
    for u in range(1 << s):
        out.append(sum(bin(u & c).count("1") & 1 for c in columns))
    return out


def dual_weights_brute(columns, s):
    """Weight histogram of {y : sum of the columns selected by y is zero}."""
    n = len(columns)
    hist = {}
    for m in range(1 << n):
        if xor_of(columns, m) == 0:
            w = bin(m).count("1")
            hist[w] = hist.get(w, 0) + 1
    return dict(sorted(hist.items()))


def minimal_sets_brute(columns, i, lam):
    """Index sets of size <= lam summing to e_{i+1} with no proper subset doing the same."""
    target = 1 << i
    n = len(columns)
    hits = []
    for size in range(1, lam + 1):
        for idx in combinations(range(n), size):
            acc = 0
            for j in idx:
                acc ^= columns[j]
            if acc == target:
                hits.append(idx)
    hitset = set(hits)
    out = []
    for R in hits:
        minimal = True
        for size in range(1, len(R)):
            if any(sub in hitset for sub in combinations(R, size)):
                minimal = False
                break
        if minimal:
            out.append(R)
    return sorted(out, key=lambda R: (len(R), R))


def ilp_brute(lbs, ubs, rows, cost):
    """Minimum of cost.x over the integer box subject to rows (terms, sense, rhs); None if empty."""
    best = None
    for x in product(*[range(lo, hi + 1) for lo, hi in zip(lbs, ubs)]):
        ok = True
        for terms, sense, rhs in rows:
            act = sum(a * x[j] for j, a in terms)
            if (sense == ">=" and act < rhs) or (sense == "<=" and act > rhs) or (sense == "=" and act != rhs):
                ok = False
                break
        if ok:
            val = sum(c * v for c, v in zip(cost, x))
            if best is None or val < best:
                best = val
    return best
