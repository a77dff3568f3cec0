"""Exact search specialised to freshly built PIR models.

The objective is the code length n = sum of the point multiplicities, so the
search deepens n from a covering lower bound and decides feasibility at each
n.  For fixed n:

* point multiplicities are enumerated in the integer order of the points,
  which closes the pair classes {p, p + e_i} of small subcubes early;
* with the total fixed, every hyperplane row "sum off H >= k" also caps the
  points on H at n - k, which bounds every free multiplicity;
* a hyperplane's remaining deficit must fit in the capacity of the free
  points off it;
* the per-index recovery demand is bounded by a small packing argument:
  singletons and pairs are charged against the free mass still to be
  placed, larger sets against the total length;
* when the model is invariant under all coordinate permutations, only
  lexicographically largest multiplicity vectors in their orbit are kept.

Leaves are checked exactly: each index's y-block is an independent
feasibility problem once x is fixed, solved by the generic branch and bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import permutations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .model import EQ, GE, LE, IlpModel

_FREE = -1


# ---------------------------------------------------------------------------
# compiled core


@njit(cache=True)
def _apply(p, m, inH, onc, offc, NP):
    for u in range(1, NP + 1):
        if inH[u, p]:
            onc[u] += m
        else:
            offc[u] += m


@njit(cache=True)
def _lex_ok(val, perms, NP, leaf):
    for g in range(1, perms.shape[0]):
        for p in range(1, NP + 1):
            a = val[p]
            b = val[perms[g, p]]
            if leaf:
                if a < 0:
                    a = 0
                if b < 0:
                    b = 0
            elif a < 0 or b < 0:
                break
            if a > b:
                break
            if a < b:
                return False
    return True


@njit(cache=True)
def _demand_ok(val, ub, s, NP, k, n, R, w1, w2, w3, D):
    """Upper bound on sum w_|h| y_h over disjoint recovery sets (count <= k) must reach D."""
    for i in range(s):
        e = 1 << i
        if val[e] >= 0:
            a0 = min(val[e], k)
            a1 = 0
        else:
            a0 = 0
            a1 = ub[e]
        b0 = 0
        b1 = 0
        b2 = 0
        for q in range(1, NP + 1):
            r = q ^ e
            if q == e or r < q:
                continue
            vq = val[q]
            vr = val[r]
            if vq >= 0 and vr >= 0:
                b0 += min(vq, vr)
            elif vq >= 0:
                b1 += min(vq, ub[r])
            elif vr >= 0:
                b1 += min(vr, ub[q])
            else:
                b2 += min(ub[q], ub[r])
        best = -1
        sa1 = 0
        while sa1 <= a1 and a0 + sa1 <= k and sa1 <= R:
            a = a0 + sa1
            left = R - sa1
            rem = k - a
            bb = min(b0, rem)
            rem -= bb
            for t in range(rem + 1):
                c1 = min(t, b1)
                c2 = t - c1
                if c2 > b2 or c1 + 2 * c2 > left:
                    break
                b = bb + t
                c = k - a - b
                mass = (n - a - 2 * b) // 3
                if mass < c:
                    c = mass
                if c < 0 or w3 <= 0:
                    c = 0
                f = w1 * a + w2 * b + w3 * c
                if f > best:
                    best = f
            if best >= D:
                break
            sa1 += 1
        if best < D:
            return False
    return True


@njit(cache=True)
def _node_ok(idx, R, val, onc, offc, inH, lbp, ubp, perms, s, NP, k, n, cap, w1, w2, w3, D, ub):
    if not _lex_ok(val, perms, NP, R == 0):
        return False
    tot = 0
    need_lb = 0
    for p in range(1, NP + 1):
        if val[p] >= 0:
            ub[p] = 0
            continue
        c = min(ubp[p], R)
        for u in range(1, NP + 1):
            if inH[u, p]:
                room = cap - onc[u]
                if room < c:
                    c = room
        if c < lbp[p]:
            return False
        ub[p] = c
        tot += c
        need_lb += lbp[p]
    if tot < R or need_lb > R:
        return False
    for u in range(1, NP + 1):
        need = k - offc[u]
        alt = R - (cap - onc[u])
        if alt > need:
            need = alt
        if need > 0:
            room = 0
            for p in range(1, NP + 1):
                if val[p] < 0 and not inH[u, p]:
                    room += ub[p]
            if need > room:
                return False
    return _demand_ok(val, ub, s, NP, k, n, R, w1, w2, w3, D)


@njit(cache=True)
def _run(st, val, cur, lo, onc, offc, inH, lbp, ubp, perms, s, NP, k, n, cap, w1, w2, w3, D,
         out, node_limit):
    """Resumable depth-first enumeration.

    st = [idx, R, descend, done, nodes, leaves_written].  Returns when the
    tree is exhausted, ``out`` is full, or ``node_limit`` more nodes ran.
    """
    ub = np.zeros(NP + 1, dtype=np.int64)
    idx = st[0]
    R = st[1]
    descend = st[2]
    start = st[4]
    written = 0
    while True:
        if st[4] - start >= node_limit or written >= out.shape[0]:
            break
        if descend == 1:
            st[4] += 1
            ok = _node_ok(idx, R, val, onc, offc, inH, lbp, ubp, perms, s, NP, k, n, cap,
                          w1, w2, w3, D, ub)
            if ok and R == 0:
                for p in range(1, NP + 1):
                    out[written, p] = val[p] if val[p] > 0 else 0
                written += 1
                ok = False
            if ok and idx <= NP:
                hi = ub[idx]
                cur[idx] = hi
                lo[idx] = lbp[idx]
                val[idx] = hi
                _apply(idx, hi, inH, onc, offc, NP)
                R -= hi
                idx += 1
                continue
            descend = 0
        else:
            idx -= 1
            if idx < 1:
                st[3] = 1
                break
            m = cur[idx]
            _apply(idx, -m, inH, onc, offc, NP)
            R += m
            if m - 1 >= lo[idx]:
                cur[idx] = m - 1
                val[idx] = m - 1
                _apply(idx, m - 1, inH, onc, offc, NP)
                R -= m - 1
                idx += 1
                descend = 1
            else:
                val[idx] = _FREE
    st[0] = idx
    st[1] = R
    st[2] = descend
    st[5] = written
    return written


# ---------------------------------------------------------------------------
# planning


@dataclass
class _Plan:
    s: int
    k: int
    lam: int
    mode: str
    x_index: Dict[int, int]  # point -> variable
    lbp: np.ndarray
    ubp: np.ndarray
    blocks: List[Tuple[List[int], List[int]]]  # per index: (y variables, rows)
    x_rows: List[int]
    perms: np.ndarray
    symmetric: bool


def plan(model: IlpModel) -> Optional[_Plan]:
    """Structure of a fresh exact/lower PIR model, or None when the model is anything else."""
    from .build import EXACT, LOWER, constraint_signatures, is_invariant, rebuild

    meta = model.meta
    if meta.get("mode") not in (EXACT, LOWER) or meta.get("reduced"):
        return None
    if len(model.keys) != model.num_vars or any(len(key) != 1 for key in model.keys):
        return None
    try:
        fresh = rebuild(model)
    except Exception:
        return None
    if [v.name for v in fresh.variables] != [v.name for v in model.variables]:
        return None
    if fresh.keys != model.keys:
        return None
    s, k, lam = int(meta["s"]), int(meta["k"]), int(meta["lambda"])
    NP = (1 << s) - 1
    x_index: Dict[int, int] = {}
    for j, key in enumerate(model.keys):
        kind = key[0][0]
        if kind == "x":
            x_index[key[0][1]] = j
            if model.objective.get(j, 0) != 1:
                return None
        else:
            if model.objective.get(j, 0) != 0:
                return None
            if (model.variables[j].lb, model.variables[j].ub) != (fresh.variables[j].lb, fresh.variables[j].ub):
                return None
    if not constraint_signatures(fresh) <= constraint_signatures(model):
        return None  # a defining row was removed; the pruning rules would be unsound
    lbp = np.zeros(NP + 1, dtype=np.int64)
    ubp = np.zeros(NP + 1, dtype=np.int64)
    for p, j in x_index.items():
        v = model.variables[j]
        if v.ub is None:
            return None
        lbp[p], ubp[p] = v.lb, v.ub
    owner: Dict[int, int] = {}
    for j, key in enumerate(model.keys):
        if key[0][0] == "y":
            owner[j] = key[0][1]
    blocks: List[Tuple[List[int], List[int]]] = [([], []) for _ in range(s)]
    for j, i in owner.items():
        blocks[i][0].append(j)
    x_rows = []
    for r, c in enumerate(model.constraints):
        idx = {owner[j] for j, _ in c.terms if j in owner}
        if len(idx) > 1:
            return None
        if idx:
            blocks[idx.pop()][1].append(r)
        else:
            x_rows.append(r)
    gens = []
    if s >= 2:
        gens.append([2, 1] + list(range(3, s + 1)))
        gens.append(list(range(2, s + 1)) + [1])
    symmetric = all(is_invariant(model, g) for g in gens)
    perm_rows = [list(range(NP + 1))]
    if symmetric and s >= 2:
        for pi in permutations(range(s)):
            if list(pi) == list(range(s)):
                continue
            row = [0]
            for p in range(1, NP + 1):
                q = 0
                for a in range(s):
                    if (p >> a) & 1:
                        q |= 1 << pi[a]
                row.append(q)
            perm_rows.append(row)
    perms = np.array(perm_rows, dtype=np.int64)
    return _Plan(s, k, lam, meta["mode"], x_index, lbp, ubp, blocks, x_rows, perms, symmetric)


def _weights(pl: _Plan, n: int) -> Tuple[int, int, int, int]:
    if pl.mode == "exact":
        return 1, 1, (1 if pl.lam >= 3 else 0), pl.k
    lam = pl.lam
    return lam, lam - 1, max(lam - 2, 0), (lam + 1) * pl.k - n


def _geometry(s: int) -> np.ndarray:
    NP = (1 << s) - 1
    inH = np.zeros((NP + 1, NP + 1), dtype=np.uint8)
    for u in range(1, NP + 1):
        for p in range(1, NP + 1):
            inH[u, p] = 0 if bin(u & p).count("1") & 1 else 1
    return inH


# ---------------------------------------------------------------------------
# driver


@dataclass
class SearchResult:
    status: str  # "optimal" | "infeasible" | "budget"
    n: Optional[int]
    values: Optional[List[int]]
    nodes: int
    lower: int


def _block_solution(model: IlpModel, pl: _Plan, i: int, x: List[int], node_budget: int):
    """Values for the y-variables of index i given all x, or None if the block is infeasible."""
    from .solver import INFEASIBLE, OPTIMAL, solve

    ys, rows = pl.blocks[i]
    local = {j: t for t, j in enumerate(ys)}
    sub = IlpModel()
    for j in ys:
        v = model.variables[j]
        sub.add_var(v.name, v.lb, v.ub, v.integral)
    for r in rows:
        c = model.constraints[r]
        rhs = c.rhs
        terms = []
        for j, a in c.terms:
            if j in local:
                terms.append((local[j], a))
            else:
                rhs -= a * x[j]
        sub.add_constraint(terms, c.sense, rhs, c.name)
    out = solve(sub, max_nodes=node_budget, time_limit=None, structured=False)
    if out.status == OPTIMAL:
        return list(out.values), out.nodes
    if out.status == INFEASIBLE:
        return None, out.nodes
    raise _BlockBudget(out.nodes)


class _BlockBudget(Exception):
    def __init__(self, nodes: int) -> None:
        super().__init__("leaf check exceeded its node budget")
        self.nodes = nodes


def _x_rows_ok(model: IlpModel, rows: Sequence[int], x: List[int]) -> bool:
    for r in rows:
        if not model.constraints[r].satisfied(x):
            return False
    return True


def search(model: IlpModel, pl: _Plan, max_nodes: Optional[int], time_limit: Optional[float],
           seed_lower: Optional[int], chunk: int = 200_000, batch: int = 256,
           block_budget: int = 2_000_000) -> SearchResult:
    s, k = pl.s, pl.k
    NP = (1 << s) - 1
    inH = _geometry(s)
    half = 1 << (s - 1)
    n = max(-(-NP * k // half), int(pl.lbp.sum()))
    if seed_lower is not None:
        n = max(n, seed_lower)
    n_max = int(pl.ubp.sum())
    deadline = None if time_limit is None else time.monotonic() + time_limit
    nodes = 0
    out = np.zeros((batch, NP + 1), dtype=np.int64)
    while n <= n_max:
        w1, w2, w3, D = _weights(pl, n)
        st = np.array([1, n, 1, 0, 0, 0], dtype=np.int64)
        val = np.full(NP + 2, _FREE, dtype=np.int64)
        cur = np.zeros(NP + 2, dtype=np.int64)
        lo = np.zeros(NP + 2, dtype=np.int64)
        onc = np.zeros(NP + 1, dtype=np.int64)
        offc = np.zeros(NP + 1, dtype=np.int64)
        done_before = 0
        while True:
            limit = chunk
            if max_nodes is not None:
                limit = min(limit, max_nodes - nodes)
                if limit <= 0:
                    return SearchResult("budget", None, None, nodes, n)
            if deadline is not None and time.monotonic() > deadline:
                return SearchResult("budget", None, None, nodes, n)
            got = _run(st, val, cur, lo, onc, offc, inH, pl.lbp, pl.ubp, pl.perms, s, NP, k, n, n - k,
                       w1, w2, w3, D, out, limit)
            nodes += int(st[4]) - done_before
            done_before = int(st[4])
            for t in range(got):
                x = [0] * model.num_vars
                for p, j in pl.x_index.items():
                    x[j] = int(out[t, p])
                if not _x_rows_ok(model, pl.x_rows, x):
                    continue
                feasible = True
                for i in range(s):
                    try:
                        sol, used = _block_solution(model, pl, i, x, block_budget)
                    except _BlockBudget as exc:
                        nodes += exc.nodes
                        return SearchResult("budget", None, None, nodes, n)
                    nodes += used
                    if sol is None:
                        feasible = False
                        break
                    for j, v in zip(pl.blocks[i][0], sol):
                        x[j] = v
                if feasible:
                    if model.check(x):
                        raise AssertionError("structured search produced an infeasible assignment")
                    return SearchResult("optimal", n, x, nodes, n)
            if st[3]:
                break
        n += 1
    return SearchResult("infeasible", None, None, nodes, n)
