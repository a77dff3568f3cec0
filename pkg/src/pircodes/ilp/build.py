"""Model builders: exact / construction mode, lambda-capped lower-bound mode,
orbit reduction under coordinate permutations, and code extraction."""

from __future__ import annotations

import hashlib
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from ..gf2core import GeneratorMatrix, PointMultiset, canonical_key, multiset_to_matrix, popcount, unit
from ..recovery import RecoveryCertificate, enumerate_minimal_recovery_sets, validate_certificate
from .model import GE, LE, IlpModel, ModelError
from .solver import SolveOutcome

EXACT = "exact"
LOWER = "lower"

DEFAULT_Y_CAP = 200_000


class ExtractionError(RuntimeError):
    pass


def _points(s: int) -> List[int]:
    return sorted(range(1, 1 << s), key=lambda p: canonical_key(p, s))


def x_name(p: int, s: int) -> str:
    return f"x_{p:0{(s + 3) // 4}x}"


def _set_hash(points: Sequence[int]) -> str:
    h = hashlib.blake2b(",".join(map(str, points)).encode(), digest_size=5)
    return h.hexdigest()


def recovery_point_sets(s: int, i: int, lam: int, cap: int = DEFAULT_Y_CAP) -> List[Tuple[int, ...]]:
    """Minimal recovery sets of e_{i+1} of size <= lam inside the full point set, as sorted point tuples."""
    pts = _points(s)
    simplex = GeneratorMatrix(s, tuple(pts))
    sets = enumerate_minimal_recovery_sets(simplex, i, lam, max_candidates=cap)
    return [tuple(sorted(pts[j] for j in R)) for R in sets]


def _hyperplanes(s: int):
    """(functional u, points off the hyperplane u.p = 0) for all nonzero u."""
    pts = _points(s)
    for u in range(1, 1 << s):
        yield u, [p for p in pts if popcount(u & p) & 1]


def _x_upper(s: int, k: int, x_cap: Optional[int], projective: bool) -> int:
    if projective:
        return 1
    if x_cap is not None:
        return x_cap
    from ..bounds import best_upper

    return best_upper(s, k).value


def _base(s: int, k: int, lam: int, mode: str, systematic: bool, projective: bool,
          order_units: bool, x_cap: Optional[int], y_cap: int):
    if s < 1 or k < 1:
        raise ModelError("s and k must be positive")
    if lam < 2:
        raise ModelError("lambda must be at least 2")
    m = IlpModel()
    m.meta.update({"s": s, "k": k, "lambda": lam, "mode": mode,
                   "systematic": systematic, "projective": projective, "order_units": order_units})
    ub = _x_upper(s, k, x_cap, projective)
    m.meta["x_ub"] = ub
    xs: Dict[int, int] = {}
    for p in _points(s):
        lb = 1 if systematic and popcount(p) == 1 else 0
        xs[p] = m.add_var(x_name(p, s), lb, ub, key=(("x", p),))
    m.set_objective([(j, 1) for j in xs.values()])
    ys: List[List[Tuple[int, Tuple[int, ...]]]] = []
    total = 0
    seen_names = {}
    for i in range(s):
        row = []
        sets = recovery_point_sets(s, i, lam, y_cap)
        total += len(sets)
        if total > y_cap:
            raise ModelError(f"more than {y_cap} recovery-set variables")
        for h in sets:
            name = f"y_{i + 1}_{_set_hash(h)}"
            if name in seen_names and seen_names[name] != h:
                raise ModelError(f"hash collision on {name}")
            seen_names[name] = h
            row.append((m.add_var(name, 0, k, key=(("y", i, h),)), h))
        ys.append(row)
    # linkage: recovery sets for e_i using point p cannot exceed its multiplicity
    for i in range(s):
        use: Dict[int, List[int]] = {}
        for j, h in ys[i]:
            for p in h:
                use.setdefault(p, []).append(j)
        for p in _points(s):
            if p in use:
                m.add_constraint([(j, 1) for j in use[p]] + [(xs[p], -1)], LE, 0,
                                 f"link_{i + 1}_{x_name(p, s)[2:]}")
    for u, off in _hyperplanes(s):
        m.add_constraint([(xs[p], 1) for p in off], GE, k, f"hyp_{u:x}")
    if order_units:
        for i in range(s - 1):
            m.add_constraint([(xs[unit(i)], 1), (xs[unit(i + 1)], -1)], GE, 0, f"order_{i + 1}")
    return m, xs, ys


def build_exact(s: int, k: int, lam: int, systematic: bool = False, projective: bool = False,
                mult_cap: bool = False, order_units: bool = False, x_cap: Optional[int] = None,
                y_cap: int = DEFAULT_Y_CAP) -> IlpModel:
    """Minimum length of a code whose k disjoint recovery sets per e_i all have size <= lam.

    The optimum is P(s,k) when lam covers every minimal recovery set that an
    optimal code needs; otherwise it is an upper bound witnessed by a code.
    """
    m, xs, ys = _base(s, k, lam, EXACT, systematic, projective, order_units, x_cap, y_cap)
    m.meta["mult_cap"] = mult_cap
    for i in range(s):
        m.add_constraint([(j, 1) for j, _ in ys[i]], GE, k, f"demand_{i + 1}")
    if mult_cap and s >= 2:
        c = 1 << (s - 2)
        everything = [(j, c) for j in xs.values()]
        for p, j in xs.items():
            m.add_constraint(everything + [(j, -c)], GE, k * ((1 << (s - 1)) - 1), f"cap_{x_name(p, s)[2:]}")
    return m


def build_lower(s: int, k: int, lam: int, x_cap: Optional[int] = None,
                y_cap: int = DEFAULT_Y_CAP) -> IlpModel:
    """Relaxation whose optimum is a lower bound on P(s,k) for any lam >= 2.

    y counts only the recovery sets of size <= lam; every other set in a
    k-family has at least lam+1 columns and at least one column off each
    hyperplane missing e_i, which gives the length row and the tightened
    hyperplane rows below.
    """
    m, xs, ys = _base(s, k, lam, LOWER, False, False, False, x_cap, y_cap)
    n_terms = [(j, 1) for j in xs.values()]
    for i in range(s):
        m.add_constraint(n_terms + [(j, lam + 1 - len(h)) for j, h in ys[i]], GE, (lam + 1) * k,
                         f"length_{i + 1}")
        m.add_constraint([(j, 1) for j, _ in ys[i]], LE, k, f"count_{i + 1}")
    for i in range(s):
        e = unit(i)
        for u, off in _hyperplanes(s):
            if not popcount(u & e) & 1:
                continue  # e_i lies on this hyperplane
            offset = set(off)
            extra = [(j, 1 - sum(1 for p in h if p in offset)) for j, h in ys[i]]
            extra = [(j, a) for j, a in extra if a]
            if not extra:
                continue  # identical to the plain hyperplane row
            m.add_constraint([(xs[p], 1) for p in off] + extra, GE, k, f"hyp_{u:x}_{i + 1}")
    return m


# ---------------------------------------------------------------------------
# symmetry


def _check_perm(pi: Sequence[int], s: int) -> Tuple[int, ...]:
    if sorted(pi) != list(range(1, s + 1)):
        raise ModelError(f"{list(pi)} is not a permutation of 1..{s}")
    return tuple(v - 1 for v in pi)


def _close_group(gens: List[Tuple[int, ...]], s: int) -> List[Tuple[int, ...]]:
    ident = tuple(range(s))
    group = {ident}
    frontier = [ident]
    while frontier:
        g = frontier.pop()
        for h in gens:
            c = tuple(h[g[a]] for a in range(s))
            if c not in group:
                group.add(c)
                frontier.append(c)
    return sorted(group)


def _act_point(pi: Tuple[int, ...], p: int) -> int:
    out = 0
    for a in range(len(pi)):
        if (p >> a) & 1:
            out |= 1 << pi[a]
    return out


def _act_key(pi, key):
    if key[0] == "x":
        return ("x", _act_point(pi, key[1]))
    _, i, h = key
    return ("y", pi[i], tuple(sorted(_act_point(pi, p) for p in h)))


def apply_symmetry(model: IlpModel, generators: Iterable[Sequence[int]]) -> IlpModel:
    """Identify variables along orbits of a group of coordinate permutations.

    Permutations are given as image lists of 1..s.  A permutation pi acts on
    points by moving coordinates and on y-variables by (i, h) -> (pi(i), pi(h)).
    """
    s = int(model.meta.get("s", 0))
    if model.meta.get("reduced"):
        raise ModelError("model is already symmetry-reduced")
    if len(model.keys) != model.num_vars or any(len(k) != 1 for k in model.keys):
        raise ModelError("model lacks variable keys; build it with build_exact or build_lower")
    gens = [_check_perm(g, s) for g in generators]
    group = _close_group(gens, s)
    where = {k[0]: j for j, k in enumerate(model.keys)}
    orbit_of = [-1] * model.num_vars
    reduced = IlpModel(meta=dict(model.meta))
    reduced.meta["reduced"] = True
    reduced.meta["group_order"] = len(group)
    reduced.meta["generators"] = ";".join(",".join(str(v + 1) for v in g) for g in gens)
    for j in sorted(range(model.num_vars), key=lambda j: (model.keys[j][0][0], _sort_key(model.keys[j][0]))):
        if orbit_of[j] >= 0:
            continue
        members = sorted({_act_key(g, model.keys[j][0]) for g in group}, key=_sort_key)
        idx = []
        for key in members:
            if key not in where:
                raise ModelError(f"{key} has no variable; the model is not closed under the group")
            idx.append(where[key])
        lb = max(model.variables[t].lb for t in idx)
        ubs = [model.variables[t].ub for t in idx if model.variables[t].ub is not None]
        ub = min(ubs) if ubs else None
        if ub is not None and ub < lb:
            raise ModelError("orbit has an empty domain")
        rep = model.variables[where[members[0]]]
        r = reduced.add_var(rep.name, lb, ub, rep.integral, key=tuple(members))
        for t in idx:
            orbit_of[t] = r
    obj: Dict[int, int] = {}
    for j, c in model.objective.items():
        obj[orbit_of[j]] = obj.get(orbit_of[j], 0) + c
    reduced.set_objective(sorted(obj.items()))
    seen = set()
    for c in model.constraints:
        merged: Dict[int, int] = {}
        for j, a in c.terms:
            merged[orbit_of[j]] = merged.get(orbit_of[j], 0) + a
        terms = tuple(sorted((j, a) for j, a in merged.items() if a))
        sig = (terms, c.sense, c.rhs)
        if sig in seen:
            continue
        seen.add(sig)
        reduced.add_constraint(terms, c.sense, c.rhs, c.name)
    return reduced


def rebuild(model: IlpModel) -> IlpModel:
    """A fresh build with the parameters recorded in ``model.meta``."""
    meta = model.meta
    s, k, lam = int(meta["s"]), int(meta["k"]), int(meta["lambda"])
    if meta.get("mode") == EXACT:
        return build_exact(s, k, lam, bool(meta.get("systematic")), bool(meta.get("projective")),
                           bool(meta.get("mult_cap")), bool(meta.get("order_units")), int(meta["x_ub"]))
    if meta.get("mode") == LOWER:
        return build_lower(s, k, lam, int(meta["x_ub"]))
    raise ModelError(f"unknown mode {meta.get('mode')!r}")


def restore_keys(model: IlpModel) -> bool:
    """Re-attach variable keys to a parsed model from its recorded parameters.

    Succeeds only when a fresh build (plus the recorded symmetry group) has
    exactly the same variable names; returns whether keys were attached.
    """
    try:
        fresh = rebuild(model)
        if model.meta.get("reduced"):
            text = str(model.meta.get("generators", ""))
            gens = [[int(a) for a in g.split(",")] for g in text.split(";") if g]
            fresh = apply_symmetry(fresh, gens)
    except (KeyError, ValueError, ModelError):
        return False
    if [v.name for v in fresh.variables] != [v.name for v in model.variables]:
        return False
    model.keys = list(fresh.keys)
    return True


def constraint_signatures(model: IlpModel, keymap=None) -> set:
    """Name-free constraint set, with variables identified by their keys."""
    out = set()
    for c in model.constraints:
        terms = tuple(sorted((_sort_key(keymap(model.keys[j][0]) if keymap else model.keys[j][0]), a)
                             for j, a in c.terms))
        out.add((terms, c.sense, c.rhs))
    return out


def is_invariant(model: IlpModel, perm: Sequence[int]) -> bool:
    """True when the coordinate permutation maps the model onto itself (bounds, objective, rows)."""
    s = int(model.meta["s"])
    pi = _check_perm(perm, s)
    where = {k[0]: j for j, k in enumerate(model.keys) if len(k) == 1}
    if len(where) != model.num_vars:
        return False
    for j, key in enumerate(model.keys):
        t = where.get(_act_key(pi, key[0]))
        if t is None:
            return False
        a, b = model.variables[j], model.variables[t]
        if (a.lb, a.ub, model.objective.get(j, 0)) != (b.lb, b.ub, model.objective.get(t, 0)):
            return False
    return constraint_signatures(model, lambda key: _act_key(pi, key)) == constraint_signatures(model)


def _sort_key(key):
    if key[0] == "x":
        return (0, key[1])
    return (1, key[1], key[2])


def cyclic_generator(s: int, cycles: Sequence[Sequence[int]]) -> List[int]:
    """Image list of the permutation of 1..s with the given disjoint cycles."""
    img = list(range(1, s + 1))
    for cyc in cycles:
        for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
            img[a - 1] = b
    return img


# ---------------------------------------------------------------------------
# extraction


def expand_values(model: IlpModel, values: Sequence[int]) -> Dict[Tuple, int]:
    """Value of every original x/y object, undoing any orbit identification."""
    out: Dict[Tuple, int] = {}
    for j, members in enumerate(model.keys):
        for key in members:
            out[key] = values[j]
    return out


def extract_code(model: IlpModel, outcome: SolveOutcome) -> Tuple[GeneratorMatrix, RecoveryCertificate]:
    if model.meta.get("mode") != EXACT:
        raise ExtractionError("codes can only be read off exact-mode models")
    if outcome.values is None:
        raise ExtractionError(f"no assignment available (status {outcome.status})")
    s, k = int(model.meta["s"]), int(model.meta["k"])
    vals = expand_values(model, outcome.values)
    mult = {key[1]: v for key, v in vals.items() if key[0] == "x" and v}
    G = multiset_to_matrix(PointMultiset(s, mult))
    slots: Dict[int, List[int]] = {}
    for j, c in enumerate(G.columns):
        slots.setdefault(c, []).append(j)
    sets = []
    for i in range(s):
        free = {p: list(v) for p, v in slots.items()}
        chosen = []
        ys = sorted(((key[2], v) for key, v in vals.items() if key[0] == "y" and key[1] == i and v),
                    key=lambda t: (len(t[0]), t[0]))
        for h, v in ys:
            for _ in range(v):
                if len(chosen) == k:
                    break
                try:
                    chosen.append(tuple(free[p].pop(0) for p in h))
                except (KeyError, IndexError):
                    raise ExtractionError(f"assignment overuses a point for e_{i + 1}") from None
        if len(chosen) < k:
            raise ExtractionError(f"only {len(chosen)} recovery sets for e_{i + 1}")
        sets.append(tuple(sorted(chosen, key=lambda R: (len(R), R))))
    cert = RecoveryCertificate(s, G.n, k, tuple(sets))
    report = validate_certificate(G, k, cert)
    if not report:
        raise ExtractionError(f"extracted certificate does not validate: {report}")
    return G, cert
