"""Exact branch and bound for small integer programs.

No LP relaxation.  Nodes are pruned by bound propagation on every linear
row, by the incumbent (as a cutoff row), and by an aggregated covering bound:
for the covering rows still short of their right-hand side, the total
shortfall divided by the best shortfall-per-cost ratio of any free variable
bounds the extra objective.  For hyperplane rows this is the averaging
argument that each added point fixes at most 2^{s-1} hyperplanes.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .model import EQ, GE, LE, IlpModel, ModelError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
INTERVAL = "bounds-interval"
BUDGET = "budget"


@dataclass(frozen=True)
class SolveOutcome:
    status: str
    objective: Optional[int]
    values: Optional[Tuple[int, ...]]
    nodes: int
    lower: Optional[int] = None  # proven lower bound on the optimum
    seconds: float = 0.0

    def trailer(self) -> str:
        obj = "none" if self.objective is None else str(self.objective)
        return f"nodes={self.nodes} status={self.status} obj={obj}"


class _Infeasible(Exception):
    pass


class _Stop(Exception):
    pass


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


class _Solver:
    def __init__(self, model: IlpModel, max_nodes: Optional[int], time_limit: Optional[float],
                 seed_lower: Optional[int], default_ub: Optional[int]) -> None:
        self.model = model
        nv = model.num_vars
        lb, ub, flip = [], [], []
        for v in model.variables:
            if not v.integral:
                raise ModelError(f"variable {v.name} is continuous; the solver handles integers only")
            hi = v.ub if v.ub is not None else default_ub
            if hi is None:
                raise ModelError(f"variable {v.name} has no upper bound and no default was given")
            lb.append(v.lb)
            ub.append(hi)
        cost = [0] * nv
        for j, c in model.objective.items():
            cost[j] = c
        # substitute x -> ub - x where the cost is negative, so all costs are >= 0
        self.offset = 0
        for j in range(nv):
            flip.append(cost[j] < 0)
            if flip[j]:
                self.offset += cost[j] * ub[j]
                cost[j] = -cost[j]
                lb[j], ub[j] = 0, ub[j] - lb[j]
        self.flip = flip
        self.orig_ub = [v.ub if v.ub is not None else default_ub for v in model.variables]
        self.orig_lb = [v.lb for v in model.variables]
        self.cost = cost

        # rows in ">=" form
        rows: List[List[Tuple[int, int]]] = []
        rhs: List[int] = []
        for c in model.constraints:
            terms, b = [], c.rhs
            for j, a in c.terms:
                if flip[j]:
                    # a x = a (ub0 - x') with ub0 the original upper bound
                    b -= a * self.orig_ub[j]
                    a = -a
                terms.append((j, a))
            if c.sense in (GE, EQ):
                rows.append(terms)
                rhs.append(b)
            if c.sense in (LE, EQ):
                rows.append([(j, -a) for j, a in terms])
                rhs.append(-b)
        # incumbent cutoff row: -sum c x >= -(best - 1 - offset)
        self.cut = len(rows)
        rows.append([(j, -cost[j]) for j in range(nv) if cost[j]])
        rhs.append(-(1 << 62))
        self.rows, self.rhs = rows, rhs
        self.cols: List[List[Tuple[int, int]]] = [[] for _ in range(nv)]
        for r, terms in enumerate(rows):
            for j, a in terms:
                self.cols[j].append((r, a))
        self.amax = [max((abs(a) for _, a in t), default=0) for t in rows]
        self.covering = [r for r, t in enumerate(rows)
                         if r != self.cut and t and all(a > 0 and cost[j] > 0 for j, a in t)]
        self.lb, self.ub = lb, ub
        self.minact = [0] * len(rows)
        self.maxact = [0] * len(rows)
        self.actlb = [0] * len(rows)
        for r, terms in enumerate(rows):
            for j, a in terms:
                if a > 0:
                    self.minact[r] += a * lb[j]
                    self.maxact[r] += a * ub[j]
                else:
                    self.minact[r] += a * ub[j]
                    self.maxact[r] += a * lb[j]
                self.actlb[r] += a * lb[j]
        self.trail: List[Tuple[int, int, int]] = []
        self.nodes = 0
        self.max_nodes = max_nodes
        self.deadline = None if time_limit is None else time.monotonic() + time_limit
        self.best: Optional[int] = None  # objective in shifted space
        self.best_values: Optional[List[int]] = None
        self.seed = None if seed_lower is None else seed_lower - self.offset

    # -- bound changes -------------------------------------------------------

    def _set_lb(self, j: int, v: int) -> None:
        d = v - self.lb[j]
        self.trail.append((j, self.lb[j], self.ub[j]))
        self.lb[j] = v
        for r, a in self.cols[j]:
            self.actlb[r] += a * d
            if a > 0:
                self.minact[r] += a * d
            else:
                self.maxact[r] += a * d

    def _set_ub(self, j: int, v: int) -> None:
        d = v - self.ub[j]
        self.trail.append((j, self.lb[j], self.ub[j]))
        self.ub[j] = v
        for r, a in self.cols[j]:
            if a > 0:
                self.maxact[r] += a * d
            else:
                self.minact[r] += a * d

    def _undo(self, mark: int) -> None:
        trail = self.trail
        while len(trail) > mark:
            j, olb, oub = trail.pop()
            dl, du = olb - self.lb[j], oub - self.ub[j]
            if dl:
                for r, a in self.cols[j]:
                    self.actlb[r] += a * dl
                    if a > 0:
                        self.minact[r] += a * dl
                    else:
                        self.maxact[r] += a * dl
            if du:
                for r, a in self.cols[j]:
                    if a > 0:
                        self.maxact[r] += a * du
                    else:
                        self.minact[r] += a * du
            self.lb[j], self.ub[j] = olb, oub

    def _propagate(self, queue: List[int]) -> None:
        rows, rhs, lb, ub = self.rows, self.rhs, self.lb, self.ub
        queued = set(queue)
        while queue:
            r = queue.pop()
            queued.discard(r)
            b = rhs[r]
            slack = self.maxact[r] - b
            if slack < 0:
                raise _Infeasible
            if slack >= self.amax[r] * self._span:
                continue
            for j, a in rows[r]:
                if lb[j] == ub[j]:
                    continue
                if a > 0:
                    if a * (ub[j] - lb[j]) > slack:
                        new = ub[j] - slack // a
                        if new > lb[j]:
                            self._set_lb(j, new)
                            for r2, _ in self.cols[j]:
                                if r2 not in queued:
                                    queued.add(r2)
                                    queue.append(r2)
                else:
                    if -a * (ub[j] - lb[j]) > slack:
                        new = lb[j] + slack // (-a)
                        if new < ub[j]:
                            self._set_ub(j, new)
                            for r2, _ in self.cols[j]:
                                if r2 not in queued:
                                    queued.add(r2)
                                    queue.append(r2)
                slack = self.maxact[r] - b
                if slack < 0:
                    raise _Infeasible

    # -- bounding ------------------------------------------------------------

    def _objective_lb(self) -> int:
        base = sum(c * l for c, l in zip(self.cost, self.lb) if c)
        total, ratio = 0, 0.0
        best_single = 0
        for r in self.covering:
            d = self.rhs[r] - self.actlb[r]
            if d <= 0:
                continue
            total += d
            rr = 0.0
            for j, a in self.rows[r]:
                if self.lb[j] < self.ub[j]:
                    q = a / self.cost[j]
                    if q > rr:
                        rr = q
            if rr == 0.0:
                raise _Infeasible
            best_single = max(best_single, _ceil_div_f(d, rr))
        if total:
            w: Dict[int, int] = {}
            for r in self.covering:
                if self.rhs[r] - self.actlb[r] > 0:
                    for j, a in self.rows[r]:
                        if self.lb[j] < self.ub[j]:
                            w[j] = w.get(j, 0) + a
            ratio = max(w[j] / self.cost[j] for j in w)
            return base + max(best_single, _ceil_div_f(total, ratio))
        return base

    # -- search --------------------------------------------------------------

    def _branch_var(self) -> Optional[int]:
        """Largest-slack free variable in the row furthest below its rhs at the lower bounds."""
        best_r, best_d = -1, 0
        for r in range(len(self.rows)):
            if r == self.cut:
                continue
            d = self.rhs[r] - self.actlb[r]
            if d > best_d:
                best_r, best_d = r, d
        if best_r < 0:
            return None
        pick, score = None, -1
        for j, a in self.rows[best_r]:
            if a > 0 and self.lb[j] < self.ub[j]:
                sc = a * (self.ub[j] - self.lb[j])
                if sc > score:
                    pick, score = j, sc
        if pick is None:
            raise _Infeasible
        return pick

    def _tick(self) -> None:
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise _Stop
        if self.deadline is not None and (self.nodes & 255) == 0 and time.monotonic() > self.deadline:
            raise _Stop

    def _dive(self) -> None:
        self._tick()
        if self.best is not None:
            lbv = self._objective_lb()
            if lbv >= self.best:
                return
        j = self._branch_var()
        if j is None:
            val = sum(c * l for c, l in zip(self.cost, self.lb) if c)
            if self.best is None or val < self.best:
                self.best = val
                self.best_values = list(self.lb)
                self.rhs[self.cut] = -(val - 1)
                if self.seed is not None and val <= self.seed:
                    raise _Stop
            return
        for up in (True, False):
            mark = len(self.trail)
            try:
                if up:
                    self._set_lb(j, self.lb[j] + 1)
                else:
                    self._set_ub(j, self.lb[j])
                rows = [r for r, _ in self.cols[j]]
                if self.best is not None:
                    rows.append(self.cut)
                self._propagate(rows)
                self._dive()
            except _Infeasible:
                pass
            finally:
                self._undo(mark)

    def run(self) -> Tuple[str, Optional[int], Optional[List[int]], Optional[int]]:
        self._span = max((u - l for l, u in zip(self.lb, self.ub)), default=0) or 1
        proven_low = None
        stopped = False
        try:
            self._propagate(list(range(len(self.rows))))
            root_lb = self._objective_lb()
            proven_low = root_lb
            self._dive()
        except _Infeasible:
            return INFEASIBLE, None, None, None
        except _Stop:
            stopped = True
        if self.best is None:
            if stopped:
                return BUDGET, None, None, proven_low
            return INFEASIBLE, None, None, None
        if stopped and not (self.seed is not None and self.best <= self.seed):
            return INTERVAL, self.best, self.best_values, proven_low
        return OPTIMAL, self.best, self.best_values, self.best

    def unshift(self, values: Sequence[int]) -> Tuple[int, ...]:
        out = []
        for j, v in enumerate(values):
            out.append(self.orig_ub[j] - v if self.flip[j] else v)
        return tuple(out)


def _ceil_div_f(d: int, ratio: float) -> int:
    q = d / ratio
    iq = int(q)
    return iq if q - iq < 1e-9 else iq + 1


def solve(
    model: IlpModel,
    max_nodes: Optional[int] = 10_000_000,
    time_limit: Optional[float] = 60.0,
    seed_lower: Optional[int] = None,
    default_ub: Optional[int] = None,
    structured: bool = True,
) -> SolveOutcome:
    """Minimize the model objective exactly, within node and time budgets.

    ``seed_lower`` is a known lower bound on the optimum; the search stops as
    soon as an incumbent reaches it.  Fresh exact/lower PIR models go to the
    specialised search in :mod:`pirsearch` unless ``structured`` is False.
    """
    t0 = time.monotonic()
    if structured:
        from .pirsearch import plan, search

        pl = plan(model)
        if pl is not None:
            res = search(model, pl, max_nodes, time_limit, seed_lower)
            dt = time.monotonic() - t0
            if res.status == OPTIMAL:
                return SolveOutcome(OPTIMAL, res.n, tuple(res.values), res.nodes, res.n, dt)
            if res.status == INFEASIBLE:
                return SolveOutcome(INFEASIBLE, None, None, res.nodes, None, dt)
            return SolveOutcome(BUDGET, None, None, res.nodes, res.lower, dt)
    s = _Solver(model, max_nodes, time_limit, seed_lower, default_ub)
    status, best, values, low = s.run()
    dt = time.monotonic() - t0
    if values is None:
        lo = None if low is None else low + s.offset
        return SolveOutcome(status, None, None, s.nodes, lo, dt)
    vals = s.unshift(values)
    obj = model.objective_value(vals)
    if model.check(vals):
        raise AssertionError("solver returned an assignment that violates the model")
    lo = None if low is None else low + s.offset
    if status == OPTIMAL:
        lo = obj
    return SolveOutcome(status, obj, vals, s.nodes, lo, dt)
