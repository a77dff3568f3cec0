"""Lower and upper bounds on P(s, k) with provenance traces.

Lower bounds are the maximum of closed-form rules; upper bounds come from a
fixed-point dynamic program over constructions and combination rules.  Every
result carries a trace naming the rule that produced it and the sub-values it
used, and upper traces ending in constructions can be materialized into a
certified generator matrix.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

LOWER = "lower"
UPPER = "upper"


@dataclass(frozen=True)
class Step:
    rule: str
    detail: str
    uses: Tuple[Tuple[str, int], ...] = ()

    def __str__(self) -> str:
        used = ", ".join(f"{name}={v}" for name, v in self.uses)
        return f"{self.rule}: {self.detail}" + (f" [{used}]" if used else "")


@dataclass(frozen=True)
class BoundResult:
    value: int
    direction: str
    trace: Tuple[Step, ...]
    marker: str = ""
    materializable: bool = False

    def __post_init__(self) -> None:
        if not self.trace:
            raise ValueError("a bound needs a non-empty trace")

    def lines(self) -> List[str]:
        return [f"{self.direction} {self.value}"] + ["  " + str(st) for st in self.trace]


# ---------------------------------------------------------------------------
# closed-form rules


def griesmer(s: int, k: int) -> int:
    if s < 1 or k < 1:
        raise ValueError("griesmer needs s, k >= 1")
    return sum(-(-k // (1 << i)) for i in range(s))


def hyperplane_avg_lower(s: int, k: int) -> int:
    """Averaging the hyperplane condition: n >= k (2^s - 1) / 2^{s-1}."""
    return -(-k * ((1 << s) - 1) // (1 << (s - 1)))


def rao_vardy_term(s: int) -> int:
    """ceil(sqrt(2s + 1/4) + 1/2) as the least m with (2m - 1)^2 >= 8s + 1."""
    m = (math.isqrt(8 * s + 1) + 1) // 2
    while (2 * m - 1) ** 2 < 8 * s + 1:
        m += 1
    while m > 0 and (2 * m - 3) ** 2 >= 8 * s + 1:
        m -= 1
    return m


def rao_vardy_lower(s: int, k: int) -> int:
    if k < 3:
        raise ValueError("the Rao-Vardy bound needs k >= 3")
    return s + rao_vardy_term(s) + k - 3


def dual_distance_lower(k: int, d_perp: int, mode: str = "general") -> int:
    """Length bound for a k-PIR matrix with dual distance d_perp.

    general: n >= k ceil(d/2) - 1 for odd d, k ceil(d/2) for even d.
    unit-column: the matrix contains a unit column, n >= 1 + (k - 1)(d - 1).
    """
    if d_perp < 1 or k < 1:
        raise ValueError("need k >= 1 and d_perp >= 1")
    if mode == "general":
        if k < 2:
            raise ValueError("general mode needs k >= 2")
        half = -(-d_perp // 2)
        return k * half - (1 if d_perp % 2 else 0)
    if mode == "unit-column":
        return 1 + (k - 1) * (d_perp - 1)
    raise ValueError(f"unknown mode {mode!r}")


def reed_muller_lower(s: int, k: int) -> Optional[int]:
    """P(s, 2^{s-2} + l 2^{s-1}) >= l (2^s - 1) + 2^{s-1} + 1; None off that progression."""
    if s < 4:
        return None
    rest = k - (1 << (s - 2))
    if rest < 0 or rest % (1 << (s - 1)):
        return None
    ell = rest >> (s - 1)
    return ell * ((1 << s) - 1) + (1 << (s - 1)) + 1


def multiplicity_cap(s: int, k: int, n: int) -> int:
    """Largest column multiplicity an [n, s] k-PIR code can have (negative: no such code)."""
    if s < 2:
        raise ValueError("need s >= 2")
    return n - (-(-k * ((1 << (s - 1)) - 1) // (1 << (s - 2))))


@dataclass(frozen=True)
class Reduction:
    s: int
    k: int
    offset: int
    layers: int
    hint: Optional[int] = None


def periodicity_reduce(s: int, k: int, upper_bound_hint) -> Reduction:
    """Peel 2^{s-1} layers off k while the periodicity condition allows it.

    With base b = k mod 2^{s-1} (taken in 1..2^{s-1}) and mu an upper bound for
    P(s, b), layer l may be removed for every l >= max(1, mu - 2b).  Returns
    the reduced k and the length offset l (2^s - 1) added back on top.
    ``upper_bound_hint`` is an int or a callable b -> int.
    """
    half = 1 << (s - 1)
    b = (k - 1) % half + 1
    total = (k - b) // half
    if total == 0:
        return Reduction(s, k, 0, 0)
    mu = upper_bound_hint(b) if callable(upper_bound_hint) else upper_bound_hint
    first = max(1, mu - 2 * b)
    if total < first:
        return Reduction(s, k, 0, 0, mu)
    layers = total - first + 1
    return Reduction(s, k - layers * half, layers * ((1 << s) - 1), layers, mu)


# ---------------------------------------------------------------------------
# N(s, k) table


class TableFormatError(ValueError):
    pass


# Minimum lengths of binary linear codes quoted alongside the best-known PIR
# table (coding-bound column) plus isolated values used in the text.
EMBEDDED_N: Dict[Tuple[int, int], int] = {
    (4, 3): 7, (4, 4): 8, (4, 6): 12, (4, 8): 15, (4, 10): 20, (4, 12): 23, (4, 14): 27, (4, 16): 30,
    (5, 6): 14, (5, 8): 16, (5, 10): 21, (5, 12): 24, (5, 14): 28, (5, 16): 31,
    (6, 6): 15, (6, 8): 18, (6, 10): 23, (6, 12): 26, (6, 14): 30, (6, 16): 32,
    (7, 6): 16, (7, 8): 19, (7, 10): 24, (7, 12): 27, (7, 14): 32, (7, 16): 35,
    (8, 6): 17, (8, 8): 20, (8, 10): 26, (8, 12): 29, (8, 14): 33, (8, 16): 36,
    (9, 6): 18, (9, 8): 21, (9, 10): 27, (9, 12): 30, (9, 14): 35, (9, 16): 38,
    (10, 6): 20, (10, 8): 22, (10, 10): 28, (10, 12): 31, (10, 14): 36, (10, 16): 40,
    (12, 8): 24,
    (92, 5): 106,
}


@dataclass
class NTable:
    entries: Dict[Tuple[int, int], Tuple[int, str]] = field(default_factory=dict)

    @classmethod
    def embedded(cls) -> "NTable":
        return cls({key: (v, "embedded") for key, v in EMBEDDED_N.items()})

    @classmethod
    def parse(cls, text: str, source: str = "user file", base: Optional["NTable"] = None) -> "NTable":
        table = cls(dict(base.entries) if base else {})
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise TableFormatError(f"line {lineno}: expected 's k value', got {raw!r}")
            try:
                s, k, v = (int(p) for p in parts)
            except ValueError:
                raise TableFormatError(f"line {lineno}: non-integer field in {raw!r}") from None
            if s < 1 or k < 1:
                raise TableFormatError(f"line {lineno}: s and k must be positive")
            if v < griesmer(s, k):
                raise TableFormatError(f"line {lineno}: N({s},{k})={v} is below the Griesmer bound {griesmer(s, k)}")
            table.entries[(s, k)] = (v, source)
        return table

    @classmethod
    def load(cls, path: str, base: Optional["NTable"] = None) -> "NTable":
        with open(path) as fh:
            return cls.parse(fh.read(), source=f"user file {path}", base=base)

    def dump(self) -> str:
        return "".join(f"{s} {k} {v}\n" for (s, k), (v, _) in sorted(self.entries.items()))

    def lookup(self, s: int, k: int) -> Tuple[int, str]:
        """(value, source); odd k falls back to N(s, k+1) - 1, then Griesmer."""
        g = griesmer(s, k)
        if (s, k) in self.entries:
            v, src = self.entries[(s, k)]
            return max(v, g), src
        if k % 2 and (s, k + 1) in self.entries:
            v, src = self.entries[(s, k + 1)]
            if v - 1 > g:
                return v - 1, f"{src}, parity from k={k + 1}"
        return g, "Griesmer fallback"


def n_lower(s: int, k: int, table: Optional[NTable] = None) -> int:
    return (table or _default_table()).lookup(s, k)[0]


_DEFAULT_TABLE: Optional[NTable] = None


def _default_table() -> NTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = NTable.embedded()
    return _DEFAULT_TABLE


# ---------------------------------------------------------------------------
# recorded constants

# Lower bounds certified by the lambda = 3 lower-bound ILP.  The s = 5 values
# are re-derived by the test suite; the s = 6 ones are beyond desk scale.
RECORDED_LOWER: Dict[Tuple[int, int], Tuple[int, str]] = {
    (4, 12): (24, "lower ILP, lambda=3"),
    (5, 8): (18, "lower ILP, lambda=3"),
    (5, 10): (22, "lower ILP, lambda=3"),
    (5, 12): (25, "lower ILP, lambda=3"),
    (5, 24): (49, "lower ILP, lambda=3"),
    (5, 26): (53, "lower ILP, lambda=3"),
    (6, 8): (19, "lower ILP, lambda=3 (recorded, not recomputed)"),
    (6, 12): (27, "lower ILP, lambda=3 (recorded, not recomputed)"),
    (6, 14): (32, "lower ILP, lambda=3 (recorded, not recomputed)"),
    (6, 16): (36, "lower ILP, lambda=3 (recorded, not recomputed)"),
}

# Upper bounds without an in-repo construction.  Marker letters follow the
# best-known table: R shortened projective Reed-Muller codes, L lengthening,
# I constructive ILP.
RECORDED_UPPER: Dict[Tuple[int, int], Tuple[int, str]] = {
    (6, 10): (23, "I"), (6, 12): (27, "I"), (6, 14): (32, "I"), (6, 16): (36, "I"),
    (7, 4): (13, "R"), (7, 6): (16, "I"), (7, 8): (21, "I"), (7, 10): (26, "I"),
    (7, 12): (29, "I"), (7, 14): (34, "I"), (7, 16): (39, "I"),
    (8, 4): (14, "R"), (8, 6): (18, "L"), (8, 8): (23, "L"),
    (8, 12): (33, "I"), (8, 14): (38, "I"), (8, 16): (42, "I"),
    (9, 4): (15, "R"), (9, 6): (20, "L"), (9, 8): (25, "R"),
    (9, 12): (37, "I"), (9, 14): (40, "I"), (9, 16): (45, "I"),
    (10, 4): (16, "R"), (10, 6): (21, "L"), (10, 8): (26, "R"),
    (10, 12): (40, "I"), (10, 14): (45, "I"), (10, 16): (50, "I"),
}

# Periodic exact families: P(s, k) = P(s, k - 2^{s-1} tau) + (2^s - 1) tau for
# even k > 2^{s-1}, tau = floor((k - 1) / 2^{s-1}).
EXACT_PERIODIC_DIMS = (4, 5)


# ---------------------------------------------------------------------------
# engine


class BoundsEngine:
    """Memoized best_lower / best_upper with traces.

    The upper table is a fixed point over base constructions and the
    combination rules; the lock makes recomputation single-writer.
    """

    def __init__(
        self,
        table: Optional[NTable] = None,
        catalog_entries: Optional[Iterable] = None,
        use_recorded: bool = True,
    ) -> None:
        self.table = table or _default_table()
        self.use_recorded = use_recorded
        self._catalog = catalog_entries
        self._lock = threading.RLock()
        self._U: Dict[Tuple[int, int], Tuple[int, Step, str, bool]] = {}
        self._grid = (0, 0)
        self._lower_memo: Dict[Tuple[int, int], BoundResult] = {}

    # -- upper ---------------------------------------------------------------

    def _catalog_entries(self):
        if self._catalog is None:
            from .constructions import catalog

            self._catalog = catalog()
        return self._catalog

    def _ensure_grid(self, S: int, K: int) -> None:
        with self._lock:
            S0, K0 = self._grid
            if S <= S0 and K <= K0:
                return
            self._build(max(S, S0), max(K, K0))

    def _build(self, S: int, K: int) -> None:
        from .constructions import max_removable_lines

        U: Dict[Tuple[int, int], Tuple[int, Step, str, bool]] = {}

        def offer(s, k, v, step, marker, mat):
            if 1 <= s <= S and 1 <= k <= K:
                cur = U.get((s, k))
                if cur is None or v < cur[0] or (v == cur[0] and mat and not cur[3]):
                    U[(s, k)] = (v, step, marker, mat)
                    return True
            return False

        for s in range(1, S + 1):
            offer(s, 1, s, Step("identity", f"I_{s}"), "e", True)
            offer(s, 2, s + 1, Step("parity", "single parity check code"), "e", True)
            if s <= 20 and (1 << (s - 1)) <= K:
                offer(s, 1 << (s - 1), (1 << s) - 1, Step("simplex", f"simplex code s={s}"), "S", True)
            if s >= 3 and s <= 20:
                for lam in range(1, max_removable_lines(s) + 1):
                    k = (1 << (s - 1)) - 2 * lam
                    if k <= K:
                        offer(s, k, (1 << s) - 1 - 3 * lam,
                              Step("remove_lines", f"simplex minus {lam} spread lines", (("lines", lam),)), "I", True)
        for k in range(1, K + 1):
            offer(1, k, k, Step("repetition", f"[{k},1] repetition code"), "e", True)
        for e in self._catalog_entries():
            offer(e.s, e.k, e.n, Step("catalog", e.id), "L" if e.provenance.startswith("lengthening") else "I", True)
            if e.certificate is not None and e.s > 1:
                for i in range(e.s):
                    m1 = sum(1 for R in e.certificate.sets[i][: e.k] if len(R) == 1)
                    if m1:
                        offer(e.s - 1, e.k, e.n - m1,
                              Step("expurgation", f"{e.id} without row {i + 1}", (("row", i + 1), ("singletons", m1))),
                              "I", True)
                        break
        if self.use_recorded:
            for (s, k), (v, marker) in RECORDED_UPPER.items():
                offer(s, k, v, Step("recorded", f"best-known value with marker {marker}, not materialized"), marker, False)

        changed = True
        while changed:
            changed = False
            for s in range(1, S + 1):
                for k in range(K, 0, -1):
                    if (s, k) not in U:
                        continue
                    v = U[(s, k)][0]
                    mat = U[(s, k)][3]
                    if k > 1:
                        changed |= offer(s, k - 1, v - 1, Step("puncture", f"P({s},{k})-1", (("P(s,k+1)", v),)),
                                         "a", mat)
                    if k % 2:
                        changed |= offer(s, k + 1, v + 1, Step("parity_extend", f"P({s},{k})+1", (("P(s,k-1)", v),)),
                                         "a", mat)
                    # lengthening, analytic (no in-repo construction)
                    changed |= offer(s + 1, k, v + (k + 1) // 2,
                                     Step("lengthening", f"P({s},{k})+ceil(k/2)", (("P(s-1,k)", v),)), "L", False)
                for k1 in range(1, K + 1):
                    if (s, k1) not in U:
                        continue
                    v1, _, _, m1 = U[(s, k1)]
                    for k2 in range(k1, K + 1 - k1):
                        if (s, k2) not in U:
                            continue
                        v2, _, _, m2 = U[(s, k2)]
                        changed |= offer(s, k1 + k2, v1 + v2,
                                         Step("juxtapose", f"P({s},{k1})+P({s},{k2})",
                                              (("k1", k1), ("k2", k2))), "a", m1 and m2)
            for s1 in range(1, S + 1):
                for s2 in range(s1, S + 1 - s1):
                    for k in range(1, K + 1):
                        a, b = U.get((s1, k)), U.get((s2, k))
                        if a and b:
                            changed |= offer(s1 + s2, k, a[0] + b[0],
                                             Step("direct_sum", f"P({s1},{k})+P({s2},{k})",
                                                  (("s1", s1), ("s2", s2))), "a", a[3] and b[3])
        self._U = U
        self._grid = (S, K)

    def _upper_trace(self, s: int, k: int, depth: int = 0) -> List[Step]:
        v, step, _, _ = self._U[(s, k)]
        steps = [Step(step.rule, step.detail + f" -> P({s},{k})<={v}", step.uses)]
        if depth > 64:
            return steps
        for child in self._children(s, k, step):
            steps.extend(self._upper_trace(*child, depth + 1))
        return steps

    @staticmethod
    def _children(s: int, k: int, step: Step) -> List[Tuple[int, int]]:
        uses = dict(step.uses)
        if step.rule == "puncture":
            return [(s, k + 1)]
        if step.rule == "parity_extend":
            return [(s, k - 1)]
        if step.rule == "lengthening":
            return [(s - 1, k)]
        if step.rule == "juxtapose":
            return [(s, uses["k1"]), (s, uses["k2"])]
        if step.rule == "direct_sum":
            return [(uses["s1"], k), (uses["s2"], k)]
        return []

    def _upper_raw(self, s: int, k: int) -> BoundResult:
        self._ensure_grid(max(s, 10), max(k, 16))
        v, step, marker, mat = self._U[(s, k)]
        return BoundResult(v, UPPER, tuple(self._upper_trace(s, k)), marker, mat)

    GRID_K_LIMIT = 128

    def best_upper(self, s: int, k: int) -> BoundResult:
        if s < 1 or k < 1:
            raise ValueError("need s, k >= 1")
        if k <= self.GRID_K_LIMIT:
            return self._upper_raw(s, k)
        # juxtapose with simplex codes down into the grid
        half = 1 << (s - 1)
        layers = -(-(k - self.GRID_K_LIMIT) // half)
        base = self._upper_raw(s, k - layers * half)
        extra = layers * ((1 << s) - 1)
        step = Step("juxtapose", f"{layers} simplex layers on P({s},{k - layers * half})",
                    (("layers", layers), ("base", base.value)))
        return BoundResult(base.value + extra, UPPER, (step,) + base.trace, "a", base.materializable and s <= 20)

    # -- lower ---------------------------------------------------------------

    def _direct_lower(self, s: int, k: int) -> List[Tuple[int, Step, str]]:
        out: List[Tuple[int, Step, str]] = []
        nv, src = self.table.lookup(s, k)
        out.append((nv, Step("coding", f"N({s},{k}) from {src}", (("N", nv),)), "c"))
        hv = hyperplane_avg_lower(s, k)
        out.append((hv, Step("hyperplane_avg", "k (2^s-1)/2^{s-1}", (("value", hv),)), "c"))
        if k >= 3:
            rv = rao_vardy_lower(s, k)
            out.append((rv, Step("rao_vardy", "s + ceil(sqrt(2s+1/4)+1/2) + k - 3", (("value", rv),)), "r"))
        rm = reed_muller_lower(s, k)
        if rm is not None:
            out.append((rm, Step("reed_muller", "first-order Reed-Muller exclusion and simplex reduction",
                                 (("value", rm),)), "i"))
        if k == 1:
            out.append((s, Step("exact", "P(s,1)=s"), "e"))
        if k == 2:
            out.append((s + 1, Step("exact", "P(s,2)=s+1"), "e"))
        if s == 1:
            out.append((k, Step("exact", "P(1,k)=k"), "e"))
        if s == 2:
            out.append((-(-3 * k // 2), Step("exact", "P(2,k)=ceil(3k/2)"), "e"))
        if s == 3:
            kk = k + (k % 2)
            v = -(-7 * kk // 4) - (k % 2)
            out.append((v, Step("exact", "P(3,k)=ceil(7k/4), k even; parity for odd k"), "e"))
        if self.use_recorded and (s, k) in RECORDED_LOWER:
            v, why = RECORDED_LOWER[(s, k)]
            out.append((v, Step("recorded", why, (("value", v),)), "i"))
        return out

    _MARK_ORDER = {"c": 0, "r": 1, "i": 2, "e": 3}

    def _best_direct(self, s: int, k: int) -> Tuple[int, Step, str]:
        cands = self._direct_lower(s, k)
        top = max(v for v, _, _ in cands)
        return min((c for c in cands if c[0] == top), key=lambda c: self._MARK_ORDER[c[2]])

    def best_lower(self, s: int, k: int) -> BoundResult:
        if s < 1 or k < 1:
            raise ValueError("need s, k >= 1")
        key = (s, k)
        with self._lock:
            if key in self._lower_memo:
                return self._lower_memo[key]
        v, step, marker = self._best_direct(s, k)
        trace = [step]
        # puncturing: P(s,k) >= P(s,k-1) + 1 (one level, from the direct rules)
        if k > 1:
            pv, pstep, _ = self._best_direct(s, k - 1)
            if pv + 1 > v:
                v, marker = pv + 1, "a"
                trace = [Step("puncture", f"P({s},{k - 1})+1", (("P(s,k-1)", pv),)), pstep]
        # parity: odd k satisfies P(s,k) = P(s,k+1) - 1
        if k % 2:
            pv, pstep, pmark = self._best_direct(s, k + 1)
            if pv - 1 > v:
                v, marker = pv - 1, pmark
                trace = [Step("parity_extend", f"P({s},{k + 1})-1", (("P(s,k+1)", pv),)), pstep]
        red = self._reduce(s, k)
        if red.layers:
            base = self.best_lower(s, red.k)
            if base.value + red.offset > v:
                v, marker = base.value + red.offset, base.marker
                trace = [Step("periodicity", f"P({s},{red.k}) + {red.offset}",
                              (("layers", red.layers), ("hint", red.hint), ("base", base.value)))] + list(base.trace)
        if s in EXACT_PERIODIC_DIMS and k > (1 << (s - 1)) and k % 2 == 0:
            half = 1 << (s - 1)
            tau = (k - 1) // half
            base = self.best_lower(s, k - tau * half)
            cand = base.value + tau * ((1 << s) - 1)
            if cand > v:
                v, marker = cand, base.marker
                trace = [Step("periodic_exact", f"P({s},{k - tau * half}) + {tau}*(2^{s}-1)",
                              (("tau", tau), ("base", base.value)))] + list(base.trace)
        result = BoundResult(v, LOWER, tuple(trace), marker)
        with self._lock:
            self._lower_memo[key] = result
        return result

    def _reduce(self, s: int, k: int) -> Reduction:
        if s < 2:
            return Reduction(s, k, 0, 0)
        return periodicity_reduce(s, k, lambda b: self.best_upper(s, b).value)

    def bounds(self, s: int, k: int) -> Tuple[BoundResult, BoundResult]:
        return self.best_lower(s, k), self.best_upper(s, k)

    # -- materialization -----------------------------------------------------

    def materialize(self, s: int, k: int):
        """(G, certificate) achieving best_upper(s, k), or None for non-constructive traces."""
        res = self.best_upper(s, k)
        if not res.materializable:
            return None
        if k > self.GRID_K_LIMIT:
            from .constructions import simplex
            from .recovery import combine_certificates

            half = 1 << (s - 1)
            layers = -(-(k - self.GRID_K_LIMIT) // half)
            G, cert = self._build_code(s, k - layers * half)
            for _ in range(layers):
                G, cert = combine_certificates("juxtapose", [(G, cert), simplex(s)])
            return G, cert
        return self._build_code(s, k)

    def _build_code(self, s: int, k: int):
        from .constructions import catalog, remove_lines, simplex
        from .gf2core import GeneratorMatrix, identity
        from .recovery import (
            RecoveryCertificate,
            combine_certificates,
            expurgate_certificate,
            puncture_certificate,
            truncate_certificate,
        )

        v, step, _, mat = self._U[(s, k)]
        if not mat:
            return None
        rule = step.rule
        uses = dict(step.uses)
        if rule == "identity":
            G = identity(s)
            return G, RecoveryCertificate(s, s, 1, tuple(((i,),) for i in range(s)))
        if rule == "repetition":
            G = GeneratorMatrix(1, (1,) * k)
            return G, RecoveryCertificate(1, k, k, (tuple((j,) for j in range(k)),))
        if rule == "parity":
            G = identity(s)
            return combine_certificates("parity_extend", [(G, RecoveryCertificate(s, s, 1, tuple(((i,),) for i in range(s))))])
        if rule == "simplex":
            return simplex(s)
        if rule == "remove_lines":
            return remove_lines(s, uses["lines"])
        if rule == "catalog":
            e = next(e for e in catalog() if e.id == step.detail)
            return e.matrix, e.certificate
        if rule == "expurgation":
            e = next(e for e in catalog() if e.id == step.detail.split(" without")[0])
            return expurgate_certificate(e.matrix, e.certificate, uses["row"] - 1)
        if rule == "puncture":
            G, cert = self._build_code(s, k + 1)
            col = max(range(G.n), key=lambda j: (_unused_or_big(cert, j), -j))
            H, c2 = puncture_certificate(G, cert, col)
            return H, truncate_certificate(c2, k)
        if rule == "parity_extend":
            return combine_certificates("parity_extend", [self._build_code(s, k - 1)])
        if rule == "juxtapose":
            H, c2 = combine_certificates("juxtapose", [self._build_code(s, uses["k1"]), self._build_code(s, uses["k2"])])
            return H, c2
        if rule == "direct_sum":
            return combine_certificates("direct_sum", [self._build_code(uses["s1"], k), self._build_code(uses["s2"], k)])
        return None


def _unused_or_big(cert, j: int) -> int:
    """Score for the column to drop when puncturing: prefer columns idle for many indices."""
    score = 0
    for per_i in cert.sets:
        if not any(j in R for R in per_i[: cert.k]):
            score += 1
    return score


_ENGINE: Optional[BoundsEngine] = None
_ENGINE_LOCK = threading.Lock()


def default_engine() -> BoundsEngine:
    global _ENGINE
    with _ENGINE_LOCK:
        if _ENGINE is None:
            _ENGINE = BoundsEngine()
        return _ENGINE


def best_lower(s: int, k: int, table: Optional[NTable] = None) -> BoundResult:
    if table is not None:
        return BoundsEngine(table=table).best_lower(s, k)
    return default_engine().best_lower(s, k)


def best_upper(s: int, k: int) -> BoundResult:
    return default_engine().best_upper(s, k)


# ---------------------------------------------------------------------------
# rendering

TABLE_COLUMNS = (2, 3, 4, 6, 8, 10, 12, 14, 16)


def render_table(engine: Optional[BoundsEngine] = None, s_max: int = 10, columns=TABLE_COLUMNS) -> str:
    """The best-known grid: 'lo-up' (or a single value) with lower/upper markers."""
    eng = engine or default_engine()
    head = "s/k " + "".join(f"{k:>12}" for k in columns)
    rows = [head]
    for s in range(1, s_max + 1):
        cells = []
        for k in columns:
            lo, up = eng.bounds(s, k)
            core = f"{lo.value}" if lo.value == up.value else f"{lo.value}-{up.value}"
            cells.append(f"{lo.marker}{core}{up.marker}".rjust(12))
        rows.append(f"{s:>3} " + "".join(cells))
    return "\n".join(rows) + "\n"
