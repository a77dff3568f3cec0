"""Recovery-set certificates for k-PIR generator matrices.

Column indices are 0-based everywhere.  Information index ``i`` is also
0-based: ``sets[i]`` recovers the unit vector e_{i+1}.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .gf2core import (
    GeneratorMatrix,
    BudgetExceeded,
    min_distance,
    parity_extend,
    direct_sum,
    juxtapose,
    MAX_ENUM_DIM,
)

RecoverySet = Tuple[int, ...]


@dataclass(frozen=True)
class RecoveryCertificate:
    s: int
    n: int
    k: int
    sets: Tuple[Tuple[RecoverySet, ...], ...]

    def __post_init__(self) -> None:
        norm = tuple(tuple(tuple(sorted(int(j) for j in R)) for R in per_i) for per_i in self.sets)
        object.__setattr__(self, "sets", norm)

    def profile(self, i: int) -> Dict[int, int]:
        """Cardinality profile of the sets for e_{i+1}: size -> count."""
        return dict(sorted(Counter(len(R) for R in self.sets[i]).items()))

    def profile_str(self, i: int) -> str:
        return " ".join(f"{size}^{cnt}" for size, cnt in self.profile(i).items())

    def to_json(self) -> str:
        payload = {"s": self.s, "n": self.n, "k": self.k, "sets": [[list(R) for R in per_i] for per_i in self.sets]}
        return json.dumps(payload, indent=1) + "\n"

    def to_dict(self) -> dict:
        return json.loads(self.to_json())


class CertificateFormatError(ValueError):
    pass


def certificate_from_dict(payload: dict) -> RecoveryCertificate:
    """Shape validation only; semantics are checked by validate_certificate."""
    try:
        s, n, k = int(payload["s"]), int(payload["n"]), int(payload["k"])
        raw = payload["sets"]
    except (KeyError, TypeError, ValueError) as exc:
        raise CertificateFormatError(f"missing or non-integer field: {exc}") from None
    if not isinstance(raw, list) or len(raw) != s:
        raise CertificateFormatError(f"'sets' must be a list of {s} lists")
    sets = []
    for per_i in raw:
        if not isinstance(per_i, list):
            raise CertificateFormatError("each sets[i] must be a list of index lists")
        group = []
        for R in per_i:
            if not isinstance(R, list) or not all(isinstance(j, int) for j in R):
                raise CertificateFormatError("recovery sets must be lists of integers")
            group.append(tuple(R))
        sets.append(tuple(group))
    return RecoveryCertificate(s, n, k, tuple(sets))


def certificate_from_json(text: str) -> RecoveryCertificate:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(str(exc)) from None
    if not isinstance(payload, dict):
        raise CertificateFormatError("certificate must be a JSON object")
    return certificate_from_dict(payload)


def xor_columns(G: GeneratorMatrix, idx: Iterable[int]) -> int:
    acc = 0
    for j in idx:
        acc ^= G.columns[j]
    return acc


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    i: int
    set_index: Optional[int]
    reason: str


@dataclass(frozen=True)
class ValidationReport:
    k: int
    violations: Tuple[Violation, ...]

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid

    def lines(self) -> List[str]:
        if self.valid:
            return [f"certificate valid for k={self.k}"]
        out = []
        for v in self.violations:
            where = f"e_{v.i + 1}" + (f" set #{v.set_index}" if v.set_index is not None else "")
            out.append(f"{where}: {v.reason}")
        return out


def validate_certificate(G: GeneratorMatrix, k: int, cert: RecoveryCertificate) -> ValidationReport:
    bad: List[Violation] = []
    if cert.s != G.s or cert.n != G.n:
        bad.append(Violation(-1, None, f"certificate is for s={cert.s}, n={cert.n}; matrix has s={G.s}, n={G.n}"))
        return ValidationReport(k, tuple(bad))
    if len(cert.sets) != G.s:
        bad.append(Violation(-1, None, f"expected {G.s} lists of sets, got {len(cert.sets)}"))
        return ValidationReport(k, tuple(bad))
    for i, per_i in enumerate(cert.sets):
        if len(per_i) < k:
            bad.append(Violation(i, None, f"only {len(per_i)} sets, need {k}"))
        owner: Dict[int, int] = {}
        for t, R in enumerate(per_i):
            if not R:
                bad.append(Violation(i, t, "empty set"))
                continue
            if len(set(R)) != len(R):
                bad.append(Violation(i, t, "repeated column index"))
            out_of_range = [j for j in R if not 0 <= j < G.n]
            if out_of_range:
                bad.append(Violation(i, t, f"indices out of range: {out_of_range}"))
                continue
            for j in R:
                if j in owner and owner[j] != t:
                    bad.append(Violation(i, t, f"not disjoint: column {j} also in set #{owner[j]}"))
                owner.setdefault(j, t)
            total = xor_columns(G, R)
            if total != 1 << i:
                bad.append(Violation(i, t, f"sums to {_bits(total, G.s)}, not e_{i + 1}"))
    return ValidationReport(k, tuple(bad))


def _bits(v: int, s: int) -> str:
    return "".join("1" if (v >> r) & 1 else "0" for r in range(s))


# ---------------------------------------------------------------------------
# minimal recovery sets


def enumerate_minimal_recovery_sets(
    G: GeneratorMatrix, i: int, lam: int, max_candidates: int = 2_000_000
) -> List[RecoverySet]:
    """All minimal recovery sets for e_{i+1} with at most ``lam`` columns.

    A recovery set is minimal exactly when its columns are linearly
    independent (a proper sub-recovery set would leave a zero-sum
    remainder), so the search only extends by columns outside the current
    span.  Zero columns and equal column pairs never occur.
    """
    if lam < 1:
        raise ValueError("lambda must be at least 1")
    target = 1 << i
    cols = G.columns
    n = len(cols)
    by_value: Dict[int, List[int]] = {}
    for j, c in enumerate(cols):
        if c:
            by_value.setdefault(c, []).append(j)
    lam = min(lam, G.s)  # more than s columns are always dependent
    found: List[RecoverySet] = []
    visited = 0

    def extend(start: int, chosen: List[int], acc: int, basis: Dict[int, int], room: int) -> None:
        nonlocal visited
        # close the set with one column equal to the missing sum
        need = acc ^ target
        if need and not _reduces_to_zero(need, basis):
            for j in by_value.get(need, ()):
                if j >= start:
                    found.append(tuple(chosen) + (j,))
        if room <= 1:
            return
        for j in range(start, n):
            c = cols[j]
            if c == 0 or _reduces_to_zero(c, basis):
                continue
            visited += 1
            if visited > max_candidates:
                raise BudgetExceeded(f"more than {max_candidates} candidate sets for e_{i + 1}")
            nb = dict(basis)
            _insert(c, nb)
            chosen.append(j)
            extend(j + 1, chosen, acc ^ c, nb, room - 1)
            chosen.pop()

    extend(0, [], 0, {}, lam)
    found.sort(key=lambda R: (len(R), R))
    return found


def _reduces_to_zero(v: int, basis: Dict[int, int]) -> bool:
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            return False
        v ^= b
    return True


def _insert(v: int, basis: Dict[int, int]) -> None:
    while v:
        top = v.bit_length() - 1
        b = basis.get(top)
        if b is None:
            basis[top] = v
            return
        v ^= b


# ---------------------------------------------------------------------------
# exact disjoint packing


FOUND = "found"
NOT_FOUND = "not-found-within-cap"
EXHAUSTED = "budget-exhausted"


@dataclass
class SearchOutcome:
    status: str
    certificate: Optional[RecoveryCertificate] = None
    lam: int = 0
    nodes: int = 0
    failed_index: Optional[int] = None

    @property
    def found(self) -> bool:
        return self.status == FOUND


class _Budget:
    def __init__(self, limit: Optional[int]) -> None:
        self.limit = limit
        self.used = 0

    def tick(self) -> None:
        self.used += 1
        if self.limit is not None and self.used > self.limit:
            raise _OutOfBudget


class _OutOfBudget(Exception):
    pass


def pack_disjoint(
    candidates: Sequence[RecoverySet], k: int, n: int, budget: Optional[_Budget] = None
) -> Optional[List[RecoverySet]]:
    """Find k pairwise disjoint members of ``candidates`` (exact).

    Branches on the lowest still-free column: either some candidate through
    it is taken, or the column is discarded.  Failed (free-mask, need)
    states are memoised.
    """
    budget = budget or _Budget(None)
    if k <= 0:
        return []
    masks = []
    for R in candidates:
        m = 0
        for j in R:
            m |= 1 << j
        masks.append((m, R))
    through: Dict[int, List[Tuple[int, RecoverySet]]] = {}
    for m, R in masks:
        for j in R:
            through.setdefault(j, []).append((m, R))
    usable = 0
    for m, _ in masks:
        usable |= m
    min_size = min((len(R) for R in candidates), default=n + 1)
    failed = set()

    def rec(free: int, need: int, picked: List[RecoverySet]) -> bool:
        if need == 0:
            return True
        if bin(free).count("1") < need * min_size:
            return False
        key = (free, need)
        if key in failed:
            return False
        budget.tick()
        low = free & -free
        j = low.bit_length() - 1
        for m, R in through.get(j, ()):
            if m & free == m:
                picked.append(R)
                if rec(free & ~m, need - 1, picked):
                    return True
                picked.pop()
        if rec(free & ~low, need, picked):
            return True
        failed.add(key)
        return False

    picked: List[RecoverySet] = []
    if rec(usable, k, picked):
        return sorted(picked, key=lambda R: (len(R), R))
    return None


def search_certificate(
    G: GeneratorMatrix, k: int, lam: int, budget: Optional[int] = None
) -> SearchOutcome:
    """Exact search for k disjoint recovery sets per unit vector, sets of size <= lam.

    ``not-found-within-cap`` proves that no certificate uses only sets of
    size <= lam; ``budget-exhausted`` is indeterminate.
    """
    if k < 1:
        raise ValueError("k must be positive")
    G.require_pir_ready()
    tracker = _Budget(budget)
    try:
        cands = [enumerate_minimal_recovery_sets(G, i, lam) for i in range(G.s)]
    except BudgetExceeded:
        return SearchOutcome(EXHAUSTED, lam=lam)
    order = sorted(range(G.s), key=lambda i: (len(cands[i]), i))
    result: Dict[int, List[RecoverySet]] = {}
    try:
        for i in order:
            if len(cands[i]) < k:
                return SearchOutcome(NOT_FOUND, lam=lam, nodes=tracker.used, failed_index=i)
            packed = pack_disjoint(cands[i], k, G.n, tracker)
            if packed is None:
                return SearchOutcome(NOT_FOUND, lam=lam, nodes=tracker.used, failed_index=i)
            result[i] = packed
    except _OutOfBudget:
        return SearchOutcome(EXHAUSTED, lam=lam, nodes=tracker.used)
    cert = RecoveryCertificate(G.s, G.n, k, tuple(tuple(result[i]) for i in range(G.s)))
    return SearchOutcome(FOUND, cert, lam=lam, nodes=tracker.used)


@dataclass
class Decision:
    answer: str  # "yes" | "no" | "unknown"
    certificate: Optional[RecoveryCertificate] = None
    reason: str = ""
    nodes: int = 0

    def __bool__(self) -> bool:
        return self.answer == "yes"


def decide_k_pir(
    G: GeneratorMatrix, k: int, budget: Optional[int] = 10_000_000, max_lam: Optional[int] = None
) -> Decision:
    """yes (with certificate) / no / unknown for the k-PIR property of ``G``.

    The size cap escalates from 2; minimal sets never exceed s columns, so
    a completed run at cap min(n, s) is exhaustive.  ``max_lam`` stops the
    escalation early, in which case a miss is reported as unknown.
    """
    G.require_pir_ready()
    if G.s <= MAX_ENUM_DIM:
        d = min_distance(G)
        if d < k:
            return Decision("no", reason=f"minimum distance {d} < {k}")
    full = min(G.n, G.s)
    top = full if max_lam is None else min(max_lam, full)
    nodes = 0
    for lam in range(min(2, top), top + 1):
        remaining = None if budget is None else budget - nodes
        out = search_certificate(G, k, lam, remaining)
        nodes += out.nodes
        if out.status == FOUND:
            return Decision("yes", out.certificate, f"certificate with sets of size <= {lam}", nodes)
        if out.status == EXHAUSTED:
            return Decision("unknown", reason=f"budget exhausted at size cap {lam}", nodes=nodes)
    if top == full:
        return Decision("no", reason="exhaustive packing search found no certificate", nodes=nodes)
    return Decision("unknown", reason=f"no certificate with sets of size <= {top}", nodes=nodes)


# ---------------------------------------------------------------------------
# lifting certificates through surgery


def combine_certificates(kind: str, inputs: Sequence[Tuple[GeneratorMatrix, RecoveryCertificate]]):
    """Surgered matrix plus a lifted certificate.

    direct_sum -> k = min(k1, k2); juxtapose -> k = k1 + k2;
    parity_extend (odd k) -> k + 1.
    """
    if kind == "parity_extend":
        (G, cert), = inputs
        if cert.k % 2 == 0:
            raise ValueError("parity extension lifts odd k only")
        H = parity_extend(G)
        p = G.n
        sets = []
        for i, per_i in enumerate(cert.sets):
            chosen = per_i[: cert.k]
            used = {j for R in chosen for j in R}
            rest = tuple(j for j in range(G.n) if j not in used)
            new = (p,) + rest
            if xor_columns(H, new) != 1 << i:
                raise AssertionError("parity lift produced a set with the wrong sum")
            sets.append(tuple(chosen) + (new,))
        return H, RecoveryCertificate(H.s, H.n, cert.k + 1, tuple(sets))
    if kind == "direct_sum":
        (G1, c1), (G2, c2) = inputs
        H = direct_sum(G1, G2)
        k = min(c1.k, c2.k)
        sets = [tuple(per_i[:k]) for per_i in c1.sets]
        sets += [tuple(tuple(j + G1.n for j in R) for R in per_i[:k]) for per_i in c2.sets]
        return H, RecoveryCertificate(H.s, H.n, k, tuple(sets))
    if kind == "juxtapose":
        (G1, c1), (G2, c2) = inputs
        H = juxtapose(G1, G2)
        sets = []
        for a, b in zip(c1.sets, c2.sets):
            sets.append(tuple(a[: c1.k]) + tuple(tuple(j + G1.n for j in R) for R in b[: c2.k]))
        return H, RecoveryCertificate(H.s, H.n, c1.k + c2.k, tuple(sets))
    raise ValueError(f"unknown combination {kind!r}")


def puncture_certificate(G: GeneratorMatrix, cert: RecoveryCertificate, col: int):
    """Delete column ``col``; each index loses at most the one set through it."""
    from .gf2core import puncture

    H = puncture(G, col)

    def shift(R: RecoverySet) -> RecoverySet:
        return tuple(j - 1 if j > col else j for j in R)

    kept = [[shift(R) for R in per_i[: cert.k] if col not in R] for per_i in cert.sets]
    k = min(len(group) for group in kept)
    return H, RecoveryCertificate(H.s, H.n, k, tuple(tuple(group[:k]) for group in kept))


def truncate_certificate(cert: RecoveryCertificate, k: int) -> RecoveryCertificate:
    if k > cert.k:
        raise ValueError(f"cannot raise k from {cert.k} to {k}")
    return RecoveryCertificate(cert.s, cert.n, k, tuple(tuple(per_i[:k]) for per_i in cert.sets))


def expurgate_certificate(G: GeneratorMatrix, cert: RecoveryCertificate, row: int):
    """Drop row ``row`` and the columns it zeroes; the other indices keep their sets."""
    from .gf2core import expurgate

    ex = expurgate(G, row, drop_zero=True)
    where = {old: new for new, old in enumerate(ex.kept)}
    sets = []
    for i, per_i in enumerate(cert.sets):
        if i == row:
            continue
        group = []
        for R in per_i[: cert.k]:
            kept = tuple(where[j] for j in R if j in where)
            if not kept:
                raise AssertionError("a recovery set vanished under expurgation")
            group.append(kept)
        sets.append(tuple(group))
    return ex.matrix, RecoveryCertificate(ex.matrix.s, ex.matrix.n, cert.k, tuple(sets))
