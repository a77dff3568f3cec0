"""Exact GF(2) linear algebra for binary generator matrices.

Vectors of F_2^s are stored as Python ints: bit ``r`` (least significant
first) holds row ``r + 1``.  A generator matrix is a tuple of such column
masks.  Hyperplanes are identified by their nonzero normal vector ``v``,
``H_v = {x : <x, v> = 0}``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

#: default cap on the dimension for exhaustive 2^s enumerations
MAX_ENUM_DIM = 24


class MatrixFormatError(ValueError):
    """Malformed matrix text."""


class BudgetExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its hard cap."""


class RankError(ValueError):
    """A matrix or point multiset does not have full rank."""


class ZeroColumnError(ValueError):
    """A zero column reached an operation that only accepts nonzero points."""


def popcount(x: int) -> int:
    return bin(x).count("1")


def unit(i: int) -> int:
    """Mask of the unit vector e_{i+1} (0-based row index ``i``)."""
    return 1 << i


def gf2_rank(vectors: Iterable[int]) -> int:
    """Rank over GF(2) of a collection of int bitsets."""
    basis: Dict[int, int] = {}  # leading bit -> basis vector
    for v in vectors:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


def in_span(v: int, basis: Mapping[int, int]) -> bool:
    """Reduce ``v`` against an echelon basis keyed by leading bit."""
    while v:
        top = v.bit_length() - 1
        if top not in basis:
            return False
        v ^= basis[top]
    return True


def vector_to_text(v: int, s: int) -> str:
    return "".join("1" if (v >> r) & 1 else "0" for r in range(s))


def canonical_key(v: int, s: int) -> Tuple[int, ...]:
    """Sort key reading the column from row 1 down to row s."""
    return tuple((v >> r) & 1 for r in range(s))


@dataclass(frozen=True)
class GeneratorMatrix:
    """An s x n binary matrix held column-wise.

    Full rank is not enforced at construction (the parser accepts anything
    rectangular); :meth:`require_pir_ready` checks the PIR-level invariants.
    """

    s: int
    columns: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.s < 1:
            raise ValueError("a generator matrix needs at least one row")
        object.__setattr__(self, "columns", tuple(int(c) for c in self.columns))
        limit = 1 << self.s
        for c in self.columns:
            if c < 0 or c >= limit:
                raise ValueError(f"column {c} does not fit in {self.s} rows")

    @property
    def n(self) -> int:
        return len(self.columns)

    @property
    def rank(self) -> int:
        return gf2_rank(self.columns)

    @property
    def effective_length(self) -> int:
        return sum(1 for c in self.columns if c)

    def rows(self) -> List[int]:
        """Row masks; bit j of row r is entry (r, j)."""
        out = []
        for r in range(self.s):
            row = 0
            for j, c in enumerate(self.columns):
                if (c >> r) & 1:
                    row |= 1 << j
            out.append(row)
        return out

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "GeneratorMatrix":
        if not rows:
            raise MatrixFormatError("empty matrix")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise MatrixFormatError("ragged rows")
        cols = []
        for j in range(n):
            c = 0
            for r, row in enumerate(rows):
                if row[j]:
                    c |= 1 << r
            cols.append(c)
        return cls(len(rows), tuple(cols))

    def to_text(self) -> str:
        lines = []
        for r in range(self.s):
            lines.append("".join("1" if (c >> r) & 1 else "0" for c in self.columns))
        return "\n".join(lines) + "\n"

    def column_bits(self, j: int) -> str:
        return vector_to_text(self.columns[j], self.s)

    def require_pir_ready(self) -> None:
        """Reject zero columns and rank deficiency (PIR operations need both)."""
        zeros = [j for j, c in enumerate(self.columns) if c == 0]
        if zeros:
            raise ZeroColumnError(f"zero columns at indices {zeros}")
        if self.rank != self.s:
            raise RankError(f"rank {self.rank} < {self.s}")

    def __str__(self) -> str:
        return self.to_text()


def parse_matrix(text: str) -> GeneratorMatrix:
    """Parse rows of '0'/'1' characters; spaces and blank lines are ignored."""
    rows: List[List[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        bits = []
        for ch in line:
            if ch in " \t":
                continue
            if ch not in "01":
                raise MatrixFormatError(f"line {lineno}: non-binary character {ch!r}")
            bits.append(1 if ch == "1" else 0)
        rows.append(bits)
    if not rows:
        raise MatrixFormatError("empty input")
    if any(len(r) != len(rows[0]) for r in rows):
        lengths = sorted({len(r) for r in rows})
        raise MatrixFormatError(f"ragged rows (lengths {lengths})")
    if len(rows[0]) == 0:
        raise MatrixFormatError("empty input")
    return GeneratorMatrix.from_rows(rows)


def identity(s: int) -> GeneratorMatrix:
    return GeneratorMatrix(s, tuple(1 << r for r in range(s)))


# ---------------------------------------------------------------------------
# point multisets


@dataclass(frozen=True)
class PointMultiset:
    """Multiset of nonzero points of F_2^s (column multiplicities)."""

    s: int
    mult: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for p, m in dict(self.mult).items():
            if p == 0:
                raise ZeroColumnError("the zero vector is not a point")
            if not 0 < p < (1 << self.s):
                raise ValueError(f"point {p} outside F_2^{self.s}")
            if m < 0:
                raise ValueError("negative multiplicity")
            if m:
                clean[int(p)] = int(m)
        object.__setattr__(self, "mult", dict(sorted(clean.items())))

    @property
    def n(self) -> int:
        return sum(self.mult.values())

    def points(self) -> List[int]:
        return list(self.mult)

    def multiplicity(self, p: int) -> int:
        return self.mult.get(p, 0)

    def as_array(self) -> np.ndarray:
        """Dense multiplicity vector indexed by point (index 0 unused, = 0)."""
        arr = np.zeros(1 << self.s, dtype=np.int64)
        for p, m in self.mult.items():
            arr[p] = m
        return arr

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointMultiset):
            return NotImplemented
        return self.s == other.s and dict(self.mult) == dict(other.mult)

    def __hash__(self) -> int:
        return hash((self.s, tuple(self.mult.items())))


def matrix_to_multiset(G: GeneratorMatrix) -> PointMultiset:
    if any(c == 0 for c in G.columns):
        raise ZeroColumnError("zero column in generator matrix")
    return PointMultiset(G.s, Counter(G.columns))


def multiset_to_matrix(P: PointMultiset) -> GeneratorMatrix:
    """Canonical column order: lexicographic reading rows 1..s, repeated by multiplicity."""
    if gf2_rank(P.mult) != P.s:
        raise RankError("support of the multiset does not span F_2^s")
    cols: List[int] = []
    for p in sorted(P.mult, key=lambda v: canonical_key(v, P.s)):
        cols.extend([p] * P.mult[p])
    return GeneratorMatrix(P.s, tuple(cols))


# ---------------------------------------------------------------------------
# spectra


def _check_dim(s: int, max_dim: int) -> None:
    if s > max_dim:
        raise BudgetExceeded(f"2^{s} enumeration exceeds the cap 2^{max_dim}")


def walsh_hadamard(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform: out[v] = sum_x a[x] (-1)^{<x,v>}."""
    h = a.astype(np.int64).copy()
    n = h.shape[0]
    step = 1
    while step < n:
        h = h.reshape(-1, 2, step)
        a0 = h[:, 0, :].copy()
        a1 = h[:, 1, :]
        h[:, 0, :] = a0 + a1
        h[:, 1, :] = a0 - a1
        h = h.reshape(n)
        step *= 2
    return h


def _column_counts(G: GeneratorMatrix) -> np.ndarray:
    arr = np.zeros(1 << G.s, dtype=np.int64)
    for c in G.columns:
        arr[c] += 1
    return arr


def codeword_weights(G: GeneratorMatrix, max_dim: int = MAX_ENUM_DIM) -> np.ndarray:
    """Weight of the codeword v^T G for every message / normal vector v.

    Zero columns never contribute, so the transform over all columns
    (including any zero ones) gives the weights directly.
    """
    _check_dim(G.s, max_dim)
    counts = _column_counts(G)
    wht = walsh_hadamard(counts)
    return (G.n - wht) // 2


@dataclass(frozen=True)
class WeightDistribution:
    counts: Tuple[int, ...]  # counts[w] = A_w

    def __getitem__(self, w: int) -> int:
        return self.counts[w] if 0 <= w < len(self.counts) else 0

    @property
    def total(self) -> int:
        return sum(self.counts)

    def nonzero(self) -> Dict[int, int]:
        return {w: a for w, a in enumerate(self.counts) if a}

    def min_positive(self) -> Optional[int]:
        for w, a in enumerate(self.counts):
            if w and a:
                return w
        return None

    def __str__(self) -> str:
        return " ".join(f"{w}^{a}" for w, a in self.nonzero().items())


def weight_distribution(G: GeneratorMatrix, max_dim: int = MAX_ENUM_DIM) -> WeightDistribution:
    w = codeword_weights(G, max_dim)
    counts = np.bincount(w, minlength=G.n + 1)
    return WeightDistribution(tuple(int(a) for a in counts))


def min_distance(G: GeneratorMatrix, max_dim: int = MAX_ENUM_DIM) -> int:
    """Minimum positive codeword weight (rank-deficient codes report 0)."""
    w = codeword_weights(G, max_dim)
    nz = w[1:]
    return int(nz.min()) if nz.size else 0


def krawtchouk(n: int, w: int, j: int) -> int:
    return sum((-1) ** t * comb(j, t) * comb(n - j, w - t) for t in range(w + 1))


def dual_weight_distribution(G: GeneratorMatrix, max_dim: int = MAX_ENUM_DIM) -> WeightDistribution:
    """MacWilliams transform of the weight distribution (exact rational arithmetic)."""
    A = weight_distribution(G, max_dim)
    size = A.total  # 2^rank
    out = []
    for w in range(G.n + 1):
        acc = sum(A[j] * krawtchouk(G.n, w, j) for j in range(G.n + 1) if A[j])
        val = Fraction(acc, size)
        if val.denominator != 1:
            raise ArithmeticError("MacWilliams transform produced a non-integer count")
        out.append(int(val))
    return WeightDistribution(tuple(out))


def dual_min_distance(G: GeneratorMatrix, max_candidates: int = 5_000_000) -> int:
    """Size of the smallest linearly dependent set of columns.

    Searches by increasing size w: every (w-1)-subset of columns is summed and
    looked up among the later columns.
    """
    cols = G.columns
    if any(c == 0 for c in cols):
        return 1
    if len(set(cols)) < len(cols):
        return 2
    n = len(cols)
    if G.rank == n:
        raise RankError("columns are linearly independent; the dual code is trivial")
    later: Dict[int, List[int]] = {}
    for j, c in enumerate(cols):
        later.setdefault(c, []).append(j)
    spent = 0
    for w in range(3, n + 1):
        spent += comb(n, w - 1)
        if spent > max_candidates:
            raise BudgetExceeded(f"dependency search beyond size {w - 1} exceeds the cap")
        for combo in combinations(range(n), w - 1):
            acc = 0
            for j in combo:
                acc ^= cols[j]
            for j in later.get(acc, ()):
                if j > combo[-1]:
                    return w
    raise AssertionError("unreachable: n columns of rank < n are dependent")


@dataclass(frozen=True)
class HyperplaneSpectrum:
    s: int
    n: int
    h: Dict[int, int]  # i -> number of hyperplanes containing exactly i points
    y2: int

    def standard_equations(self) -> Tuple[Tuple[int, int], Tuple[int, int], Tuple[int, int]]:
        """(lhs, rhs) pairs of the three incidence identities."""
        s, n = self.s, self.n
        e1 = (sum(self.h.values()), (1 << s) - 1)
        e2 = (sum(i * c for i, c in self.h.items()), n * ((1 << (s - 1)) - 1))
        half = 1 << (s - 2) if s >= 2 else Fraction(1, 2)
        rhs3 = n * (n - 1) * (half - 1) + half * self.y2
        e3 = (sum(i * (i - 1) * c for i, c in self.h.items()), rhs3)
        return e1, e2, e3

    def satisfies_standard_equations(self) -> bool:
        return all(lhs == rhs for lhs, rhs in self.standard_equations())


def points_in_hyperplanes(P: PointMultiset, max_dim: int = MAX_ENUM_DIM) -> np.ndarray:
    """Entry v (v >= 1) is the number of points of P inside H_v."""
    _check_dim(P.s, max_dim)
    arr = P.as_array()
    return (P.n + walsh_hadamard(arr)) // 2


def hyperplane_spectrum(P: PointMultiset, max_dim: int = MAX_ENUM_DIM) -> HyperplaneSpectrum:
    inside = points_in_hyperplanes(P, max_dim)[1:]
    h = {int(i): int(c) for i, c in zip(*np.unique(inside, return_counts=True))}
    y2 = sum(m * (m - 1) for m in P.mult.values())
    spec = HyperplaneSpectrum(P.s, P.n, h, y2)
    if P.s >= 2 and not spec.satisfies_standard_equations():
        raise ArithmeticError("standard equations violated; spectrum computation is broken")
    return spec


def is_projective(G: GeneratorMatrix) -> bool:
    return all(c for c in G.columns) and len(set(G.columns)) == G.n


# ---------------------------------------------------------------------------
# code surgery


def _check_col(G: GeneratorMatrix, col: int) -> None:
    if not 0 <= col < G.n:
        raise IndexError(f"column {col} out of range 0..{G.n - 1}")


def puncture(G: GeneratorMatrix, col: int) -> GeneratorMatrix:
    _check_col(G, col)
    return GeneratorMatrix(G.s, G.columns[:col] + G.columns[col + 1:])


def shorten(G: GeneratorMatrix, col: int) -> GeneratorMatrix:
    """Keep the codewords vanishing at ``col`` and delete that coordinate."""
    _check_col(G, col)
    c = G.columns[col]
    if c == 0:
        raise RankError("shortening at a zero column keeps the full code; use puncture")
    if G.rank != G.s:
        raise RankError("shortening needs a full-rank generator matrix")
    # change of row basis: pivot row p takes c's top bit; clear it from the others
    p = c.bit_length() - 1
    rows = G.rows()
    pivot = rows[p]
    for r in range(G.s):
        if r != p and (c >> r) & 1:
            rows[r] ^= pivot
    keep = [rows[r] for r in range(G.s) if r != p]
    cols = []
    for j in range(G.n):
        if j == col:
            continue
        v = 0
        for r, row in enumerate(keep):
            if (row >> j) & 1:
                v |= 1 << r
        cols.append(v)
    out = GeneratorMatrix(G.s - 1, tuple(cols))
    if out.rank != out.s:
        raise RankError(f"shortened code collapsed to rank {out.rank}")
    return out


def parity_extend(G: GeneratorMatrix) -> GeneratorMatrix:
    total = 0
    for c in G.columns:
        total ^= c
    return GeneratorMatrix(G.s, G.columns + (total,))


@dataclass(frozen=True)
class Expurgation:
    matrix: GeneratorMatrix
    zero_columns: Tuple[int, ...]  # indices (in the input) that became zero
    kept: Tuple[int, ...]  # input indices of the output columns


def expurgate(G: GeneratorMatrix, row: int, drop_zero: bool = True) -> Expurgation:
    """Delete row ``row`` (0-based).

    With ``drop_zero`` the columns that become zero are removed; otherwise
    the column indexing is preserved so old index sets can be compared.
    """
    if not 0 <= row < G.s:
        raise IndexError(f"row {row} out of range 0..{G.s - 1}")
    if G.s == 1:
        raise RankError("cannot expurgate the only row")
    low = (1 << row) - 1
    cols = [(c & low) | ((c >> (row + 1)) << row) for c in G.columns]
    zeros = tuple(j for j, c in enumerate(cols) if c == 0)
    kept = tuple(j for j in range(G.n) if not (drop_zero and cols[j] == 0))
    out = GeneratorMatrix(G.s - 1, tuple(cols[j] for j in kept))
    if out.rank != out.s:
        raise RankError(f"expurgated code collapsed to rank {out.rank}")
    return Expurgation(out, zeros, kept)


def direct_sum(G1: GeneratorMatrix, G2: GeneratorMatrix) -> GeneratorMatrix:
    shifted = tuple(c << G1.s for c in G2.columns)
    return GeneratorMatrix(G1.s + G2.s, G1.columns + shifted)


def juxtapose(G1: GeneratorMatrix, G2: GeneratorMatrix) -> GeneratorMatrix:
    if G1.s != G2.s:
        raise ValueError(f"juxtaposition needs equal dimensions, got {G1.s} and {G2.s}")
    return GeneratorMatrix(G1.s, G1.columns + G2.columns)


SURGERIES = ("puncture", "shorten", "parity_extend", "expurgate", "direct_sum", "juxtapose")


def surgery(G: GeneratorMatrix, kind: str, arg=None) -> GeneratorMatrix:
    """Dispatch by name; ``arg`` is a column, row or second matrix as needed."""
    if kind == "puncture":
        return puncture(G, arg)
    if kind == "shorten":
        return shorten(G, arg)
    if kind == "parity_extend":
        return parity_extend(G)
    if kind == "expurgate":
        return expurgate(G, arg).matrix
    if kind == "direct_sum":
        return direct_sum(G, arg)
    if kind == "juxtapose":
        return juxtapose(G, arg)
    raise ValueError(f"unknown surgery {kind!r}; expected one of {SURGERIES}")
