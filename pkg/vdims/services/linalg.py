"""
Exact rank of sparse integer matrices.

Ranks are computed over prime fields by sparse Gaussian elimination with a
Markowitz-style pivot choice, and certified by agreement across several
primes. A dense rational elimination serves as an oracle for small matrices.
"""

import heapq
import logging
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix, vstack
from sympy import isprime

logger = logging.getLogger(__name__)


class LinalgError(Exception):
    """Base exception for exact linear algebra errors."""

    pass


class ParameterError(LinalgError):
    """Invalid prime, prime set or matrix shape."""

    pass


class InconclusiveRankError(LinalgError):
    """Ranks modulo different primes disagree."""

    def __init__(self, message: str, ranks: dict[int, int]):
        super().__init__(message)
        self.ranks = ranks

    def __reduce__(self):
        return type(self), (str(self), self.ranks)


# ============ Sparse integer matrix ============


@dataclass(frozen=True, eq=False)
class SparseIntMatrix:
    """
    Integer matrix in canonical coordinate form.

    Entries are sorted row-major with duplicates summed and zeros removed.
    """

    n_rows: int
    n_cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    @classmethod
    def from_triplets(
        cls,
        n_rows: int,
        n_cols: int,
        triplets: Iterable[tuple[int, int, int]],
    ) -> "SparseIntMatrix":
        """
        Assemble from (row, col, value) triplets, summing duplicates.

        Raises:
            ParameterError: On negative shape or out-of-range indices
        """
        rows, cols, values = [], [], []
        for r, c, v in triplets:
            rows.append(r)
            cols.append(c)
            values.append(v)
        return cls._assemble(n_rows, n_cols, rows, cols, values)

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[tuple[int, int]]], n_cols: int) -> "SparseIntMatrix":
        """Assemble from rows given as (col, value) pairs; row order is kept."""
        r_idx, c_idx, values = [], [], []
        n_rows = 0
        for r, row in enumerate(rows):
            n_rows = r + 1
            for c, v in row:
                r_idx.append(r)
                c_idx.append(c)
                values.append(v)
        return cls._assemble(n_rows, n_cols, r_idx, c_idx, values)

    @classmethod
    def from_csr(cls, matrix: csr_matrix) -> "SparseIntMatrix":
        matrix = csr_matrix(matrix, dtype=np.int64)
        matrix.sum_duplicates()
        matrix.eliminate_zeros()
        coo = matrix.tocoo()
        n_rows, n_cols = matrix.shape
        return cls(
            n_rows,
            n_cols,
            coo.row.astype(np.int64),
            coo.col.astype(np.int64),
            coo.data.astype(np.int64),
        )

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "SparseIntMatrix":
        empty = np.zeros(0, dtype=np.int64)
        return cls(n_rows, n_cols, empty, empty.copy(), empty.copy())

    @classmethod
    def _assemble(cls, n_rows, n_cols, rows, cols, values) -> "SparseIntMatrix":
        if n_rows < 0 or n_cols < 0:
            raise ParameterError(f"Negative shape {n_rows}x{n_cols}")
        if not values:
            return cls.zeros(n_rows, n_cols)
        try:
            coo = coo_matrix(
                (np.asarray(values, dtype=np.int64), (np.asarray(rows), np.asarray(cols))),
                shape=(n_rows, n_cols),
            )
        except ValueError as e:
            raise ParameterError(f"Invalid entry for a {n_rows}x{n_cols} matrix: {e}") from e
        return cls.from_csr(coo.tocsr())

    @property
    def shape(self) -> tuple[int, int]:
        return self.n_rows, self.n_cols

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def max_abs(self) -> int:
        return int(np.abs(self.values).max()) if self.values.size else 0

    def triplets(self) -> list[tuple[int, int, int]]:
        return list(zip(self.row_idx.tolist(), self.col_idx.tolist(), self.values.tolist()))

    def to_csr(self) -> csr_matrix:
        return csr_matrix(
            (self.values, (self.row_idx, self.col_idx)),
            shape=self.shape,
            dtype=np.int64,
        )

    def row_dicts(self) -> list[dict[int, int]]:
        """Rows as {col: value} dicts (empty rows included)."""
        rows: list[dict[int, int]] = [{} for _ in range(self.n_rows)]
        for r, c, v in zip(self.row_idx.tolist(), self.col_idx.tolist(), self.values.tolist()):
            rows[r][c] = v
        return rows

    def stack(self, other: "SparseIntMatrix") -> "SparseIntMatrix":
        """Rows of self followed by rows of other."""
        if self.n_cols != other.n_cols:
            raise ParameterError(f"Column mismatch: {self.n_cols} vs {other.n_cols}")
        return SparseIntMatrix.from_csr(vstack([self.to_csr(), other.to_csr()], format="csr"))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseIntMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row_idx, other.row_idx)
            and np.array_equal(self.col_idx, other.col_idx)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"SparseIntMatrix({self.n_rows}x{self.n_cols}, nnz={self.nnz})"


# ============ Rank modulo a prime ============


@dataclass(frozen=True)
class RankResult:
    """Rank over the rationals as certified by several primes."""

    rank: int
    primes: tuple[int, ...]
    per_prime: dict[int, int]
    consensus: bool
    elapsed_seconds: float
    pivot_stats: dict[str, int] = field(default_factory=dict)

    def require_consensus(self, context: str = "") -> int:
        """
        Return the rank, or raise if the primes disagree.

        Raises:
            InconclusiveRankError: Carrying the per-prime ranks
        """
        if not self.consensus:
            where = f" for {context}" if context else ""
            raise InconclusiveRankError(f"Ranks disagree across primes{where}: {self.per_prime}", self.per_prime)
        return self.rank


def check_prime(p: int) -> None:
    """
    Raises:
        ParameterError: If p is not a prime integer
    """
    if isinstance(p, bool) or not isinstance(p, (int, np.integer)) or not isprime(int(p)):
        raise ParameterError(f"{p!r} is not a prime")


def _eliminate(m: SparseIntMatrix, p: int) -> tuple[int, dict[str, int]]:
    """Sparse elimination mod p; returns (rank, pivot statistics)."""
    rows = []
    for row in m.row_dicts():
        reduced = {c: v % p for c, v in row.items() if v % p}
        if reduced:
            rows.append(reduced)
    col_count: Counter[int] = Counter()
    for row in rows:
        col_count.update(row.keys())
    rows.sort(key=lambda r: (len(r), min(r)))

    pivots: dict[int, dict[int, int]] = {}
    order: dict[int, int] = {}
    eliminations = 0
    for row in rows:
        # a pivot row only holds columns that became pivots after it did,
        # so popping pivots by creation order terminates
        heap = [(order[c], c) for c in row if c in pivots]
        heapq.heapify(heap)
        while heap:
            _, c = heapq.heappop(heap)
            factor = row.get(c)
            if not factor:
                continue
            eliminations += 1
            for cc, v in pivots[c].items():
                new = (row.get(cc, 0) - factor * v) % p
                if new:
                    if cc not in row and cc in pivots:
                        heapq.heappush(heap, (order[cc], cc))
                    row[cc] = new
                else:
                    row.pop(cc, None)
        if not row:
            continue
        col = min(row, key=lambda c: (col_count[c], c))
        inv = pow(row[col], -1, p)
        pivots[col] = {c: v * inv % p for c, v in row.items()}
        order[col] = len(order)

    stats = {
        "rows": len(rows),
        "eliminations": eliminations,
        "pivot_entries": sum(len(r) for r in pivots.values()),
        "max_pivot_row": max((len(r) for r in pivots.values()), default=0),
    }
    return len(pivots), stats


def rank_mod_p(m: SparseIntMatrix, p: int) -> int:
    """
    Rank of m over the field with p elements.

    Raises:
        ParameterError: If p is not prime, or not above every coefficient magnitude
    """
    check_prime(p)
    if m.max_abs() >= p:
        raise ParameterError(f"Coefficient magnitude {m.max_abs()} is not below p={p}")
    rank, stats = _eliminate(m, p)
    logger.debug(f"rank mod {p} of {m!r} = {rank} ({stats})")
    return rank


def rank_consensus(m: SparseIntMatrix, primes: Sequence[int]) -> RankResult:
    """
    Rank of m modulo each prime, with agreement check.

    Args:
        m: Matrix to rank
        primes: At least two distinct primes

    Returns:
        RankResult whose rank is the largest per-prime rank

    Raises:
        ParameterError: Fewer than two distinct primes, or a non-prime
    """
    distinct = tuple(dict.fromkeys(int(p) for p in primes))
    if len(distinct) < 2:
        raise ParameterError(f"Rank consensus needs at least two distinct primes, got {list(primes)}")
    for p in distinct:
        check_prime(p)

    started = time.perf_counter()
    per_prime: dict[int, int] = {}
    stats: dict[str, int] = {}
    for p in distinct:
        if m.max_abs() >= p:
            logger.warning(f"Coefficient magnitude {m.max_abs()} is not below p={p}")
        per_prime[p], stats = _eliminate(m, p)
    elapsed = time.perf_counter() - started

    consensus = len(set(per_prime.values())) == 1
    if not consensus:
        logger.warning(f"Prime disagreement on {m!r}: {per_prime}")
    return RankResult(
        rank=max(per_prime.values()),
        primes=distinct,
        per_prime=per_prime,
        consensus=consensus,
        elapsed_seconds=elapsed,
        pivot_stats=stats,
    )


# ============ Dense rational oracle ============


def rank_rational(m: SparseIntMatrix) -> int:
    """Rank over the rationals by dense fraction-exact elimination (small matrices only)."""
    matrix = [[Fraction(0)] * m.n_cols for _ in range(m.n_rows)]
    for r, c, v in m.triplets():
        matrix[r][c] = Fraction(v)

    rank = 0
    for col in range(m.n_cols):
        pivot = next((i for i in range(rank, m.n_rows) if matrix[i][col] != 0), None)
        if pivot is None:
            continue
        matrix[rank], matrix[pivot] = matrix[pivot], matrix[rank]
        lead = matrix[rank][col]
        for i in range(rank + 1, m.n_rows):
            if matrix[i][col] != 0:
                f = matrix[i][col] / lead
                matrix[i] = [a - f * b for a, b in zip(matrix[i], matrix[rank])]
        rank += 1
        if rank == m.n_rows:
            break
    return rank
