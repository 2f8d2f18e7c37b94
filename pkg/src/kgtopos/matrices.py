"""Exact integer incidence and line-operator algebra.

All structural identities are computed over the integers; floating point
only enters through the numeric eigensolver used as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import SymmetryError
from .kg import KnowledgeGraph


@dataclass(frozen=True)
class IntMatrix:
    """Dense exact-integer matrix, row-major."""

    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative dimension")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        n = len(rows)
        m = len(rows[0]) if n else 0
        if any(len(r) != m for r in rows):
            raise ValueError("ragged rows")
        return cls(n, m, tuple(int(x) for row in rows for x in row))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, (0,) * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    def get(self, i: int, j: int) -> int:
        return self.entries[i * self.cols + j]

    def to_rows(self) -> list[list[int]]:
        return [
            list(self.entries[i * self.cols : (i + 1) * self.cols])
            for i in range(self.rows)
        ]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(
            self.cols,
            self.rows,
            tuple(self.get(i, j) for j in range(self.cols) for i in range(self.rows)),
        )

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        rows = self.to_rows()
        cols = other.transpose().to_rows()
        return IntMatrix(
            self.rows,
            other.cols,
            tuple(
                sum(a * b for a, b in zip(r, c)) for r in rows for c in cols
            ),
        )

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("dimension mismatch in matrix difference")
        return IntMatrix(
            self.rows,
            self.cols,
            tuple(a - b for a, b in zip(self.entries, other.entries)),
        )

    def is_symmetric(self) -> bool:
        return self.rows == self.cols and self == self.transpose()

    def to_csv(self) -> str:
        """One row per line, comma-separated integers, trailing newline."""
        return "".join(
            ",".join(str(x) for x in row) + "\n" for row in self.to_rows()
        )


def head_incidence(kg: KnowledgeGraph) -> IntMatrix:
    """n x m matrix with entry (i, j) = 1 iff entity i heads triple j."""
    idx = kg.entity_index
    n, m = kg.entity_count, kg.triple_count
    entries = [0] * (n * m)
    for j, t in enumerate(kg.triples):
        entries[idx[t.head] * m + j] = 1
    return IntMatrix(n, m, tuple(entries))


def tail_incidence(kg: KnowledgeGraph) -> IntMatrix:
    """n x m matrix with entry (i, j) = 1 iff entity i is the tail of triple j."""
    idx = kg.entity_index
    n, m = kg.entity_count, kg.triple_count
    entries = [0] * (n * m)
    for j, t in enumerate(kg.triples):
        entries[idx[t.tail] * m + j] = 1
    return IntMatrix(n, m, tuple(entries))


def gram_out(kg: KnowledgeGraph) -> IntMatrix:
    """m x m shared-head indicator: entry (i, j) = 1 iff heads coincide."""
    h = head_incidence(kg)
    return h.transpose() @ h


def gram_in(kg: KnowledgeGraph) -> IntMatrix:
    """m x m shared-tail indicator: entry (i, j) = 1 iff tails coincide."""
    h = tail_incidence(kg)
    return h.transpose() @ h


def line_adjacency_out(kg: KnowledgeGraph) -> IntMatrix:
    """Adjacency matrix of the out-line digraph: shared-head minus diagonal."""
    m = kg.triple_count
    return gram_out(kg) - IntMatrix.identity(m)


def line_adjacency_in(kg: KnowledgeGraph) -> IntMatrix:
    """Adjacency matrix of the in-line digraph: shared-tail minus diagonal."""
    m = kg.triple_count
    return gram_in(kg) - IntMatrix.identity(m)


def rank_exact(matrix: IntMatrix) -> int:
    """Rank over the rationals by fraction-free (Bareiss) elimination."""
    rows = matrix.to_rows()
    n_rows, n_cols = matrix.rows, matrix.cols
    rank = 0
    prev_pivot = 1
    for col in range(n_cols):
        pivot_row = next(
            (i for i in range(rank, n_rows) if rows[i][col] != 0), None
        )
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        pivot = rows[rank][col]
        for i in range(rank + 1, n_rows):
            factor = rows[i][col]
            for j in range(col, n_cols):
                # Bareiss update: division by the previous pivot is exact.
                rows[i][j] = (pivot * rows[i][j] - factor * rows[rank][j]) // prev_pivot
        prev_pivot = pivot
        rank += 1
        if rank == n_rows:
            break
    return rank


def head_fibre_sizes(kg: KnowledgeGraph) -> dict[str, int]:
    """Number of triples headed by each entity (zero entries omitted)."""
    sizes: dict[str, int] = {}
    for t in kg.triples:
        sizes[t.head] = sizes.get(t.head, 0) + 1
    return sizes


def tail_fibre_sizes(kg: KnowledgeGraph) -> dict[str, int]:
    sizes: dict[str, int] = {}
    for t in kg.triples:
        sizes[t.tail] = sizes.get(t.tail, 0) + 1
    return sizes


def spectrum_formula(kg: KnowledgeGraph, *, use_tails: bool = False) -> list[int]:
    """Exact eigenvalue multiset of the line adjacency matrix, sorted.

    The out-line digraph is a disjoint union of complete digraphs, one per
    head fibre of size k, contributing k-1 once and -1 with multiplicity
    k-1.  Total multiplicity is the triple count.  With use_tails=True the
    same computation runs on tail fibres for the in-line digraph.
    """
    sizes = tail_fibre_sizes(kg) if use_tails else head_fibre_sizes(kg)
    m = kg.triple_count
    values = [k - 1 for k in sizes.values()]
    values.extend([-1] * (m - len(sizes)))
    return sorted(values)


@dataclass(frozen=True)
class SpectrumReport:
    """Exact formula eigenvalues vs numerically computed ones."""

    exact_eigenvalues: tuple[int, ...]
    numeric_eigenvalues: tuple[float, ...]
    max_deviation: float


def spectrum_numeric(matrix: IntMatrix, exact: Iterable[int]) -> SpectrumReport:
    """Dense symmetric eigensolve of `matrix`, matched against `exact`.

    The deviation is the elementwise distance between the two sorted
    multisets; raises SymmetryError for non-symmetric input.
    """
    if not matrix.is_symmetric():
        raise SymmetryError("spectrum_numeric requires a symmetric matrix")
    dense = np.array(matrix.to_rows(), dtype=float).reshape(matrix.rows, matrix.cols)
    numeric = sorted(float(x) for x in np.linalg.eigvalsh(dense))
    exact_sorted = sorted(int(x) for x in exact)
    if len(exact_sorted) != len(numeric):
        raise ValueError(
            f"multiset sizes differ: {len(exact_sorted)} exact vs {len(numeric)} numeric"
        )
    deviation = max(
        (abs(a - b) for a, b in zip(exact_sorted, numeric)), default=0.0
    )
    return SpectrumReport(tuple(exact_sorted), tuple(numeric), deviation)


def spectrum_report(kg: KnowledgeGraph, *, use_tails: bool = False) -> SpectrumReport:
    """Formula-vs-eigensolver report for the out-line (or in-line) adjacency."""
    adjacency = line_adjacency_in(kg) if use_tails else line_adjacency_out(kg)
    return spectrum_numeric(adjacency, spectrum_formula(kg, use_tails=use_tails))
