from dataclasses import dataclass
from typing import Iterable, Set, Tuple

import numpy as np
from scipy import sparse

from app.core.errors import data_error

ENTRY_TOLERANCE = 1e-9
SUM_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class BiAdjacency:
    """Sparse binary n1 x n2 relationship matrix.

    Edges are kept as two parallel index arrays sorted by (row, col) with no
    duplicates, so ``m`` is always the number of distinct pairs.
    """

    n1: int
    n2: int
    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self) -> None:
        n1, n2 = int(self.n1), int(self.n2)
        if n1 < 0 or n2 < 0:
            data_error("INVALID_DIMENSIONS", "Adjacency dimensions must be >= 0")
        rows = np.asarray(self.rows, dtype=np.int64).ravel()
        cols = np.asarray(self.cols, dtype=np.int64).ravel()
        if rows.shape != cols.shape:
            data_error("EDGE_ARRAY_MISMATCH", "rows and cols must have equal length")
        if rows.size and (
            rows.min() < 0 or cols.min() < 0 or rows.max() >= n1 or cols.max() >= n2
        ):
            data_error(
                "EDGE_OUT_OF_RANGE",
                "Edge index outside the adjacency dimensions",
                {"n1": n1, "n2": n2},
            )
        keys = rows * n2 + cols
        unique = np.unique(keys)
        if unique.size != keys.size:
            data_error(
                "DUPLICATE_EDGE",
                "Each pair of records may have at most one relationship",
                {"duplicates": int(keys.size - unique.size)},
            )
        if n2:
            rows, cols = unique // n2, unique % n2
        else:
            rows, cols = rows.copy(), cols.copy()
        for arr in (rows, cols):
            arr.setflags(write=False)
        object.__setattr__(self, "n1", n1)
        object.__setattr__(self, "n2", n2)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def empty(cls, n1: int, n2: int) -> "BiAdjacency":
        return cls(n1, n2, np.empty(0, np.int64), np.empty(0, np.int64))

    @classmethod
    def from_pairs(
        cls, n1: int, n2: int, pairs: Iterable[Tuple[int, int]]
    ) -> "BiAdjacency":
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(n1, n2, arr[:, 0], arr[:, 1])

    @classmethod
    def from_dense(cls, matrix: np.ndarray) -> "BiAdjacency":
        matrix = np.asarray(matrix)
        if matrix.ndim != 2:
            data_error("INVALID_DIMENSIONS", "Dense adjacency must be 2-D")
        rows, cols = np.nonzero(matrix)
        return cls(matrix.shape[0], matrix.shape[1], rows, cols)

    @property
    def m(self) -> int:
        return int(self.rows.size)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def edges(self) -> Set[Tuple[int, int]]:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def linear_index(self) -> np.ndarray:
        return self.rows * self.n2 + self.cols

    def to_csr(self) -> sparse.csr_matrix:
        data = np.ones(self.m, dtype=np.float64)
        return sparse.csr_matrix((data, (self.rows, self.cols)), shape=self.shape)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros(self.shape, dtype=np.float64)
        dense[self.rows, self.cols] = 1.0
        return dense

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BiAdjacency):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.cols, other.cols)
        )

    def __hash__(self) -> int:
        return hash((self.shape, self.linear_index().tobytes()))


@dataclass(frozen=True, eq=False)
class WeightedBiAdjacency:
    """Dense relaxation of a slice: entries in [0, 1] summing to ``target_sum``."""

    values: np.ndarray
    target_sum: float

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            data_error("INVALID_DIMENSIONS", "Weighted adjacency must be 2-D")
        target = float(self.target_sum)
        if target < 0:
            data_error("NEGATIVE_TARGET_SUM", "target_sum must be non-negative")
        if values.size and (
            values.min() < -ENTRY_TOLERANCE or values.max() > 1 + ENTRY_TOLERANCE
        ):
            data_error(
                "ENTRY_OUT_OF_BOX",
                "Weighted adjacency entries must lie in [0, 1]",
                {"min": float(values.min()), "max": float(values.max())},
            )
        total = float(values.sum())
        if abs(total - target) > SUM_TOLERANCE:
            data_error(
                "TARGET_SUM_MISMATCH",
                "Weighted adjacency does not sum to its target",
                {"sum": total, "target_sum": target},
            )
        values = np.clip(values, 0.0, 1.0)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "target_sum", target)

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.values.shape[0]), int(self.values.shape[1]))


@dataclass(frozen=True, eq=False)
class SliceSelector:
    """Sorted, unique row indices into table1 and column indices into table2."""

    rows: np.ndarray
    cols: np.ndarray

    def __post_init__(self) -> None:
        normalized = []
        for name in ("rows", "cols"):
            arr = np.array(getattr(self, name), dtype=np.int64).ravel()
            if arr.size and arr.min() < 0:
                data_error("SELECTOR_OUT_OF_RANGE", f"Negative {name} index")
            if arr.size > 1 and np.any(np.diff(arr) <= 0):
                data_error(
                    "SELECTOR_NOT_SORTED",
                    f"Selector {name} must be sorted and unique",
                )
            arr.setflags(write=False)
            normalized.append(arr)
        object.__setattr__(self, "rows", normalized[0])
        object.__setattr__(self, "cols", normalized[1])

    @classmethod
    def of(cls, rows: Iterable[int], cols: Iterable[int]) -> "SliceSelector":
        return cls(
            np.unique(np.fromiter(rows, dtype=np.int64)),
            np.unique(np.fromiter(cols, dtype=np.int64)),
        )

    @classmethod
    def full(cls, n1: int, n2: int) -> "SliceSelector":
        return cls(np.arange(n1, dtype=np.int64), np.arange(n2, dtype=np.int64))

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.rows.size), int(self.cols.size))

    def check_bounds(self, n1: int, n2: int) -> None:
        if (self.rows.size and self.rows[-1] >= n1) or (
            self.cols.size and self.cols[-1] >= n2
        ):
            data_error(
                "SELECTOR_OUT_OF_RANGE",
                "Slice selector index outside the matrix",
                {"n1": n1, "n2": n2},
            )
