from dataclasses import dataclass, field
from functools import cached_property
import itertools
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from app.core.errors import data_error
from app.enums.relationship_enums import WorkloadKind
from app.models.adjacency import SliceSelector
from app.models.table import Schema


@dataclass(frozen=True, order=True)
class Workload:
    """Feature subsets S1 of table1 and S2 of table2 whose joint marginal is tracked."""

    side1: Tuple[int, ...]
    side2: Tuple[int, ...]
    kind: WorkloadKind = WorkloadKind.CROSS

    def __post_init__(self) -> None:
        side1 = tuple(int(i) for i in self.side1)
        side2 = tuple(int(i) for i in self.side2)
        kind = WorkloadKind(self.kind)
        for side in (side1, side2):
            if list(side) != sorted(set(side)) or any(i < 0 for i in side):
                data_error(
                    "INVALID_WORKLOAD",
                    "Workload feature indices must be sorted, unique, non-negative",
                    {"side1": list(side1), "side2": list(side2)},
                )
        valid = {
            WorkloadKind.CROSS: bool(side1) and bool(side2),
            WorkloadKind.SINGLE_TABLE_1: bool(side1) and not side2,
            WorkloadKind.SINGLE_TABLE_2: bool(side2) and not side1,
        }[kind]
        if not valid:
            data_error(
                "INVALID_WORKLOAD",
                f"Feature subsets do not fit a {kind} workload",
                {"side1": list(side1), "side2": list(side2)},
            )
        object.__setattr__(self, "side1", side1)
        object.__setattr__(self, "side2", side2)
        object.__setattr__(self, "kind", kind)

    @property
    def k(self) -> int:
        return len(self.side1) + len(self.side2)

    def label(self, schema1: Schema, schema2: Schema) -> str:
        left = ",".join(f"t1.{schema1.features[i].name}" for i in self.side1)
        right = ",".join(f"t2.{schema2.features[j].name}" for j in self.side2)
        return "|".join(part for part in (left, right) if part)

    def cell_shape(self, schema1: Schema, schema2: Schema) -> Tuple[int, int]:
        """Number of side-1 cells and side-2 cells."""
        c1 = int(np.prod([schema1.cardinalities[i] for i in self.side1], dtype=np.int64))
        c2 = int(np.prod([schema2.cardinalities[j] for j in self.side2], dtype=np.int64))
        return c1, c2

    def cells(self, schema1: Schema, schema2: Schema) -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        """Row-major cells: side-1 values vary slowest, features in schema order."""
        left = itertools.product(*(range(schema1.cardinalities[i]) for i in self.side1))
        right = list(
            itertools.product(*(range(schema2.cardinalities[j]) for j in self.side2))
        )
        return [(y1, y2) for y1 in left for y2 in right]


@dataclass(frozen=True, eq=False)
class MarginalVector:
    workload: Workload
    probs: np.ndarray
    cells: Tuple[Tuple[Tuple[int, ...], Tuple[int, ...]], ...] = field(default=())

    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64).ravel()
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cells", tuple(self.cells))
        if self.cells and len(self.cells) != probs.size:
            data_error(
                "CELL_COUNT_MISMATCH",
                "Marginal vector length must equal its cell count",
                {"cells": len(self.cells), "probs": int(probs.size)},
            )

    def __len__(self) -> int:
        return int(self.probs.size)

    def is_distribution(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.probs >= -tol) and abs(self.probs.sum() - 1.0) <= tol)


@dataclass(frozen=True, eq=False)
class QueryBlock:
    """A batch of rank-1 queries sharing two factor matrices.

    Query (s, t) of the block has indicator vectors ``u = U[:, s]`` over
    table1 rows and ``v = V[:, t]`` over table2 rows; its value on B is
    ``u^T B v``. Queries are numbered row-major over (s, t).
    """

    u: sparse.csr_matrix
    v: sparse.csr_matrix
    workload: Optional[Workload] = None

    def __post_init__(self) -> None:
        u = sparse.csr_matrix(self.u, dtype=np.float64)
        v = sparse.csr_matrix(self.v, dtype=np.float64)
        for name, factor in (("u", u), ("v", v)):
            if factor.nnz and not np.all(factor.data == 1.0):
                data_error(
                    "NON_BINARY_INDICATOR",
                    f"Query indicator factor '{name}' must be binary",
                )
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def cell_shape(self) -> Tuple[int, int]:
        return (int(self.u.shape[1]), int(self.v.shape[1]))

    @property
    def size(self) -> int:
        a, b = self.cell_shape
        return a * b

    def restrict(self, selector: SliceSelector) -> "QueryBlock":
        return QueryBlock(self.u[selector.rows], self.v[selector.cols], self.workload)


@dataclass(frozen=True, eq=False)
class QueryMatrix:
    """Stacked rank-1 queries over an r1 x r2 matrix, grouped in blocks.

    The length-(r1*r2) query vectors are never materialised outside of
    ``to_dense``, which exists for small oracles.
    """

    blocks: Tuple[QueryBlock, ...]
    shape: Tuple[int, int]

    def __post_init__(self) -> None:
        blocks = tuple(self.blocks)
        r1, r2 = (int(s) for s in self.shape)
        for block in blocks:
            if block.u.shape[0] != r1 or block.v.shape[0] != r2:
                data_error(
                    "QUERY_SHAPE_MISMATCH",
                    "Query factors do not match the matrix dimensions",
                    {"shape": [r1, r2]},
                )
        object.__setattr__(self, "blocks", blocks)
        object.__setattr__(self, "shape", (r1, r2))

    @classmethod
    def from_pairs(
        cls, u_list: Sequence[np.ndarray], v_list: Sequence[np.ndarray]
    ) -> "QueryMatrix":
        """One block per (u, v) pair of binary indicator vectors."""
        if len(u_list) != len(v_list) or not len(u_list):
            data_error("QUERY_SHAPE_MISMATCH", "Need matching, non-empty u and v lists")
        r1, r2 = len(u_list[0]), len(v_list[0])
        blocks = tuple(
            QueryBlock(
                sparse.csr_matrix(np.asarray(u, dtype=np.float64).reshape(r1, 1)),
                sparse.csr_matrix(np.asarray(v, dtype=np.float64).reshape(r2, 1)),
            )
            for u, v in zip(u_list, v_list)
        )
        return cls(blocks, (r1, r2))

    @cached_property
    def offsets(self) -> np.ndarray:
        sizes = [block.size for block in self.blocks]
        return np.concatenate([[0], np.cumsum(sizes, dtype=np.int64)]).astype(np.int64)

    @property
    def n_queries(self) -> int:
        return int(self.offsets[-1])

    def __len__(self) -> int:
        return self.n_queries

    def restrict(self, selector: SliceSelector) -> "QueryMatrix":
        selector.check_bounds(*self.shape)
        return QueryMatrix(
            tuple(block.restrict(selector) for block in self.blocks), selector.shape
        )

    def indicator_pairs(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        for block in self.blocks:
            u_dense = block.u.toarray()
            v_dense = block.v.toarray()
            for s in range(u_dense.shape[1]):
                for t in range(v_dense.shape[1]):
                    yield u_dense[:, s], v_dense[:, t]

    def to_dense(self) -> np.ndarray:
        """Q-hat with one row vec(u v^T) per query (row-major vec)."""
        rows = [np.outer(u, v).ravel() for u, v in self.indicator_pairs()]
        if not rows:
            return np.zeros((0, self.shape[0] * self.shape[1]))
        return np.vstack(rows)
