from itertools import combinations
from typing import Iterable, List, Sequence, Union

import numpy as np
from scipy import sparse

from app.core.errors import data_error
from app.enums.relationship_enums import WorkloadKind
from app.models.adjacency import BiAdjacency, WeightedBiAdjacency
from app.models.database import RelationalDatabase
from app.models.marginal import MarginalVector, QueryBlock, QueryMatrix, Workload
from app.models.table import Schema, Table

MatrixLike = Union[np.ndarray, WeightedBiAdjacency, BiAdjacency]


def enumerate_cross_workloads(schema1: Schema, schema2: Schema, k: int) -> List[Workload]:
    """All (S1, S2) with both sides non-empty and |S1| + |S2| = k."""
    if k < 2:
        data_error("INVALID_MARGINAL_ORDER", "Cross-table workloads need k >= 2")
    if not len(schema1) or not len(schema2):
        data_error("EMPTY_SCHEMA", "Both schemas need at least one feature")
    d1, d2 = len(schema1), len(schema2)
    workloads = [
        Workload(side1, side2)
        for s in range(1, k)
        if s <= d1 and k - s <= d2
        for side1 in combinations(range(d1), s)
        for side2 in combinations(range(d2), k - s)
    ]
    return sorted(workloads)


def enumerate_single_workloads(schema: Schema, k: int, side: int = 1) -> List[Workload]:
    if k < 1:
        data_error("INVALID_MARGINAL_ORDER", "Single-table workloads need k >= 1")
    subsets = combinations(range(len(schema)), k)
    if side == 1:
        return [Workload(s, (), WorkloadKind.SINGLE_TABLE_1) for s in subsets]
    return [Workload((), s, WorkloadKind.SINGLE_TABLE_2) for s in subsets]


def cell_codes(table: Table, features: Sequence[int]) -> np.ndarray:
    """Row-major cell index of each row over the given features."""
    codes = np.zeros(table.n_rows, dtype=np.int64)
    for f in features:
        codes = codes * table.schema.cardinalities[f] + table.codes[:, f]
    return codes


def _marginal(workload: Workload, schema1: Schema, schema2: Schema, probs) -> MarginalVector:
    return MarginalVector(workload, probs, tuple(workload.cells(schema1, schema2)))


def compute_cross_marginal(db: RelationalDatabase, workload: Workload) -> MarginalVector:
    """Distribution of related pairs over the workload's cells, normalised by m."""
    if workload.kind != WorkloadKind.CROSS:
        data_error("INVALID_WORKLOAD", "compute_cross_marginal needs a cross workload")
    adjacency = db.adjacency
    if adjacency.m == 0:
        data_error("NO_RELATIONSHIPS", "Cross-table marginals need at least one edge")
    schema1, schema2 = db.table1.schema, db.table2.schema
    c1, c2 = workload.cell_shape(schema1, schema2)
    left = cell_codes(db.table1, workload.side1)[adjacency.rows]
    right = cell_codes(db.table2, workload.side2)[adjacency.cols]
    counts = np.bincount(left * c2 + right, minlength=c1 * c2)
    return _marginal(workload, schema1, schema2, counts / adjacency.m)


def compute_single_marginal(table: Table, workload: Workload) -> MarginalVector:
    if workload.kind == WorkloadKind.CROSS:
        data_error("INVALID_WORKLOAD", "compute_single_marginal needs a single-table workload")
    if table.n_rows == 0:
        data_error("EMPTY_TABLE", "Marginals of an empty table are undefined")
    features = workload.side1 or workload.side2
    size = int(np.prod([table.schema.cardinalities[f] for f in features]))
    counts = np.bincount(cell_codes(table, features), minlength=size)
    empty = Schema(())
    if workload.kind == WorkloadKind.SINGLE_TABLE_1:
        return _marginal(workload, table.schema, empty, counts / table.n_rows)
    return _marginal(workload, empty, table.schema, counts / table.n_rows)


def _one_hot(codes: np.ndarray, n_cells: int) -> sparse.csr_matrix:
    n = codes.size
    return sparse.csr_matrix(
        (np.ones(n), (np.arange(n), codes)), shape=(n, n_cells), dtype=np.float64
    )


def build_query_matrix(
    table1: Table, table2: Table, workloads: Iterable[Workload]
) -> QueryMatrix:
    """Rank-1 factorisation of every cell query of the given cross workloads."""
    blocks = []
    for workload in workloads:
        c1, c2 = workload.cell_shape(table1.schema, table2.schema)
        u = _one_hot(cell_codes(table1, workload.side1), c1)
        v = _one_hot(cell_codes(table2, workload.side2), c2)
        blocks.append(QueryBlock(u, v, workload))
    return QueryMatrix(tuple(blocks), (table1.n_rows, table2.n_rows))


def apply_Q(Q: QueryMatrix, matrix: MatrixLike) -> np.ndarray:
    """Q-hat times vec(B), without normalisation."""
    if isinstance(matrix, BiAdjacency):
        values = matrix.to_csr()
    elif isinstance(matrix, WeightedBiAdjacency):
        values = matrix.values
    else:
        values = np.asarray(matrix, dtype=np.float64)
    if tuple(values.shape) != Q.shape:
        data_error(
            "QUERY_SHAPE_MISMATCH",
            "Matrix dimensions do not match the query set",
            {"matrix": list(values.shape), "queries": list(Q.shape)},
        )
    out = np.empty(Q.n_queries, dtype=np.float64)
    for block, start in zip(Q.blocks, Q.offsets[:-1]):
        left = block.u.T @ values
        if sparse.issparse(left):
            cells = (left @ block.v).toarray()
        else:
            cells = (block.v.T @ np.asarray(left).T).T
        out[start : start + block.size] = np.asarray(cells).ravel()
    return out


def apply_Qt(Q: QueryMatrix, r: np.ndarray) -> np.ndarray:
    """Q-hat^T r reshaped to the matrix shape, as a sum of r_q * u_q v_q^T."""
    r = np.asarray(r, dtype=np.float64).ravel()
    if r.size != Q.n_queries:
        data_error(
            "QUERY_SHAPE_MISMATCH",
            "Residual length must equal the number of queries",
            {"residual": int(r.size), "queries": Q.n_queries},
        )
    out = np.zeros(Q.shape, dtype=np.float64)
    for block, start in zip(Q.blocks, Q.offsets[:-1]):
        weights = r[start : start + block.size].reshape(block.cell_shape)
        partial = block.u @ weights
        out += (block.v @ np.asarray(partial).T).T
    return out


def query_values_weighted(Q: QueryMatrix, weighted: WeightedBiAdjacency) -> np.ndarray:
    if weighted.target_sum == 0:
        data_error("ZERO_TARGET_SUM", "Query values need a positive target_sum")
    return apply_Q(Q, weighted.values) / weighted.target_sum


def tv_score(p: MarginalVector, q: MarginalVector) -> float:
    if p.workload != q.workload or len(p) != len(q):
        data_error(
            "WORKLOAD_MISMATCH",
            "Total variation needs marginals of the same workload",
        )
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def workload_mse(
    answers_syn: np.ndarray, answers_real: np.ndarray, n_workloads: int
) -> float:
    answers_syn = np.asarray(answers_syn, dtype=np.float64).ravel()
    answers_real = np.asarray(answers_real, dtype=np.float64).ravel()
    if answers_syn.shape != answers_real.shape:
        data_error(
            "LENGTH_MISMATCH",
            "Answer vectors must have equal length",
            {"syn": int(answers_syn.size), "real": int(answers_real.size)},
        )
    if n_workloads < 1:
        data_error("INVALID_WORKLOAD_COUNT", "n_workloads must be >= 1")
    diff = answers_syn - answers_real
    return float(diff @ diff) / n_workloads
