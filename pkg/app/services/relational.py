from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from app.core.errors import data_error
from app.core.logs.logging_utils import get_logger
from app.enums.relationship_enums import RelationshipKind
from app.models.adjacency import BiAdjacency, SliceSelector, WeightedBiAdjacency
from app.models.database import RelationalDatabase

logger = get_logger("app.relational")


@dataclass
class IntegrityReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def degrees(adjacency: BiAdjacency) -> Tuple[np.ndarray, np.ndarray]:
    """Edge counts per table1 row and per table2 row."""
    row_deg = np.bincount(adjacency.rows, minlength=adjacency.n1)
    col_deg = np.bincount(adjacency.cols, minlength=adjacency.n2)
    return row_deg, col_deg


def max_degree(db: Union[RelationalDatabase, BiAdjacency]) -> int:
    adjacency = db.adjacency if isinstance(db, RelationalDatabase) else db
    if adjacency.m == 0:
        return 0
    row_deg, col_deg = degrees(adjacency)
    return int(max(row_deg.max(initial=0), col_deg.max(initial=0)))


def slice_matrix(
    matrix: Union[BiAdjacency, WeightedBiAdjacency, np.ndarray],
    selector: SliceSelector,
) -> np.ndarray:
    """Dense |rows| x |cols| sub-matrix; entry (i, j) is M[rows[i], cols[j]]."""
    if isinstance(matrix, BiAdjacency):
        selector.check_bounds(*matrix.shape)
        return matrix.to_csr()[selector.rows][:, selector.cols].toarray()
    values = matrix.values if isinstance(matrix, WeightedBiAdjacency) else matrix
    values = np.asarray(values)
    selector.check_bounds(*values.shape)
    return values[np.ix_(selector.rows, selector.cols)]


def slice_edge_count(adjacency: BiAdjacency, selector: SliceSelector) -> int:
    selector.check_bounds(*adjacency.shape)
    in_rows = np.isin(adjacency.rows, selector.rows)
    in_cols = np.isin(adjacency.cols, selector.cols)
    return int(np.count_nonzero(in_rows & in_cols))


def reinsert(
    adjacency: BiAdjacency, selector: SliceSelector, patch: np.ndarray
) -> BiAdjacency:
    """Replace the selected block of the adjacency with a binary patch."""
    patch = np.asarray(patch)
    if patch.shape != selector.shape:
        data_error(
            "PATCH_SHAPE_MISMATCH",
            "Patch dimensions must match the slice selector",
            {"patch": list(patch.shape), "selector": list(selector.shape)},
        )
    if patch.size and not np.all((patch == 0) | (patch == 1)):
        data_error("NON_BINARY_PATCH", "Patch entries must be 0 or 1")
    selector.check_bounds(*adjacency.shape)

    inside = np.isin(adjacency.rows, selector.rows) & np.isin(
        adjacency.cols, selector.cols
    )
    pi, pj = np.nonzero(patch)
    rows = np.concatenate([adjacency.rows[~inside], selector.rows[pi]])
    cols = np.concatenate([adjacency.cols[~inside], selector.cols[pj]])
    return BiAdjacency(adjacency.n1, adjacency.n2, rows, cols)


def validate_integrity(db: RelationalDatabase) -> IntegrityReport:
    report = IntegrityReport()
    adjacency = db.adjacency

    if db.kind == RelationshipKind.ONE_TO_MANY:
        row_deg, _ = degrees(adjacency)
        orphans = np.flatnonzero(row_deg == 0)
        multi = np.flatnonzero(row_deg > 1)
        if orphans.size:
            report.violations.append(
                f"orphaned child row ({orphans.size} rows, first {int(orphans[0])})"
            )
        if multi.size:
            report.violations.append(
                f"child row with more than one parent ({multi.size} rows, "
                f"first {int(multi[0])})"
            )

    if not report.ok:
        logger.warning(
            "Referential integrity violated",
            extra={"kind": str(db.kind), "violations": report.violations},
        )
    return report
