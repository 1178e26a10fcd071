from dataclasses import dataclass

from app.core.errors import data_error
from app.enums.relationship_enums import RelationshipKind
from app.models.adjacency import BiAdjacency
from app.models.table import Table


@dataclass(frozen=True, eq=False)
class RelationalDatabase:
    """Two tables plus the bi-adjacency linking them.

    For one-to-many databases table1 holds the child rows. Degree rules are
    checked by ``validate_integrity`` rather than here so that violations can
    be reported instead of raised.
    """

    table1: Table
    table2: Table
    adjacency: BiAdjacency
    kind: RelationshipKind = RelationshipKind.MANY_TO_MANY

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", RelationshipKind(self.kind))
        if self.adjacency.shape != (self.table1.n_rows, self.table2.n_rows):
            data_error(
                "ADJACENCY_SHAPE_MISMATCH",
                "Adjacency dimensions must match table row counts",
                {
                    "adjacency": list(self.adjacency.shape),
                    "tables": [self.table1.n_rows, self.table2.n_rows],
                },
            )

    @property
    def m(self) -> int:
        return self.adjacency.m

    def with_adjacency(self, adjacency: BiAdjacency) -> "RelationalDatabase":
        return RelationalDatabase(self.table1, self.table2, adjacency, self.kind)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RelationalDatabase):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.table1 == other.table1
            and self.table2 == other.table2
            and self.adjacency == other.adjacency
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.table1, self.table2, self.adjacency))
