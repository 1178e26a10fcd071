from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import data_error


@dataclass(frozen=True)
class Feature:
    name: str
    cardinality: int
    # ordered category labels; code c decodes to labels[c]
    labels: Optional[Tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if int(self.cardinality) < 1:
            data_error(
                "INVALID_CARDINALITY",
                f"Feature '{self.name}' must have cardinality >= 1",
                {"feature": self.name, "cardinality": self.cardinality},
            )
        if self.labels is not None and len(self.labels) != self.cardinality:
            data_error(
                "LABEL_COUNT_MISMATCH",
                f"Feature '{self.name}' declares {self.cardinality} categories "
                f"but {len(self.labels)} labels",
            )


@dataclass(frozen=True)
class Schema:
    features: Tuple[Feature, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "features", tuple(self.features))
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            data_error(
                "DUPLICATE_FEATURE_NAME",
                "Feature names must be unique within a schema",
                {"features": names},
            )

    @classmethod
    def of(cls, pairs: Iterable[Tuple[str, int]]) -> "Schema":
        return cls(tuple(Feature(name, int(card)) for name, card in pairs))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def cardinalities(self) -> Tuple[int, ...]:
        return tuple(int(f.cardinality) for f in self.features)

    def __len__(self) -> int:
        return len(self.features)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            data_error("UNKNOWN_FEATURE", f"No feature named '{name}'")

    def compatible_with(self, other: "Schema") -> bool:
        """Same feature names and cardinalities, labels ignored."""
        return (
            self.names == other.names and self.cardinalities == other.cardinalities
        )


@dataclass(frozen=True, eq=False)
class Table:
    """Categorical records; ``codes[r, f]`` is the code of feature f in row r."""

    schema: Schema
    codes: np.ndarray

    def __post_init__(self) -> None:
        codes = np.asarray(self.codes, dtype=np.int64)
        d = len(self.schema)
        if codes.ndim == 1 and codes.size == 0:
            codes = codes.reshape(0, d)
        if codes.ndim != 2 or codes.shape[1] != d:
            data_error(
                "ROW_LENGTH_MISMATCH",
                "Every row must carry exactly one code per schema feature",
                {"expected_features": d, "shape": list(codes.shape)},
            )
        if codes.size:
            cards = np.asarray(self.schema.cardinalities, dtype=np.int64)
            bad = (codes < 0) | (codes >= cards[None, :])
            if bad.any():
                r, f = (int(v) for v in np.argwhere(bad)[0])
                data_error(
                    "CODE_OUT_OF_RANGE",
                    f"Code {codes[r, f]} out of range for feature "
                    f"'{self.schema.features[f].name}'",
                    {"row": r, "feature": self.schema.features[f].name},
                )
        codes = codes.copy()
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    @classmethod
    def from_rows(cls, schema: Schema, rows: Sequence[Sequence[int]]) -> "Table":
        return cls(
            schema, np.asarray(rows, dtype=np.int64).reshape(len(rows), len(schema))
        )

    @property
    def n_rows(self) -> int:
        return int(self.codes.shape[0])

    def column(self, index: int) -> np.ndarray:
        return self.codes[:, index]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.codes, other.codes)

    def __hash__(self) -> int:
        return hash((self.schema, self.codes.shape, self.codes.tobytes()))
