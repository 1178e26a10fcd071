from .adjacency import BiAdjacency, SliceSelector, WeightedBiAdjacency  # noqa: F401
from .database import RelationalDatabase  # noqa: F401
from .marginal import MarginalVector, QueryBlock, QueryMatrix, Workload  # noqa: F401
from .table import Feature, Schema, Table  # noqa: F401

__all__ = [
    "BiAdjacency",
    "WeightedBiAdjacency",
    "SliceSelector",
    "RelationalDatabase",
    "Workload",
    "MarginalVector",
    "QueryBlock",
    "QueryMatrix",
    "Feature",
    "Schema",
    "Table",
]
