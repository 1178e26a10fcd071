import enum


class RelationshipKind(enum.StrEnum):
    MANY_TO_MANY = "many-to-many"
    ONE_TO_MANY = "one-to-many"


class WorkloadKind(enum.StrEnum):
    SINGLE_TABLE_1 = "single-table-1"
    SINGLE_TABLE_2 = "single-table-2"
    CROSS = "cross"


class InitStrategy(enum.StrEnum):
    WARM = "warm"
    UNIFORM_FEASIBLE = "uniform-feasible"


class SamplerMethod(enum.StrEnum):
    UBS = "ubs"
    REJECTION = "rejection"
