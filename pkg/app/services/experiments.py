"""Planted-correlation databases and parameter sweeps at desk scale."""

from typing import List, Sequence

import numpy as np

from app.core.errors import data_error
from app.core.logs.logging_utils import get_logger
from app.enums.privacy_enums import SweepParameter
from app.enums.relationship_enums import RelationshipKind
from app.models.adjacency import BiAdjacency
from app.models.database import RelationalDatabase
from app.models.table import Schema, Table
from app.schemas.report import SweepPoint, SweepResult
from app.schemas.synthesis import SynthesisConfig
from app.services.synthesis import synthesize

logger = get_logger("app.experiments")

MAX_PROPOSAL_ROUNDS = 1000
INTEGER_PARAMETERS = {SweepParameter.T, SweepParameter.K}


def _binary_table(n: int, n_features: int, prefix: str, rng: np.random.Generator) -> Table:
    schema = Schema.of((f"{prefix}{f}", 2) for f in range(n_features))
    return Table(schema, rng.integers(0, 2, size=(n, n_features)))


def planted_database(
    n1: int,
    n2: int,
    m: int,
    d_max: int,
    n_features: int,
    strength: float,
    kind: RelationshipKind,
    rng: np.random.Generator,
) -> RelationalDatabase:
    """Binary tables whose edges favour pairs agreeing on the first feature.

    ``strength`` in [0, 1] is how much more likely an agreeing pair is kept
    than a disagreeing one; 0 gives uniform edges.
    """
    if not 0 <= strength <= 1 or n_features < 1 or d_max < 1:
        data_error("INVALID_PARAMETERS", "Need 0 <= strength <= 1, n_features >= 1, d_max >= 1")
    table1 = _binary_table(n1, n_features, "a", rng)
    table2 = _binary_table(n2, n_features, "b", rng)
    key1, key2 = table1.column(0), table2.column(0)
    p_agree, p_differ = (1 + strength) / 2, (1 - strength) / 2

    if kind == RelationshipKind.ONE_TO_MANY:
        if m != n1 or n2 * d_max < n1:
            data_error("INFEASIBLE_TARGET", "One-to-many needs m == n1 and n2 * d_max >= n1")
        load = np.zeros(n2, dtype=np.int64)
        parents = np.empty(n1, dtype=np.int64)
        for i in range(n1):
            open_ = np.flatnonzero(load < d_max)
            weights = np.where(key2[open_] == key1[i], p_agree, p_differ) + 1e-12
            parents[i] = rng.choice(open_, p=weights / weights.sum())
            load[parents[i]] += 1
        return RelationalDatabase(
            table1, table2, BiAdjacency(n1, n2, np.arange(n1), parents), kind
        )

    if m > min(n1 * n2, n1 * d_max, n2 * d_max):
        data_error("INFEASIBLE_TARGET", "m is not reachable under the degree cap")
    deg1 = np.zeros(n1, dtype=np.int64)
    deg2 = np.zeros(n2, dtype=np.int64)
    edges = set()
    for _ in range(MAX_PROPOSAL_ROUNDS):
        if len(edges) == m:
            break
        batch = max(4 * (m - len(edges)), 16)
        rows = rng.integers(0, n1, size=batch)
        cols = rng.integers(0, n2, size=batch)
        accept = rng.random(batch) < np.where(key1[rows] == key2[cols], p_agree, p_differ)
        for i, j in zip(rows[accept].tolist(), cols[accept].tolist()):
            if len(edges) == m:
                break
            if (i, j) in edges or deg1[i] >= d_max or deg2[j] >= d_max:
                continue
            edges.add((i, j))
            deg1[i] += 1
            deg2[j] += 1
    if len(edges) < m:
        data_error(
            "INFEASIBLE_TARGET",
            "Could not place m edges under the degree cap",
            {"placed": len(edges), "m": m},
        )
    return RelationalDatabase(table1, table2, BiAdjacency.from_pairs(n1, n2, sorted(edges)), kind)


def run_sweep(
    db: RelationalDatabase,
    base_cfg: SynthesisConfig,
    parameter: SweepParameter,
    values: Sequence[float],
    seeds: Sequence[int],
) -> SweepResult:
    """Average k-way error for each parameter value, with the real tables as synthetic tables."""
    parameter = SweepParameter(parameter)
    points: List[SweepPoint] = []
    for value in values:
        setting = int(value) if parameter in INTEGER_PARAMETERS else float(value)
        errors = []
        for seed in seeds:
            cfg = SynthesisConfig.model_validate(
                {**base_cfg.model_dump(), str(parameter): setting, "seed": seed}
            )
            result = synthesize(db, db.table1, db.table2, cfg)
            errors.append(result.evaluation.average_error)
        points.append(SweepPoint(value=float(value), errors=errors, mean_error=float(np.mean(errors))))
        logger.info(
            "Sweep point done",
            extra={"parameter": str(parameter), "value": value, "mean_error": points[-1].mean_error},
        )
    return SweepResult(parameter=parameter, seeds=list(seeds), points=points)
