import math
from typing import List, Optional

import numpy as np

from app.core.errors import data_error
from app.core.logs.logging_utils import get_logger
from app.enums.relationship_enums import RelationshipKind
from app.models.adjacency import BiAdjacency, SliceSelector
from app.schemas.synthesis import SynthesisConfig
from app.services.relational import degrees

logger = get_logger("app.slicing")


def initialize_adjacency(
    n1_syn: int,
    n2_syn: int,
    m_syn: int,
    kind: RelationshipKind,
    rng: np.random.Generator,
) -> BiAdjacency:
    """Random starting matrix with exactly m_syn edges."""
    if kind == RelationshipKind.ONE_TO_MANY:
        if m_syn != n1_syn:
            data_error(
                "INFEASIBLE_TARGET",
                "One-to-many needs exactly one edge per child row",
                {"m_syn": m_syn, "n1_syn": n1_syn},
            )
        if n1_syn and not n2_syn:
            data_error("INFEASIBLE_TARGET", "Child rows need at least one parent row")
        cols = rng.integers(0, max(n2_syn, 1), size=n1_syn)
        return BiAdjacency(n1_syn, n2_syn, np.arange(n1_syn), cols)

    cells = n1_syn * n2_syn
    if not 0 <= m_syn <= cells:
        data_error(
            "INFEASIBLE_TARGET",
            "m_syn exceeds the number of cells",
            {"m_syn": m_syn, "cells": cells},
        )
    if m_syn == 0:
        return BiAdjacency.empty(n1_syn, n2_syn)
    picks = rng.choice(cells, size=m_syn, replace=False)
    return BiAdjacency(n1_syn, n2_syn, picks // n2_syn, picks % n2_syn)


def _stratified(
    available: np.ndarray,
    related: np.ndarray,
    size: int,
    fraction: float,
    rng: np.random.Generator,
    axis: str,
) -> np.ndarray:
    """Draw ``size`` indices, at least ``fraction`` of them with an edge when possible."""
    pool = np.flatnonzero(available)
    if size > pool.size:
        logger.warning(
            "Slice shrunk to the remaining pool",
            extra={"axis": axis, "requested": size, "available": int(pool.size)},
        )
        size = int(pool.size)
    with_edges = pool[related[pool]]
    need = min(math.ceil(fraction * size), size)
    if with_edges.size < need:
        logger.warning(
            "Not enough related records for the slice quota",
            extra={"axis": axis, "needed": need, "related": int(with_edges.size)},
        )
        need = int(with_edges.size)
    first = rng.choice(with_edges, size=need, replace=False) if need else np.empty(0, np.int64)
    rest = np.setdiff1d(pool, first, assume_unique=True)
    second = rng.choice(rest, size=size - need, replace=False)
    return np.sort(np.concatenate([first, second]).astype(np.int64))


def draw_slice(
    adjacency: BiAdjacency,
    cfg: SynthesisConfig,
    rng: np.random.Generator,
    available_rows: Optional[np.ndarray] = None,
    available_cols: Optional[np.ndarray] = None,
) -> SliceSelector:
    n1, n2 = adjacency.shape
    row_deg, col_deg = degrees(adjacency)
    if available_rows is None:
        available_rows = np.ones(n1, dtype=bool)
    if available_cols is None:
        available_cols = np.ones(n2, dtype=bool)

    rows = _stratified(
        available_rows,
        row_deg > 0,
        cfg.slice_rows or n1,
        cfg.min_related_fraction,
        rng,
        "rows",
    )
    if cfg.kind == RelationshipKind.ONE_TO_MANY:
        cols = np.arange(n2, dtype=np.int64)
    else:
        cols = _stratified(
            available_cols,
            col_deg > 0,
            cfg.slice_cols or n2,
            cfg.min_related_fraction,
            rng,
            "cols",
        )
    return SliceSelector(rows, cols)


def draw_disjoint_slices(
    adjacency: BiAdjacency, cfg: SynthesisConfig, rng: np.random.Generator
) -> List[SliceSelector]:
    """Up to n_slices selectors with pairwise-disjoint rows and columns.

    One-to-many slices split only the child rows and keep every parent column.
    """
    n1, n2 = adjacency.shape
    free_rows = np.ones(n1, dtype=bool)
    free_cols = np.ones(n2, dtype=bool)
    selectors: List[SliceSelector] = []
    for _ in range(cfg.n_slices):
        if not free_rows.any() or not free_cols.any():
            break
        selector = draw_slice(adjacency, cfg, rng, free_rows, free_cols)
        if not selector.rows.size or not selector.cols.size:
            break
        selectors.append(selector)
        free_rows[selector.rows] = False
        if cfg.kind != RelationshipKind.ONE_TO_MANY:
            free_cols[selector.cols] = False
    return selectors
