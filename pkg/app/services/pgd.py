"""Projected gradient descent on f(b) = ||Q b / m - a||^2 over the relaxed set."""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from app.core.errors import data_error
from app.core.logs.logging_utils import get_logger
from app.models.adjacency import WeightedBiAdjacency
from app.models.marginal import QueryMatrix
from app.schemas.synthesis import PgdConfig
from app.services.marginals import apply_Q, apply_Qt
from app.services.projection import project_capped_simplex, project_rows

logger = get_logger("app.pgd")


@dataclass
class PgdResult:
    weights: WeightedBiAdjacency
    objective: float
    history: List[float] = field(default_factory=list)
    step_size: float = 0.0
    sigma_max: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.history)


def power_iteration(Q: QueryMatrix, iters: int, rng: np.random.Generator) -> float:
    """Largest singular value of Q-hat, using only the rank-1 matvecs."""
    if Q.n_queries == 0:
        data_error("EMPTY_QUERY_SET", "Power iteration needs at least one query")
    v = rng.standard_normal(Q.shape)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = apply_Qt(Q, apply_Q(Q, v))
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        v = w / norm
    return float(np.linalg.norm(apply_Q(Q, v)))


def _as_matrix(Q: QueryMatrix, b: np.ndarray) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64)
    if b.size != Q.shape[0] * Q.shape[1]:
        data_error(
            "QUERY_SHAPE_MISMATCH",
            "Weights do not match the query matrix dimensions",
            {"size": int(b.size), "shape": list(Q.shape)},
        )
    return b.reshape(Q.shape)


def residual(Q: QueryMatrix, b: np.ndarray, a_hat: np.ndarray, m: float) -> np.ndarray:
    return apply_Q(Q, _as_matrix(Q, b)) / m - np.asarray(a_hat, dtype=np.float64)


def objective(Q: QueryMatrix, b: np.ndarray, a_hat: np.ndarray, m: float) -> float:
    r = residual(Q, b, a_hat, m)
    return float(r @ r)


def gradient(Q: QueryMatrix, b: np.ndarray, a_hat: np.ndarray, m: float) -> np.ndarray:
    """(2 / m) Q-hat^T (Q-hat b / m - a), shaped like the matrix."""
    return (2.0 / m) * apply_Qt(Q, residual(Q, b, a_hat, m))


def _descend(
    Q: QueryMatrix,
    a_hat: np.ndarray,
    m: float,
    cfg: PgdConfig,
    b: np.ndarray,
    rng: np.random.Generator,
    project: Callable[[np.ndarray], np.ndarray],
    sigma_max: Optional[float],
) -> PgdResult:
    if Q.n_queries == 0:
        weights = WeightedBiAdjacency(b, m)
        return PgdResult(weights, 0.0)

    a_hat = np.asarray(a_hat, dtype=np.float64).ravel()
    if a_hat.size != Q.n_queries:
        data_error(
            "QUERY_SHAPE_MISMATCH",
            "Noisy answers must have one entry per query",
            {"answers": int(a_hat.size), "queries": Q.n_queries},
        )

    sigma = power_iteration(Q, cfg.power_iterations, rng) if sigma_max is None else sigma_max
    if sigma == 0:
        value = objective(Q, b, a_hat, m)
        return PgdResult(WeightedBiAdjacency(b, m), value, [value])

    eta = cfg.step_size_override or 0.5 * (m / sigma) ** 2
    history: List[float] = []
    debug = logger.isEnabledFor(logging.DEBUG)
    for step in range(cfg.iterations):
        b = project(b - eta * gradient(Q, b, a_hat, m))
        history.append(objective(Q, b, a_hat, m))
        if debug:
            logger.debug(
                "PGD step",
                extra={"step": step, "objective": history[-1]},
            )

    return PgdResult(
        WeightedBiAdjacency(b, m),
        history[-1],
        history,
        step_size=eta,
        sigma_max=sigma,
    )


def pgd_solve(
    Q: QueryMatrix,
    a_hat: np.ndarray,
    m_syn: float,
    cfg: PgdConfig,
    init: np.ndarray,
    rng: np.random.Generator,
    sigma_max: Optional[float] = None,
) -> PgdResult:
    if m_syn <= 0:
        data_error("ZERO_TARGET_SUM", "PGD needs a positive edge target")
    n = Q.shape[0] * Q.shape[1]
    if m_syn > n:
        data_error(
            "INFEASIBLE_TARGET",
            "Edge target exceeds the number of cells",
            {"m": float(m_syn), "cells": n},
        )
    tol = cfg.projection_tolerance * n

    def project(b: np.ndarray) -> np.ndarray:
        return project_capped_simplex(b.ravel(), m_syn, tol).reshape(Q.shape)

    b0 = project(_as_matrix(Q, init))
    return _descend(Q, a_hat, float(m_syn), cfg, b0, rng, project, sigma_max)


def pgd_solve_one_to_many(
    Q: QueryMatrix,
    a_hat: np.ndarray,
    cfg: PgdConfig,
    init: np.ndarray,
    rng: np.random.Generator,
    sigma_max: Optional[float] = None,
) -> PgdResult:
    """Each table1 row keeps exactly one unit of mass spread over its columns."""
    n_rows, n_cols = Q.shape
    if n_rows == 0:
        data_error("ZERO_TARGET_SUM", "PGD needs at least one child row")
    tol = cfg.projection_tolerance * n_cols

    def project(b: np.ndarray) -> np.ndarray:
        return project_rows(b.reshape(Q.shape), tol)

    b0 = project(_as_matrix(Q, init))
    return _descend(Q, a_hat, float(n_rows), cfg, b0, rng, project, sigma_max)
