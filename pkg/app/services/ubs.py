"""Unbiased sampling of exactly m indices with inclusion probabilities x.

ubs merges x greedily into groups of mass at most 1, recursively samples
which groups to drop from the complement vector 1 - group_sums (which has
integer mass L - m), and keeps one index per surviving group drawn in
proportion to x. The recursion runs on an explicit stack.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from app.core.errors import data_error
from app.core.logs.logging_utils import get_logger
from app.models.adjacency import BiAdjacency, WeightedBiAdjacency

logger = get_logger("app.ubs")

BOX_TOLERANCE = 1e-9
SUM_TOLERANCE = 1e-6
MERGE_SLACK = 1e-12
REJECTION_MAX_DRAWS = 1_000_000


@dataclass(frozen=True, eq=False)
class GroupPartition:
    """Contiguous groups [boundaries[j], boundaries[j + 1]) and their masses."""

    boundaries: np.ndarray
    group_sums: np.ndarray

    @property
    def n_groups(self) -> int:
        return int(self.group_sums.size)

    @property
    def starts(self) -> np.ndarray:
        return self.boundaries[:-1]

    @property
    def ends(self) -> np.ndarray:
        return self.boundaries[1:]

    def groups(self) -> List[Tuple[int, ...]]:
        return [tuple(range(s, e)) for s, e in zip(self.starts.tolist(), self.ends.tolist())]


def _check_box(x: np.ndarray) -> np.ndarray:
    if x.size and (x.min() < -BOX_TOLERANCE or x.max() > 1 + BOX_TOLERANCE):
        data_error(
            "ENTRY_OUT_OF_BOX",
            "Sampling weights must lie in [0, 1]",
            {"min": float(x.min()), "max": float(x.max())},
        )
    return np.clip(x, 0.0, 1.0)


def merge_groups(x: np.ndarray) -> GroupPartition:
    """Greedy left-to-right grouping; an index joins the open group while its mass stays <= 1."""
    x = _check_box(np.asarray(x, dtype=np.float64).ravel())
    boundaries = [0]
    sums: List[float] = []
    running = 0.0
    for i, xi in enumerate(x.tolist()):
        if i > boundaries[-1] and running + xi > 1.0 + MERGE_SLACK:
            boundaries.append(i)
            sums.append(running)
            running = 0.0
        running += xi
    if x.size:
        boundaries.append(int(x.size))
        sums.append(running)
    return GroupPartition(
        np.asarray(boundaries, dtype=np.int64),
        np.minimum(np.asarray(sums, dtype=np.float64), 1.0),
    )


def _repair(x: np.ndarray, m: int) -> np.ndarray:
    """Move the floating-point leftover m - sum(x) onto the largest interior entry."""
    residual = m - float(x.sum())
    if abs(residual) > SUM_TOLERANCE * max(x.size, 1):
        data_error(
            "TARGET_SUM_MISMATCH",
            "Sampling weights do not sum to the requested count",
            {"sum": float(x.sum()), "m": m},
        )
    if residual == 0:
        return x
    interior = np.flatnonzero((x > 0) & (x < 1))
    if interior.size:
        j = interior[np.argmax(x[interior])]
        x[j] = min(1.0, max(0.0, x[j] + residual))
    return x


def _last_positive(x: np.ndarray) -> np.ndarray:
    """For each i, the largest j <= i with x[j] > 0 (or -1)."""
    idx = np.where(x > 0, np.arange(x.size), -1)
    return np.maximum.accumulate(idx) if x.size else idx


def _pick_within_groups(
    x: np.ndarray,
    starts: np.ndarray,
    ends: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """One index per [start, end) group, chosen in proportion to x."""
    if not starts.size:
        return np.empty(0, dtype=np.int64)
    cs = np.cumsum(x)
    before = np.concatenate([[0.0], cs])[starts]
    totals = cs[ends - 1] - before
    targets = before + rng.random(starts.size) * totals
    picks = np.searchsorted(cs, targets, side="right")
    picks = np.minimum(picks, _last_positive(x)[ends - 1])
    return np.maximum(picks, starts).astype(np.int64)


def _base_case(x: np.ndarray, m: int, rng: np.random.Generator) -> Optional[np.ndarray]:
    n = x.size
    if m == 0:
        return np.empty(0, dtype=np.int64)
    if m == n:
        return np.arange(n, dtype=np.int64)
    if m == 1:
        return np.asarray([rng.choice(n, p=x / x.sum())], dtype=np.int64)
    return None


def ubs(x: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted indices of an m-subset with P(i selected) = x[i]."""
    x = _check_box(np.asarray(x, dtype=np.float64).ravel().copy())
    if m != int(m) or not 0 <= m <= x.size:
        data_error(
            "INFEASIBLE_TARGET",
            "Sample size must be an integer in [0, N]",
            {"m": m, "n": int(x.size)},
        )
    m = int(m)
    x = _repair(x, m)

    levels: List[Tuple[np.ndarray, GroupPartition]] = []
    chosen = _base_case(x, m, rng)
    while chosen is None:
        partition = merge_groups(x)
        complement = _repair(1.0 - partition.group_sums, partition.n_groups - m)
        next_m = partition.n_groups - m
        if next_m >= m:
            data_error(
                "SAMPLER_NO_PROGRESS",
                "Complement step did not shrink the sample size",
                {"m": m, "groups": partition.n_groups},
            )
        levels.append((x, partition))
        x, m = complement, next_m
        chosen = _base_case(x, m, rng)

    while levels:
        x, partition = levels.pop()
        keep = np.ones(partition.n_groups, dtype=bool)
        keep[chosen] = False
        chosen = _pick_within_groups(
            x, partition.starts[keep], partition.ends[keep], rng
        )
    return np.sort(chosen)


def sample_biadjacency(
    weighted: WeightedBiAdjacency, m_syn: int, rng: np.random.Generator
) -> BiAdjacency:
    """Binary matrix with exactly m_syn ones and E[B] equal to the weights."""
    if abs(weighted.target_sum - m_syn) > SUM_TOLERANCE:
        data_error(
            "TARGET_SUM_MISMATCH",
            "Weighted adjacency target differs from the requested edge count",
            {"target_sum": weighted.target_sum, "m_syn": m_syn},
        )
    n1, n2 = weighted.shape
    picks = ubs(weighted.values.ravel(), m_syn, rng)
    if n2 == 0:
        return BiAdjacency.empty(n1, n2)
    return BiAdjacency(n1, n2, picks // n2, picks % n2)


def categorical_round(weights: np.ndarray, rng: np.random.Generator) -> BiAdjacency:
    """One edge per row, its column drawn from the row's distribution."""
    weights = np.atleast_2d(np.asarray(weights, dtype=np.float64))
    n1, n2 = weights.shape
    if n1 and n2 == 0:
        data_error("INFEASIBLE_TARGET", "Rows with no columns cannot be rounded")
    if weights.size and weights.min() < -BOX_TOLERANCE:
        data_error("ENTRY_OUT_OF_BOX", "Row weights must be non-negative")
    weights = np.clip(weights, 0.0, None)
    row_sums = weights.sum(axis=1)
    bad = np.flatnonzero(np.abs(row_sums - 1.0) > SUM_TOLERANCE)
    if bad.size:
        data_error(
            "ROW_SUM_MISMATCH",
            "Every row must sum to 1",
            {"rows": bad[:10].tolist()},
        )
    if n1 == 0:
        return BiAdjacency.empty(n1, n2)

    cs = np.cumsum(weights, axis=1)
    targets = rng.random(n1) * cs[:, -1]
    cols = (cs <= targets[:, None]).sum(axis=1)
    last = np.where(weights > 0, np.arange(n2), -1).max(axis=1)
    cols = np.minimum(cols, last)
    return BiAdjacency(n1, n2, np.arange(n1), cols)


def rejection_sample(x: np.ndarray, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw from x / m with replacement, discarding repeats, until m distinct indices.

    Always returns m indices but inclusion probabilities are biased away
    from x; kept as a reference point for ubs.
    """
    x = _check_box(np.asarray(x, dtype=np.float64).ravel())
    m = int(m)
    if not 0 <= m <= x.size or abs(float(x.sum()) - m) > SUM_TOLERANCE * max(x.size, 1):
        data_error(
            "TARGET_SUM_MISMATCH",
            "Sampling weights do not sum to the requested count",
            {"sum": float(x.sum()), "m": m},
        )
    if m == 0:
        return np.empty(0, dtype=np.int64)
    p = x / x.sum()
    chosen: set = set()
    draws = 0
    while len(chosen) < m:
        batch = rng.choice(x.size, size=max(m - len(chosen), 1), p=p)
        for i in batch.tolist():
            if len(chosen) == m:
                break
            chosen.add(i)
        draws += batch.size
        if draws > REJECTION_MAX_DRAWS:
            data_error("REJECTION_LIMIT", "Rejection sampler made no progress")
    return np.asarray(sorted(chosen), dtype=np.int64)


def concentration_bound(n: int, m_syn: int, n_queries: int, beta: float) -> float:
    """Deviation |q^T b - q^T b~| / m_syn exceeded with probability at most beta over all queries."""
    if m_syn <= 0 or n_queries < 1 or not 0 < beta < 1:
        data_error(
            "INVALID_BOUND_PARAMETERS",
            "Need m_syn > 0, at least one query and 0 < beta < 1",
        )
    return math.sqrt((n / 2.0) * math.log(2.0 * n_queries / beta)) / m_syn
