"""Euclidean projection onto the capped simplex {0 <= x <= 1, sum(x) = m}.

The projection is h(y) = clip(b + y, 0, 1) for the scalar y at which the
clipped sum hits m; y is found by bisection.
"""

from typing import Optional

import numpy as np

from app.core.errors import data_error

MAX_BISECTION_STEPS = 200
REPAIR_PASSES = 8


def _clipped_sum(b: np.ndarray, y: float) -> float:
    return float(np.clip(b + y, 0.0, 1.0).sum())


def _repair_sum(x: np.ndarray, m: float) -> np.ndarray:
    """Push the leftover m - sum(x) onto interior coordinates."""
    for _ in range(REPAIR_PASSES):
        residual = m - x.sum()
        if abs(residual) <= 4 * np.finfo(np.float64).eps * max(x.size, 1):
            break
        room = x < 1.0 if residual > 0 else x > 0.0
        interior = room & (x > 0.0) & (x < 1.0)
        pick = interior if interior.any() else room
        if not pick.any():
            break
        x[pick] = np.clip(x[pick] + residual / pick.sum(), 0.0, 1.0)
    return x


def project_capped_simplex(
    b: np.ndarray, m: float, tol: Optional[float] = None
) -> np.ndarray:
    b = np.asarray(b, dtype=np.float64).ravel()
    n = b.size
    if not -1e-9 <= m <= n + 1e-9:
        data_error(
            "INFEASIBLE_TARGET",
            "Target sum must lie in [0, N]",
            {"m": float(m), "n": int(n)},
        )
    if m <= 0:
        return np.zeros(n)
    if m >= n:
        return np.ones(n)
    if tol is None:
        tol = 1e-9 * n

    lo, hi = -float(b.max()), 1.0 - float(b.min())
    sum_lo, sum_hi = 0.0, float(n)
    y = 0.5 * (lo + hi)
    for _ in range(MAX_BISECTION_STEPS):
        y = 0.5 * (lo + hi)
        s = _clipped_sum(b, y)
        if not sum_lo - tol <= s <= sum_hi + tol:
            data_error(
                "NON_MONOTONE_BISECTION",
                "Clipped sum is not monotone in the shift",
                {"lo": lo, "hi": hi, "sum": s},
            )
        if abs(s - m) <= tol:
            break
        if s < m:
            lo, sum_lo = y, s
        else:
            hi, sum_hi = y, s
        if hi - lo <= np.finfo(np.float64).eps * max(1.0, abs(y)):
            break

    return _repair_sum(np.clip(b + y, 0.0, 1.0), float(m))


def project_rows(B: np.ndarray, tol: Optional[float] = None) -> np.ndarray:
    """Project every row of B onto {0 <= x <= 1, sum(x) = 1}, all rows at once."""
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    n_rows, n_cols = B.shape
    if n_cols == 0:
        if n_rows:
            data_error("INFEASIBLE_TARGET", "Rows with no columns cannot sum to 1")
        return B.copy()
    if n_cols == 1:
        return np.ones_like(B)
    if tol is None:
        tol = 1e-9 * n_cols

    lo = -B.max(axis=1)
    hi = 1.0 - B.min(axis=1)
    y = 0.5 * (lo + hi)
    for _ in range(MAX_BISECTION_STEPS):
        y = 0.5 * (lo + hi)
        s = np.clip(B + y[:, None], 0.0, 1.0).sum(axis=1)
        done = np.abs(s - 1.0) <= tol
        if done.all():
            break
        below = (s < 1.0) & ~done
        above = (s > 1.0) & ~done
        lo = np.where(below, y, lo)
        hi = np.where(above, y, hi)

    X = np.clip(B + y[:, None], 0.0, 1.0)
    for _ in range(REPAIR_PASSES):
        residual = 1.0 - X.sum(axis=1)
        if np.all(np.abs(residual) <= 4 * np.finfo(np.float64).eps * n_cols):
            break
        room = np.where(residual[:, None] > 0, X < 1.0, X > 0.0)
        interior = room & (X > 0.0) & (X < 1.0)
        pick = np.where(interior.any(axis=1)[:, None], interior, room)
        counts = np.maximum(pick.sum(axis=1), 1)
        X = np.clip(X + pick * (residual / counts)[:, None], 0.0, 1.0)
    return X
