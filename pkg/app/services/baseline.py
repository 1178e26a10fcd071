"""Small DP single-table generator: noisy low-order marginals, independent sampling."""

from typing import List, Optional

import numpy as np

from app.core.errors import budget_error, data_error
from app.core.logs.logging_utils import get_logger
from app.enums.privacy_enums import Mechanism
from app.models.marginal import Workload
from app.models.table import Schema, Table
from app.schemas.synthesis import BaselineConfig
from app.services.marginals import compute_single_marginal, enumerate_single_workloads
from app.services.privacy import (
    BudgetLedger,
    Sensitivity,
    eps_delta_to_zcdp,
    gaussian_sigma,
)

logger = get_logger("app.baseline")


def baseline_workloads(schema: Schema, order: int) -> List[Workload]:
    """Every feature alone, or the first feature followed by each adjacent pair."""
    singles = enumerate_single_workloads(schema, 1)
    if order == 1 or not singles:
        return singles
    pairs = [w for w in enumerate_single_workloads(schema, 2) if w.side1[1] == w.side1[0] + 1]
    return singles[:1] + pairs


def plan_ledger(real: Table, cfg: BaselineConfig) -> BudgetLedger:
    if not cfg.eps > 0:
        budget_error("NON_POSITIVE_BUDGET", "Baseline epsilon must be positive")
    n_marginals = len(baseline_workloads(real.schema, cfg.order))
    return BudgetLedger(eps_delta_to_zcdp(cfg.eps, cfg.delta), n_marginals, 1, 0.0)


def _normalise(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0:
        return np.full(p.size, 1.0 / p.size)
    return p / total


def generate_table(
    real: Table,
    cfg: BaselineConfig,
    rng: np.random.Generator,
    ledger: Optional[BudgetLedger] = None,
) -> Table:
    if real.n_rows == 0:
        data_error("EMPTY_TABLE", "The baseline generator needs a non-empty table")
    ledger = ledger or plan_ledger(real, cfg)
    n_out = cfg.n_out or real.n_rows
    cards = real.schema.cardinalities
    sens = Sensitivity(real.n_rows, 1)
    sigma = gaussian_sigma(sens, 0.0, ledger.eps0)

    noisy = []
    for workload in baseline_workloads(real.schema, cfg.order):
        p = compute_single_marginal(real, workload).probs
        noisy.append(_normalise(p + sigma * rng.standard_normal(p.size)))
        ledger.charge(Mechanism.GAUSSIAN)

    codes = np.zeros((n_out, len(cards)), dtype=np.int64)
    if cards:
        codes[:, 0] = rng.choice(cards[0], size=n_out, p=noisy[0])
    for f in range(1, len(cards)):
        if cfg.order == 1:
            codes[:, f] = rng.choice(cards[f], size=n_out, p=noisy[f])
            continue
        joint = noisy[f].reshape(cards[f - 1], cards[f])
        fallback = _normalise(joint.sum(axis=0))
        prev = codes[:, f - 1]
        for value in range(cards[f - 1]):
            idx = np.flatnonzero(prev == value)
            if not idx.size:
                continue
            row = joint[value]
            cond = row / row.sum() if row.sum() > 0 else fallback
            codes[idx, f] = rng.choice(cards[f], size=idx.size, p=cond)

    logger.info(
        "Generated baseline table",
        extra={"rows": n_out, "order": cfg.order, "sigma": sigma, "rho": ledger.rho_spent},
    )
    return Table(real.schema, codes)
