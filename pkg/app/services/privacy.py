"""zCDP accounting plus the exponential and Gaussian mechanisms.

Conventions: a Gaussian release with L2 sensitivity D and noise std sigma
costs D^2 / (2 sigma^2) zCDP; an exponential-mechanism draw run at
eps = 2 * sqrt(alpha) * eps0 costs alpha * eps0^2 / 2. With
eps0 = sqrt(2 rho / (K T)) a full run of K selections and K releases per
iteration over T iterations spends exactly rho.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import softmax

from app.core.errors import budget_error, data_error
from app.core.logs.logging_utils import get_logger
from app.enums.privacy_enums import Mechanism
from app.models.marginal import MarginalVector
from app.schemas.budget import BudgetReport

logger = get_logger("app.privacy")

# relative slack on rho_total; summed charges drift by a few ulps of the total
OVERSPEND_RTOL = 1e-9


@dataclass(frozen=True)
class Sensitivity:
    m: float
    d_max: int

    def __post_init__(self) -> None:
        if self.m <= 0:
            data_error("NO_RELATIONSHIPS", "Sensitivity needs a positive edge count m")
        if self.d_max < 1:
            data_error("INVALID_MAX_DEGREE", "d_max must be >= 1")

    @property
    def score(self) -> float:
        return self.d_max / self.m

    @property
    def l2(self) -> float:
        return math.sqrt(2.0) * self.d_max / self.m


def eps_delta_to_zcdp(eps: float, delta: float) -> float:
    if not eps > 0 or not 0 < delta < 1:
        budget_error(
            "INVALID_PRIVACY_PARAMETERS",
            "Need eps > 0 and 0 < delta < 1",
            {"eps": eps, "delta": delta},
        )
    log_term = math.log(1.0 / delta)
    # (sqrt(L + eps) - sqrt(L))^2 rewritten to avoid cancellation
    return (eps / (math.sqrt(log_term + eps) + math.sqrt(log_term))) ** 2


def zcdp_to_eps(rho: float, delta: float) -> float:
    if rho < 0 or not 0 < delta < 1:
        budget_error(
            "INVALID_PRIVACY_PARAMETERS",
            "Need rho >= 0 and 0 < delta < 1",
            {"rho": rho, "delta": delta},
        )
    return rho + 2.0 * math.sqrt(rho * math.log(1.0 / delta))


def compose_total(
    eps1: float,
    delta1: float,
    eps2: float,
    delta2: float,
    eps_rel: float,
    delta_rel: float,
) -> Tuple[float, float]:
    """Privacy of the released database: both tables plus the relationships."""
    values = (eps1, delta1, eps2, delta2, eps_rel, delta_rel)
    if any(v < 0 for v in values):
        budget_error("INVALID_PRIVACY_PARAMETERS", "Budgets must be non-negative")
    return math.fsum((eps1, eps2, eps_rel)), math.fsum((delta1, delta2, delta_rel))


def exponential_select(
    scores: Sequence[float],
    sens: Sensitivity,
    alpha: float,
    eps0: float,
    rng: np.random.Generator,
    excluded: Optional[Iterable[int]] = None,
) -> int:
    """Draw an index with probability softmax(sqrt(alpha) * eps0 * scores / d_max * m)."""
    scores = np.asarray(scores, dtype=np.float64).ravel()
    if scores.size == 0:
        data_error("NO_CANDIDATES", "Exponential mechanism needs at least one score")
    logits = math.sqrt(alpha) * eps0 * scores / sens.score
    if excluded is not None:
        blocked = np.fromiter(excluded, dtype=np.int64)
        logits[blocked] = -np.inf
        if np.isneginf(logits).all():
            data_error("NO_CANDIDATES", "Every candidate is excluded")
    probs = softmax(logits)
    return int(rng.choice(scores.size, p=probs))


def gaussian_sigma(sens: Sensitivity, alpha: float, eps0: float) -> float:
    if alpha >= 1:
        budget_error("NO_GAUSSIAN_BUDGET", "alpha = 1 leaves no budget for the Gaussian mechanism")
    if eps0 <= 0:
        budget_error("NO_GAUSSIAN_BUDGET", "eps0 must be positive")
    return sens.l2 / (math.sqrt(1.0 - alpha) * eps0)


def gaussian_perturb(
    p: MarginalVector,
    sens: Sensitivity,
    alpha: float,
    eps0: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Noisy copy of a marginal; left unclipped and unnormalised."""
    if not p.is_distribution():
        data_error(
            "NOT_A_DISTRIBUTION",
            "Gaussian mechanism expects a probability vector",
            {"sum": float(p.probs.sum()), "min": float(p.probs.min(initial=0.0))},
        )
    sigma = gaussian_sigma(sens, alpha, eps0)
    return p.probs + sigma * rng.standard_normal(len(p))


class BudgetLedger:
    """Single-owner zCDP ledger for K selections and K releases per round."""

    def __init__(self, rho_total: float, K: int, T: int, alpha: float) -> None:
        if rho_total < 0:
            budget_error("INVALID_PRIVACY_PARAMETERS", "rho_total must be >= 0")
        if not 0 <= alpha <= 1:
            budget_error("INVALID_PRIVACY_PARAMETERS", "alpha must lie in [0, 1]")
        self.rho_total = float(rho_total)
        self.K = int(K)
        self.T = int(T)
        self.alpha = float(alpha)
        rounds = self.K * self.T
        self.eps0 = math.sqrt(2.0 * self.rho_total / rounds) if rounds else 0.0
        self._charges: List[Tuple[str, float]] = []

    @classmethod
    def plan(
        cls, eps_rel: float, delta_rel: float, K: int, T: int, alpha: float
    ) -> "BudgetLedger":
        return cls(eps_delta_to_zcdp(eps_rel, delta_rel), K, T, alpha)

    @property
    def exponential_cost(self) -> float:
        return self.alpha * self.eps0**2 / 2.0

    @property
    def gaussian_cost(self) -> float:
        return (1.0 - self.alpha) * self.eps0**2 / 2.0

    @property
    def per_iteration_spend(self) -> float:
        return self.K * self.eps0**2 / 2.0

    @property
    def rho_spent(self) -> float:
        return math.fsum(cost for _, cost in self._charges)

    @property
    def rho_remaining(self) -> float:
        return self.rho_total - self.rho_spent

    @property
    def charges(self) -> List[Tuple[str, float]]:
        return list(self._charges)

    def charge(self, mechanism: Mechanism) -> float:
        cost = (
            self.exponential_cost
            if mechanism == Mechanism.EXPONENTIAL
            else self.gaussian_cost
        )
        if not self._fits(cost):
            budget_error(
                "BUDGET_EXHAUSTED",
                "Privacy budget exhausted",
                {
                    "rho_total": self.rho_total,
                    "rho_spent": self.rho_spent,
                    "requested": cost,
                },
            )
        self._charges.append((str(mechanism), cost))
        return cost

    def _fits(self, cost: float) -> bool:
        spent = math.fsum((self.rho_spent, cost))
        return spent <= self.rho_total * (1.0 + OVERSPEND_RTOL)

    def can_afford_iteration(self) -> bool:
        return self._fits(self.per_iteration_spend)

    def report(
        self, delta: float, sens: Optional[Sensitivity] = None
    ) -> BudgetReport:
        sigma = None
        if sens is not None and self.alpha < 1 and self.eps0 > 0:
            sigma = gaussian_sigma(sens, self.alpha, self.eps0)
        return BudgetReport(
            rho_total=self.rho_total,
            eps0=self.eps0,
            per_iteration_spend=self.per_iteration_spend,
            eps_equivalent_at_delta=zcdp_to_eps(self.rho_total, delta),
            delta=delta,
            rho_spent=self.rho_spent,
            rho_remaining=self.rho_remaining,
            K=self.K,
            T=self.T,
            alpha=self.alpha,
            gaussian_sigma=sigma,
        )


def select_workloads(
    scores: Sequence[float],
    sens: Sensitivity,
    ledger: BudgetLedger,
    rng: np.random.Generator,
    subsample: Optional[int] = None,
    subsample_rng: Optional[np.random.Generator] = None,
) -> List[int]:
    """K sequential exponential-mechanism draws without replacement.

    ``scores`` covers only candidates not selected in earlier rounds; the
    returned positions index into it.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    candidates = np.arange(scores.size)
    if subsample is not None and subsample < scores.size:
        sampler = subsample_rng if subsample_rng is not None else rng
        candidates = np.sort(sampler.choice(scores.size, size=subsample, replace=False))

    chosen: List[int] = []
    for _ in range(min(ledger.K, candidates.size)):
        pick = exponential_select(
            scores[candidates], sens, ledger.alpha, ledger.eps0, rng, excluded=chosen
        )
        ledger.charge(Mechanism.EXPONENTIAL)
        chosen.append(pick)
    return [int(candidates[i]) for i in chosen]
