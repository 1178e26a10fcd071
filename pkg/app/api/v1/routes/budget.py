from fastapi import APIRouter

from app.schemas.budget import BudgetReport
from app.schemas.synthesis import SynthesisConfig
from app.services.privacy import BudgetLedger

router = APIRouter(prefix="/budget", tags=["Privacy"])


@router.post("", response_model=BudgetReport)
def plan_budget(payload: SynthesisConfig) -> BudgetReport:
    """Privacy plan of a synthesis config, without touching any data."""
    ledger = BudgetLedger.plan(
        payload.eps_rel, payload.delta_rel, payload.K, payload.T, payload.alpha
    )
    return ledger.report(payload.delta_rel)
