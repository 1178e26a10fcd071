from pathlib import Path

from fastapi import APIRouter

from app.core.config import config
from app.core.errors import usage_error
from app.schemas.api import EvaluateRequest
from app.schemas.bundle import DatasetBundle
from app.schemas.report import EvaluationReport
from app.services.bundle_io import load_bundle, schema_dictionary
from app.services.evaluation import evaluate

router = APIRouter(prefix="/evaluate", tags=["Evaluation"])


def _under_data_root(path: Path) -> Path:
    root = Path(config.DATA_ROOT).resolve()
    resolved = (root / path).resolve()
    if not resolved.is_relative_to(root):
        usage_error(
            "PATH_OUTSIDE_DATA_ROOT",
            "Bundle directories must lie under the data root",
            {"path": str(path)},
        )
    return resolved


@router.post("", response_model=EvaluationReport)
def evaluate_bundles(payload: EvaluateRequest) -> EvaluationReport:
    """k-way cross-table error between two bundles under DATA_ROOT."""
    real = load_bundle(_under_data_root(payload.real_dir))
    syn_bundle = DatasetBundle.in_directory(_under_data_root(payload.syn_dir)).model_copy(
        update={
            "dictionaries": {
                "table1": schema_dictionary(real.table1.schema),
                "table2": schema_dictionary(real.table2.schema),
            }
        }
    )
    return evaluate(real, load_bundle(syn_bundle), payload.k)
