import numpy as np

from app.core.errors import data_error
from app.models.database import RelationalDatabase
from app.schemas.report import EvaluationReport, WorkloadError
from app.services.marginals import (
    compute_cross_marginal,
    enumerate_cross_workloads,
    workload_mse,
)


def evaluate(real_db: RelationalDatabase, syn_db: RelationalDatabase, k: int = 3) -> EvaluationReport:
    """Noise-free comparison of every k-way cross-table marginal."""
    if not real_db.table1.schema.compatible_with(syn_db.table1.schema) or not (
        real_db.table2.schema.compatible_with(syn_db.table2.schema)
    ):
        data_error("SCHEMA_MISMATCH", "Databases must share both table schemas")

    schema1, schema2 = real_db.table1.schema, real_db.table2.schema
    workloads = enumerate_cross_workloads(schema1, schema2, k)
    per_workload = []
    real_answers, syn_answers = [], []
    for workload in workloads:
        p = compute_cross_marginal(real_db, workload)
        q = compute_cross_marginal(syn_db, workload)
        l1 = float(np.abs(p.probs - q.probs).sum())
        per_workload.append(
            WorkloadError(
                workload=workload.label(schema1, schema2),
                side1=list(workload.side1),
                side2=list(workload.side2),
                l1=l1,
                tv=0.5 * l1,
            )
        )
        real_answers.append(p.probs)
        syn_answers.append(q.probs)

    n = len(workloads)
    if not n:
        return EvaluationReport(k=k, n_workloads=0, average_error=0.0, average_tv=0.0, mse=0.0)
    l1s = np.array([w.l1 for w in per_workload])
    return EvaluationReport(
        k=k,
        n_workloads=n,
        average_error=float(l1s.mean()),
        average_tv=float(0.5 * l1s.mean()),
        mse=workload_mse(np.concatenate(syn_answers), np.concatenate(real_answers), n),
        per_workload=per_workload,
    )
