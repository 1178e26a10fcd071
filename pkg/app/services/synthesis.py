"""The adaptive select / measure / optimise loop over a persistent synthetic adjacency."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import budget_error, data_error
from app.core.logs.logging_utils import get_logger, run_context
from app.core.rng import RngStreams
from app.enums.privacy_enums import Mechanism
from app.enums.relationship_enums import InitStrategy, RelationshipKind
from app.models.adjacency import BiAdjacency, SliceSelector
from app.models.database import RelationalDatabase
from app.models.marginal import MarginalVector, QueryMatrix, Workload
from app.models.table import Table
from app.schemas.budget import BudgetReport
from app.schemas.report import (
    EvaluationReport,
    IterationRecord,
    RunManifest,
    SliceRecord,
)
from app.schemas.synthesis import SynthesisConfig
from app.services.evaluation import evaluate
from app.services.marginals import (
    build_query_matrix,
    compute_cross_marginal,
    enumerate_cross_workloads,
    tv_score,
    workload_mse,
)
from app.services.pgd import pgd_solve, pgd_solve_one_to_many
from app.services.privacy import (
    BudgetLedger,
    Sensitivity,
    gaussian_perturb,
    select_workloads,
)
from app.services.relational import max_degree, reinsert, slice_edge_count, slice_matrix
from app.services.slicing import draw_disjoint_slices, initialize_adjacency
from app.services.ubs import categorical_round, sample_biadjacency

logger = get_logger("app.synthesis")
run_logger = get_logger("app.run")


@dataclass
class SelectedWorkload:
    workload: Workload
    label: str
    queries: QueryMatrix
    noisy: np.ndarray


@dataclass
class RunState:
    adjacency: BiAdjacency
    ledger: BudgetLedger
    selected: List[SelectedWorkload] = field(default_factory=list)
    iteration: int = 0
    records: List[IterationRecord] = field(default_factory=list)
    real_marginals: Dict[Workload, MarginalVector] = field(default_factory=dict)

    @property
    def selected_workloads(self) -> List[Workload]:
        return [s.workload for s in self.selected]


@dataclass
class SynthesisResult:
    db: RelationalDatabase
    budget: BudgetReport
    evaluation: EvaluationReport
    manifest: RunManifest


def _real_marginal(state: RunState, real_db: RelationalDatabase, workload: Workload) -> MarginalVector:
    if workload not in state.real_marginals:
        state.real_marginals[workload] = compute_cross_marginal(real_db, workload)
    return state.real_marginals[workload]


def _stack(selected: Sequence[SelectedWorkload], shape: Tuple[int, int]) -> Tuple[QueryMatrix, np.ndarray]:
    blocks = tuple(block for s in selected for block in s.queries.blocks)
    answers = [s.noisy for s in selected]
    a_hat = np.concatenate(answers) if answers else np.empty(0)
    return QueryMatrix(blocks, shape), a_hat


def _optimise_slice(
    adjacency: BiAdjacency,
    selector: SliceSelector,
    queries: QueryMatrix,
    a_hat: np.ndarray,
    cfg: SynthesisConfig,
    streams: RngStreams,
) -> Tuple[BiAdjacency, SliceRecord]:
    rows, cols = selector.shape
    m_slice = slice_edge_count(adjacency, selector)
    if m_slice == 0:
        logger.debug("Skipping slice without edges", extra={"rows": rows, "cols": cols})
        return adjacency, SliceRecord(rows=rows, cols=cols, m_slice=0, skipped=True)

    sliced = queries.restrict(selector)
    one_to_many = cfg.kind == RelationshipKind.ONE_TO_MANY
    if cfg.pgd.init == InitStrategy.UNIFORM_FEASIBLE:
        fill = 1.0 / cols if one_to_many else m_slice / (rows * cols)
        init = np.full(selector.shape, fill)
    else:
        init = slice_matrix(adjacency, selector)

    if one_to_many:
        result = pgd_solve_one_to_many(sliced, a_hat, cfg.pgd, init, streams["power"])
        patch = categorical_round(result.weights.values, streams["sampling"])
    else:
        result = pgd_solve(sliced, a_hat, m_slice, cfg.pgd, init, streams["power"])
        patch = sample_biadjacency(result.weights, m_slice, streams["sampling"])

    logger.info(
        "Slice optimised",
        extra={
            "rows": rows,
            "cols": cols,
            "m_slice": m_slice,
            "objective": result.objective,
            "step_size": result.step_size,
        },
    )
    record = SliceRecord(
        rows=rows,
        cols=cols,
        m_slice=m_slice,
        objective=result.objective,
        step_size=result.step_size,
    )
    return reinsert(adjacency, selector, patch.to_dense()), record


def run_iteration(
    state: RunState,
    real_db: RelationalDatabase,
    syn_tables: Tuple[Table, Table],
    cfg: SynthesisConfig,
    streams: RngStreams,
) -> RunState:
    syn1, syn2 = syn_tables
    schema1, schema2 = real_db.table1.schema, real_db.table2.schema
    record = IterationRecord(iteration=state.iteration, rho_spent=state.ledger.rho_spent)
    if cfg.K == 0:
        state.iteration += 1
        state.records.append(record)
        return state

    if not state.ledger.can_afford_iteration():
        budget_error(
            "BUDGET_EXHAUSTED",
            "Not enough budget left for another iteration",
            {"iteration": state.iteration, "rho_remaining": state.ledger.rho_remaining},
        )

    sens = Sensitivity(real_db.m, max(max_degree(real_db), 1))
    syn_db = RelationalDatabase(syn1, syn2, state.adjacency, cfg.kind)

    taken = set(state.selected_workloads)
    candidates = [w for w in enumerate_cross_workloads(schema1, schema2, cfg.k) if w not in taken]
    scores = [
        tv_score(_real_marginal(state, real_db, w), compute_cross_marginal(syn_db, w))
        for w in candidates
    ]
    picks = select_workloads(
        scores,
        sens,
        state.ledger,
        streams["selection"],
        subsample=cfg.workload_subsample,
        subsample_rng=streams["subsample"],
    )

    for i in picks:
        workload = candidates[i]
        noisy = gaussian_perturb(
            _real_marginal(state, real_db, workload),
            sens,
            state.ledger.alpha,
            state.ledger.eps0,
            streams["noise"],
        )
        state.ledger.charge(Mechanism.GAUSSIAN)
        state.selected.append(
            SelectedWorkload(
                workload,
                workload.label(schema1, schema2),
                build_query_matrix(syn1, syn2, [workload]),
                noisy,
            )
        )
        record.selected.append(state.selected[-1].label)

    if state.selected:
        current = [compute_cross_marginal(syn_db, s.workload).probs for s in state.selected]
        errors = np.array(
            [np.abs(c - s.noisy).sum() for c, s in zip(current, state.selected)]
        )
        record.noisy_errors = {s.label: float(e) for s, e in zip(state.selected, errors)}
        order = np.argsort(-errors, kind="stable")[: cfg.top_error_workloads]
        kept = [state.selected[i] for i in sorted(order.tolist())]
        record.optimised = [s.label for s in kept]

        queries, a_hat = _stack(kept, state.adjacency.shape)
        for selector in draw_disjoint_slices(state.adjacency, cfg, streams["slicing"]):
            state.adjacency, slice_record = _optimise_slice(
                state.adjacency, selector, queries, a_hat, cfg, streams
            )
            record.slices.append(slice_record)

        syn_db = syn_db.with_adjacency(state.adjacency)
        syn_answers = np.concatenate(
            [compute_cross_marginal(syn_db, s.workload).probs for s in state.selected]
        )
        record.workload_mse = workload_mse(
            syn_answers, np.concatenate([s.noisy for s in state.selected]), len(state.selected)
        )

    record.rho_spent = state.ledger.rho_spent
    state.iteration += 1
    state.records.append(record)
    run_logger.info("Iteration complete", extra={"record": record.model_dump(mode="json")})
    return state


def _check_inputs(
    real_db: RelationalDatabase, syn_table1: Table, syn_table2: Table, cfg: SynthesisConfig
) -> None:
    if not syn_table1.schema.compatible_with(real_db.table1.schema) or not (
        syn_table2.schema.compatible_with(real_db.table2.schema)
    ):
        data_error("SCHEMA_MISMATCH", "Synthetic tables must match the real schemas")
    if real_db.m == 0:
        data_error("NO_RELATIONSHIPS", "The real database has no relationships")
    if cfg.m_syn == 0:
        data_error("NO_RELATIONSHIPS", "m_syn must be positive")
    n1, n2 = syn_table1.n_rows, syn_table2.n_rows
    if (cfg.slice_rows or 0) > n1 or (cfg.slice_cols or 0) > n2:
        data_error(
            "INFEASIBLE_SLICE",
            "Slice dimensions exceed the synthetic table sizes",
            {"slice": [cfg.slice_rows, cfg.slice_cols], "tables": [n1, n2]},
        )


def synthesize(
    real_db: RelationalDatabase,
    syn_table1: Table,
    syn_table2: Table,
    cfg: SynthesisConfig,
    run_id: Optional[str] = None,
) -> SynthesisResult:
    _check_inputs(real_db, syn_table1, syn_table2, cfg)
    streams = RngStreams(cfg.seed)
    d_max = max_degree(real_db)
    sens = Sensitivity(real_db.m, max(d_max, 1))
    ledger = BudgetLedger.plan(cfg.eps_rel, cfg.delta_rel, cfg.K, cfg.T, cfg.alpha)

    with run_context(run_id) as rid:
        logger.info(
            "Starting synthesis",
            extra={"m": real_db.m, "d_max": d_max, "m_syn": cfg.m_syn, "rho": ledger.rho_total},
        )
        adjacency = initialize_adjacency(
            syn_table1.n_rows, syn_table2.n_rows, cfg.m_syn, cfg.kind, streams["init"]
        )
        state = RunState(adjacency, ledger)
        for _ in range(cfg.T):
            state = run_iteration(state, real_db, (syn_table1, syn_table2), cfg, streams)

        syn_db = RelationalDatabase(syn_table1, syn_table2, state.adjacency, cfg.kind)
        budget = ledger.report(cfg.delta_rel, sens)
        manifest = RunManifest(
            run_id=rid,
            seed=cfg.seed,
            kind=cfg.kind,
            config=cfg.model_dump(mode="json"),
            m=real_db.m,
            d_max=d_max,
            m_syn=cfg.m_syn,
            n1_syn=syn_table1.n_rows,
            n2_syn=syn_table2.n_rows,
            budget=budget,
            iterations=state.records,
        )
        report = evaluate(real_db, syn_db, cfg.k)
        logger.info(
            "Synthesis finished",
            extra={"average_error": report.average_error, "rho_spent": budget.rho_spent},
        )
    return SynthesisResult(syn_db, budget, report, manifest)
