import numpy as np
import pytest

from app.core.errors import BudgetError, DataError
from app.core.rng import RngStreams
from app.enums.relationship_enums import RelationshipKind
from app.models.adjacency import BiAdjacency
from app.models.database import RelationalDatabase
from app.models.table import Schema, Table
from app.schemas.synthesis import PgdConfig, SynthesisConfig
from app.services.experiments import planted_database
from app.services.marginals import (
    compute_cross_marginal,
    enumerate_cross_workloads,
    workload_mse,
)
from app.services.privacy import BudgetLedger
from app.services.relational import degrees, validate_integrity
from app.services.slicing import initialize_adjacency
from app.services.synthesis import RunState, run_iteration, synthesize
from app.services.ubs import concentration_bound


@pytest.fixture
def planted():
    return planted_database(
        30, 30, 90, 5, 3, 0.8, RelationshipKind.MANY_TO_MANY, np.random.default_rng(7)
    )


def _cfg(db, **overrides):
    values = {
        "eps_rel": 1.0,
        "m_syn": db.m,
        "T": 3,
        "K": 2,
        "seed": 11,
        "pgd": PgdConfig(iterations=50, power_iterations=30),
    }
    values.update(overrides)
    return SynthesisConfig(**values)


def test_same_seed_same_output(planted):
    cfg = _cfg(planted)
    first = synthesize(planted, planted.table1, planted.table2, cfg)
    second = synthesize(planted, planted.table1, planted.table2, cfg)
    assert first.db.adjacency == second.db.adjacency
    assert first.evaluation == second.evaluation


def test_edge_count_conserved_every_iteration(planted):
    cfg = _cfg(planted, T=4, slice_rows=10, slice_cols=10, n_slices=2)
    streams = RngStreams(cfg.seed)
    ledger = BudgetLedger.plan(cfg.eps_rel, cfg.delta_rel, cfg.K, cfg.T, cfg.alpha)
    adjacency = initialize_adjacency(30, 30, cfg.m_syn, cfg.kind, streams["init"])
    state = RunState(adjacency, ledger)
    for _ in range(cfg.T):
        state = run_iteration(state, planted, (planted.table1, planted.table2), cfg, streams)
        assert state.adjacency.m == cfg.m_syn
    assert state.iteration == 4
    assert all(len(r.slices) == 2 for r in state.records)


def test_iteration_past_plan_is_refused(planted):
    cfg = _cfg(planted, T=2)
    streams = RngStreams(cfg.seed)
    ledger = BudgetLedger.plan(cfg.eps_rel, cfg.delta_rel, cfg.K, cfg.T, cfg.alpha)
    state = RunState(initialize_adjacency(30, 30, cfg.m_syn, cfg.kind, streams["init"]), ledger)
    for _ in range(cfg.T):
        state = run_iteration(state, planted, (planted.table1, planted.table2), cfg, streams)
    spent, adjacency = ledger.rho_spent, state.adjacency
    with pytest.raises(BudgetError) as excinfo:
        run_iteration(state, planted, (planted.table1, planted.table2), cfg, streams)
    assert excinfo.value.code == "BUDGET_EXHAUSTED"
    assert ledger.rho_spent == spent
    assert state.adjacency == adjacency
    assert state.iteration == 2


def test_zero_workloads_leaves_state_untouched(planted):
    cfg = _cfg(planted, K=0)
    streams = RngStreams(cfg.seed)
    ledger = BudgetLedger.plan(cfg.eps_rel, cfg.delta_rel, 0, cfg.T, cfg.alpha)
    adjacency = initialize_adjacency(30, 30, cfg.m_syn, cfg.kind, streams["init"])
    state = run_iteration(
        RunState(adjacency, ledger), planted, (planted.table1, planted.table2), cfg, streams
    )
    assert state.adjacency == adjacency
    assert state.iteration == 1
    assert ledger.rho_spent == 0.0
    assert state.records[0].selected == []


def test_no_iterations_returns_initialization(planted):
    cfg = _cfg(planted, T=0)
    result = synthesize(planted, planted.table1, planted.table2, cfg)
    expected = initialize_adjacency(30, 30, cfg.m_syn, cfg.kind, RngStreams(cfg.seed)["init"])
    assert result.db.adjacency == expected
    assert result.budget.rho_spent == 0.0
    assert result.manifest.iterations == []


def test_full_run_spends_whole_budget(planted):
    cfg = _cfg(planted, T=5, K=3)
    result = synthesize(planted, planted.table1, planted.table2, cfg)
    assert abs(result.budget.rho_spent - result.budget.rho_total) <= 1e-12
    spent = [r.rho_spent for r in result.manifest.iterations]
    assert spent == sorted(spent)
    assert all(len(r.selected) == 3 for r in result.manifest.iterations)


def test_workloads_never_selected_twice(planted):
    cfg = _cfg(planted, T=6, K=3)
    result = synthesize(planted, planted.table1, planted.table2, cfg)
    labels = [label for r in result.manifest.iterations for label in r.selected]
    assert len(labels) == 18
    assert len(set(labels)) == len(labels)


def test_top_error_pruning_limits_optimised_set(planted):
    cfg = _cfg(planted, T=3, K=3, top_error_workloads=4)
    result = synthesize(planted, planted.table1, planted.table2, cfg)
    assert all(len(r.optimised) <= 4 for r in result.manifest.iterations)
    assert len(result.manifest.iterations[-1].optimised) == 4


def test_accurate_measurements_improve_on_random_start(planted):
    cfg = _cfg(planted, eps_rel=1e4, T=6, K=3, pgd=PgdConfig(iterations=150))
    start = synthesize(planted, planted.table1, planted.table2, cfg.model_copy(update={"T": 0}))
    result = synthesize(planted, planted.table1, planted.table2, cfg)
    assert result.evaluation.average_error < start.evaluation.average_error


def test_run_id_and_manifest(planted):
    cfg = _cfg(planted, T=1)
    result = synthesize(planted, planted.table1, planted.table2, cfg, run_id="run-42")
    manifest = result.manifest
    assert manifest.run_id == "run-42"
    assert (manifest.m, manifest.m_syn, manifest.n1_syn) == (90, 90, 30)
    assert manifest.d_max <= 5
    assert manifest.config["seed"] == 11


def test_many_to_many_output_is_valid(planted):
    cfg = _cfg(planted, m_syn=120)
    result = synthesize(planted, planted.table1, planted.table2, cfg)
    assert result.db.m == 120
    assert validate_integrity(result.db).ok


def test_one_to_many_keeps_one_parent_per_child():
    db = planted_database(
        40, 10, 40, 8, 2, 0.8, RelationshipKind.ONE_TO_MANY, np.random.default_rng(3)
    )
    cfg = SynthesisConfig(
        eps_rel=2.0,
        m_syn=40,
        T=2,
        K=2,
        k=2,
        kind=RelationshipKind.ONE_TO_MANY,
        slice_rows=20,
        n_slices=2,
        pgd=PgdConfig(iterations=40, power_iterations=30),
    )
    result = synthesize(db, db.table1, db.table2, cfg)
    row_deg, _ = degrees(result.db.adjacency)
    assert np.all(row_deg == 1)
    assert validate_integrity(result.db).ok


def test_schema_mismatch(planted):
    other = Table(Schema.of([("x", 2)]), np.zeros((30, 1), dtype=int))
    with pytest.raises(DataError) as excinfo:
        synthesize(planted, other, planted.table2, _cfg(planted))
    assert excinfo.value.code == "SCHEMA_MISMATCH"


def test_empty_relationship_rejected(planted):
    empty = planted.with_adjacency(BiAdjacency.empty(30, 30))
    with pytest.raises(DataError) as excinfo:
        synthesize(empty, planted.table1, planted.table2, _cfg(planted))
    assert excinfo.value.code == "NO_RELATIONSHIPS"

    with pytest.raises(DataError) as excinfo:
        synthesize(planted, planted.table1, planted.table2, _cfg(planted, m_syn=0))
    assert excinfo.value.code == "NO_RELATIONSHIPS"


def test_slice_larger_than_tables(planted):
    with pytest.raises(DataError) as excinfo:
        synthesize(planted, planted.table1, planted.table2, _cfg(planted, slice_rows=31))
    assert excinfo.value.code == "INFEASIBLE_SLICE"


def _matching_db():
    ids = np.arange(20).reshape(-1, 1)
    cols = np.random.default_rng(5).permutation(20)
    return RelationalDatabase(
        Table(Schema.of([("x", 20)]), ids),
        Table(Schema.of([("y", 20)]), ids.copy()),
        BiAdjacency(20, 20, np.arange(20), cols),
    )


def test_workload_mse_falls_without_noise():
    # every row is its own category, so the one workload pins down each cell
    db = _matching_db()
    cfg = SynthesisConfig(
        eps_rel=1e6,
        alpha=0.0,
        m_syn=20,
        T=4,
        K=1,
        k=2,
        seed=3,
        pgd=PgdConfig(iterations=20, power_iterations=20),
    )
    streams = RngStreams(cfg.seed)
    ledger = BudgetLedger.plan(cfg.eps_rel, cfg.delta_rel, cfg.K, cfg.T, cfg.alpha)
    start = initialize_adjacency(20, 20, cfg.m_syn, cfg.kind, streams["init"])
    state = RunState(start, ledger)
    for _ in range(cfg.T):
        state = run_iteration(state, db, (db.table1, db.table2), cfg, streams)

    selected = state.selected[0]
    initial = workload_mse(
        compute_cross_marginal(db.with_adjacency(start), selected.workload).probs,
        selected.noisy,
        1,
    )
    trajectory = [initial] + [r.workload_mse for r in state.records]
    assert trajectory[1] <= initial / 4
    # one misplaced edge moves two cells by 1/m
    swap = 2 * (1 / 20) ** 2
    for before, after in zip(trajectory, trajectory[1:]):
        assert after <= before + 4 * swap


def test_huge_budget_lands_within_sampling_error():
    db = planted_database(
        20, 20, 100, 10, 3, 0.8, RelationshipKind.MANY_TO_MANY, np.random.default_rng(17)
    )
    cfg = SynthesisConfig(
        eps_rel=1e6,
        alpha=0.0,
        m_syn=db.m,
        T=6,
        K=3,
        seed=5,
        pgd=PgdConfig(iterations=300, power_iterations=50),
    )
    start = synthesize(db, db.table1, db.table2, cfg.model_copy(update={"T": 0}))
    result = synthesize(db, db.table1, db.table2, cfg)
    workloads = enumerate_cross_workloads(db.table1.schema, db.table2.schema, 3)
    assert sum(len(r.selected) for r in result.manifest.iterations) == len(workloads)

    real = [compute_cross_marginal(db, w).probs for w in workloads]
    syn = [compute_cross_marginal(result.db, w).probs for w in workloads]
    n_queries = sum(p.size for p in real)
    bound = concentration_bound(20 * 20, cfg.m_syn, n_queries, 0.05)
    assert max(np.abs(r - s).max() for r, s in zip(real, syn)) <= bound
    assert result.evaluation.average_error < start.evaluation.average_error


@pytest.mark.slow
def test_many_to_many_runs_keep_exact_edge_count():
    rng = np.random.default_rng(2024)
    for seed in range(100):
        n1, n2 = (int(v) for v in rng.integers(8, 16, size=2))
        m = int(rng.integers(min(n1, n2), 2 * min(n1, n2)))
        db = planted_database(n1, n2, m, 4, 2, 0.8, RelationshipKind.MANY_TO_MANY, rng)
        m_syn = int(rng.integers(1, n1 * n2 // 2 + 1))
        cfg = SynthesisConfig(
            eps_rel=float(10 ** rng.uniform(-1, 2)),
            m_syn=m_syn,
            T=2,
            K=2,
            k=2,
            seed=seed,
            pgd=PgdConfig(iterations=20, power_iterations=10),
        )
        result = synthesize(db, db.table1, db.table2, cfg)
        assert result.db.m == m_syn
        assert len(result.db.adjacency.edges) == m_syn
        assert validate_integrity(result.db).ok


@pytest.mark.slow
def test_one_to_many_runs_keep_one_parent():
    rng = np.random.default_rng(4048)
    for seed in range(100):
        n1, n2 = int(rng.integers(10, 21)), int(rng.integers(3, 7))
        db = planted_database(
            n1, n2, n1, -(-n1 // n2) + 1, 2, 0.8, RelationshipKind.ONE_TO_MANY, rng
        )
        cfg = SynthesisConfig(
            eps_rel=float(10 ** rng.uniform(-1, 2)),
            m_syn=n1,
            T=2,
            K=2,
            k=2,
            kind=RelationshipKind.ONE_TO_MANY,
            slice_rows=n1 // 2,
            n_slices=2,
            seed=seed,
            pgd=PgdConfig(iterations=20, power_iterations=10),
        )
        result = synthesize(db, db.table1, db.table2, cfg)
        row_deg, _ = degrees(result.db.adjacency)
        assert np.all(row_deg == 1)
        assert result.db.m == n1
        assert validate_integrity(result.db).ok
