import numpy as np
import pytest

from app.models.adjacency import BiAdjacency
from app.models.database import RelationalDatabase
from app.models.table import Schema, Table


@pytest.fixture(autouse=True)
def set_test_env(monkeypatch):
    monkeypatch.setenv("ENVIRONMENT", "test")
    monkeypatch.setenv("SENTRY_DSN", "")
    monkeypatch.setenv("LOG_TO_FILE", "false")
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_db():
    """Three by three database with two binary features per table and four relations."""
    table1 = Table(Schema.of([("a0", 2), ("a1", 2)]), np.array([[0, 0], [1, 0], [1, 1]]))
    table2 = Table(Schema.of([("b0", 2), ("b1", 2)]), np.array([[0, 1], [1, 1], [0, 0]]))
    adjacency = BiAdjacency.from_pairs(3, 3, [(0, 0), (0, 2), (1, 1), (2, 1)])
    return RelationalDatabase(table1, table2, adjacency)
