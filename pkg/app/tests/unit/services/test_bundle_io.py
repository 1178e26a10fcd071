import json

import numpy as np
import pytest

from app.core.errors import DataError
from app.enums.relationship_enums import RelationshipKind
from app.models.adjacency import BiAdjacency
from app.models.database import RelationalDatabase
from app.models.table import Schema, Table
from app.schemas.bundle import LoadOptions
from app.services.bundle_io import load_bundle, load_table, save_bundle, schema_dictionary


def _write_bundle(directory, table1, table2, relations):
    directory.mkdir(exist_ok=True)
    (directory / "table1.csv").write_text(table1, encoding="utf-8")
    (directory / "table2.csv").write_text(table2, encoding="utf-8")
    (directory / "relations.csv").write_text(relations, encoding="utf-8")
    return directory


TABLE1 = "color,size\nred,S\nblue,M\nred,M\n"
TABLE2 = "shape\ncircle\nsquare\n"


def test_round_trip(tmp_path, tiny_db):
    save_bundle(tiny_db, tmp_path / "out")
    assert load_bundle(tmp_path / "out") == tiny_db


def test_written_files(tmp_path, tiny_db):
    bundle = save_bundle(tiny_db, tmp_path, extra={"seed": 3})
    lines = bundle.relations_path.read_text().splitlines()
    assert lines == ["id1,id2", "0,0", "0,2", "1,1", "2,1"]
    assert bundle.table1_path.read_text().splitlines()[0] == "a0,a1"
    manifest = json.loads(bundle.manifest_path.read_text())
    assert (manifest["n1"], manifest["m"], manifest["d_max"], manifest["seed"]) == (3, 4, 2, 3)
    assert manifest["kind"] == "many-to-many"


def test_empty_relationship_round_trip(tmp_path, tiny_db):
    empty = tiny_db.with_adjacency(BiAdjacency.empty(3, 3))
    bundle = save_bundle(empty, tmp_path)
    assert bundle.relations_path.read_text() == "id1,id2\n"
    assert load_bundle(tmp_path).m == 0


def test_one_to_many_writes_one_row_per_child(tmp_path):
    schema = Schema.of([("x", 2)])
    db = RelationalDatabase(
        Table(schema, [[0], [1], [1], [0]]),
        Table(schema, [[0], [1]]),
        BiAdjacency(4, 2, np.arange(4), [0, 1, 1, 0]),
        RelationshipKind.ONE_TO_MANY,
    )
    bundle = save_bundle(db, tmp_path)
    assert len(bundle.relations_path.read_text().splitlines()) == 5
    loaded = load_bundle(tmp_path)
    assert loaded.kind == RelationshipKind.ONE_TO_MANY
    assert loaded == db


def test_tab_separated_round_trip(tmp_path, tiny_db):
    save_bundle(tiny_db, tmp_path, delimiter="\t")
    assert "\t" in (tmp_path / "relations.csv").read_text()
    assert load_bundle(tmp_path, LoadOptions(delimiter="\t")) == tiny_db


def test_labels_are_encoded_in_sorted_order(tmp_path):
    _write_bundle(tmp_path, TABLE1, TABLE2, "id1,id2\n0,1\n2,0\n")
    db = load_bundle(tmp_path)
    color = db.table1.schema.features[0]
    assert color.labels == ("blue", "red")
    assert db.table1.column(0).tolist() == [1, 0, 1]
    assert db.adjacency.edges == {(0, 1), (2, 0)}


def test_dangling_reference(tmp_path):
    _write_bundle(tmp_path, TABLE1, TABLE2, "id1,id2\n0,1\n99,0\n")
    with pytest.raises(DataError) as excinfo:
        load_bundle(tmp_path)
    assert excinfo.value.code == "DANGLING_REFERENCE"
    assert excinfo.value.message == "dangling reference to table1 row 99"


def test_duplicate_edge(tmp_path):
    _write_bundle(tmp_path, TABLE1, TABLE2, "id1,id2\n0,1\n0,1\n")
    with pytest.raises(DataError) as excinfo:
        load_bundle(tmp_path)
    assert excinfo.value.code == "DUPLICATE_EDGE"


def test_degree_cap_keeps_first_relations(tmp_path):
    _write_bundle(tmp_path, TABLE1, TABLE2, "id1,id2\n0,0\n0,1\n1,1\n2,0\n")
    db = load_bundle(tmp_path, LoadOptions(d_max_cap=1))
    assert db.adjacency.edges == {(0, 0), (1, 1)}


def test_id_columns(tmp_path):
    table1 = "uid,color\nu1,red\nu2,blue\n"
    table2 = "pid,shape\np9,circle\np7,square\n"
    _write_bundle(tmp_path, table1, table2, "a,b\nu2,p7\nu1,p9\n")
    options = LoadOptions(id_column1="uid", id_column2="pid")
    db = load_bundle(tmp_path, options)
    assert db.table1.schema.names == ("color",)
    assert db.adjacency.edges == {(1, 1), (0, 0)}


@pytest.mark.parametrize(
    "table1, relations, code",
    [
        ("uid,color\nu1,red\nu1,blue\n", "a,b\nu1,p9\n", "DUPLICATE_ID"),
        ("uid,color\nu1,red\nu2,blue\n", "a,b\nu3,p9\n", "DANGLING_REFERENCE"),
        ("color\nred\nblue\n", "a,b\nu1,p9\n", "UNKNOWN_COLUMN"),
    ],
)
def test_id_column_errors(tmp_path, table1, relations, code):
    _write_bundle(tmp_path, table1, "pid,shape\np9,circle\n", relations)
    with pytest.raises(DataError) as excinfo:
        load_bundle(tmp_path, LoadOptions(id_column1="uid", id_column2="pid"))
    assert excinfo.value.code == code


@pytest.mark.parametrize(
    "relations, code",
    [
        ("id1,id2\nx,0\n", "PARSE_ERROR"),
        ("id1\n0\n", "PARSE_ERROR"),
        ("id1,id2\n0,5\n", "DANGLING_REFERENCE"),
    ],
)
def test_malformed_relations(tmp_path, relations, code):
    _write_bundle(tmp_path, TABLE1, TABLE2, relations)
    with pytest.raises(DataError) as excinfo:
        load_bundle(tmp_path)
    assert excinfo.value.code == code


def test_missing_file(tmp_path):
    with pytest.raises(DataError) as excinfo:
        load_bundle(tmp_path / "nowhere")
    assert excinfo.value.code == "FILE_NOT_FOUND"


def test_load_table_with_dictionary(tmp_path, tiny_db):
    path = tmp_path / "syn.csv"
    path.write_text("a0,a1\n1,1\n0,1\n")
    table = load_table(path, schema_dictionary(tiny_db.table1.schema))
    assert table.schema.compatible_with(tiny_db.table1.schema)
    assert table.codes.tolist() == [[1, 1], [0, 1]]

    path.write_text("a0,a1\n2,1\n")
    with pytest.raises(DataError) as excinfo:
        load_table(path, schema_dictionary(tiny_db.table1.schema))
    assert excinfo.value.code == "UNKNOWN_LABEL"
