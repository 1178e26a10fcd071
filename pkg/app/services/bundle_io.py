"""Reading and writing a database as two categorical tables plus a linking table."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from app.core.errors import data_error
from app.core.logs.logging_utils import get_logger
from app.enums.relationship_enums import RelationshipKind
from app.models.adjacency import BiAdjacency
from app.models.database import RelationalDatabase
from app.models.table import Feature, Schema, Table
from app.schemas.bundle import (
    BundleManifest,
    DatasetBundle,
    FeatureDictionary,
    LoadOptions,
    TableDictionary,
)
from app.services.relational import max_degree, validate_integrity

logger = get_logger("app.bundle_io")

RELATION_COLUMNS = ("id1", "id2")


def _read_csv(path: Path, delimiter: str) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            sep=delimiter,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        )
    except FileNotFoundError:
        data_error("FILE_NOT_FOUND", f"Missing file {path}")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        data_error("PARSE_ERROR", f"Cannot parse {path}: {exc}")


def _encode_table(
    frame: pd.DataFrame, id_column: Optional[str], dictionary: Optional[TableDictionary]
) -> Tuple[Table, Optional[pd.Series]]:
    ids = None
    if id_column is not None:
        if id_column not in frame.columns:
            data_error("UNKNOWN_COLUMN", f"ID column '{id_column}' not found")
        ids = frame[id_column]
        frame = frame.drop(columns=[id_column])
    if not len(frame.columns):
        data_error("EMPTY_SCHEMA", "A table needs at least one feature column")

    known = {f.name: f.labels for f in dictionary.features} if dictionary else {}
    features = []
    codes = np.zeros((len(frame), len(frame.columns)), dtype=np.int64)
    for j, name in enumerate(frame.columns):
        column = frame[name]
        labels = known.get(name) or sorted(column.unique().tolist())
        categories = pd.Categorical(column, categories=labels)
        if (categories.codes < 0).any():
            unknown = sorted(set(column[categories.codes < 0]))[:5]
            data_error(
                "UNKNOWN_LABEL",
                f"Column '{name}' has labels missing from its dictionary",
                {"labels": unknown},
            )
        codes[:, j] = categories.codes
        features.append(Feature(str(name), max(len(labels), 1), tuple(labels) or None))
    return Table(Schema(tuple(features)), codes), ids


def load_table(
    path: Union[str, Path],
    dictionary: Optional[TableDictionary] = None,
    delimiter: Optional[str] = None,
) -> Table:
    """A single categorical table, encoded with the given label dictionary."""
    delimiter = delimiter or LoadOptions().delimiter
    table, _ = _encode_table(_read_csv(Path(path), delimiter), None, dictionary)
    return table


def _resolve_ids(
    raw: pd.Series, ids: Optional[pd.Series], n_rows: int, side: str
) -> np.ndarray:
    if ids is not None:
        if ids.duplicated().any():
            data_error("DUPLICATE_ID", f"{side} ID column has repeated values")
        lookup = pd.Series(np.arange(len(ids)), index=ids.to_numpy())
        resolved = raw.map(lookup)
        missing = resolved.isna()
        if missing.any():
            data_error(
                "DANGLING_REFERENCE",
                f"dangling reference to {side} id '{raw[missing].iloc[0]}'",
            )
        return resolved.to_numpy(dtype=np.int64)

    index = pd.to_numeric(raw, errors="coerce")
    if index.isna().any() or (index % 1 != 0).any():
        data_error("PARSE_ERROR", f"{side} relation ids must be integer row indices")
    index = index.to_numpy(dtype=np.int64)
    bad = (index < 0) | (index >= n_rows)
    if bad.any():
        data_error(
            "DANGLING_REFERENCE",
            f"dangling reference to {side} row {int(index[bad][0])}",
            {"rows": n_rows},
        )
    return index


def _cap_degrees(rows: np.ndarray, cols: np.ndarray, cap: int) -> np.ndarray:
    """Mask keeping each relation while both endpoints are still under the cap."""
    deg1: Dict[int, int] = {}
    deg2: Dict[int, int] = {}
    keep = np.zeros(rows.size, dtype=bool)
    for k, (i, j) in enumerate(zip(rows.tolist(), cols.tolist())):
        if deg1.get(i, 0) < cap and deg2.get(j, 0) < cap:
            keep[k] = True
            deg1[i] = deg1.get(i, 0) + 1
            deg2[j] = deg2.get(j, 0) + 1
    return keep


def _read_manifest(bundle: DatasetBundle) -> Optional[BundleManifest]:
    if bundle.manifest_path is None or not bundle.manifest_path.exists():
        return None
    try:
        return BundleManifest.model_validate_json(bundle.manifest_path.read_text("utf-8"))
    except ValueError as exc:
        data_error("PARSE_ERROR", f"Cannot parse {bundle.manifest_path}: {exc}")


def load_bundle(
    paths: Union[DatasetBundle, str, Path], options: Optional[LoadOptions] = None
) -> RelationalDatabase:
    bundle = paths if isinstance(paths, DatasetBundle) else DatasetBundle.in_directory(Path(paths))
    options = options or LoadOptions()
    dictionaries = dict(bundle.dictionaries)
    kind = options.kind
    manifest = _read_manifest(bundle) if options.use_manifest else None
    if manifest is not None:
        dictionaries = dictionaries or manifest.dictionaries
        kind = kind or manifest.kind

    table1, ids1 = _encode_table(
        _read_csv(bundle.table1_path, options.delimiter),
        options.id_column1,
        dictionaries.get("table1"),
    )
    table2, ids2 = _encode_table(
        _read_csv(bundle.table2_path, options.delimiter),
        options.id_column2,
        dictionaries.get("table2"),
    )

    relations = _read_csv(bundle.relations_path, options.delimiter)
    if relations.shape[1] < 2:
        data_error("PARSE_ERROR", "The relations file needs two columns (id1, id2)")
    rows = _resolve_ids(relations.iloc[:, 0], ids1, table1.n_rows, "table1")
    cols = _resolve_ids(relations.iloc[:, 1], ids2, table2.n_rows, "table2")

    keys = rows * max(table2.n_rows, 1) + cols
    if pd.Series(keys).duplicated().any():
        data_error("DUPLICATE_EDGE", "The relations file lists a pair more than once")

    if options.d_max_cap is not None:
        keep = _cap_degrees(rows, cols, options.d_max_cap)
        if not keep.all():
            logger.info(
                "Truncated relations to the degree cap",
                extra={"cap": options.d_max_cap, "dropped": int((~keep).sum())},
            )
        rows, cols = rows[keep], cols[keep]

    db = RelationalDatabase(
        table1,
        table2,
        BiAdjacency(table1.n_rows, table2.n_rows, rows, cols),
        kind or RelationshipKind.MANY_TO_MANY,
    )
    validate_integrity(db)
    logger.info(
        "Loaded bundle",
        extra={"n1": table1.n_rows, "n2": table2.n_rows, "m": db.m, "d_max": max_degree(db)},
    )
    return db


def schema_dictionary(schema: Schema) -> TableDictionary:
    return TableDictionary(
        features=[
            FeatureDictionary(
                name=f.name,
                labels=list(f.labels) if f.labels else [str(c) for c in range(f.cardinality)],
            )
            for f in schema.features
        ]
    )


def _decode(table: Table, dictionary: TableDictionary) -> pd.DataFrame:
    columns = {}
    for j, feature in enumerate(dictionary.features):
        labels = np.asarray(feature.labels, dtype=object)
        columns[feature.name] = labels[table.codes[:, j]]
    return pd.DataFrame(columns, columns=[f.name for f in dictionary.features])


def save_bundle(
    db: RelationalDatabase,
    out_dir: Union[str, Path],
    delimiter: Optional[str] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> DatasetBundle:
    """Write table1, table2, the linking table and manifest.json under out_dir."""
    delimiter = delimiter or LoadOptions().delimiter
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        data_error("IO_ERROR", f"Cannot create {out_dir}: {exc}")
    bundle = DatasetBundle.in_directory(out_dir)

    dictionaries = {
        "table1": schema_dictionary(db.table1.schema),
        "table2": schema_dictionary(db.table2.schema),
    }
    links = pd.DataFrame(
        {RELATION_COLUMNS[0]: db.adjacency.rows, RELATION_COLUMNS[1]: db.adjacency.cols}
    )
    manifest = BundleManifest(
        kind=db.kind,
        n1=db.table1.n_rows,
        n2=db.table2.n_rows,
        m=db.m,
        d_max=max_degree(db),
        dictionaries=dictionaries,
        **(extra or {}),
    )
    frames: List[Tuple[pd.DataFrame, Path]] = [
        (_decode(db.table1, dictionaries["table1"]), bundle.table1_path),
        (_decode(db.table2, dictionaries["table2"]), bundle.table2_path),
        (links, bundle.relations_path),
    ]
    try:
        for frame, path in frames:
            frame.to_csv(path, sep=delimiter, index=False, lineterminator="\n", encoding="utf-8")
        bundle.manifest_path.write_text(
            json.dumps(manifest.model_dump(mode="json"), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        data_error("IO_ERROR", f"Cannot write bundle to {out_dir}: {exc}")
    logger.info("Saved bundle", extra={"dir": str(out_dir), "m": db.m})
    return bundle
