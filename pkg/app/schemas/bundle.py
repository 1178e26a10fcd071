from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.core.config import config
from app.enums.relationship_enums import RelationshipKind

TABLE1_FILE = "table1.csv"
TABLE2_FILE = "table2.csv"
RELATIONS_FILE = "relations.csv"
MANIFEST_FILE = "manifest.json"


class FeatureDictionary(BaseModel):
    name: str
    labels: List[str] = Field(..., min_length=1, description="Label of code c at index c")


class TableDictionary(BaseModel):
    features: List[FeatureDictionary] = Field(default_factory=list)


class LoadOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    delimiter: str = Field(
        default_factory=lambda: config.CSV_DELIMITER,
        min_length=1,
        max_length=1,
        description="Field separator of every file in the bundle",
    )
    id_column1: Optional[str] = Field(
        None, description="Column of table1 holding the ids used by the relations file"
    )
    id_column2: Optional[str] = Field(
        None, description="Column of table2 holding the ids used by the relations file"
    )
    d_max_cap: Optional[int] = Field(
        None, ge=1, description="Keep at most this many relations per record, in file order"
    )
    kind: Optional[RelationshipKind] = Field(
        None, description="Relationship kind; falls back to the manifest, then many-to-many"
    )
    use_manifest: bool = Field(
        True, description="Reuse label dictionaries from manifest.json when present"
    )


class DatasetBundle(BaseModel):
    table1_path: Path
    table2_path: Path
    relations_path: Path
    manifest_path: Optional[Path] = None
    dictionaries: Dict[str, TableDictionary] = Field(
        default_factory=dict, description="Label dictionaries keyed by 'table1' / 'table2'"
    )

    @classmethod
    def in_directory(cls, directory: Path) -> "DatasetBundle":
        directory = Path(directory)
        return cls(
            table1_path=directory / TABLE1_FILE,
            table2_path=directory / TABLE2_FILE,
            relations_path=directory / RELATIONS_FILE,
            manifest_path=directory / MANIFEST_FILE,
        )

    @model_validator(mode="after")
    def validate_paths(self):
        if len({self.table1_path, self.table2_path, self.relations_path}) != 3:
            raise ValueError("table1, table2 and relations must be different files")
        return self


class BundleManifest(BaseModel):
    kind: RelationshipKind
    n1: int = Field(..., ge=0)
    n2: int = Field(..., ge=0)
    m: int = Field(..., ge=0)
    d_max: int = Field(..., ge=0)
    dictionaries: Dict[str, TableDictionary]
    seed: Optional[int] = None
    m_syn: Optional[int] = None
    config: Optional[Dict] = Field(None, description="Echo of the run configuration")
