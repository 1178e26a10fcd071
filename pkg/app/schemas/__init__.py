from .budget import BudgetReport, CompositionReport  # noqa: F401
from .bundle import BundleManifest, DatasetBundle, LoadOptions  # noqa: F401
from .report import EvaluationReport, RunManifest, SweepResult  # noqa: F401
from .synthesis import BaselineConfig, PgdConfig, SynthesisConfig  # noqa: F401
