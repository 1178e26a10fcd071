"""Command-line entry point: ``relsynth <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 budget error.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, List, NoReturn, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from app.core.config import config
from app.core.errors import SynthesisError, UsageError, data_error, usage_error
from app.core.logs.logging import setup_logging
from app.core.logs.logging_utils import get_logger
from app.core.rng import RngStreams
from app.core.sentry import init_sentry
from app.enums.privacy_enums import SweepParameter
from app.enums.relationship_enums import RelationshipKind, SamplerMethod
from app.schemas.bundle import DatasetBundle, LoadOptions
from app.schemas.budget import CompositionReport
from app.schemas.synthesis import load_config
from app.services.baseline import generate_table
from app.services.bundle_io import load_bundle, load_table, save_bundle, schema_dictionary
from app.services.evaluation import evaluate
from app.services.experiments import planted_database, run_sweep
from app.services.privacy import BudgetLedger, Sensitivity, compose_total
from app.services.projection import project_capped_simplex
from app.services.synthesis import synthesize
from app.services.ubs import rejection_sample, ubs

logger = get_logger("app.cli")

REPORT_FILE = "run_report.json"


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError("USAGE", message)


def _write_json(path: Optional[str], payload: Any) -> None:
    if not path:
        return
    try:
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
    except OSError as exc:
        data_error("IO_ERROR", f"Cannot write {path}: {exc}")


def _read_vector(path: str) -> np.ndarray:
    try:
        return np.atleast_1d(np.loadtxt(path, delimiter=None, dtype=np.float64)).ravel()
    except (OSError, ValueError) as exc:
        data_error("PARSE_ERROR", f"Cannot read vector from {path}: {exc}")


def _write_vector(path: Optional[str], values: np.ndarray, fmt: str) -> None:
    if path:
        np.savetxt(path, values, fmt=fmt)
    else:
        np.savetxt(sys.stdout, values, fmt=fmt)


def _load_options(args: argparse.Namespace, kind: Optional[RelationshipKind] = None) -> LoadOptions:
    return LoadOptions(
        delimiter="\t" if args.tab else args.delimiter,
        id_column1=args.id_column1,
        id_column2=args.id_column2,
        d_max_cap=args.d_max_cap,
        kind=kind,
    )


def cmd_synthesize(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, seed=args.seed)
    options = _load_options(args, cfg.kind)
    real = load_bundle(args.real, options)
    streams = RngStreams(cfg.seed)

    eps_tables = delta_tables = 0.0
    if args.syn_table1 and args.syn_table2:
        syn1 = load_table(args.syn_table1, schema_dictionary(real.table1.schema), options.delimiter)
        syn2 = load_table(args.syn_table2, schema_dictionary(real.table2.schema), options.delimiter)
    elif cfg.baseline is not None:
        syn1 = generate_table(real.table1, cfg.baseline, streams["baseline1"])
        syn2 = generate_table(real.table2, cfg.baseline, streams["baseline2"])
        eps_tables, delta_tables = cfg.baseline.eps, cfg.baseline.delta
    else:
        usage_error(
            "NO_SYNTHETIC_TABLES",
            "Pass --syn-table1/--syn-table2 or add a [baseline] section to the config",
        )

    result = synthesize(real, syn1, syn2, cfg)
    eps_total, delta_total = compose_total(
        eps_tables, delta_tables, eps_tables, delta_tables, cfg.eps_rel, cfg.delta_rel
    )
    manifest = result.manifest.model_copy(
        update={"composition": CompositionReport(eps_total=eps_total, delta_total=delta_total)}
    )
    save_bundle(
        result.db,
        args.out,
        options.delimiter,
        extra={"seed": cfg.seed, "m_syn": cfg.m_syn, "config": cfg.model_dump(mode="json")},
    )
    _write_json(
        args.report or str(Path(args.out) / REPORT_FILE),
        {
            "manifest": manifest.model_dump(mode="json", exclude={"run_id"}),
            "evaluation": result.evaluation.model_dump(mode="json"),
        },
    )
    print(result.evaluation.to_text())
    print(f"rho spent {result.budget.rho_spent:.6g} of {result.budget.rho_total:.6g}")
    print(f"total privacy: eps = {eps_total:.6g}, delta = {delta_total:.3g}")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    options = _load_options(args)
    real = load_bundle(args.real, options)
    syn = load_bundle(
        DatasetBundle.in_directory(Path(args.syn)).model_copy(
            update={
                "dictionaries": {
                    "table1": schema_dictionary(real.table1.schema),
                    "table2": schema_dictionary(real.table2.schema),
                }
            }
        ),
        options,
    )
    report = evaluate(real, syn, args.k)
    print(report.to_text(limit=args.top))
    _write_json(args.json, report.model_dump(mode="json"))
    return 0


def cmd_budget(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, seed=args.seed)
    ledger = BudgetLedger.plan(cfg.eps_rel, cfg.delta_rel, cfg.K, cfg.T, cfg.alpha)
    sens = Sensitivity(args.m, args.d_max) if args.m and args.d_max else None
    report = ledger.report(cfg.delta_rel, sens)
    print(f"rho_rel             {report.rho_total:.10g}")
    print(f"eps0                {report.eps0:.10g}")
    print(f"per-iteration spend {report.per_iteration_spend:.10g}")
    print(f"eps at delta={report.delta:g}  {report.eps_equivalent_at_delta:.10g}")
    if report.gaussian_sigma is not None:
        print(f"gaussian sigma      {report.gaussian_sigma:.10g}")
    _write_json(args.json, report.model_dump(mode="json"))
    return 0


def cmd_project(args: argparse.Namespace) -> int:
    b = _read_vector(args.input)
    _write_vector(args.output, project_capped_simplex(b, args.m, args.tol), "%.12g")
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    x = _read_vector(args.input)
    rng = RngStreams(args.seed)["sampling"]
    if args.method == SamplerMethod.REJECTION:
        picks = rejection_sample(x, args.m, rng)
    else:
        picks = ubs(x, args.m, rng)
    _write_vector(args.output, picks, "%d")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, seed=args.seed)
    if args.real:
        db = load_bundle(args.real, _load_options(args, cfg.kind))
    else:
        db = planted_database(
            args.n1,
            args.n2,
            args.m,
            args.d_max,
            args.n_features,
            args.strength,
            cfg.kind,
            RngStreams(cfg.seed)["init"],
        )
    seeds = list(range(args.seeds))
    result = run_sweep(db, cfg, SweepParameter(args.parameter), args.values, seeds)
    print(result.to_text())
    _write_json(args.json, result.model_dump(mode="json"))
    return 0


def _add_io_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--delimiter", default=config.CSV_DELIMITER, help="Field separator")
    parser.add_argument("--tab", action="store_true", help="Tab-separated files")
    parser.add_argument("--id-column1", help="Table1 ID column referenced by relations")
    parser.add_argument("--id-column2", help="Table2 ID column referenced by relations")
    parser.add_argument("--d-max-cap", type=int, help="Keep at most this many relations per record")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(prog="relsynth", description="DP synthetic relational databases")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    parser.add_argument("--log-format", choices=["console", "json"], default=None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    p = sub.add_parser("synthesize", help="Run the full pipeline")
    p.add_argument("--real", required=True, help="Directory with the real bundle")
    p.add_argument("--config", required=True, help="TOML or JSON SynthesisConfig")
    p.add_argument("--out", required=True, help="Output bundle directory")
    p.add_argument("--syn-table1", help="Pre-generated synthetic table1 file")
    p.add_argument("--syn-table2", help="Pre-generated synthetic table2 file")
    p.add_argument("--report", help=f"Run report path (default <out>/{REPORT_FILE})")
    p.add_argument("--seed", type=int, default=None, help="Overrides the config seed")
    _add_io_options(p)
    p.set_defaults(handler=cmd_synthesize)

    p = sub.add_parser("evaluate", help="k-way error between two bundles")
    p.add_argument("--real", required=True)
    p.add_argument("--syn", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--top", type=int, default=20, help="Workloads listed in the text report")
    p.add_argument("--json", help="Write the report as JSON")
    _add_io_options(p)
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("budget", help="Print the privacy plan of a config")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--m", type=int, help="Real edge count, for the noise scale")
    p.add_argument("--d-max", type=int, help="Maximum degree, for the noise scale")
    p.add_argument("--json")
    p.set_defaults(handler=cmd_budget)

    p = sub.add_parser("project", help="Capped-simplex projection of a vector file")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--output")
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser("sample", help="Draw exactly m indices from a weight vector file")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument(
        "--method",
        choices=[s.value for s in SamplerMethod],
        default=SamplerMethod.UBS.value,
    )
    p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    p.add_argument("--output")
    p.set_defaults(handler=cmd_sample)

    p = sub.add_parser("sweep", help="Average error across a parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--parameter", choices=[s.value for s in SweepParameter], required=True)
    p.add_argument("--values", type=float, nargs="+", required=True)
    p.add_argument("--seeds", type=int, default=10, help="Seeds 0..N-1 per value")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--real", help="Bundle directory; a planted database is used otherwise")
    p.add_argument("--n1", type=int, default=200)
    p.add_argument("--n2", type=int, default=200)
    p.add_argument("--m", type=int, default=600)
    p.add_argument("--d-max", type=int, default=5)
    p.add_argument("--n-features", type=int, default=3)
    p.add_argument("--strength", type=float, default=0.8)
    p.add_argument("--json")
    _add_io_options(p)
    p.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        setup_logging(args.log_level, args.log_format)
        init_sentry()
        return args.handler(args)
    except SynthesisError as exc:
        logger.debug("Command failed", extra={"code": exc.code, "details": exc.details})
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        print(f"error: INVALID_OPTIONS: {exc}", file=sys.stderr)
        return UsageError.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)


def run(argv: Optional[List[str]] = None) -> None:
    sys.exit(main(argv))


if __name__ == "__main__":
    run()
