import json
import math

import numpy as np
import pytest

from app.cli import main
from app.enums.relationship_enums import RelationshipKind
from app.services.bundle_io import save_bundle
from app.services.experiments import planted_database
from app.services.privacy import eps_delta_to_zcdp

CONFIG = """
eps_rel = 1.0
m_syn = 40
T = 2
K = 2
k = 2
seed = 5

[pgd]
iterations = 20
power_iterations = 20
"""


@pytest.fixture
def real_dir(tmp_path):
    db = planted_database(
        20, 20, 40, 4, 2, 0.8, RelationshipKind.MANY_TO_MANY, np.random.default_rng(0)
    )
    save_bundle(db, tmp_path / "real")
    return tmp_path / "real"


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.toml"
    path.write_text(CONFIG)
    return path


def _synthesize(real_dir, config_file, out, *extra):
    return main(
        [
            "synthesize",
            "--real", str(real_dir),
            "--config", str(config_file),
            "--out", str(out),
            "--syn-table1", str(real_dir / "table1.csv"),
            "--syn-table2", str(real_dir / "table2.csv"),
            *extra,
        ]
    )


def test_budget_command(tmp_path, capsys):
    config_path = tmp_path / "budget.json"
    config_path.write_text(json.dumps({"eps_rel": 2.0, "delta_rel": 1e-6, "K": 3, "T": 15, "m_syn": 1}))
    out = tmp_path / "report.json"
    assert main(["budget", "--config", str(config_path), "--json", str(out)]) == 0

    rho = eps_delta_to_zcdp(2.0, 1e-6)
    report = json.loads(out.read_text())
    assert report["rho_total"] == pytest.approx(rho)
    assert report["eps0"] == pytest.approx(math.sqrt(2 * rho / 45))
    assert report["eps_equivalent_at_delta"] == pytest.approx(2.0)
    assert report["gaussian_sigma"] is None
    assert "eps0" in capsys.readouterr().out


def test_budget_command_with_sensitivity(tmp_path, capsys):
    config_path = tmp_path / "budget.toml"
    config_path.write_text("eps_rel = 1.0\nm_syn = 10\n")
    assert main(["budget", "--config", str(config_path), "--m", "1000", "--d-max", "5"]) == 0
    assert "gaussian sigma" in capsys.readouterr().out


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["unknown"],
        ["budget"],
        ["sample", "--input", "x.txt", "--m", "2", "--method", "other"],
    ],
)
def test_usage_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert "error" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "synthesize" in capsys.readouterr().out


def test_bad_config_exits_one(tmp_path, capsys):
    missing = tmp_path / "missing.toml"
    assert main(["budget", "--config", str(missing)]) == 1
    assert "CONFIG_NOT_READABLE" in capsys.readouterr().err

    invalid = tmp_path / "bad.toml"
    invalid.write_text("eps_rel = -1.0\nm_syn = 10\n")
    assert main(["budget", "--config", str(invalid)]) == 1
    assert "INVALID_CONFIG" in capsys.readouterr().err


def test_data_error_exits_two(tmp_path, config_file, capsys):
    assert main(["synthesize", "--real", str(tmp_path / "none"), "--config", str(config_file),
                 "--out", str(tmp_path / "out")]) == 2
    assert "FILE_NOT_FOUND" in capsys.readouterr().err


def test_budget_error_exits_three(tmp_path, real_dir, capsys):
    config_path = tmp_path / "baseline.toml"
    config_path.write_text(CONFIG + "\n[baseline]\neps = 0.0\n")
    code = main(["synthesize", "--real", str(real_dir), "--config", str(config_path),
                 "--out", str(tmp_path / "out")])
    assert code == 3
    assert "NON_POSITIVE_BUDGET" in capsys.readouterr().err


def test_missing_synthetic_tables_is_usage_error(tmp_path, real_dir, config_file):
    code = main(["synthesize", "--real", str(real_dir), "--config", str(config_file),
                 "--out", str(tmp_path / "out")])
    assert code == 1


def test_project_command(tmp_path):
    source, target = tmp_path / "b.txt", tmp_path / "x.txt"
    source.write_text("0.2 0.9 0.4\n")
    assert main(["project", "--input", str(source), "--m", "1", "--output", str(target)]) == 0
    x = np.loadtxt(target)
    assert x.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all((x >= 0) & (x <= 1))


@pytest.mark.parametrize("method", ["ubs", "rejection"])
def test_sample_command(tmp_path, method):
    source, target = tmp_path / "w.txt", tmp_path / "idx.txt"
    source.write_text("0.5\n0.5\n1.0\n")
    argv = ["sample", "--input", str(source), "--m", "2", "--method", method, "--output", str(target)]
    assert main(argv) == 0
    picks = np.atleast_1d(np.loadtxt(target, dtype=int))
    assert picks.size == 2
    assert len(set(picks.tolist())) == 2
    if method == "ubs":
        assert 2 in picks.tolist()


def test_sample_rejects_bad_vector(tmp_path, capsys):
    source = tmp_path / "w.txt"
    source.write_text("0.5\n0.2\n")
    assert main(["sample", "--input", str(source), "--m", "1"]) == 2
    assert "TARGET_SUM_MISMATCH" in capsys.readouterr().err


def test_synthesize_is_reproducible(tmp_path, real_dir, config_file, capsys):
    assert _synthesize(real_dir, config_file, tmp_path / "a") == 0
    assert _synthesize(real_dir, config_file, tmp_path / "b") == 0
    for name in ("relations.csv", "manifest.json", "run_report.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    report = json.loads((tmp_path / "a" / "run_report.json").read_text())
    assert "run_id" not in report["manifest"]
    assert report["manifest"]["m_syn"] == 40
    assert "average L1 error" in capsys.readouterr().out


def test_seed_flag_overrides_config(tmp_path, real_dir, config_file):
    assert _synthesize(real_dir, config_file, tmp_path / "a", "--seed", "99") == 0
    report = json.loads((tmp_path / "a" / "run_report.json").read_text())
    assert report["manifest"]["seed"] == 99


def test_synthesize_with_baseline_tables(tmp_path, real_dir):
    config_path = tmp_path / "baseline.toml"
    config_path.write_text(CONFIG + "\n[baseline]\neps = 1.0\n")
    code = main(["synthesize", "--real", str(real_dir), "--config", str(config_path),
                 "--out", str(tmp_path / "out")])
    assert code == 0
    report = json.loads((tmp_path / "out" / "run_report.json").read_text())
    assert report["manifest"]["composition"]["eps_total"] > 2.0


def test_evaluate_command(tmp_path, real_dir, config_file):
    _synthesize(real_dir, config_file, tmp_path / "syn")
    target = tmp_path / "eval.json"
    argv = ["evaluate", "--real", str(real_dir), "--syn", str(tmp_path / "syn"),
            "--k", "2", "--json", str(target)]
    assert main(argv) == 0
    report = json.loads(target.read_text())
    assert report["n_workloads"] == 4
    assert report["average_error"] >= 0


def test_evaluate_against_itself(tmp_path, real_dir, capsys):
    assert main(["evaluate", "--real", str(real_dir), "--syn", str(real_dir), "--k", "2"]) == 0
    assert "average L1 error : 0.000000" in capsys.readouterr().out


def test_sweep_command(tmp_path, config_file):
    target = tmp_path / "sweep.json"
    argv = [
        "sweep", "--config", str(config_file), "--parameter", "T", "--values", "0", "1",
        "--seeds", "1", "--n1", "15", "--n2", "15", "--m", "20", "--d-max", "3",
        "--n-features", "2", "--json", str(target),
    ]
    assert main(argv) == 0
    result = json.loads(target.read_text())
    assert [p["value"] for p in result["points"]] == [0.0, 1.0]
