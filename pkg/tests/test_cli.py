import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from conftest import tiny_trial_config
from socialmuse import cli
from socialmuse.data.run_dir import RunDirectory
from socialmuse.features.context import FEATURE_NAMES
from socialmuse.model.gbt import GBTParams, fit_gbt
from socialmuse.model.io import load_model, save_model
from socialmuse.model.training import TrainingConfig
from socialmuse.scripts import recommend, report, simulate, train
from socialmuse.utils.errors import InvalidConfig, SchemaError


@pytest.fixture(scope="module")
def control_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("runs") / "simulate"
    config = tiny_trial_config()
    args = simulate.Args(trials=2, control_only=True, out=str(out), seed=3, trial=config)
    result = simulate.main(args)
    return out, result


def test_unknown_command_exits_with_2(capsys):
    with pytest.raises(SystemExit) as error:
        cli.main(["bogus"])
    assert error.value.code == cli.EXIT_DOMAIN_ERROR
    assert "usage" in capsys.readouterr().err


def test_load_config(tmp_path):
    path = tmp_path / "report.json"
    path.write_text(json.dumps(dict(run_dir="runs/x", plots=True)))
    args = cli.load_config(report.Args, str(path))
    assert args.plots and args.run_dir == "runs/x"
    assert args.config == str(path)


def test_load_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "report.json"
    path.write_text(json.dumps(dict(run_dir="runs/x", colour="red")))
    with pytest.raises(InvalidConfig):
        cli.load_config(report.Args, str(path))


def test_load_config_rejects_broken_json(tmp_path):
    path = tmp_path / "report.json"
    path.write_text('{"run_dir": ')
    with pytest.raises(SchemaError):
        cli.load_config(report.Args, str(path))


def test_nested_config_keeps_defaults(tmp_path):
    path = tmp_path / "simulate.json"
    path.write_text(json.dumps(dict(trials=3, trial=dict(n_egos=8, universe=dict(n_bins=40)))))
    args = cli.load_config(simulate.Args, str(path))
    assert args.trials == 3
    assert args.trial.n_egos == 8
    assert args.trial.universe.n_bins == 40
    assert args.trial.n_alters == 6


def test_bad_config_file_exits_with_2(tmp_path, capsys):
    path = tmp_path / "report.json"
    path.write_text(json.dumps(dict(colour="red")))
    with pytest.raises(SystemExit) as error:
        cli.parse(report.Args, ["--config", str(path)])
    assert error.value.code == cli.EXIT_DOMAIN_ERROR
    assert "error:" in capsys.readouterr().err


def test_train_without_data_dir(monkeypatch, capsys):
    monkeypatch.delenv(cli.DATA_DIR_ENV, raising=False)
    with pytest.raises(SystemExit) as error:
        cli.run(train.main, train.Args())
    assert error.value.code == cli.EXIT_DOMAIN_ERROR
    assert cli.DATA_DIR_ENV in capsys.readouterr().err


def test_train_with_missing_world(tmp_path, capsys):
    missing = tmp_path / "no_world"
    with pytest.raises(SystemExit) as error:
        cli.run(train.main, train.Args(logs=str(tmp_path), world=str(missing), out=str(tmp_path / "out")))
    assert error.value.code == cli.EXIT_DOMAIN_ERROR
    assert str(missing) in capsys.readouterr().err


def test_data_dir_fallback(monkeypatch, tmp_path):
    monkeypatch.setenv(cli.DATA_DIR_ENV, str(tmp_path))
    assert train.resolve(None, "world", "world directory") == tmp_path / "world"
    assert train.resolve("elsewhere", "world", "world directory").name == "elsewhere"


def test_recommend_with_missing_model(tmp_path, capsys):
    args = recommend.Args(snapshot=str(tmp_path), world=str(tmp_path), model=str(tmp_path / "model.json"))
    with pytest.raises(SystemExit) as error:
        cli.run(recommend.main, args)
    assert error.value.code == cli.EXIT_DOMAIN_ERROR
    assert "model.json" in capsys.readouterr().err


def test_report_on_empty_directory(tmp_path):
    with pytest.raises(SystemExit) as error:
        cli.run(report.main, report.Args(run_dir=str(tmp_path)))
    assert error.value.code == cli.EXIT_DOMAIN_ERROR


def test_simulate_control_only_run(control_run):
    out, result = control_run
    run = RunDirectory(out)
    assert run.manifest()["status"] == "complete"
    assert run.manifest()["command"] == "simulate"
    assert run.is_consistent()
    assert (run.world / "taxonomy.tsv").exists()
    assert any(run.logs.iterdir())
    assert not run.model.exists()
    with open(run.metrics / "summary.json") as f:
        summary = json.load(f)
    assert summary["n_trials"] == 2
    assert "marginal_wins" not in summary
    assert result.dominance is None


def test_report_on_control_only_run(control_run, tmp_path):
    out, _ = control_run
    summary = report.main(report.Args(run_dir=str(out), out=str(tmp_path / "report")))
    assert summary["conditions"] == ["control"]
    assert "marginal_distinct/control" in summary["metrics"]
    assert any("control-only" in note for note in summary["notes"])
    assert (tmp_path / "report" / "metric_comparison.csv").exists()
    assert not (tmp_path / "report" / "dominance_by_size.csv").exists()


def test_train_on_simulated_logs(control_run, tmp_path):
    out, _ = control_run
    run = RunDirectory(out)
    training = TrainingConfig(grid="smoke", folds=2, rfe=False, ablations=False)
    args = train.Args(logs=str(run.logs), world=str(run.world), out=str(tmp_path / "train"), training=training)
    ensemble, training_report = train.main(args)
    model_file = tmp_path / "train" / "model" / "model.json"
    assert model_file.exists()
    assert (tmp_path / "train" / "model" / "cv_report.csv").exists()
    assert not (tmp_path / "train" / "model" / "rfe_report.csv").exists()
    assert training_report.n_train_egos + training_report.n_test_egos == 12
    assert load_model(model_file).metadata["grid"] == "smoke"
    assert RunDirectory(tmp_path / "train").manifest()["status"] == "complete"


def test_recommend_records_seed_in_manifest(control_run, tmp_path):
    out, _ = control_run
    run = RunDirectory(out)
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, len(FEATURE_NAMES)))
    save_model(fit_gbt(X, X[:, 0], GBTParams(n_estimators=3, max_depth=2)), tmp_path / "model.json")
    log = tmp_path / "recommendations.jsonl"
    args = recommend.Args(snapshot=str(run.logs), world=str(run.world), model=str(tmp_path / "model.json"), out=str(log), seed=11)
    # finished trials leave no ego waiting for a choice
    assert recommend.main(args) == []
    assert log.exists() and log.read_text() == ""
    manifest = json.loads(recommend.manifest_path(str(log)).read_text())
    assert manifest["command"] == "recommend"
    assert manifest["seed"] == 11
    assert manifest["n_recommendations"] == 0


def test_report_records_seed_in_manifest(control_run, tmp_path):
    out, _ = control_run
    report.main(report.Args(run_dir=str(out), out=str(tmp_path / "report"), seed=4))
    manifest = RunDirectory(tmp_path / "report").manifest()
    assert manifest["command"] == "report"
    assert manifest["seed"] == 4
    assert manifest["status"] == "complete"
    # the run's own manifest is left alone
    assert RunDirectory(out).manifest()["command"] == "simulate"


SMOKE_SIMULATION = dict(
    trials=2,
    bootstrap_trials=3,
    trial=dict(n_alters=4, n_egos=6, rounds=3, universe=dict(n_prompts=3, n_bins=30, n_concepts=80, neighborhood_size=4)),
    training=dict(grid="smoke", folds=2, rfe=False, ablations=False),
)


def run_files(root):
    """Relative path -> bytes of every artifact of a run except the tensorboard events and the
    manifest and config, which name the output directory."""
    root = Path(root)
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file() and "tensorboard" not in p.parts and p.parent != root
    }


def test_simulate_is_reproducible(tmp_path):
    outs = []
    for name in ("first", "second"):
        args = simulate.Args(
            trials=2,
            bootstrap_trials=3,
            out=str(tmp_path / name),
            seed=9,
            trial=tiny_trial_config(),
            training=TrainingConfig(grid="smoke", folds=2, rfe=False, ablations=False),
        )
        simulate.main(args)
        outs.append(run_files(tmp_path / name))
    first, second = outs
    assert "metrics/ego_metrics.csv" in first
    assert "model/model.json" in first
    assert "logs/recommendations.jsonl" in first
    assert first.keys() == second.keys()
    for path in first:
        assert first[path] == second[path], path


@pytest.mark.slow
def test_simulate_does_not_depend_on_hash_seed(tmp_path):
    config = tmp_path / "smoke.json"
    config.write_text(json.dumps(dict(SMOKE_SIMULATION, seed=4)))
    root = Path(__file__).resolve().parents[1]
    outs = []
    for hash_seed in ("0", "1"):
        out = tmp_path / f"hash{hash_seed}"
        env = dict(os.environ, PYTHONHASHSEED=hash_seed, PYTHONPATH=str(root))
        subprocess.run(
            [sys.executable, "-c", "from socialmuse import cli; cli.main()", "simulate", "--config", str(config), "--out", str(out)],
            check=True,
            env=env,
            cwd=tmp_path,
            capture_output=True,
        )
        outs.append(run_files(out))
    assert outs[0].keys() == outs[1].keys()
    for path in outs[0]:
        assert outs[0][path] == outs[1][path], path
