import csv
import io
import json

import numpy as np
import pytest

from conftest import FIXTURES
from weeklab.cli import main
from weeklab.config import build_config, load_config
from weeklab.errors import ConfigError
from weeklab.features import build_dataset, chrono_split
from weeklab.pipeline import emit_plot_tables, fit_train_stage, prepare_symbol, run_pipeline

RUN_CONFIG = FIXTURES / "synthetic_run.json"
SYMBOLS = ["SYNA", "SYNB", "SYNC"]
SAMPLE = FIXTURES / "sample_60.csv"


def cfg_for(tmp_path, **extra):
    overrides = {"output_dir": str(tmp_path / "out"), **extra}
    return load_config(RUN_CONFIG, overrides)


@pytest.fixture(scope="module")
def two_model_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = load_config(RUN_CONFIG, {"output_dir": str(out), "model_kinds": ["KNN", "LR"]})
    return cfg, run_pipeline(cfg)


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


# config


def test_defaults():
    cfg = build_config({"symbols": ["X"]})
    assert cfg.test_size == 20 and cfg.seed == 0 and cfg.pca_threshold == 0.95
    assert [s.kind for s in cfg.model_specs] == ["KNN", "LR", "RF", "AB", "GB", "Bag", "SVM", "MLP"]
    assert cfg.feature_config.dc.delta == 0.05


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        build_config({"symbols": ["X"], "tset_size": 3})
    with pytest.raises(ConfigError):
        build_config({"symbols": ["X"], "indicators": {"rsi": 3}})


@pytest.mark.parametrize("doc", [
    {"symbols": []},
    {"symbols": ["X"], "test_size": 0},
    {"symbols": ["X"], "model_kinds": []},
    {"symbols": ["X"], "model_kinds": ["XGB"]},
    {"symbols": ["X"], "dc": {"delta": 1.5}},
    {"symbols": ["X"], "start": "01/01/2021"},
])
def test_invalid_config(doc):
    with pytest.raises(ConfigError):
        build_config(doc)


def test_flags_override_config(tmp_path):
    cfg = load_config(RUN_CONFIG, {"test_size": 10, "seed": 4})
    assert cfg.test_size == 10 and cfg.seed == 4
    assert cfg.symbols == SYMBOLS


def test_env_fallback(monkeypatch):
    monkeypatch.setenv("WEEKLAB_CONFIG", str(RUN_CONFIG))
    assert load_config().symbols == SYMBOLS


def test_config_hash_stable():
    a, b = load_config(RUN_CONFIG), load_config(RUN_CONFIG)
    assert a.config_hash == b.config_hash
    assert load_config(RUN_CONFIG, {"seed": 8}).config_hash != a.config_hash
    moved = load_config(RUN_CONFIG, {"output_dir": "/elsewhere", "workers": 3})
    assert moved.config_hash == a.config_hash


# pipeline


def test_two_models_six_rows(two_model_run):
    cfg, report = two_model_run
    assert len(report["rows"]) == 6 and report["errors"] == []
    assert [(r["symbol"], r["model"]) for r in report["rows"]] == sorted(
        (s, m) for s in SYMBOLS for m in ("KNN", "LR"))
    manifest = json.loads((cfg.output_dir / "manifest.json").read_text())
    assert manifest["config_hash"] == cfg.config_hash and manifest["seed"] == 7
    for name in manifest["files"]:
        assert (cfg.output_dir / name).exists()


def test_report_fields(two_model_run):
    _, report = two_model_run
    row = report["rows"][0]
    for key in ("train_accuracy", "test_accuracy", "metrics", "gross_return", "net_return",
                "benchmark_gross", "benchmark_net", "beats_benchmark"):
        assert key in row
    assert set(row["metrics"]) >= {"accuracy", "precision", "recall", "f1", "mcc"}
    info = report["symbols"]["SYNA"]
    assert info["n_test"] == 20 and len(info["test_returns"]) == 20
    assert len(info["benchmark"]["curve"]) == 21
    bench = info["benchmark"]
    assert bench["expected_gross_all"] == pytest.approx(
        float(np.prod(1 + np.array(info["test_returns"]) / 2)), rel=1e-12)


def test_plot_tables(two_model_run):
    _, report = two_model_run
    tables = emit_plot_tables(report)
    fin = read_csv(tables["financial.csv"])
    assert len(fin) - 1 == 6
    acc = read_csv(tables["accuracy.csv"])
    assert acc[0][2:] == ["train_accuracy", "test_accuracy"]
    assert all(len(r) == 4 for r in acc)
    curve = read_csv(tables["benchmark_curve.csv"])
    assert len(curve) - 1 == 3 * 21
    assert sum(1 for r in curve[1:] if r[0] == "SYNA") == 21


def test_run_is_byte_identical(tmp_path):
    docs = []
    for i, workers in enumerate((1, 1, 4)):
        cfg = cfg_for(tmp_path / str(i), model_kinds=["RF", "MLP"], workers=workers)
        run_pipeline(cfg)
        docs.append((cfg.output_dir / "report.json").read_bytes())
    assert docs[0] == docs[1] == docs[2]


def test_too_few_weeks_is_partial_failure(tmp_path, capsys):
    code = main(["run", "--config", str(RUN_CONFIG), "--output", str(tmp_path),
                 "--test-size", "500", "--models", "KNN"])
    assert code == 1
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["rows"] == []
    assert {e["symbol"] for e in report["errors"]} == set(SYMBOLS)
    assert all(e["stage"] == "features" for e in report["errors"])


def test_missing_symbol_keeps_others(tmp_path):
    cfg = cfg_for(tmp_path, symbols=["SYNA", "NOPE"], model_kinds=["KNN"])
    report = run_pipeline(cfg)
    assert [r["symbol"] for r in report["rows"]] == ["SYNA"]
    assert report["errors"][0]["symbol"] == "NOPE" and report["errors"][0]["stage"] == "ingest"


def test_no_test_data_in_fitted_statistics(tmp_path):
    """Refit on the train prefix alone; every fitted statistic must agree."""
    cfg = cfg_for(tmp_path)
    prep = prepare_symbol(cfg, "SYNA")
    last_train_week = int(prep.train.features.week_index[-1])
    # the last train label needs the following week's close, nothing later
    prefix = prep.weekly.head(last_train_week + 2)
    ds = build_dataset(prefix, cfg.feature_config)
    assert np.array_equal(ds.features.values, prep.train.features.values)
    assert np.array_equal(ds.labels, prep.train.labels)
    stage = fit_train_stage(ds, cfg.pca_threshold, cfg.augment_config)
    for name in ("means", "scales", "components", "explained_variance_ratio"):
        assert np.array_equal(getattr(stage.pca, name), getattr(prep.stage.pca, name))
    assert np.array_equal(stage.augmented.features, prep.stage.augmented.features)
    assert np.array_equal(stage.augmented.labels, prep.stage.augmented.labels)
    assert prep.stage.augmented.origin.max() < len(prep.train)


def test_split_through_pipeline(tmp_path):
    prep = prepare_symbol(cfg_for(tmp_path), "SYNB")
    split = chrono_split(prep.dataset, 20)
    assert np.array_equal(split.test.features.values, prep.test.features.values)
    assert max(prep.train.features.timestamps) < min(prep.test.features.timestamps)


# subcommands


def test_ingest_cli(tmp_path):
    out = tmp_path / "weekly.csv"
    assert main(["ingest", "--csv", str(SAMPLE), "--out", str(out)]) == 0
    rows = read_csv(out.read_text())
    assert rows[0][:5] == ["week_start", "open", "high", "low", "close"]
    assert len(rows) == 13 and rows[1][-1] == ""


def test_features_cli(tmp_path):
    dump, events = tmp_path / "f.csv", tmp_path / "e.csv"
    ind = tmp_path / "i.csv"
    code = main(["features", "--config", str(RUN_CONFIG), "--symbol", "SYNA", "--dump", str(dump),
                 "--dump-events", str(events), "--dump-indicators", str(ind)])
    assert code == 0
    rows = read_csv(dump.read_text())
    assert rows[0][1:10] == ["macd", "rsi", "bollinger", "bias", "atr", "dc_mode", "dc_imbalance",
                             "price_scaling", "volume_scaling"]
    assert {v for r in rows[1:] for v in r[1:10]} <= {"1", "-1"}
    assert read_csv(events.read_text())[0] == ["index", "kind", "price"]
    assert len(read_csv(ind.read_text())) == 175


def test_train_then_backtest(tmp_path):
    out = tmp_path / "t"
    assert main(["train", "--config", str(RUN_CONFIG), "--symbol", "SYNA", "--models", "KNN,LR",
                 "--output", str(out)]) == 0
    models = sorted((out / "models").glob("*.json"))
    assert [m.name for m in models] == ["SYNA__KNN.json", "SYNA__LR.json"]
    report = tmp_path / "bt.json"
    assert main(["backtest", "--config", str(RUN_CONFIG), "--symbol", "SYNA",
                 *map(str, models), "--out", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert [r["model"] for r in doc["results"]] == ["KNN", "LR"]
    assert all(len(r["positions"]) == 20 for r in doc["results"])


def test_train_matches_run(tmp_path, two_model_run):
    _, report = two_model_run
    out = tmp_path / "t"
    main(["train", "--config", str(RUN_CONFIG), "--symbol", "SYNB", "--models", "LR",
          "--output", str(out)])
    doc = json.loads((out / "models" / "SYNB__LR.json").read_text())
    row = next(r for r in report["rows"] if r["symbol"] == "SYNB" and r["model"] == "LR")
    assert doc["train_accuracy"] == row["train_accuracy_augmented"]


def test_bench_all_enumerate(tmp_path):
    out = tmp_path / "b.json"
    assert main(["bench", "--returns", "0.03,0.10,-0.15,0.02", "--enumerate", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["expected_gross"] == pytest.approx(0.99568, abs=5e-6)
    assert len(doc["cases"]) == 16
    assert doc["enumerated_gross"] == pytest.approx(doc["expected_gross"], abs=1e-12)


def test_bench_curve_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["bench", "--returns", "0.03,0.10,-0.15,0.02", "--mode", "curve",
                 "--format", "csv", "--out", str(out)]) == 0
    rows = read_csv(out.read_text())
    assert rows[0] == ["k", "accuracy_pct", "expected_net_return"]
    assert len(rows) == 6
    assert float(rows[4][2]) == pytest.approx(0.071978, abs=1e-6)


def test_bench_accuracy_and_mc(tmp_path):
    out = tmp_path / "a.json"
    assert main(["bench", "--returns", "0.03,0.10,-0.15,0.02", "--mode", "accuracy", "--k", "2",
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["expected_gross"] == pytest.approx(0.99329, abs=5e-6)
    assert main(["bench", "--returns", "0.03,0.10,-0.15,0.02", "--mode", "mc", "--p", "1",
                 "--samples", "10", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["expected_gross"] == pytest.approx(1.15566, abs=1e-12)


def test_bench_from_price_csv(tmp_path):
    out = tmp_path / "p.json"
    assert main(["bench", "--returns", str(SAMPLE), "--weeks", "5", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["returns"]) == 5


def test_bench_accuracy_needs_k():
    assert main(["bench", "--returns", "0.1", "--mode", "accuracy"]) == 2


def test_report_rebuilds_tables(tmp_path, two_model_run):
    cfg, _ = two_model_run
    tables = tmp_path / "tables"
    assert main(["report", str(cfg.output_dir / "report.json"), "--tables", str(tables)]) == 0
    assert (tables / "financial.csv").read_text() == (cfg.output_dir / "tables" / "financial.csv").read_text()


def test_bad_config_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad)]) == 2
    bad.write_text(json.dumps({"symbols": ["A"], "bogus": 1}))
    assert main(["run", "--config", str(bad)]) == 2
