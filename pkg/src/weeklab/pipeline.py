"""End-to-end run: ingest, features, augment, train, backtest, benchmark, report."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .augmentation import AugmentConfig, AugmentedTrainSet, augment
from .config import RunConfig
from .errors import WeeklabError
from .evaluation import (
    buy_and_hold,
    classification_metrics,
    decision_accuracy,
    perfect_return,
    run_long_flat_strategy,
)
from .features import (
    Dataset,
    FeatureConfig,
    PcaModel,
    build_dataset,
    chrono_split,
    pca_fit,
    pca_transform,
)
from .market_data import DailySeries, WeeklySeries, fetch_remote, load_ohlcv_csv, resample_weekly
from .models import ClassifierSpec, TrainedModel, fit, model_to_dict, predict
from .random_bench import accuracy_curve, expected_return_all

logger = logging.getLogger(__name__)

REPORT_VERSION = 1


@dataclass(frozen=True)
class TrainStage:
    """Everything fitted from training rows: PCA and the duplicated train set."""

    pca: PcaModel
    train_x: np.ndarray
    augmented: AugmentedTrainSet


@dataclass(frozen=True)
class PreparedSymbol:
    symbol: str
    weekly: WeeklySeries
    dataset: Dataset
    train: Dataset
    test: Dataset
    stage: TrainStage
    test_x: np.ndarray


def load_daily(cfg: RunConfig, symbol: str) -> DailySeries:
    data = cfg.raw["data"]
    if data["source"] == "endpoint":
        return fetch_remote(symbol, cfg.start, cfg.end, data["endpoint"])
    path = cfg.data_path(symbol)
    if path is None:
        raise WeeklabError(f"no data file configured for {symbol}")
    return load_ohlcv_csv(path).between(cfg.start, cfg.end)


def fit_train_stage(train: Dataset, pca_threshold: float, aug_cfg: AugmentConfig) -> TrainStage:
    """Fit standardisation + PCA and duplicate rows, from training rows only."""
    pca = pca_fit(train.features.values, pca_threshold)
    train_x = pca_transform(pca, train.features.values)
    weights_from = train.next_returns if aug_cfg.source == "next" else train.own_returns
    augmented = augment(train_x, train.labels, weights_from, aug_cfg)
    return TrainStage(pca, train_x, augmented)


def prepare_weekly(
    symbol: str,
    weekly: WeeklySeries,
    test_size: int,
    feature_cfg: FeatureConfig,
    pca_threshold: float,
    aug_cfg: AugmentConfig,
) -> PreparedSymbol:
    dataset = build_dataset(weekly, feature_cfg)
    split = chrono_split(dataset, test_size)
    stage = fit_train_stage(split.train, pca_threshold, aug_cfg)
    test_x = pca_transform(stage.pca, split.test.features.values)
    # duplicates must come from training rows only
    assert stage.augmented.origin.max() < len(split.train)
    assert len(test_x) == test_size
    return PreparedSymbol(symbol, weekly, dataset, split.train, split.test, stage, test_x)


def prepare_symbol(cfg: RunConfig, symbol: str, daily: DailySeries | None = None) -> PreparedSymbol:
    if daily is None:
        daily = load_daily(cfg, symbol)
    weekly = resample_weekly(daily).with_close(cfg.price_field)
    return prepare_weekly(
        symbol, weekly, cfg.test_size, cfg.feature_config, cfg.pca_threshold, cfg.augment_config
    )


def benchmark_summary(test_returns) -> dict:
    e_all = expected_return_all(test_returns)
    curve = accuracy_curve(test_returns)
    T = curve.horizon
    return {
        "horizon": T,
        "expected_gross_all": e_all.expected_gross,
        "expected_net_all": e_all.expected_net,
        "curve": [float(v) for v in curve.expected],
        "breakeven_k": curve.breakeven_k,
        "breakeven_accuracy": None if curve.breakeven_k is None else curve.breakeven_k / T,
        "buy_and_hold_gross": buy_and_hold(test_returns),
        "perfect_gross": perfect_return(test_returns),
    }


def evaluate_model(prep: PreparedSymbol, spec: ClassifierSpec) -> tuple[dict, TrainedModel]:
    model = fit(spec, prep.stage.augmented)
    train_pred = predict(model, prep.stage.train_x)
    test_pred = predict(model, prep.test_x)
    test_returns = prep.test.next_returns
    bt = run_long_flat_strategy(test_pred, test_returns)
    bench = expected_return_all(test_returns)
    metrics = classification_metrics(test_pred, prep.test.labels)
    row = {
        "symbol": prep.symbol,
        "model": spec.kind,
        "train_accuracy": float(np.mean(train_pred == prep.train.labels)),
        "train_accuracy_augmented": model.train_accuracy,
        "test_accuracy": metrics.accuracy,
        "decision_accuracy": decision_accuracy(test_pred, test_returns),
        "metrics": metrics.to_dict(),
        "gross_return": bt.gross_return,
        "net_return": bt.net_return,
        "benchmark_gross": bench.expected_gross,
        "benchmark_net": bench.expected_net,
        "beats_benchmark": bool(bt.gross_return > bench.expected_gross),
        "excess_net_return": bt.gross_return - bench.expected_gross,
        "positions": list(bt.positions),
    }
    return row, model


def symbol_summary(prep: PreparedSymbol) -> dict:
    return {
        "n_weeks": len(prep.weekly),
        "n_labelled": len(prep.dataset),
        "n_train": len(prep.train),
        "n_train_augmented": len(prep.stage.augmented),
        "n_test": len(prep.test),
        "train_start": prep.train.features.timestamps[0].isoformat(),
        "test_start": prep.test.features.timestamps[0].isoformat(),
        "test_end": prep.test.features.timestamps[-1].isoformat(),
        "features": list(prep.dataset.features.names),
        "pca_components": prep.stage.pca.n_components,
        "explained_variance_ratio": [float(v) for v in prep.stage.pca.retained_ratio],
        "test_returns": [float(v) for v in prep.test.next_returns],
        "benchmark": benchmark_summary(prep.test.next_returns),
    }


def run_pipeline(cfg: RunConfig, write: bool = True) -> dict:
    """Run every (symbol, model) pair; failures become error entries.

    Rows are sorted by (symbol, model) whatever order the worker threads
    finish in.
    """
    errors: list[dict] = []
    prepared: dict[str, PreparedSymbol] = {}
    for symbol in cfg.symbols:
        stage = "ingest"
        try:
            daily = load_daily(cfg, symbol)
            stage = "features"
            prepared[symbol] = prepare_symbol(cfg, symbol, daily)
        except (WeeklabError, ValueError, OSError) as exc:
            logger.error("%s: %s failed: %s", symbol, stage, exc)
            errors.append({"symbol": symbol, "model": None, "stage": stage,
                           "error": type(exc).__name__, "message": str(exc)})

    specs = cfg.model_specs
    jobs = sorted(
        ((s, spec) for s in prepared for spec in specs), key=lambda j: (j[0], j[1].kind)
    )

    def work(job):
        symbol, spec = job
        try:
            return evaluate_model(prepared[symbol], spec), None
        except (WeeklabError, ValueError) as exc:
            return None, {"symbol": symbol, "model": spec.kind, "stage": "train",
                          "error": type(exc).__name__, "message": str(exc)}

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    rows, models = [], {}
    for (symbol, spec), (ok, err) in zip(jobs, results):
        if err is not None:
            errors.append(err)
            continue
        row, model = ok
        rows.append(row)
        models[(symbol, spec.kind)] = model

    report = {
        "version": REPORT_VERSION,
        "weeklab_version": __version__,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "test_size": cfg.test_size,
        "symbols": {s: symbol_summary(p) for s, p in prepared.items()},
        "rows": rows,
        "errors": errors,
    }
    if write:
        write_outputs(cfg, report, models)
    return report


def dumps_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _csv(header, rows) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def emit_plot_tables(report: dict) -> dict[str, str]:
    """CSV tables shaped for bar charts of returns, accuracies and the benchmark curve."""
    rows = report["rows"]

    def num(v):
        return repr(float(v))

    financial = _csv(
        ["symbol", "model", "net_return", "benchmark_net_return", "beats_benchmark"],
        [[r["symbol"], r["model"], num(r["net_return"]), num(r["benchmark_net"]),
          int(r["beats_benchmark"])] for r in rows],
    )
    accuracy = _csv(
        ["symbol", "model", "train_accuracy", "test_accuracy"],
        [[r["symbol"], r["model"], num(r["train_accuracy"]), num(r["test_accuracy"])] for r in rows],
    )
    curve_rows = []
    for symbol, info in report["symbols"].items():
        curve = info["benchmark"]["curve"]
        T = len(curve) - 1
        for k, e in enumerate(curve):
            curve_rows.append([symbol, k, num(100.0 * k / T if T else 0.0), num(e - 1.0)])
    curve = _csv(["symbol", "k", "accuracy_pct", "expected_net_return"], curve_rows)
    return {"financial.csv": financial, "accuracy.csv": accuracy, "benchmark_curve.csv": curve}


def write_outputs(cfg: RunConfig, report: dict, models: dict) -> Path:
    out = cfg.output_dir
    (out / "tables").mkdir(parents=True, exist_ok=True)
    (out / "models").mkdir(parents=True, exist_ok=True)
    files = ["report.json"]
    (out / "report.json").write_text(dumps_json(report))
    for name, text in emit_plot_tables(report).items():
        (out / "tables" / name).write_text(text)
        files.append(f"tables/{name}")
    for (symbol, kind), model in sorted(models.items()):
        name = f"models/{symbol}__{kind}.json"
        (out / name).write_text(dumps_json(model_to_dict(model)))
        files.append(name)
    manifest = {
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "weeklab_version": __version__,
        "config": cfg.raw,
        "files": files,
    }
    (out / "manifest.json").write_text(dumps_json(manifest))
    return out
