"""Command-line entry point.

Exit codes: 0 success, 1 partial failure (some symbol or model failed),
2 configuration or usage error. Flags override the config file, which
overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, WeeklabError
from .evaluation import buy_and_hold, classification_metrics, perfect_return, run_long_flat_strategy
from .features import raw_signals
from .indicators import compute_panel
from .intrinsic_time import detect_dc_events
from .market_data import fetch_remote, load_ohlcv_csv, resample_weekly, weekly_returns
from .models import dumps_model, loads_model, predict
from .pipeline import (
    dumps_json,
    emit_plot_tables,
    evaluate_model,
    load_daily,
    prepare_symbol,
    run_pipeline,
)
from .random_bench import (
    accuracy_curve,
    enumerate_all,
    expected_return_all,
    expected_return_at_accuracy,
    monte_carlo,
)

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("weeklab")


def _overrides(args) -> dict:
    o: dict = {}
    if getattr(args, "symbols", None):
        o["symbols"] = args.symbols.split(",")
    if getattr(args, "test_size", None) is not None:
        o["test_size"] = args.test_size
    if getattr(args, "delta", None) is not None:
        o["dc"] = {"delta": args.delta}
    if getattr(args, "seed", None) is not None:
        o["seed"] = args.seed
    if getattr(args, "output", None):
        o["output_dir"] = str(Path(args.output).resolve())
    if getattr(args, "endpoint", None):
        o["data"] = {"source": "endpoint", "endpoint": args.endpoint}
    if getattr(args, "models", None):
        o["model_kinds"] = args.models.split(",")
    if getattr(args, "workers", None) is not None:
        o["workers"] = args.workers
    if getattr(args, "pca_threshold", None) is not None:
        o["pca"] = {"variance_threshold": args.pca_threshold}
    csv_path = getattr(args, "csv", None)
    if csv_path:
        symbol = getattr(args, "symbol", None) or Path(csv_path).stem
        o["symbols"] = [symbol]
        o["data"] = {"source": "files", "files": {symbol: str(Path(csv_path).resolve())}}
    elif getattr(args, "symbol", None):
        o["symbols"] = [args.symbol]
    return o


def _config(args) -> RunConfig:
    return load_config(args.config, _overrides(args))


def _write(text: str, path: str | None) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _csv_text(header, rows) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return out.getvalue()


def cmd_ingest(args) -> int:
    cfg = _config(args)
    symbol = cfg.symbols[0]
    weekly = resample_weekly(load_daily(cfg, symbol)).with_close(cfg.price_field)
    rets = [""] + [repr(float(r)) for r in weekly_returns(weekly)] if len(weekly) > 1 else [""]
    rows = [
        [d.isoformat(), repr(float(o)), repr(float(h)), repr(float(l)), repr(float(c)),
         repr(float(v)), n, r]
        for d, o, h, l, c, v, n, r in zip(
            weekly.week_start, weekly.open, weekly.high, weekly.low, weekly.close,
            weekly.volume, weekly.n_days, rets,
        )
    ]
    _write(_csv_text(["week_start", "open", "high", "low", "close", "volume", "days", "return"], rows),
           args.out)
    return EXIT_OK


def cmd_features(args) -> int:
    cfg = _config(args)
    symbol = cfg.symbols[0]
    prep = prepare_symbol(cfg, symbol)
    ds = prep.dataset
    header = ["week_start", *ds.features.names, "label", "next_return"]
    rows = [
        [d.isoformat(), *[int(v) for v in row], int(y), repr(float(r))]
        for d, row, y, r in zip(ds.features.timestamps, ds.features.values, ds.labels, ds.next_returns)
    ]
    _write(_csv_text(header, rows), args.dump)
    if args.dump_indicators:
        panel = compute_panel(prep.weekly, cfg.feature_config.indicators)
        signals = raw_signals(prep.weekly, cfg.feature_config)
        cols = list(panel.COLUMNS)
        extra = ["dc_mode", "dc_imbalance", "price_residual", "volume_residual"]
        ind_rows = []
        for i, d in enumerate(prep.weekly.week_start):
            vals = [getattr(panel, c)[i] for c in cols] + [signals[c][i] for c in extra]
            ind_rows.append([d.isoformat(), *["" if np.isnan(v) else repr(float(v)) for v in vals]])
        _write(_csv_text(["week_start", *cols, *extra], ind_rows), args.dump_indicators)
    if args.dump_events:
        events = detect_dc_events(prep.weekly.close, cfg.feature_config.dc)
        _write(_csv_text(["index", "kind", "price"], [[e.index, e.kind, repr(e.price)] for e in events]),
               args.dump_events)
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _config(args)
    out = cfg.output_dir / "models"
    out.mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    for symbol in cfg.symbols:
        prep = prepare_symbol(cfg, symbol)
        for spec in cfg.model_specs:
            try:
                row, model = evaluate_model(prep, spec)
            except (WeeklabError, ValueError) as exc:
                log.error("%s/%s: %s", symbol, spec.kind, exc)
                status = EXIT_PARTIAL
                continue
            path = out / f"{symbol}__{spec.kind}.json"
            path.write_text(dumps_model(model) + "\n")
            print(f"{symbol}\t{spec.kind}\ttrain={row['train_accuracy']:.4f}\t{path}")
    return status


def cmd_backtest(args) -> int:
    cfg = _config(args)
    symbol = cfg.symbols[0]
    prep = prepare_symbol(cfg, symbol)
    results = []
    for path in args.model_files:
        model = loads_model(Path(path).read_text())
        pred = predict(model, prep.test_x)
        bt = run_long_flat_strategy(pred, prep.test.next_returns)
        results.append({
            "model": model.kind,
            "file": str(path),
            "metrics": classification_metrics(pred, prep.test.labels).to_dict(),
            **bt.to_dict(),
            "benchmark_gross": expected_return_all(prep.test.next_returns).expected_gross,
        })
    _write(dumps_json({"symbol": symbol, "results": results}), args.out)
    return EXIT_OK


def _bench_returns(args) -> list[float]:
    src = args.returns
    p = Path(src)
    if p.exists():
        text = p.read_text()
        if text.startswith("Date,"):
            weekly = resample_weekly(load_ohlcv_csv(p))
            return [float(r) for r in weekly_returns(weekly)[-args.weeks:]]
        reader = csv.reader(io.StringIO(text))
        values = []
        for row in reader:
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[-1]))
            except ValueError:
                if values:
                    raise ConfigError(f"non-numeric return {row[-1]!r} in {p}") from None
        return values
    try:
        return [float(v) for v in src.split(",")]
    except ValueError:
        pass
    # treat as a symbol resolved through the config's data source
    ns = argparse.Namespace(**{**vars(args), "symbol": src, "csv": None})
    cfg = _config(ns)
    if cfg.raw["data"]["source"] == "endpoint":
        daily = fetch_remote(src, cfg.start, cfg.end, cfg.raw["data"]["endpoint"])
    else:
        daily = load_daily(cfg, src)
    return [float(r) for r in weekly_returns(resample_weekly(daily))[-args.weeks:]]


def cmd_bench(args) -> int:
    returns = _bench_returns(args)
    doc: dict = {"returns": returns, "mode": args.mode}
    if args.mode == "all":
        res = expected_return_all(returns)
        doc.update(expected_gross=res.expected_gross, expected_net=res.expected_net,
                   method=res.method, n_cases=res.n_cases)
        if args.enumerate:
            en = enumerate_all(returns)
            doc["cases"] = [
                {"states": s.tolist(), "gross": float(g), "accuracy": float(a)}
                for s, g, a in zip(en.states, en.gross, en.accuracy)
            ]
            doc["enumerated_gross"] = en.result.expected_gross
    elif args.mode == "accuracy":
        if args.k is None:
            raise ConfigError("--mode accuracy needs --k")
        res = expected_return_at_accuracy(returns, args.k)
        doc.update(k=args.k, expected_gross=res.expected_gross, expected_net=res.expected_net,
                   method=res.method, n_cases=res.n_cases)
    elif args.mode == "curve":
        curve = accuracy_curve(returns)
        if args.format == "csv":
            _write(_csv_text(["k", "accuracy_pct", "expected_net_return"],
                             [[k, repr(a), repr(e)] for k, a, e in curve.rows()]), args.out)
            return EXIT_OK
        doc.update(curve=[float(v) for v in curve.expected], breakeven_k=curve.breakeven_k)
    else:
        res = monte_carlo(returns, args.p, args.samples, args.seed or 0)
        doc.update(p=args.p, samples=args.samples, expected_gross=res.expected_gross,
                   std_error=res.std_error, method=res.method)
    doc["perfect_gross"] = perfect_return(returns)
    doc["buy_and_hold_gross"] = buy_and_hold(returns)
    _write(dumps_json(doc), args.out)
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _config(args)
    report = run_pipeline(cfg)
    for row in report["rows"]:
        flag = "beats" if row["beats_benchmark"] else "below"
        print(f"{row['symbol']}\t{row['model']}\ttrain={row['train_accuracy']:.3f}\t"
              f"test={row['test_accuracy']:.3f}\tnet={row['net_return']:+.4f}\t"
              f"bench={row['benchmark_net']:+.4f}\t{flag}")
    for err in report["errors"]:
        print(f"ERROR {err['symbol']}/{err['model'] or '-'} [{err['stage']}]: {err['message']}",
              file=sys.stderr)
    print(f"wrote {cfg.output_dir}", file=sys.stderr)
    return EXIT_PARTIAL if report["errors"] else EXIT_OK


def cmd_report(args) -> int:
    report = json.loads(Path(args.report).read_text())
    out = Path(args.tables) if args.tables else Path(args.report).parent / "tables"
    out.mkdir(parents=True, exist_ok=True)
    for name, text in emit_plot_tables(report).items():
        (out / name).write_text(text)
    for row in report["rows"]:
        print(f"{row['symbol']}\t{row['model']}\tnet={row['net_return']:+.4f}\t"
              f"bench={row['benchmark_net']:+.4f}")
    return EXIT_PARTIAL if report.get("errors") else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weeklab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        p.add_argument("--config", help="JSON config (default: $WEEKLAB_CONFIG)")
        p.add_argument("--seed", type=int)
        if data:
            p.add_argument("--csv", help="daily OHLCV CSV for a single symbol")
            p.add_argument("--symbol")
            p.add_argument("--symbols", help="comma-separated symbols")
            p.add_argument("--endpoint", help="remote CSV URL template with {symbol}, {start}, {end}")
            p.add_argument("--test-size", type=int)
            p.add_argument("--delta", type=float, help="directional-change threshold")
            p.add_argument("--pca-threshold", type=float)
            p.add_argument("--models", help="comma-separated model kinds")

    p = sub.add_parser("ingest", help="daily CSV -> weekly bars and returns")
    common(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("features", help="dump the discretised feature matrix")
    common(p)
    p.add_argument("--dump", default="-", help="feature CSV path ('-' for stdout)")
    p.add_argument("--dump-indicators")
    p.add_argument("--dump-events")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="fit models and save them as JSON")
    common(p)
    p.add_argument("--output")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("backtest", help="long/flat backtest of saved models on the test weeks")
    common(p)
    p.add_argument("model_files", nargs="+")
    p.add_argument("--out")
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("bench", help="random-trader benchmark")
    common(p, data=False)
    p.add_argument("--returns", required=True,
                   help="comma-separated returns, a returns/OHLCV CSV, or a configured symbol")
    p.add_argument("--mode", choices=["all", "accuracy", "curve", "mc"], default="all")
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--weeks", type=int, default=20, help="trailing weeks used from a price series")
    p.add_argument("--enumerate", action="store_true", help="include the per-case table (T <= 20)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("run", help="full pipeline from a config")
    common(p)
    p.add_argument("--output")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="rebuild plot tables from report.json")
    p.add_argument("report")
    p.add_argument("--tables")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WeeklabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
