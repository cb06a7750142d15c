"""Run configuration: one JSON document holding every tunable constant."""

from __future__ import annotations

import copy
import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from .augmentation import AugmentConfig
from .errors import ConfigError
from .features import DiscretizeConfig, FeatureConfig
from .indicators import IndicatorConfig
from .intrinsic_time import DcConfig
from .models import DEFAULT_PARAMS, KINDS, ClassifierSpec

CONFIG_ENV = "WEEKLAB_CONFIG"

DEFAULTS: dict = {
    "symbols": [],
    "data": {
        "source": "files",
        "files": {},
        "directory": None,
        "endpoint": None,
        "price_field": "close",
    },
    "start": "2021-01-01",
    "end": "2024-05-01",
    "test_size": 20,
    "dc": {"delta": 0.05},
    "indicators": {
        "macd_fast": 12,
        "macd_slow": 26,
        "rsi_n": 14,
        "boll_n": 20,
        "boll_m": 2.0,
        "boll_ddof": 0,
        "bias_n": 20,
        "atr_n": 14,
    },
    "discretize": {"rsi_oversold": 30.0, "rsi_overbought": 70.0},
    "pca": {"variance_threshold": 0.95},
    "augment": {"enabled": True, "base": "e", "units": "percent", "source": "next"},
    "model_kinds": list(KINDS),
    "models": {kind: dict(params) for kind, params in DEFAULT_PARAMS.items()},
    "seed": 0,
    "workers": 1,
    "output_dir": "weeklab-out",
}


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key {where!r}")
        # data.files maps arbitrary symbols, so it is taken verbatim
        if isinstance(base[key], dict) and key != "files":
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = _merge(base[key], value, where + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def _parse_base(value) -> float:
    if value in ("e", "ln", None):
        return math.e
    try:
        base = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"augment.base must be 'e' or a number, got {value!r}") from None
    return base


def _parse_date(value, key: str) -> date | None:
    if value in (None, ""):
        return None
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise ConfigError(f"{key} must be an ISO date, got {value!r}") from None


@dataclass(frozen=True)
class RunConfig:
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    # typed views

    @property
    def symbols(self) -> list[str]:
        return list(self.raw["symbols"])

    @property
    def start(self) -> date | None:
        return _parse_date(self.raw["start"], "start")

    @property
    def end(self) -> date | None:
        return _parse_date(self.raw["end"], "end")

    @property
    def test_size(self) -> int:
        return int(self.raw["test_size"])

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def workers(self) -> int:
        return max(1, int(self.raw["workers"]))

    @property
    def price_field(self) -> str:
        return self.raw["data"]["price_field"]

    @property
    def output_dir(self) -> Path:
        return self.resolve_path(self.raw["output_dir"])

    @property
    def pca_threshold(self) -> float:
        return float(self.raw["pca"]["variance_threshold"])

    @property
    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(
            indicators=IndicatorConfig(**self.raw["indicators"]),
            dc=DcConfig(**self.raw["dc"]),
            discretize=DiscretizeConfig(**self.raw["discretize"]),
        )

    @property
    def augment_config(self) -> AugmentConfig:
        a = self.raw["augment"]
        return AugmentConfig(
            enabled=bool(a["enabled"]), base=_parse_base(a["base"]), units=a["units"], source=a["source"]
        )

    @property
    def model_specs(self) -> list[ClassifierSpec]:
        return [
            ClassifierSpec(kind, dict(self.raw["models"].get(kind, {})), self.seed)
            for kind in self.raw["model_kinds"]
        ]

    def resolve_path(self, p) -> Path:
        path = Path(p)
        return path if path.is_absolute() else self.base_dir / path

    def data_path(self, symbol: str) -> Path | None:
        data = self.raw["data"]
        if symbol in data["files"]:
            return self.resolve_path(data["files"][symbol])
        if data["directory"]:
            return self.resolve_path(data["directory"]) / f"{symbol}.csv"
        return None

    # identity

    # where results go and how many processes compute them do not change them
    _UNHASHED = ("output_dir", "workers")

    def canonical_json(self) -> str:
        doc = {k: v for k, v in self.raw.items() if k not in self._UNHASHED}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def validate(self) -> "RunConfig":
        try:
            if not self.symbols:
                raise ConfigError("config needs at least one symbol")
            if not self.raw["model_kinds"]:
                raise ConfigError("config needs at least one model kind")
            if self.test_size < 1:
                raise ConfigError("test_size must be >= 1")
            if self.raw["data"]["source"] not in ("files", "endpoint"):
                raise ConfigError("data.source must be 'files' or 'endpoint'")
            if self.raw["data"]["source"] == "endpoint" and not self.raw["data"]["endpoint"]:
                raise ConfigError("data.source 'endpoint' needs data.endpoint")
            if self.price_field not in ("close", "adj_close"):
                raise ConfigError("data.price_field must be 'close' or 'adj_close'")
            if not 0 < self.pca_threshold <= 1:
                raise ConfigError("pca.variance_threshold must lie in (0, 1]")
            self.start, self.end
            self.feature_config
            self.augment_config
            self.model_specs
        except ConfigError:
            raise
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        return self


def build_config(doc: dict | None = None, base_dir: Path | None = None) -> RunConfig:
    raw = _merge(DEFAULTS, doc or {})
    return RunConfig(raw, base_dir or Path.cwd()).validate()


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> RunConfig:
    """Read a config file (or $WEEKLAB_CONFIG) and apply flag overrides on top."""
    if path is None:
        path = os.environ.get(CONFIG_ENV)
    doc: dict = {}
    base_dir = Path.cwd()
    if path is not None:
        p = Path(path)
        try:
            doc = json.loads(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")
        base_dir = p.resolve().parent
    if overrides:
        doc = _deep_update(doc, overrides)
    return build_config(doc, base_dir)


def _deep_update(doc: dict, overrides: dict) -> dict:
    out = copy.deepcopy(doc)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_update(out[key], value)
        else:
            out[key] = value
    return out
