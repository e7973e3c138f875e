"""YAML run configuration.

Every key is optional except ``economy.io_table``. Relative input paths
resolve against the directory of the config file; ``out`` resolves against
the working directory. Defaults reproduce the canonical
UK lockdown experiment settings (see ``Params`` and ``Calendar``).

Example::

    economy:
      io_table: io_table.csv          # annual flows unless annual: false
      ratings: ratings.csv            # or omit for all-critical
      inventory_targets: n.csv        # or inventory_survey: survey.csv
    attributes: attributes.csv
    supply_vectors: {s5: s5.csv, s6: s6.csv}
    scenario:
      supply: s5
      overrides: {D35: 0.7}
      calendar: {lockdown_end: 2020-05-13}
    kind: ihs2
    params: {tau: 10, rho: 0.99}
    horizon: null                      # default: calendar sim_start..sim_end
    out: out
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .dynamics import Params
from .errors import ConfigError
from .production import ProductionFunction
from .shocks import DEFAULT_CATEGORY_SHOCKS, Calendar, ScenarioSpec

TOP_KEYS = {
    "economy", "attributes", "supply_vectors", "scenario", "kind", "params", "horizon",
    "out", "seed", "empirical_panel", "metrics", "sweep", "single_shock", "scenarios",
}
ECONOMY_KEYS = {
    "io_table", "annual", "ratings", "criticality_matrix", "inventory_targets",
    "inventory_survey", "survey_crosswalk", "service_codes", "survey_decay", "rel_tol",
}
SCENARIO_KEYS = {
    "supply", "calendar", "trade_codes", "iota", "overrides", "consumption_shocks",
    "category_shocks", "persist_other_shocks", "unemployment_fear",
}
DEFAULT_METRIC_MONTHS = ("2020-04", "2020-05", "2020-06")


def _check_keys(section: str, data: Mapping, allowed: set) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {section}: {sorted(unknown)}")


@dataclass
class RunConfig:
    base_dir: Path
    economy: dict
    attributes: str | None = None
    supply_vectors: dict[str, str] = field(default_factory=dict)
    scenario: dict = field(default_factory=dict)
    kind: str = "ihs2"
    params: dict = field(default_factory=dict)
    horizon: int | None = None
    out: str = "out"
    seed: int = 0
    empirical_panel: str | None = None
    metrics: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    single_shock: dict = field(default_factory=dict)
    scenarios: dict = field(default_factory=dict)
    scenario_label: str | None = None

    # ------------------------------------------------------------ parsing
    @classmethod
    def from_mapping(cls, data: Mapping | None, base_dir=".") -> "RunConfig":
        data = dict(data or {})
        _check_keys("config", data, TOP_KEYS)
        economy = dict(data.get("economy") or {})
        _check_keys("economy", economy, ECONOMY_KEYS)
        if "io_table" not in economy:
            raise ConfigError("economy.io_table is required")
        scenario = dict(data.get("scenario") or {})
        _check_keys("scenario", scenario, SCENARIO_KEYS)
        cfg = cls(
            base_dir=Path(base_dir),
            economy=economy,
            attributes=data.get("attributes"),
            supply_vectors={str(k).lower(): v for k, v in (data.get("supply_vectors") or {}).items()},
            scenario=scenario,
            kind=str(data.get("kind", "ihs2")),
            params=dict(data.get("params") or {}),
            horizon=data.get("horizon"),
            out=str(data.get("out", "out")),
            seed=int(data.get("seed", 0)),
            empirical_panel=data.get("empirical_panel"),
            metrics=dict(data.get("metrics") or {}),
            sweep=dict(data.get("sweep") or {}),
            single_shock=dict(data.get("single_shock") or {}),
            scenarios={str(k): dict(v or {}) for k, v in (data.get("scenarios") or {}).items()},
        )
        for name, preset in cfg.scenarios.items():
            _check_keys(f"scenarios.{name}", preset, SCENARIO_KEYS)
        # fail early on bad values
        cfg.production_function()
        cfg.run_params()
        cfg.scenario_spec()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = yaml.safe_load(path.read_text(encoding="utf-8"))
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
        if data is not None and not isinstance(data, Mapping):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_mapping(data, path.parent)

    # ------------------------------------------------------------ derived
    def path(self, value) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p

    def out_dir(self) -> Path:
        """Output directory; relative paths resolve against the working directory."""
        return Path(self.out)

    def production_function(self) -> ProductionFunction:
        return ProductionFunction.parse(self.kind)

    def run_params(self) -> Params:
        try:
            return Params().with_overrides(**self.params)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def calendar(self) -> Calendar:
        return Calendar.from_mapping(self.scenario.get("calendar"))

    def scenario_spec(self) -> ScenarioSpec:
        s = self.scenario
        return ScenarioSpec(
            supply=s.get("supply", "s5"),
            calendar=self.calendar(),
            trade_codes=tuple(s.get("trade_codes", ("G45", "G47"))),
            iota=s.get("iota"),
            overrides={str(k): float(v) for k, v in (s.get("overrides") or {}).items()},
            consumption_shocks=bool(s.get("consumption_shocks", True)),
            category_shocks=dict(s.get("category_shocks", DEFAULT_CATEGORY_SHOCKS)),
            persist_other_shocks=bool(s.get("persist_other_shocks", True)),
            unemployment_fear=bool(s.get("unemployment_fear", True)),
        )

    def with_overrides(self, kind=None, scenario=None, out=None) -> "RunConfig":
        data = self.to_dict()
        if kind is not None:
            data["kind"] = kind
        if scenario is not None:
            if scenario in self.scenarios:
                data["scenario"] = dict(self.scenarios[scenario])
                if "calendar" in self.scenario:
                    data["scenario"].setdefault("calendar", self.scenario["calendar"])
            else:
                data["scenario"] = {**data["scenario"], "supply": scenario}
        if out is not None:
            data["out"] = str(Path(out).resolve())
        cfg = RunConfig.from_mapping(data, self.base_dir)
        cfg.scenario_label = scenario if scenario is not None else self.scenario_label
        return cfg

    def scenario_name(self) -> str:
        return self.scenario_label or self.scenario_spec().supply

    def input_paths(self) -> dict[str, Path]:
        found = {}
        for key in ("io_table", "ratings", "criticality_matrix", "inventory_targets", "inventory_survey", "survey_crosswalk"):
            if self.economy.get(key) is not None:
                found[f"economy.{key}"] = self.path(self.economy[key])
        if self.attributes is not None:
            found["attributes"] = self.path(self.attributes)
        for sid, p in sorted(self.supply_vectors.items()):
            found[f"supply_vectors.{sid}"] = self.path(p)
        if self.empirical_panel is not None:
            found["empirical_panel"] = self.path(self.empirical_panel)
        return found

    def missing_paths(self) -> list[str]:
        return [f"{k}: {p}" for k, p in self.input_paths().items() if not p.is_file()]

    def to_dict(self) -> dict[str, Any]:
        return {
            "economy": dict(self.economy),
            "attributes": self.attributes,
            "supply_vectors": dict(self.supply_vectors),
            "scenario": dict(self.scenario),
            "kind": self.kind,
            "params": dict(self.params),
            "horizon": self.horizon,
            "out": self.out,
            "seed": self.seed,
            "empirical_panel": self.empirical_panel,
            "metrics": dict(self.metrics),
            "sweep": dict(self.sweep),
            "single_shock": dict(self.single_shock),
            "scenarios": {k: dict(v) for k, v in self.scenarios.items()},
        }

    def resolved(self) -> dict[str, Any]:
        """Fully defaulted settings that determine a run's numbers."""
        return {
            "kind": self.production_function().value,
            "params": self.run_params().to_dict(),
            "scenario": _jsonable(vars(self.scenario_spec()) | {"calendar": self.calendar().to_dict()}),
            "horizon": self.horizon,
            "economy_options": {k: v for k, v in sorted(self.economy.items()) if k not in ECONOMY_PATH_KEYS},
            "inputs": {k: file_digest(p) for k, p in self.input_paths().items() if p.is_file()},
        }

    def config_hash(self) -> str:
        return canonical_hash(self.resolved())


ECONOMY_PATH_KEYS = {"io_table", "ratings", "criticality_matrix", "inventory_targets", "inventory_survey", "survey_crosswalk"}


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Path):
        return str(obj)
    if hasattr(obj, "isoformat"):
        return obj.isoformat()
    return obj


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, separators=(",", ":"))


def canonical_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
