"""Assemble economy, attributes and shock schedule from a run configuration."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .dynamics import Trajectory, run
from .economy import Economy, inventory_targets_from_survey, validate_economy
from .errors import ConfigError
from .shocks import IndustryAttributes, ShockSchedule, compile_schedule
from .tables import (
    read_attributes,
    read_criticality_matrix,
    read_crosswalk,
    read_inventory_survey,
    read_io_table,
    read_ratings,
    read_vector,
)

logger = logging.getLogger(__name__)

FIXED_VECTOR_SCENARIOS = ("s5", "s6", "custom")


@dataclass(frozen=True)
class Inputs:
    config: RunConfig
    economy: Economy
    attributes: IndustryAttributes
    schedule: ShockSchedule


def build_economy(cfg: RunConfig) -> Economy:
    e = cfg.economy
    raw = read_io_table(cfg.path(e["io_table"]), annual=bool(e.get("annual", True)))
    codes = raw["industry_codes"]
    crit = None
    if e.get("ratings") is not None and e.get("criticality_matrix") is not None:
        raise ConfigError("give either economy.ratings or economy.criticality_matrix, not both")
    if e.get("ratings") is not None:
        crit = read_ratings(cfg.path(e["ratings"]), codes)
    elif e.get("criticality_matrix") is not None:
        crit = read_criticality_matrix(cfg.path(e["criticality_matrix"]), codes)

    n = None
    if e.get("inventory_targets") is not None and e.get("inventory_survey") is not None:
        raise ConfigError("give either economy.inventory_targets or economy.inventory_survey, not both")
    if e.get("inventory_targets") is not None:
        n = read_vector(cfg.path(e["inventory_targets"]), codes, "n")
    elif e.get("inventory_survey") is not None:
        mapping = None
        if e.get("survey_crosswalk") is not None:
            mapping = dict(read_crosswalk(cfg.path(e["survey_crosswalk"])))
        n = inventory_targets_from_survey(
            read_inventory_survey(cfg.path(e["inventory_survey"])),
            codes,
            service_codes=e.get("service_codes", ()),
            decay=float(e.get("survey_decay", 0.95)),
            mapping=mapping,
        )
    return validate_economy(
        codes, raw["z0"], raw["c0"], raw["f0"], raw["l0"], raw["x0"],
        inventory_targets=n, criticality=crit, fd_categories=raw["fd_categories"],
        rel_tol=float(e.get("rel_tol", 1e-6)),
    )


def build_attributes(cfg: RunConfig, econ: Economy) -> IndustryAttributes:
    spec = cfg.scenario_spec()
    if cfg.attributes is None:
        if spec.supply != "none" or spec.consumption_shocks:
            raise ConfigError(f"scenario {spec.supply} needs an attributes file")
        z = np.zeros(econ.n_industries)
        return IndustryAttributes(econ.industry_codes, z, z, z, z)
    return read_attributes(cfg.path(cfg.attributes)).reorder(econ.industry_codes)


def build_schedule(cfg: RunConfig, econ: Economy, attrs: IndustryAttributes) -> ShockSchedule:
    spec = cfg.scenario_spec()
    vector = None
    if spec.supply in FIXED_VECTOR_SCENARIOS:
        path = cfg.supply_vectors.get(spec.supply)
        if path is None:
            raise ConfigError(f"scenario {spec.supply} needs supply_vectors.{spec.supply}")
        vector = read_vector(cfg.path(path), econ.industry_codes, "eps_s")
    return compile_schedule(spec, attrs, econ.fd_categories, cfg.horizon, vector)


def load_inputs(cfg: RunConfig) -> Inputs:
    econ = build_economy(cfg)
    attrs = build_attributes(cfg, econ)
    return Inputs(cfg, econ, attrs, build_schedule(cfg, econ, attrs))


def run_config(cfg: RunConfig) -> tuple[Inputs, Trajectory]:
    inputs = load_inputs(cfg)
    traj = run(inputs.economy, cfg.run_params(), inputs.schedule, cfg.production_function())
    return inputs, traj
